// eitmodes: transverse modes, dispersion, mode decomposition and propagation
// checks for a probe field guided by a finite control beam.
//
// Exit codes: 0 success, 2 usage or file format, 3 physics precondition,
// 4 numerical failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eitmodes/eitmodes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<double> beam_radius;
  std::string out_dir = "out";
  std::optional<std::size_t> grid_points;
  std::optional<double> radius;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file (defaults: reference Gaussian medium)");
  cmd->add_option("--a", c.beam_radius, "override the Gaussian control-beam radius a, m");
  cmd->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--grid-points", c.grid_points, "radial grid points (default 4000)");
  cmd->add_option("--radius", c.radius, "radial truncation radius R, m (default: automatic)");
}

eit::MediumBeamConfig resolve_config(const Common& c) {
  auto cfg = c.config_path.empty() ? eit::MediumBeamConfig::defaults() : eit::load_config(c.config_path);
  if (c.beam_radius) {
    if (cfg.profile.kind() == eit::ControlProfile::Kind::Gaussian) {
      cfg = cfg.with_beam_radius(*c.beam_radius);
    } else {
      // a table profile keeps its shape; a only sets the length scale
      cfg.beam_radius_m = *c.beam_radius;
      cfg.validate();
    }
  }
  return cfg;
}

class Run {
 public:
  Run(std::string command, const Common& common, const eit::MediumBeamConfig& config)
      : dir_(common.out_dir), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    manifest_ = {{"tool", "eitmodes"},
                 {"version", eit::kVersion},
                 {"command", std::move(command)},
                 {"config", eit::config_to_json(config)},
                 {"parameters", json::object()},
                 {"outputs", json::array()}};
    if (!common.config_path.empty()) manifest_["config_file"] = common.config_path;
  }

  json& parameters() { return manifest_["parameters"]; }

  fs::path output(const fs::path& relative) {
    manifest_["outputs"].push_back(relative.generic_string());
    const auto p = dir_ / relative;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  void finish() {
    manifest_["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    eit::write_json(dir_ / "manifest.json", manifest_);
  }

 private:
  fs::path dir_;
  json manifest_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<eit::Channel> parse_channels(const std::vector<std::string>& specs) {
  std::vector<eit::Channel> out;
  for (const auto& s : specs) {
    if (s.empty()) continue;
    const auto colon = s.find(':');
    if (colon == std::string::npos) eit::fail(eit::ErrorCode::InvalidArgument, "channel '" + s + "' is not m:n");
    try {
      out.push_back({std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))});
    } catch (const std::exception&) {
      eit::fail(eit::ErrorCode::InvalidArgument, "channel '" + s + "' is not m:n");
    }
  }
  return out;
}

std::string hint(eit::ErrorCode code) {
  switch (code) {
    case eit::ErrorCode::UnstableStep: return "try a smaller --dz";
    case eit::ErrorCode::PowerLoss: return "enlarge the field extent, check the input is bound, or pass --allow-loss";
    case eit::ErrorCode::TruncationFailed: return "lower --nmax or set a larger --radius";
    case eit::ErrorCode::NotNegativeDetuning: return "the guiding well exists only for delta < 0";
    case eit::ErrorCode::OffAxisField: return "centre the beam or set center_x_m/center_y_m in the field header";
    default: return {};
  }
}

std::string joined_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// ---------------------------------------------------------------------------

struct ModesArgs {
  double delta = -1e6;
  std::vector<int> m_list{0};
  int n_max = 3;
};

void cmd_modes(const Common& common, const ModesArgs& args, const std::string& command) {
  const auto cfg = resolve_config(common);
  eit::SpectrumRequest req;
  req.m_list = args.m_list;
  req.n_max = args.n_max;
  req.delta = eit::Detuning{args.delta};
  req.n_points = common.grid_points;
  req.radius_m = common.radius;
  const auto spectrum = eit::solve_spectrum(req, cfg);

  Run run(command, common, cfg);
  run.parameters() = {{"delta_s", args.delta}, {"m", args.m_list}, {"n_max", args.n_max}};
  json modes = json::array(), dropped = json::array();
  for (const auto& mode : spectrum.modes) {
    eit::write_mode_csv(run.output(eit::mode_file_name(mode.m, mode.n)), mode);
    modes.push_back(eit::mode_summary(mode));
  }
  for (const auto& d : spectrum.dropped) {
    dropped.push_back({{"m", d.m}, {"n", d.n}, {"beta_m2", d.beta}, {"barrier_m2", d.barrier}});
  }
  eit::write_json(run.output("modes.json"), {{"delta_s", args.delta},
                                            {"well_floor_m2", eit::well_floor(cfg, req.delta)},
                                            {"harmonic_quantum_m2", eit::harmonic_quantum(cfg, req.delta)},
                                            {"modes", modes},
                                            {"dropped", dropped}});
  run.finish();
  for (const auto& mode : spectrum.modes) {
    std::cout << "m=" << mode.m << " n=" << mode.n << " beta=" << eit::format_double(mode.beta) << " m^-2\n";
  }
}

struct DispersionArgs {
  double delta_min = -1e7;
  double delta_max = -1e5;
  std::size_t delta_steps = 20;
  std::vector<std::string> channels;
  bool channels_given = false;
  std::vector<int> m_list{0};
  int n_max = 3;
  std::vector<double> a_scan;  // min, max, count
  double scan_delta = -1e6;
};

void cmd_dispersion(const Common& common, const DispersionArgs& args, const std::string& command) {
  std::vector<eit::Channel> channels;
  if (args.channels_given) {
    channels = parse_channels(args.channels);
  } else {
    for (int m : args.m_list) {
      for (int n = 1; n <= args.n_max; ++n) channels.push_back({m, n});
    }
  }
  eit::require(!channels.empty(), eit::ErrorCode::InvalidArgument, "channel list is empty");
  const auto cfg = resolve_config(common);
  const auto deltas = eit::detuning_grid(args.delta_min, args.delta_max, args.delta_steps);
  eit::SweepOptions opt;
  opt.n_points = common.grid_points;
  opt.radius_m = common.radius;
  const auto table = eit::sweep(channels, deltas, cfg, opt);

  std::optional<std::vector<eit::BeamSizePoint>> scan;
  if (!args.a_scan.empty()) {
    eit::require(args.a_scan.size() == 3 && args.a_scan[0] > 0 && args.a_scan[1] > args.a_scan[0] &&
                     args.a_scan[2] >= 2,
                 eit::ErrorCode::InvalidArgument, "--a-scan wants MIN,MAX,COUNT with 0 < MIN < MAX, COUNT >= 2");
    const auto count = static_cast<std::size_t>(args.a_scan[2]);
    std::vector<double> a_grid(count);
    for (std::size_t i = 0; i < count; ++i) {
      a_grid[i] = args.a_scan[0] * std::pow(args.a_scan[1] / args.a_scan[0],
                                            static_cast<double>(i) / static_cast<double>(count - 1));
    }
    scan = eit::beam_size_asymptotics(channels.front(), eit::Detuning{args.scan_delta}, a_grid, cfg, opt);
  }

  Run run(command, common, cfg);
  json chans = json::array();
  for (const auto& c : channels) chans.push_back({c.m, c.n});
  run.parameters() = {{"delta_min_s", args.delta_min},
                      {"delta_max_s", args.delta_max},
                      {"delta_steps", args.delta_steps},
                      {"channels", chans},
                      {"transverse_free_vg_mps", eit::transverse_free_vg(cfg)}};
  eit::write_dispersion_csv(run.output("dispersion.csv"), table);
  if (scan) {
    run.parameters()["a_scan"] = args.a_scan;
    run.parameters()["a_scan_delta_s"] = args.scan_delta;
    eit::write_beam_size_csv(run.output("beam_size.csv"), channels.front(), *scan, eit::transverse_free_vg(cfg));
  }
  run.finish();
  std::cout << table.rows.size() << " rows; transverse-free V_g = "
            << eit::format_double(eit::transverse_free_vg(cfg)) << " m/s\n";
}

struct DecomposeArgs {
  std::string field;
  double delta = -1e6;
  int m_max = 2;
  int n_max = 3;
  std::vector<double> z_list;
};

void cmd_decompose(const Common& common, const DecomposeArgs& args, const std::string& command) {
  const auto cfg = resolve_config(common);
  const auto field = eit::read_field(args.field);
  eit::DecomposeOptions opt{common.grid_points, common.radius};
  const auto ex = eit::decompose(field, cfg, eit::Detuning{args.delta}, args.m_max, args.n_max, opt);

  Run run(command, common, cfg);
  run.parameters() = {{"field", args.field}, {"delta_s", args.delta}, {"m_max", args.m_max},
                      {"n_max", args.n_max}, {"z_m", args.z_list}};
  eit::write_json(run.output("expansion.json"), eit::expansion_to_json(ex));
  for (std::size_t i = 0; i < args.z_list.size(); ++i) {
    const auto stem = run.output("resynth_" + std::to_string(i) + ".bin");
    run.output("resynth_" + std::to_string(i) + ".json");
    eit::write_field(stem, eit::synthesize(ex, args.z_list[i]));
  }
  run.finish();
  std::cout << "captured " << eit::format_double(1.0 - ex.residual_power_fraction) << " of the input power in "
            << ex.terms.size() << " modes\n";
}

struct PropagateArgs {
  std::string field;
  double delta = -1e6;
  eit::PlanOptions plan;
  bool allow_loss = false;
};

void cmd_propagate(const Common& common, PropagateArgs args, const std::string& command) {
  const auto cfg = resolve_config(common);
  const auto field = eit::read_field(args.field);
  args.plan.expect_bound = !args.allow_loss;
  const auto plan = eit::make_plan(field, cfg, eit::Detuning{args.delta}, args.plan);
  const auto traj = eit::propagate(field, plan);

  Run run(command, common, cfg);
  run.parameters() = {{"field", args.field},
                      {"delta_s", args.delta},
                      {"dz_m", plan.dz_m},
                      {"steps", plan.steps},
                      {"z_total_m", args.plan.z_total_m},
                      {"record_every", args.plan.record_every},
                      {"snapshot_every", args.plan.snapshot_every},
                      {"absorber_fraction", args.plan.absorber_fraction},
                      {"absorber_strength_per_m", args.plan.absorber_strength},
                      {"grid_n", field.n},
                      {"extent_m", field.extent_m}};
  eit::write_diagnostics_csv(run.output("diagnostics.csv"), traj.diagnostics);
  json snaps = json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const std::string stem = "fields/z_" + std::to_string(i);
    eit::write_field(run.output(stem + ".bin"), traj.snapshots[i].field);
    run.output(stem + ".json");
    snaps.push_back({{"index", i}, {"z_m", traj.snapshots[i].z_m}});
  }
  double min_overlap = 1.0, drift = 0.0;
  const double r0 = traj.diagnostics.front().rms_radius_m;
  for (const auto& d : traj.diagnostics) {
    min_overlap = std::min(min_overlap, d.overlap);
    drift = std::max(drift, std::abs(d.rms_radius_m / r0 - 1.0));
  }
  const double slope = traj.diagnostics.size() >= 2 ? eit::phase_slope(traj.diagnostics) : 0.0;
  eit::write_json(run.output("summary.json"), {{"min_overlap", min_overlap},
                                              {"max_rms_radius_drift", drift},
                                              {"axis_phase_slope_per_m", slope},
                                              {"final_power_fraction", traj.diagnostics.back().power /
                                                                           traj.diagnostics.front().power},
                                              {"snapshots", snaps}});
  run.finish();
  std::cout << "min overlap " << eit::format_double(min_overlap) << ", rms drift " << eit::format_double(drift)
            << ", on-axis phase slope " << eit::format_double(slope) << " m^-1\n";
}

struct FieldArgs {
  std::string kind = "mode";
  int m = 0;
  int n = 1;
  double waist = 25e-6;
  double delta = -1e6;
  std::size_t grid = 512;
  double extent = 150e-6;
  std::string name = "field";
};

void cmd_field(const Common& common, const FieldArgs& args, const std::string& command) {
  const auto cfg = resolve_config(common);
  eit::Field2D field;
  if (args.kind == "mode") {
    eit::SpectrumRequest req;
    req.m_list = {args.m};
    req.n_max = args.n;
    req.delta = eit::Detuning{args.delta};
    req.n_points = common.grid_points;
    req.radius_m = common.radius;
    const auto spectrum = eit::solve_spectrum(req, cfg);
    const auto it = std::find_if(spectrum.modes.begin(), spectrum.modes.end(),
                                 [&](const eit::TransverseMode& mm) { return mm.n == args.n; });
    eit::require(it != spectrum.modes.end(), eit::ErrorCode::TruncationFailed, "requested mode is not bound");
    field = eit::Field2D::from_function(args.grid, args.extent, [&](double x, double y) {
      return it->value_at(std::hypot(x, y)) * std::polar(1.0, args.m * std::atan2(y, x));
    });
  } else if (args.kind == "gaussian") {
    eit::require(args.waist > 0.0, eit::ErrorCode::InvalidArgument, "--waist must be > 0");
    field = eit::Field2D::from_function(args.grid, args.extent, [&](double x, double y) {
      return eit::Complex(std::exp(-(x * x + y * y) / (args.waist * args.waist)), 0.0) *
             std::polar(1.0, args.m * std::atan2(y, x));
    });
  } else {
    eit::fail(eit::ErrorCode::InvalidArgument, "--kind must be 'mode' or 'gaussian'");
  }
  Run run(command, common, cfg);
  run.parameters() = {{"kind", args.kind}, {"m", args.m},       {"n", args.n},
                      {"waist_m", args.waist}, {"delta_s", args.delta}, {"grid", args.grid},
                      {"extent_m", args.extent}};
  eit::write_field(run.output(args.name + ".bin"), field);
  run.output(args.name + ".json");
  run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transverse modes of a probe guided by a finite control beam"};
  app.set_version_flag("--version", eit::kVersion);
  app.require_subcommand(1);

  Common common;
  ModesArgs modes;
  auto* c_modes = app.add_subcommand("modes", "radial eigenmodes psi_mn and propagation constants beta_mn");
  add_common(c_modes, common);
  c_modes->add_option("--delta", modes.delta, "two-photon detuning, s^-1 (< 0)")->capture_default_str();
  c_modes->add_option("--m", modes.m_list, "azimuthal indices")->delimiter(',')->capture_default_str();
  c_modes->add_option("--nmax", modes.n_max, "radial modes per m")->capture_default_str();

  DispersionArgs disp;
  auto* c_disp = app.add_subcommand("dispersion", "beta_mn(delta) and group velocities over a detuning sweep");
  add_common(c_disp, common);
  c_disp->add_option("--delta-min", disp.delta_min, "s^-1")->capture_default_str();
  c_disp->add_option("--delta-max", disp.delta_max, "s^-1")->capture_default_str();
  c_disp->add_option("--delta-steps", disp.delta_steps, "log-spaced detunings")->capture_default_str();
  auto* chan_opt = c_disp->add_option("--channels", disp.channels, "m:n pairs, comma separated")->delimiter(',');
  c_disp->add_option("--m", disp.m_list, "azimuthal indices when --channels is absent")
      ->delimiter(',')
      ->capture_default_str();
  c_disp->add_option("--nmax", disp.n_max, "radial modes per m when --channels is absent")->capture_default_str();
  c_disp->add_option("--a-scan", disp.a_scan, "MIN,MAX,COUNT: V_g of the first channel versus beam radius")
      ->delimiter(',')
      ->expected(3);
  c_disp->add_option("--a-scan-delta", disp.scan_delta, "detuning for --a-scan, s^-1")->capture_default_str();

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "expand a field file in the bound modes");
  add_common(c_dec, common);
  c_dec->add_option("--field", dec.field, "field file (.bin with .json header)")->required();
  c_dec->add_option("--delta", dec.delta, "s^-1")->capture_default_str();
  c_dec->add_option("--mmax", dec.m_max, "largest |m|")->capture_default_str();
  c_dec->add_option("--nmax", dec.n_max, "radial modes per m")->capture_default_str();
  c_dec->add_option("--z", dec.z_list, "resynthesize at these distances, m")->delimiter(',');

  PropagateArgs prop;
  auto* c_prop = app.add_subcommand("propagate", "split-step propagation of a field file");
  add_common(c_prop, common);
  c_prop->add_option("--field", prop.field, "field file (.bin with .json header)")->required();
  c_prop->add_option("--delta", prop.delta, "s^-1")->capture_default_str();
  c_prop->add_option("--dz", prop.plan.dz_m, "step, m")->capture_default_str();
  c_prop->add_option("--z-total", prop.plan.z_total_m, "distance, m")->capture_default_str();
  c_prop->add_option("--record-every", prop.plan.record_every, "steps between diagnostics")->capture_default_str();
  c_prop->add_option("--snapshot-every", prop.plan.snapshot_every, "steps between stored fields (0: ends only)")
      ->capture_default_str();
  c_prop->add_option("--absorber-width", prop.plan.absorber_fraction, "layer width / half-extent")
      ->capture_default_str();
  c_prop->add_option("--absorber-strength", prop.plan.absorber_strength, "peak damping rate, m^-1")
      ->capture_default_str();
  c_prop->add_flag("--allow-loss", prop.allow_loss, "do not fail when the absorber removes > 1% of the power");

  FieldArgs fld;
  auto* c_field = app.add_subcommand("field", "write an input field file (eigenmode or Gaussian)");
  add_common(c_field, common);
  c_field->add_option("--kind", fld.kind, "mode | gaussian")->capture_default_str();
  c_field->add_option("--m", fld.m, "azimuthal index (vortex phase for a Gaussian)")->capture_default_str();
  c_field->add_option("--n", fld.n, "radial index of the mode")->capture_default_str();
  c_field->add_option("--waist", fld.waist, "Gaussian waist w in exp(-r^2/w^2), m")->capture_default_str();
  c_field->add_option("--delta", fld.delta, "s^-1 (mode)")->capture_default_str();
  c_field->add_option("--grid", fld.grid, "grid points per side (power of two)")->capture_default_str();
  c_field->add_option("--extent", fld.extent, "grid half-width, m")->capture_default_str();
  c_field->add_option("--name", fld.name, "output file stem")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = joined_argv(argc, argv);
  try {
    if (*c_modes) cmd_modes(common, modes, command);
    if (*c_disp) {
      disp.channels_given = chan_opt->count() > 0;
      cmd_dispersion(common, disp, command);
    }
    if (*c_dec) cmd_decompose(common, dec, command);
    if (*c_prop) cmd_propagate(common, prop, command);
    if (*c_field) cmd_field(common, fld, command);
  } catch (const eit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto h = hint(e.code()); !h.empty()) std::cerr << "hint: " << h << '\n';
    return eit::exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: Format: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: Format: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
