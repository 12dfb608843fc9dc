#pragma once

// Config ingestion and the text outputs of the command-line tool.
//
// Config file (JSON, every key optional, defaults are the Gaussian reference
// medium):
//   { "omega0_s": 1e8, "beam_radius_m": 5e-5, "g2N_s2": 1e22, "lambda0_m": 7.8e-7,
//     "profile": { "kind": "gaussian" | "table", "table_path": "omega.csv" } }
// A table path is resolved relative to the config file. The table is a CSV with
// header `r_m,omega_s`.
//
// Floats in CSV and JSON outputs use 17 significant digits so that reruns
// are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eitmodes/bpm.hpp"
#include "eitmodes/decomposition.hpp"
#include "eitmodes/dispersion.hpp"
#include "eitmodes/error.hpp"
#include "eitmodes/physics.hpp"
#include "eitmodes/radial_solver.hpp"

namespace eit {

inline constexpr const char* kVersion = "0.1.0";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (trim(cell.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Format, "not a number: '" + cell + "' (" + where + ")");
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Format, "cannot write " + path.string());
  return os;
}

}  // namespace detail

/// Two-column CSV `r_m,omega_s` with a header row.
inline ControlProfile load_profile_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::Format, "cannot open profile table " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::Format, "empty profile table " + path.string());
  require(detail::trim(line) == "r_m,omega_s", ErrorCode::Format,
          "profile table header must be 'r_m,omega_s' in " + path.string());
  std::vector<double> r, omega;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(row);
    require(comma != std::string::npos, ErrorCode::Format, "expected two columns at " + where);
    r.push_back(detail::parse_number(line.substr(0, comma), where));
    omega.push_back(detail::parse_number(line.substr(comma + 1), where));
  }
  try {
    return ControlProfile::table(std::move(r), std::move(omega));
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string(e.what()) + " in " + path.string());
  }
}

inline MediumBeamConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  require(j.is_object(), ErrorCode::Format, "config must be a JSON object");
  static const std::vector<std::string> known{"omega0_s", "beam_radius_m", "g2N_s2", "lambda0_m", "profile"};
  for (const auto& [key, _] : j.items()) {
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorCode::Format,
            "unknown config key '" + key + "'");
  }
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    require(j[key].is_number(), ErrorCode::Format, std::string("config key '") + key + "' must be a number");
    return j[key].get<double>();
  };
  const auto d = MediumBeamConfig::defaults();
  const double a = number("beam_radius_m", d.beam_radius_m);
  const double g2n = number("g2N_s2", d.g2N_s2);
  const double lambda = number("lambda0_m", d.lambda0_m);

  std::string kind = "gaussian";
  std::filesystem::path table_path;
  if (j.contains("profile")) {
    const auto& p = j["profile"];
    require(p.is_object(), ErrorCode::Format, "config 'profile' must be an object");
    kind = p.value("kind", std::string("gaussian"));
    if (p.contains("table_path")) table_path = p["table_path"].get<std::string>();
  }
  if (kind == "gaussian") {
    return MediumBeamConfig::gaussian(number("omega0_s", d.omega0_s), a, g2n, lambda);
  }
  require(kind == "table", ErrorCode::Format, "profile.kind must be 'gaussian' or 'table', got '" + kind + "'");
  require(!table_path.empty(), ErrorCode::Format, "profile.kind 'table' needs profile.table_path");
  if (table_path.is_relative()) table_path = base_dir / table_path;
  auto profile = load_profile_table(table_path);
  MediumBeamConfig c{number("omega0_s", profile.peak()), a, g2n, lambda, profile};
  c.validate();
  return c;
}

inline MediumBeamConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::Format, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

/// Resolved config as written into manifests.
inline nlohmann::json config_to_json(const MediumBeamConfig& c) {
  nlohmann::json j{{"omega0_s", c.omega0_s},
                   {"beam_radius_m", c.beam_radius_m},
                   {"g2N_s2", c.g2N_s2},
                   {"lambda0_m", c.lambda0_m},
                   {"omega_floor_fraction", c.omega_floor_fraction},
                   {"fingerprint", config_fingerprint(c)}};
  if (c.profile.kind() == ControlProfile::Kind::Gaussian) {
    j["profile"] = {{"kind", "gaussian"}};
  } else {
    j["profile"] = {{"kind", "table"}, {"r_m", c.profile.table_radii()}, {"omega_s", c.profile.table_values()}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Outputs

/// `mode_m<m>_n<n>.csv`
inline std::string mode_file_name(int m, int n) {
  return "mode_m" + std::to_string(m) + "_n" + std::to_string(n) + ".csv";
}

inline void write_mode_csv(const std::filesystem::path& path, const TransverseMode& mode) {
  auto os = detail::open_output(path);
  os << "r_m,psi_per_m\n";
  for (std::size_t j = 0; j < mode.psi.size(); ++j) {
    os << format_double(mode.grid.node(j)) << ',' << format_double(mode.psi[j]) << '\n';
  }
}

inline nlohmann::json mode_summary(const TransverseMode& mode) {
  return {{"m", mode.m},          {"n", mode.n},
          {"nodes", mode.nodes},  {"beta_m2", mode.beta},
          {"delta_s", mode.delta.value()},
          {"grid_points", mode.grid.n_points},
          {"radius_m", mode.grid.radius()}};
}

inline void write_dispersion_csv(const std::filesystem::path& path, const DispersionTable& table) {
  auto os = detail::open_output(path);
  os << "delta_s,m,n,beta_m2,slope_hf,slope_fd,vg_mps,vg_over_c\n";
  for (const auto& r : table.rows) {
    os << format_double(r.delta_s) << ',' << r.channel.m << ',' << r.channel.n << ',' << format_double(r.beta_m2)
       << ',' << format_double(r.slope_hf) << ',' << format_double(r.slope_fd) << ',' << format_double(r.vg_mps)
       << ',' << format_double(r.vg_mps / kSpeedOfLight) << '\n';
  }
}

inline void write_beam_size_csv(const std::filesystem::path& path, const Channel& channel,
                                std::span<const BeamSizePoint> points, double vg_free) {
  auto os = detail::open_output(path);
  os << "beam_radius_m,m,n,vg_mps,vg_over_c,vg_over_free\n";
  for (const auto& p : points) {
    os << format_double(p.beam_radius_m) << ',' << channel.m << ',' << channel.n << ',' << format_double(p.vg_mps)
       << ',' << format_double(p.vg_mps / kSpeedOfLight) << ',' << format_double(p.vg_mps / vg_free) << '\n';
  }
}

inline nlohmann::json expansion_to_json(const ModeExpansion& ex) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : ex.terms) {
    terms.push_back({{"m", t.m},
                     {"n", t.n},
                     {"re", t.coefficient.real()},
                     {"im", t.coefficient.imag()},
                     {"power", std::norm(t.coefficient)},
                     {"power_fraction", std::norm(t.coefficient) / ex.input_power}});
  }
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& b : ex.basis) modes.push_back(mode_summary(b));
  return {{"delta_s", ex.delta.value()},
          {"k0_per_m", ex.k0},
          {"config_fingerprint", ex.config_hash},
          {"input_power", ex.input_power},
          {"captured_power", ex.captured_power()},
          {"residual_power_fraction", ex.residual_power_fraction},
          {"power_convention", "(1/2pi) integral |E|^2 dx dy; coefficient = integral r f_m psi_mn dr"},
          {"terms", terms},
          {"basis", modes}};
}

inline void write_diagnostics_csv(const std::filesystem::path& path, std::span<const Diagnostics> rows) {
  auto os = detail::open_output(path);
  os << "z_m,power,rms_radius_m,overlap,phase_rad,overlap_phase_rad\n";
  for (const auto& d : rows) {
    os << format_double(d.z_m) << ',' << format_double(d.power) << ',' << format_double(d.rms_radius_m) << ','
       << format_double(d.overlap) << ',' << format_double(d.phase_rad) << ',' << format_double(d.overlap_phase_rad)
       << '\n';
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = detail::open_output(path);
  os << j.dump(2) << '\n';
}

}  // namespace eit
