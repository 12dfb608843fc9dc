#include <catch_amalgamated.hpp>

#include "eitmodes/io.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

using namespace eit;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "eitmodes_io_tests";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::optional<ErrorCode> code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("seventeen significant digits", "[io]") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("empty config gives the reference medium", "[io][config]") {
  const auto c = config_from_json(nlohmann::json::object(), ".");
  const auto d = MediumBeamConfig::defaults();
  CHECK(config_fingerprint(c) == config_fingerprint(d));
  const auto wide = config_from_json({{"beam_radius_m", 1e-4}}, ".");
  CHECK(wide.beam_radius_m == 1e-4);
  CHECK(wide.profile(1e-4) == Catch::Approx(1e8 * std::exp(-0.5)));
}

TEST_CASE("table profile relative to the config file", "[io][config]") {
  const auto dir = scratch();
  write(dir / "omega.csv", "r_m,omega_s\n0,1e8\n1e-4,5e7\n2e-4,1e7\n3e-4,1e6\n");
  write(dir / "cfg.json", R"({"profile": {"kind": "table", "table_path": "omega.csv"}, "lambda0_m": 7.95e-7})");
  const auto c = load_config(dir / "cfg.json");
  CHECK(c.profile.kind() == ControlProfile::Kind::Table);
  CHECK(c.omega0_s == 1e8);
  CHECK(c.lambda0_m == 7.95e-7);
  CHECK(c.profile(5e-4) == 1e6);
  const auto j = config_to_json(c);
  CHECK(j["profile"]["r_m"].size() == 4);
}

TEST_CASE("config and table errors are format errors", "[io][config]") {
  const auto dir = scratch();
  write(dir / "syntax.json", "{ not json");
  CHECK(code_of([&] { load_config(dir / "syntax.json"); }) == ErrorCode::Format);
  CHECK(code_of([&] { load_config(dir / "absent.json"); }) == ErrorCode::Format);
  CHECK(code_of([&] { config_from_json({{"omega0", 1e8}}, dir); }) == ErrorCode::Format);
  CHECK(code_of([&] { config_from_json({{"g2N_s2", "big"}}, dir); }) == ErrorCode::Format);
  CHECK(code_of([&] { config_from_json({{"profile", {{"kind", "bessel"}}}}, dir); }) == ErrorCode::Format);
  CHECK(code_of([&] { config_from_json({{"profile", {{"kind", "table"}}}}, dir); }) == ErrorCode::Format);

  write(dir / "header.csv", "r,omega\n0,1\n1,1\n2,1\n3,1\n");
  CHECK(code_of([&] { load_profile_table(dir / "header.csv"); }) == ErrorCode::Format);
  write(dir / "short.csv", "r_m,omega_s\n0,1\n1,1\n");
  CHECK(code_of([&] { load_profile_table(dir / "short.csv"); }) == ErrorCode::Format);
  write(dir / "text.csv", "r_m,omega_s\n0,1\n1,x\n2,1\n3,1\n");
  CHECK(code_of([&] { load_profile_table(dir / "text.csv"); }) == ErrorCode::Format);
  write(dir / "offset.csv", "r_m,omega_s\n1e-6,1\n1,1\n2,1\n3,1\n");
  CHECK(code_of([&] { load_profile_table(dir / "offset.csv"); }) == ErrorCode::Format);
}

TEST_CASE("dispersion CSV layout", "[io]") {
  DispersionTable t;
  t.channels = {{0, 1}};
  t.deltas = {-1e6};
  t.rows = {{-1e6, {0, 1}, 6e10, -1e-2, -1e-2, 280.0}};
  const auto path = scratch() / "d.csv";
  write_dispersion_csv(path, t);
  std::ifstream is(path);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "delta_s,m,n,beta_m2,slope_hf,slope_fd,vg_mps,vg_over_c");
  CHECK(row.rfind("-1000000,0,1,60000000000,", 0) == 0);
}
