#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyfsi/harness.hpp"

using namespace polyfsi;

namespace {

std::string small_config(const std::string& scenario, const std::string& outdir,
                         int horizon = 16, const std::string& extra_forcing = "") {
  std::ostringstream ss;
  ss << R"({
    "scenario": ")" << scenario << R"(",
    "geometry": {"n_r": 12, "n_theta": 24, "tube_radius": 0.5, "sup_margin": 0.15},
    "fene": {"b": 4.0, "n_q_radial": 6, "n_q_angular": 8},
    "time": {"dt": 1e-3, "horizon_steps": )" << horizon << R"(, "window_steps": 8},
    "forcing": {)" << extra_forcing << R"(},
    "output": {"directory": ")" << outdir << R"("},
    "seed": 42
  })";
  return ss.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing, validation and hashing") {
  const RunConfig c = RunConfig::from_json_text(small_config("zero_coupled", "/tmp/x"));
  CHECK(c.n_r == 12);
  CHECK(c.n_theta == 24);
  CHECK(c.dt == 1e-3);
  CHECK(c.seed == 42);
  // hash is stable and sensitive
  RunConfig c2 = c;
  CHECK(c.hash() == c2.hash());
  c2.dt = 2e-3;
  CHECK(c.hash() != c2.hash());

  SUBCASE("invalid settings are rejected") {
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"fene": {"b": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"geometry": {"n_r": 2}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"time": {"dt": -1.0}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"drag_mode": "upwind"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("{nonsense"), ConfigError);
  }
}

TEST_CASE("zero coupled scenario reports quiet fields and exit zero") {
  const std::string dir = "/tmp/polyfsi_test_zero";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = RunConfig::from_json_text(small_config("zero_coupled", dir));
  const RunReport rep = run(cfg);
  CHECK(rep.exit_code == 0);
  const std::string summary = slurp(rep.summary_path);
  CHECK(summary.find("\"exit\": \"ok\"") != std::string::npos);
  CHECK(summary.find("\"mass_drift_rel\": 0.0") != std::string::npos);
  // csv rows exist and are all-zero in the field columns
  std::ifstream csv(rep.csv_path);
  std::string line;
  std::getline(csv, line);
  CHECK(line == CsvWriter::diag_header());
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 16);
}

TEST_CASE("identical config and seed reproduce byte-identical diagnostics") {
  const std::string dir_a = "/tmp/polyfsi_det_a", dir_b = "/tmp/polyfsi_det_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  const std::string forcing = R"("g_amplitude": 0.05, "g_mode": 2, "g_ramp": 0.005)";
  RunConfig ca = RunConfig::from_json_text(small_config("coupled_global", dir_a, 16, forcing));
  RunConfig cb = RunConfig::from_json_text(small_config("coupled_global", dir_b, 16, forcing));
  const RunReport ra = run(ca);
  const RunReport rb = run(cb);
  REQUIRE(ra.exit_code == 0);
  REQUIRE(rb.exit_code == 0);
  CHECK(slurp(ra.csv_path) == slurp(rb.csv_path));
}

TEST_CASE("checkpoint round trip is bit exact") {
  DiskGrid g(8, 16, 1.0);
  ReferenceDomain dom(1.0, 16, 0.5, 0.15, 2.0);
  FeneModel model(4.0, 4, 6);
  CoupledState s;
  s.structure = StructureState(16, 0.375);
  for (int j = 0; j < 16; ++j) {
    s.structure.eta[j] = std::sin(j * 0.7) * 1e-3;
    s.structure.eta_dot[j] = std::cos(j * 1.3) * 1e-4;
  }
  s.flow = FlowState(g, 16);
  for (int c = 0; c < g.size(); ++c) {
    s.flow.u[c] = Vec2{std::sin(c * 0.1), std::cos(c * 0.2)};
    s.flow.p[c] = std::tan(0.3 + 1e-3 * c);
  }
  s.dist = DistributionState(g, model);
  for (auto& v : s.dist.f) v = 1.0 + 1e-6 * (&v - s.dist.f.data());
  const HanzawaMap map = build_hanzawa(dom, g, s.structure);
  s.dist.seed_geometry(g, map);
  s.t0 = 0.125;
  s.step_index = 7;
  s.y_distances = {0.5, 0.25, 0.125};

  const std::string path = "/tmp/polyfsi_ckpt.bin";
  save_checkpoint(path, s, 12345u);
  const CoupledState r = load_checkpoint(path, 12345u);
  CHECK(r.t0 == s.t0);
  CHECK(r.step_index == s.step_index);
  CHECK(r.structure.eta == s.structure.eta);
  CHECK(r.structure.eta_dot == s.structure.eta_dot);
  CHECK(r.flow.p.v == s.flow.p.v);
  CHECK(r.dist.f == s.dist.f);
  CHECK(r.dist.geom_w == s.dist.geom_w);
  CHECK(r.y_distances == s.y_distances);
  for (int c = 0; c < g.size(); ++c) {
    CHECK(r.flow.u[c].x == s.flow.u[c].x);
    CHECK(r.flow.u[c].y == s.flow.u[c].y);
  }
  CHECK_THROWS_AS(load_checkpoint(path, 999u), ConfigError);
}

TEST_CASE("resumed run reproduces the unbroken diagnostics tail") {
  const std::string dir_full = "/tmp/polyfsi_res_full", dir_res = "/tmp/polyfsi_res_resume";
  for (const auto& d : {dir_full, dir_res}) std::filesystem::remove_all(d);
  const std::string forcing = R"("g_amplitude": 0.05, "g_mode": 2, "g_ramp": 0.005)";

  RunConfig cfull = RunConfig::from_json_text(small_config("coupled_global", dir_full, 24, forcing));
  cfull.checkpoint_every = 1;
  const RunReport rfull = run(cfull);
  REQUIRE(rfull.exit_code == 0);

  // resume from the checkpoint written after the first window
  RunConfig cres = cfull;
  cres.out_dir = dir_res;
  const std::string ckpt = dir_full + "/checkpoint_000008.bin";
  REQUIRE(std::filesystem::exists(ckpt));
  const RunReport rres = run(cres, ckpt);
  REQUIRE(rres.exit_code == 0);

  // the resumed CSV must equal the full CSV minus the first rows
  std::ifstream fa(rfull.csv_path), fb(rres.csv_path);
  std::vector<std::string> la, lb;
  std::string line;
  while (std::getline(fa, line)) la.push_back(line);
  while (std::getline(fb, line)) lb.push_back(line);
  REQUIRE(lb.size() >= 2);
  const size_t tail = lb.size() - 1;  // minus header
  REQUIRE(la.size() - 1 >= tail);
  for (size_t k = 0; k < tail; ++k)
    CHECK(lb[1 + k] == la[la.size() - tail + k]);
}

TEST_CASE("dataset validation") {
  SUBCASE("zero dataset passes with zero residuals") {
    const RunConfig cfg = RunConfig::from_json_text(small_config("zero_coupled", "/tmp/v0"));
    const DatasetValidation v = validate_dataset(cfg);
    CHECK(v.pass);
    CHECK(v.trace_residual == 0.0);
    CHECK(v.divergence_residual <= 1e-12);
    CHECK(v.compatibility_sup <= 1e-10);
    CHECK(v.ftilde0_finite);
  }
  SUBCASE("relaxation dataset stays admissible") {
    const RunConfig cfg = RunConfig::from_json_text(
        small_config("relaxation", "/tmp/v1", 16, R"("g_amplitude": 0.05, "g_ramp": 0.01)"));
    const DatasetValidation v = validate_dataset(cfg);
    CHECK(v.pass);
    CHECK(v.eta0_admissible);
    CHECK(v.ftilde0_finite);
  }
}
