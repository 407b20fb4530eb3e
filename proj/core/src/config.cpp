#include "polyfsi/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace polyfsi {

using nlohmann::json;

namespace {

template <typename T>
void pick(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  RunConfig c;
  pick(j, "scenario", c.scenario);
  if (j.contains("geometry")) {
    const json& gg = j["geometry"];
    pick(gg, "disk_radius", c.disk_radius);
    pick(gg, "n_r", c.n_r);
    pick(gg, "n_theta", c.n_theta);
    pick(gg, "tube_radius", c.tube_radius);
    pick(gg, "sup_margin", c.sup_margin);
    pick(gg, "grad_bound", c.grad_bound);
  }
  if (j.contains("fene")) {
    const json& f = j["fene"];
    pick(f, "b", c.b);
    pick(f, "n_q_radial", c.n_q_radial);
    pick(f, "n_q_angular", c.n_q_angular);
    pick(f, "cutoff_level", c.cutoff_level);
  }
  if (j.contains("physics")) {
    const json& p = j["physics"];
    pick(p, "rho_s", c.rho_s);
    pick(p, "gamma", c.gamma);
    pick(p, "alpha", c.alpha);
    pick(p, "rho_f", c.rho_f);
    pick(p, "mu", c.mu);
    pick(p, "eps", c.eps);
    pick(p, "kappa", c.kappa);
  }
  pick(j, "drag_mode", c.drag_mode);
  if (j.contains("time")) {
    const json& t = j["time"];
    pick(t, "dt", c.dt);
    pick(t, "horizon_steps", c.horizon_steps);
    pick(t, "window_steps", c.window_steps);
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    pick(t, "fixed_point", c.fixed_point_tol);
    pick(t, "inner", c.inner_tol);
    pick(t, "degeneracy", c.degeneracy_tol);
  }
  if (j.contains("forcing")) {
    const json& f = j["forcing"];
    pick(f, "g_amplitude", c.g_amplitude);
    pick(f, "g_mode", c.g_mode);
    pick(f, "g_ramp", c.g_ramp);
    pick(f, "f_amplitude", c.f_amplitude);
    pick(f, "f0_perturbation", c.f0_perturbation);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    pick(o, "directory", c.out_dir);
    pick(o, "dump_every", c.dump_every);
    pick(o, "checkpoint_every", c.checkpoint_every);
  }
  pick(j, "seed", c.seed);
  c.validate();
  return c;
}

std::string RunConfig::to_canonical_json() const {
  json j;
  j["scenario"] = scenario;
  j["geometry"] = {{"disk_radius", disk_radius}, {"n_r", n_r},      {"n_theta", n_theta},
                   {"tube_radius", tube_radius}, {"sup_margin", sup_margin},
                   {"grad_bound", grad_bound}};
  j["fene"] = {{"b", b},
               {"n_q_radial", n_q_radial},
               {"n_q_angular", n_q_angular},
               {"cutoff_level", cutoff_level}};
  j["physics"] = {{"rho_s", rho_s}, {"gamma", gamma}, {"alpha", alpha}, {"rho_f", rho_f},
                  {"mu", mu},       {"eps", eps},     {"kappa", kappa}};
  j["drag_mode"] = drag_mode;
  j["time"] = {{"dt", dt}, {"horizon_steps", horizon_steps}, {"window_steps", window_steps}};
  j["tolerances"] = {{"fixed_point", fixed_point_tol},
                     {"inner", inner_tol},
                     {"degeneracy", degeneracy_tol}};
  j["forcing"] = {{"g_amplitude", g_amplitude}, {"g_mode", g_mode},
                  {"g_ramp", g_ramp},           {"f_amplitude", f_amplitude},
                  {"f0_perturbation", f0_perturbation}};
  j["seed"] = seed;
  return j.dump();  // sorted keys, deterministic
}

uint64_t RunConfig::hash() const {
  // FNV-1a over the canonical serialization
  const std::string s = to_canonical_json();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void RunConfig::validate() const {
  if (n_r < 4 || n_theta < 4 || n_q_radial < 4 || n_q_angular < 4)
    throw ConfigError("all grid sizes must be at least 4");
  if (dt <= 0.0) throw ConfigError("dt must be positive");
  if (b <= 2.0) throw ConfigError("extensibility parameter must satisfy b > 2");
  if (!(tube_radius > sup_margin && sup_margin > 0.0))
    throw ConfigError("geometry must satisfy L > alpha > 0");
  if (tube_radius >= disk_radius)
    throw ConfigError("tube radius must be smaller than the disk radius");
  if (drag_mode != "corotational" && drag_mode != "full_gradient")
    throw ConfigError("drag_mode must be corotational or full_gradient");
  if (horizon_steps < 1 || window_steps < 2)
    throw ConfigError("time horizon and window must be positive");
}

DragMode RunConfig::mode() const {
  return drag_mode == "corotational" ? DragMode::CoRotational : DragMode::FullGradient;
}

}  // namespace polyfsi
