#pragma once

#include <cstdint>
#include <string>

#include "polyfsi/fokker_planck.hpp"

namespace polyfsi {

struct RunConfig {
  std::string scenario = "coupled_global";

  // geometry
  double disk_radius = 1.0;
  int n_r = 24;
  int n_theta = 48;
  double tube_radius = 0.5;
  double sup_margin = 0.15;
  double grad_bound = 2.0;

  // configuration ball
  double b = 4.0;
  int n_q_radial = 16;
  int n_q_angular = 24;
  int cutoff_level = 4;

  // physics (defaults all one)
  double rho_s = 1.0, gamma = 1.0, alpha = 1.0, rho_f = 1.0, mu = 1.0, eps = 1.0,
         kappa = 1.0;

  std::string drag_mode = "corotational";  // or "full_gradient"

  // time
  double dt = 1e-3;
  int horizon_steps = 500;
  int window_steps = 16;

  // tolerances
  double fixed_point_tol = 1e-8;
  double inner_tol = 1e-8;
  double degeneracy_tol = 1e-3;

  // forcing knobs used by the scenario library
  double g_amplitude = 0.0;
  int g_mode = 2;
  double g_ramp = 1.0;
  double f_amplitude = 0.0;
  double f0_perturbation = 0.0;

  // output
  std::string out_dir = "out";
  int dump_every = 0;        // 0 disables field dumps
  int checkpoint_every = 0;  // in windows; 0 disables

  uint64_t seed = 1;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_canonical_json() const;
  uint64_t hash() const;
  void validate() const;

  DragMode mode() const;
};

}  // namespace polyfsi
