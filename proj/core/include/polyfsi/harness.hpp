#pragma once

#include <optional>
#include <string>

#include "polyfsi/io.hpp"
#include "polyfsi/scenarios.hpp"

namespace polyfsi {

struct RunReport {
  int exit_code = 0;
  std::string summary_path;
  std::string csv_path;
  std::string error;
};

/// Execute the configured scenario, writing the diagnostics CSV, optional
/// field dumps and checkpoints, and a JSON summary. Errors are recorded in
/// the summary with a nonzero exit code, never silently.
RunReport run(const RunConfig& cfg, const std::optional<std::string>& resume_checkpoint = {});

struct DatasetValidation {
  bool pass = true;
  double trace_residual = 0.0;
  double divergence_residual = 0.0;
  double sup_eta0 = 0.0;
  bool eta0_admissible = true;
  double ftilde0_norm = 0.0;
  bool ftilde0_finite = true;
  double compatibility_sup = 0.0;
  double compatibility_l2 = 0.0;
};

DatasetValidation validate_dataset(const RunConfig& cfg);
std::string validation_to_json(const DatasetValidation& v);

}  // namespace polyfsi
