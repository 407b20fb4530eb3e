#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "polyfsi/coupler.hpp"
#include "polyfsi/config.hpp"

namespace polyfsi {

/// Per-step diagnostics writer with a fixed documented header; values are
/// printed with full precision so reruns are byte-comparable.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<double>& values);
  void flush();
  static std::string diag_header();
  static std::vector<double> diag_row(const StepDiag& d);

 private:
  std::FILE* f_ = nullptr;
};

/// Raw little-endian float64 array dump with a JSON sidecar describing the
/// field name, time and shape.
void dump_field(const std::string& dir, const std::string& field, int step, double time,
                const std::vector<double>& data, const std::vector<int>& shape);

void write_summary_json(const std::string& path, const std::string& text);

// Checkpoint format: magic, version, config hash, then the raw state.
void save_checkpoint(const std::string& path, const CoupledState& s, uint64_t config_hash);
CoupledState load_checkpoint(const std::string& path, uint64_t expected_config_hash);

bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace polyfsi
