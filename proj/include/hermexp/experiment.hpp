#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermexp {

// One report line.  runtime_ms is always persisted as 0 so that reruns of the
// same (config, seed) produce byte-identical files.
struct ReportRow {
  std::string experiment_id;
  std::string param_json;  // compact JSON object, keys sorted
  double value = 0.0;
  double reference = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
};

// Carries every validation violation found in a config, not just the first.
struct ConfigError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ConfigError(std::vector<std::string> v);
};

struct RunResult {
  std::vector<ReportRow> rows;              // config order
  std::vector<std::string> files_written;   // paths relative to out_dir
  bool all_pass() const;
};

// Fixed CSV schema:
//   experiment_id,param_json,value,reference,abs_err,rel_err,pass,runtime_ms
std::string render_csv(const std::vector<ReportRow>& rows);

// Parses and validates config_text (throws ConfigError listing every
// violation), runs the experiments whose kind matches only_kind (empty
// string runs all), and writes report.csv, report.json and any plot files
// into out_dir.  Experiments may run concurrently; rows and files are always
// emitted in config order and nothing is persisted unless every selected
// experiment completes.
RunResult run_experiments(const std::string& config_text,
                          const std::string& only_kind,
                          const std::string& out_dir,
                          int threads,
                          std::optional<std::uint64_t> seed_override);

}  // namespace hermexp
