#pragma once

// Runs one configured experiment in memory and writes its artifacts.

#include "koopkern/cli/config.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace koopkern::cli {

/// Output files could not be written (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One CSV artifact. Cells are already formatted.
struct Table {
  std::string artifact;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Flat key=value diagnostics in insertion order.
class Metrics {
 public:
  /// Non-finite values throw koopkern::IllConditioned.
  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
  void add_int(const std::string& key, long long value);
  void add_bool(const std::string& key, bool value);

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }
  [[nodiscard]] std::optional<std::string> text(const std::string& key) const;
  [[nodiscard]] std::optional<double> number(const std::string& key) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct Report {
  ExperimentConfig config;
  Metrics metrics;
  std::vector<Table> tables;
  std::vector<std::string> warnings;
};

/// 17 significant digits.
[[nodiscard]] std::string format_cell(double v);

/// Validates and runs. Library errors propagate unchanged.
[[nodiscard]] Report run_experiment(const ExperimentConfig& cfg);

[[nodiscard]] std::string render_csv(const Table& t);
[[nodiscard]] std::string render_metrics(const Metrics& m);

/// Writes <name>_<artifact>.csv, <name>_metrics.txt and <name>_config.ini
/// into the configured output directory. Returns the written paths.
std::vector<std::string> write_report(const Report& r);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitBlowUp = 4;

}  // namespace koopkern::cli
