#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wlac/engine.hpp"

namespace wlac {

enum class Algorithm { kWlacTheoretical, kWlacPractical, kNowlAc, kPassive };

const char* to_string(Algorithm a);

/// A validated experiment. Built only through parse_config.
struct ExperimentConfig {
  nlohmann::json raw;
  Algorithm algorithm = Algorithm::kWlacTheoretical;
  std::size_t n = 0;
  double delta = 0.1;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";

  std::shared_ptr<const Task> task;
  std::shared_ptr<const HypothesisClass> hypotheses;  // null for the practical engine
  std::shared_ptr<const WeakLabeler> weak;           // null when none configured
  TheoreticalConfig theoretical;
  PracticalConfig practical;
  std::size_t passive_budget = 0;
};

/// Validates everything up front; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// One trial; dispatches on the algorithm.
RunResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed);
/// All seeds, in parallel, results in seed order. Throws on the first failed trial.
std::vector<RunResult> run_trials(const ExperimentConfig& cfg);

void write_metrics_csv(std::ostream& out, const std::vector<RunResult>& results);
nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& results);

/// Writes metrics.csv and summary.json into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const std::vector<RunResult>& results);

/// Resolves a sweep axis (alias or dotted path) to a JSON pointer into the
/// config. Throws ConfigError for unknown or non-numeric axes.
nlohmann::json::json_pointer resolve_axis(const nlohmann::json& config, const std::string& axis);

/// Parsed metrics.csv row subset used by the report.
struct CurvePoint {
  std::string algorithm;
  int m = 0;
  double median_cum_strong = 0.0;
  double median_cum_unlabeled = 0.0;
  double median_excess_risk = 0.0;
  double median_test_accuracy = 0.0;
  std::size_t seeds = 0;
};

std::vector<CurvePoint> build_curves(const std::vector<std::filesystem::path>& metrics_files);
/// 1 - (WL-AC queries / NOWL-AC queries) at the first blocks where both reach
/// the worse of their final median excess risks. NaN when either is missing.
double query_savings(const std::vector<CurvePoint>& curves);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

// CLI entry points; return the process exit status (0 ok, 2 config error, 3 runtime failure).
int run_command(const std::filesystem::path& config_path, std::ostream& log);
int sweep_command(const std::filesystem::path& config_path, const std::string& axis,
                  const std::vector<std::string>& values, std::ostream& log);
int report_command(const std::vector<std::filesystem::path>& metrics_files, const std::filesystem::path& out_dir,
                   std::ostream& log);

/// WLAC_OUTPUT_DIR when set, otherwise `fallback`.
std::filesystem::path output_dir_override(const std::filesystem::path& fallback);

}  // namespace wlac
