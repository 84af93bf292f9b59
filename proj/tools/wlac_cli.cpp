#include <CLI11.hpp>
#include <iostream>

#include "wlac/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wlac: streaming active learning with strong and weak labelers"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run every seed of a config and write metrics.csv and summary.json");
  run->add_option("config", config, "experiment config (JSON)")->required();

  std::string sweep_config, axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "run the config once per value of a numeric field");
  sweep->add_option("config", sweep_config, "experiment config (JSON)")->required();
  sweep->add_option("--axis", axis, "field name or alias (na_p, noise, n, delta, L1, seed, ...)")->required();
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',');

  std::vector<std::string> files;
  std::string out_dir;
  auto* report = app.add_subcommand("report", "aggregate metrics files into curves.csv");
  report->add_option("files", files, "metrics.csv files")->required();
  report->add_option("-o,--out", out_dir, "output directory (default: WLAC_OUTPUT_DIR or .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return wlac::run_command(config, std::cerr);
  if (*sweep) return wlac::sweep_command(sweep_config, axis, values, std::cerr);
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  const std::filesystem::path dir = out_dir.empty() ? wlac::output_dir_override(".") : std::filesystem::path(out_dir);
  return wlac::report_command(paths, dir, std::cerr);
}
