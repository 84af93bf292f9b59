#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "wlac/harness.hpp"

using namespace wlac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("wlac_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json passive_config() {
  return json{{"schema", 1},
              {"algorithm", "passive"},
              {"n", 100},
              {"delta", 0.1},
              {"seeds", json::array({1})},
              {"task", {{"kind", "threshold"}, {"theta_star", 0.5}, {"label_noise", 0.05}}},
              {"hypotheses", {{"kind", "threshold_grid"}, {"lo", 0.0}, {"hi", 1.0}, {"count", 64}}}};
}

json wlac_config() {
  json j = passive_config();
  j["algorithm"] = "wlac_theoretical";
  j["n"] = 2000;
  j["seeds"] = {1, 2, 3};
  j["weak_labeler"] = {{"kind", "na"}, {"p", 0.1}};
  return j;
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

// Runs the CLI with the output directory forced to `out`; returns the exit code.
int cli(const std::string& args, const fs::path& out, const fs::path& log) {
  const std::string cmd =
      "WLAC_OUTPUT_DIR='" + out.string() + "' '" + WLAC_CLI_PATH + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

std::string config_error_field(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesDefaults) {
  const auto cfg = parse_config(wlac_config());
  EXPECT_EQ(cfg.algorithm, Algorithm::kWlacTheoretical);
  EXPECT_EQ(cfg.n, 2000u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_TRUE(cfg.weak != nullptr);
  EXPECT_EQ(cfg.theoretical.schedule.total(), 2000u);
}

TEST(Config, Errors) {
  json j = passive_config();
  j["delta"] = 1.5;
  EXPECT_EQ(config_error_field(j), "delta");
  j = passive_config();
  j["colour"] = "red";
  EXPECT_EQ(config_error_field(j), "colour");
  j = passive_config();
  j["task"]["thetastar"] = 0.3;
  EXPECT_EQ(config_error_field(j), "task.thetastar");
  j = passive_config();
  j["schema"] = 2;
  EXPECT_EQ(config_error_field(j), "schema");
  j = passive_config();
  j["seeds"] = json::array();
  EXPECT_EQ(config_error_field(j), "seeds");
  j = wlac_config();
  j.erase("weak_labeler");
  EXPECT_FALSE(config_error_field(j).empty());
  j = wlac_config();
  j["algorithm"] = "nowl_ac";
  EXPECT_FALSE(config_error_field(j).empty());
  j = wlac_config();
  j["constants"] = {{"preset", "theory"}, {"c1", 5.0}};
  EXPECT_EQ(config_error_field(j), "constants.c1");
}

TEST(Axis, AliasesAndPaths) {
  const json j = wlac_config();
  EXPECT_EQ(resolve_axis(j, "na_p").to_string(), "/weak_labeler/p");
  EXPECT_EQ(resolve_axis(j, "noise").to_string(), "/task/label_noise");
  EXPECT_EQ(resolve_axis(j, "n").to_string(), "/n");
  EXPECT_EQ(resolve_axis(j, "task.theta_star").to_string(), "/task/theta_star");
  EXPECT_THROW(resolve_axis(j, "nonsense"), ConfigError);
}

TEST(Stats, MedianAndQuantile) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
}

TEST(Cli, PassiveRunQueriesEveryPoint) {
  const auto dir = scratch("passive");
  const auto cfg = write_config(dir, passive_config());
  ASSERT_EQ(cli("run '" + cfg.string() + "'", dir / "out", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  const auto rows = read_csv(dir / "out" / "metrics.csv");
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.back().at("cum_strong"), "100");
  const json s = json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(s["totals"]["strong"], 100);
  EXPECT_EQ(s["totals"]["oracle_strong_calls"], 100);
}

TEST(Cli, InvalidDeltaExitsTwoNamingTheField) {
  const auto dir = scratch("delta");
  json j = passive_config();
  j["delta"] = 1.5;
  const auto cfg = write_config(dir, j);
  EXPECT_EQ(cli("run '" + cfg.string() + "'", dir / "out", dir / "log.txt"), 2);
  EXPECT_NE(slurp(dir / "log.txt").find("delta"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out" / "metrics.csv"));
}

TEST(Cli, MissingConfigAndBadArguments) {
  const auto dir = scratch("args");
  EXPECT_EQ(cli("run '" + (dir / "nope.json").string() + "'", dir / "out", dir / "log.txt"), 2);
  EXPECT_EQ(cli("frobnicate", dir / "out", dir / "log.txt"), 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(cli("run '" + (dir / "broken.json").string() + "'", dir / "out", dir / "log.txt"), 2);
}

TEST(Cli, RunIsByteIdenticalAcrossInvocations) {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, wlac_config());
  ASSERT_EQ(cli("run '" + cfg.string() + "'", dir / "a", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  ASSERT_EQ(cli("run '" + cfg.string() + "'", dir / "b", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  const auto a = slurp(dir / "a" / "metrics.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));
}

TEST(Cli, SweepEmptyValuesExitsTwo) {
  const auto dir = scratch("sweep_empty");
  const auto cfg = write_config(dir, passive_config());
  EXPECT_EQ(cli("sweep '" + cfg.string() + "' --axis na_p", dir / "out", dir / "log.txt"), 2);
  EXPECT_EQ(cli("sweep '" + cfg.string() + "' --axis bogus --values 1,2", dir / "out", dir / "log.txt"), 2);
  EXPECT_EQ(cli("sweep '" + cfg.string() + "' --axis noise --values 0.1,abc", dir / "out", dir / "log.txt"), 2);
}

TEST(Cli, SweepRunsOncePerValue) {
  const auto dir = scratch("sweep_na");
  json j = wlac_config();
  j["seeds"] = json::array({1});
  j["n"] = 500;
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(cli("sweep '" + cfg.string() + "' --axis na_p --values 0.1,0.3,0.5,0.7,0.9", dir / "out", dir / "log.txt"),
            0)
      << slurp(dir / "log.txt");
  const auto rows = read_csv(dir / "out" / "sweep.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].at("value"), "0.1");
  EXPECT_EQ(rows[4].at("value"), "0.9");
  for (const char* v : {"0.1", "0.3", "0.5", "0.7", "0.9"})
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string("na_p=") + v) / "metrics.csv"));
}

TEST(Cli, SeedSweepReconcilesWithRun) {
  const auto dir = scratch("sweep_seed");
  const auto cfg = write_config(dir, wlac_config());
  ASSERT_EQ(cli("run '" + cfg.string() + "'", dir / "run", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  ASSERT_EQ(cli("sweep '" + cfg.string() + "' --axis seed --values 1,2,3", dir / "sweep", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  const json whole = json::parse(slurp(dir / "run" / "summary.json"));
  std::uint64_t strong = 0, weak = 0, unlabeled = 0;
  for (const auto& row : read_csv(dir / "sweep" / "sweep.csv")) {
    strong += std::stoull(row.at("strong_total"));
    weak += std::stoull(row.at("weak_total"));
    unlabeled += std::stoull(row.at("unlabeled_total"));
  }
  EXPECT_EQ(strong, whole["totals"]["strong"].get<std::uint64_t>());
  EXPECT_EQ(weak, whole["totals"]["weak"].get<std::uint64_t>());
  EXPECT_EQ(unlabeled, whole["totals"]["unlabeled"].get<std::uint64_t>());

  // the per-seed metrics rows are the run's rows partitioned by seed
  const auto run_rows = read_csv(dir / "run" / "metrics.csv");
  for (const char* seed : {"1", "2", "3"}) {
    std::vector<std::map<std::string, std::string>> part;
    for (const auto& r : run_rows)
      if (r.at("seed") == seed) part.push_back(r);
    EXPECT_EQ(part, read_csv(dir / "sweep" / (std::string("seed=") + seed) / "metrics.csv"));
  }
}

TEST(Cli, ReportBuildsCurvesAndRejectsForeignFiles) {
  const auto dir = scratch("report");
  json wl = wlac_config();
  wl["output_dir"] = (dir / "wl").string();
  json nowl = wlac_config();
  nowl["algorithm"] = "nowl_ac";
  nowl.erase("weak_labeler");
  const auto c1 = write_config(dir, wl, "wl.json");
  const auto c2 = write_config(dir, nowl, "nowl.json");
  ASSERT_EQ(cli("run '" + c1.string() + "'", dir / "wl", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  ASSERT_EQ(cli("run '" + c2.string() + "'", dir / "nowl", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  ASSERT_EQ(cli("report '" + (dir / "wl" / "metrics.csv").string() + "' '" + (dir / "nowl" / "metrics.csv").string() +
                    "' -o '" + (dir / "rep").string() + "'",
                dir / "unused", dir / "log.txt"),
            0)
      << slurp(dir / "log.txt");
  const auto rows = read_csv(dir / "rep" / "curves.csv");
  std::set<std::string> algos;
  for (const auto& r : rows) algos.insert(r.at("algorithm"));
  EXPECT_EQ(algos, (std::set<std::string>{"nowl_ac", "wlac_theoretical"}));
  EXPECT_NE(slurp(dir / "rep" / "curves.csv").find("# query_savings="), std::string::npos);

  std::ofstream(dir / "foreign.csv") << "a,b,c\n1,2,3\n";
  EXPECT_EQ(cli("report '" + (dir / "foreign.csv").string() + "' -o '" + (dir / "rep2").string() + "'", dir / "unused",
                dir / "log.txt"),
            2);
}

TEST(Cli, ReportOnPassiveRunIsItsLearningCurve) {
  const auto dir = scratch("report_passive");
  const auto cfg = write_config(dir, passive_config());
  ASSERT_EQ(cli("run '" + cfg.string() + "'", dir / "out", dir / "log.txt"), 0);
  ASSERT_EQ(cli("report '" + (dir / "out" / "metrics.csv").string() + "'", dir / "rep", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  const auto metrics = read_csv(dir / "out" / "metrics.csv");
  const auto curve = read_csv(dir / "rep" / "curves.csv");
  ASSERT_EQ(curve.size(), metrics.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_EQ(curve[i].at("algorithm"), "passive");
    EXPECT_EQ(std::stod(curve[i].at("median_cum_strong")), std::stod(metrics[i].at("cum_strong")));
  }
}
