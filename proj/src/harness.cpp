#include "wlac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace wlac {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

// Reads keys from one JSON object and rejects any it did not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(field(key), "missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt) {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(field(key), "missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(field(key), "must be a nonnegative integer");
    return v.get<std::size_t>();
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(field(key), "missing");
    }
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "must be a string");
    return v.get<std::string>();
  }

  const json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(field(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double probability(Section& s, const std::string& key, double def, bool open_low = false) {
  const double p = s.number(key, def);
  if (!(p >= 0.0 && p <= 1.0) || (open_low && p == 0.0)) throw ConfigError(s.field(key), "must lie in [0, 1]");
  return p;
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

struct TaskParse {
  std::shared_ptr<const Task> task;
  std::shared_ptr<const HypothesisClass> default_class;
  std::optional<std::uint64_t> shuffle_seed;
};

TaskParse parse_task(const json& j, const fs::path& base) {
  Section s(j, "task");
  const std::string kind = s.text("kind");
  TaskParse out;
  if (kind == "threshold") {
    const double theta = s.number("theta_star", 0.5);
    const double rho = s.number("label_noise", 0.05);
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("task.theta_star", "must lie in (0, 1)");
    if (!(rho >= 0.0 && rho < 0.5)) throw ConfigError("task.label_noise", "must lie in [0, 0.5)");
    out.task = std::make_shared<ThresholdTask>(theta, rho);
  } else if (kind == "hard_example") {
    const double eps = s.number("epsilon", 0.1);
    const std::size_t size = s.count("class_size", 64);
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("task.epsilon", "must lie in (0, 1]");
    if (size < 2) throw ConfigError("task.class_size", "must be at least 2");
    auto t = std::make_shared<HardExampleTask>(eps, size, s.count("table_seed", 1));
    out.default_class = t->hypotheses();
    out.task = std::move(t);
  } else if (kind == "blobs") {
    const std::size_t k = s.count("classes", 3);
    const std::size_t d = s.count("dim", 2);
    const double spread = s.number("spread", 1.0);
    const double radius = s.number("radius", 1.0);
    if (k < 2) throw ConfigError("task.classes", "must be at least 2");
    if (d < 2) throw ConfigError("task.dim", "must be at least 2");
    if (!(spread > 0.0)) throw ConfigError("task.spread", "must be positive");
    if (!(radius > 0.0)) throw ConfigError("task.radius", "must be positive");
    out.task = std::make_shared<BlobsTask>(k, d, spread, radius);
  } else if (kind == "replay") {
    const auto path = resolve_path(base, s.text("path"));
    try {
      out.task = load_csv_stream(path.string(), s.count("classes", 0));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("task.path", e.what());
    }
    if (s.has("shuffle_seed")) out.shuffle_seed = s.count("shuffle_seed");
  } else {
    throw ConfigError("task.kind", "unknown task '" + kind + "'");
  }
  s.finish();
  return out;
}

std::shared_ptr<const HypothesisClass> parse_hypotheses(const json* j, const TaskParse& tp, const fs::path& base) {
  if (j == nullptr) {
    if (tp.default_class) return tp.default_class;
    if (tp.task->dim() == 1 && tp.task->num_classes() == 2) return std::make_shared<ThresholdGrid>(0.0, 1.0, 512);
    return nullptr;
  }
  Section s(*j, "hypotheses");
  const std::string kind = s.text("kind");
  std::shared_ptr<const HypothesisClass> cls;
  if (kind == "threshold_grid") {
    const double lo = s.number("lo", 0.0), hi = s.number("hi", 1.0);
    const std::size_t count = s.count("count", 512);
    if (!(lo < hi)) throw ConfigError("hypotheses.hi", "must exceed lo");
    if (count < 2) throw ConfigError("hypotheses.count", "must be at least 2");
    cls = std::make_shared<ThresholdGrid>(lo, hi, count);
  } else if (kind == "interval_grid") {
    const double lo = s.number("lo", 0.0), hi = s.number("hi", 1.0);
    const std::size_t points = s.count("points", 32);
    if (!(lo < hi)) throw ConfigError("hypotheses.hi", "must exceed lo");
    if (points < 2) throw ConfigError("hypotheses.points", "must be at least 2");
    cls = std::make_shared<IntervalGrid>(lo, hi, points);
  } else if (kind == "task_table") {
    if (!tp.default_class) throw ConfigError("hypotheses.kind", "task has no built-in table");
    cls = tp.default_class;
  } else if (kind == "table") {
    const auto path = resolve_path(base, s.text("path"));
    try {
      cls = load_enumerated_table_csv(path.string());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("hypotheses.path", e.what());
    }
  } else {
    throw ConfigError("hypotheses.kind", "unknown class '" + kind + "'");
  }
  s.finish();
  if (tp.task->num_classes() != 2) throw ConfigError("hypotheses", "hypothesis classes are binary; task is multiclass");
  return cls;
}

std::shared_ptr<const WeakLabeler> parse_weak(const json* j, const std::shared_ptr<const Task>& task,
                                              const std::shared_ptr<const HypothesisClass>& cls) {
  if (j == nullptr) return nullptr;
  Section s(*j, "weak_labeler");
  const std::string kind = s.text("kind");
  std::shared_ptr<const WeakLabeler> w;
  if (kind == "none") {
  } else if (kind == "na") {
    w = std::make_shared<NoisyAnnotator>(probability(s, "p", 0.1), task->num_classes());
  } else if (kind == "lc") {
    const double band = s.number("band", 0.1);
    if (!(band >= 0.0)) throw ConfigError("weak_labeler.band", "must be nonnegative");
    w = std::make_shared<LocalizedLabeler>(task, band, probability(s, "p_out", 0.5));
  } else if (kind == "biased_hypothesis") {
    if (!cls) throw ConfigError("weak_labeler.kind", "biased_hypothesis needs a hypothesis class");
    const std::size_t g = s.count("g");
    if (g >= cls->size()) throw ConfigError("weak_labeler.g", "outside the hypothesis class");
    w = std::make_shared<BiasedHypothesisLabeler>(task, cls, static_cast<HypothesisId>(g));
  } else if (kind == "recorded") {
    const auto* replay = dynamic_cast<const ReplayTask*>(task.get());
    if (replay == nullptr || !replay->has_weak()) {
      throw ConfigError("weak_labeler.kind", "recorded labels need a replay task with a ywl column");
    }
    w = std::make_shared<RecordedLabeler>();
  } else {
    throw ConfigError("weak_labeler.kind", "unknown weak labeler '" + kind + "'");
  }
  s.finish();
  return w;
}

ScheduleConstants parse_constants(const json* j, std::size_t n, double eps_final) {
  std::string preset = "practical";
  std::optional<Section> s;
  if (j != nullptr) {
    s.emplace(*j, "constants");
    preset = s->text("preset", "practical");
  }
  ScheduleConstants k;
  if (preset == "theory") {
    k = ScheduleConstants::theory(n, eps_final);
  } else if (preset == "practical") {
    k = ScheduleConstants::practical();
  } else if (preset == "unit") {
    k = ScheduleConstants::unit();
  } else {
    throw ConfigError("constants.preset", "must be 'theory', 'practical' or 'unit'");
  }
  if (s) {
    const std::pair<const char*, double*> fields[] = {{"c1", &k.c1},       {"c2", &k.c2},       {"c3", &k.c3},
                                                      {"alpha", &k.alpha}, {"beta", &k.beta},   {"gamma", &k.gamma},
                                                      {"eta", &k.eta},     {"xi", &k.xi}};
    for (const auto& [name, ptr] : fields) *ptr = s->number(name, *ptr);
    s->finish();
  }
  k.validate(n, eps_final);
  return k;
}

BlockSchedule parse_schedule(const json* j, std::size_t n) {
  std::string kind = "doubling";
  std::size_t L1 = 3;
  if (j != nullptr) {
    Section s(*j, "schedule");
    kind = s.text("kind", kind);
    L1 = s.count("L1", L1);
    s.finish();
  }
  if (kind == "doubling") return make_schedule(ScheduleKind::kDoubling, L1, n);
  if (kind == "linear") return make_schedule(ScheduleKind::kLinear, L1, n);
  throw ConfigError("schedule.kind", "must be 'doubling' or 'linear'");
}

void parse_practical(const json* j, ExperimentConfig& cfg) {
  PracticalConfig& p = cfg.practical;
  cfg.passive_budget = cfg.n;
  if (j == nullptr) return;
  Section s(*j, "practical");
  if (const json* b = s.child("base_al")) {
    Section bs(*b, "practical.base_al");
    const std::string kind = bs.text("kind", "entropy_threshold");
    if (kind == "entropy_threshold") {
      p.base_al.kind = BaseAlKind::kEntropyThreshold;
      p.base_al.threshold = bs.number("threshold", 0.0);
      if (!(p.base_al.threshold >= 0.0)) throw ConfigError("practical.base_al.threshold", "must be nonnegative");
    } else if (kind == "uniform") {
      p.base_al.kind = BaseAlKind::kUniform;
      p.base_al.budget = bs.count("budget");
    } else {
      throw ConfigError("practical.base_al.kind", "must be 'entropy_threshold' or 'uniform'");
    }
    bs.finish();
  }
  if (const json* t = s.child("train")) {
    Section ts(*t, "practical.train");
    p.train.step = ts.number("step", p.train.step);
    p.train.epochs = ts.count("epochs", p.train.epochs);
    p.train.patience = ts.count("patience", p.train.patience);
    p.train.l2 = ts.number("l2", p.train.l2);
    p.train.parallel = ts.flag("parallel", p.train.parallel);
    ts.finish();
    if (!(p.train.step > 0.0)) throw ConfigError("practical.train.step", "must be positive");
    if (!(p.train.l2 >= 0.0)) throw ConfigError("practical.train.l2", "must be nonnegative");
  }
  p.val_fraction = s.number("val_fraction", p.val_fraction);
  if (!(p.val_fraction > 0.0 && p.val_fraction < 1.0)) throw ConfigError("practical.val_fraction", "must lie in (0, 1)");
  p.L_plus = s.count("L_plus", p.L_plus);
  if (p.L_plus == 0) throw ConfigError("practical.L_plus", "must be positive");
  p.p_min = s.number("p_min", p.p_min);
  if (!(p.p_min > 0.0 && p.p_min <= 1.0)) throw ConfigError("practical.p_min", "must lie in (0, 1]");
  p.test_size = s.count("test_size", p.test_size);
  if (p.test_size == 0) throw ConfigError("practical.test_size", "must be positive");
  cfg.passive_budget = s.count("passive_budget", cfg.n);
  s.finish();
}

std::vector<std::uint64_t> parse_seeds(const json* j) {
  if (j == nullptr) throw ConfigError("seeds", "missing");
  if (!j->is_array() || j->empty()) throw ConfigError("seeds", "must be a nonempty array of integers");
  std::vector<std::uint64_t> out;
  for (const auto& v : *j) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("seeds", "must be a nonempty array of nonnegative integers");
    out.push_back(v.get<std::uint64_t>());
  }
  std::set<std::uint64_t> uniq(out.begin(), out.end());
  if (uniq.size() != out.size()) throw ConfigError("seeds", "duplicate seed");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> h = {
      "algorithm",       "seed",          "m",
      "L_m",             "strong_phase1", "strong_phase2",
      "weak",            "unlabeled_phase1", "unlabeled_phase2",
      "cum_strong",      "cum_weak",      "cum_unlabeled",
      "use_wl",          "wlerr_dot",     "stop_reason",
      "dis_mass",        "p_min",         "N_m",
      "err_best",        "delta",         "eps",
      "phi",             "excess_risk",   "test_accuracy",
      "active_size",     "h_star_active", "mean_query_prob",
      "eval_set_size",   "phase1_budget_exceeded", "solver_iterations",
      "solver_max_violation", "solver_fallback", "solver_infeasible",
      "kappa"};
  return h;
}

json spread(std::vector<double> v) {
  return json{{"median", median(v)}, {"q1", quantile(v, 0.25)}, {"q3", quantile(v, 0.75)},
              {"iqr", quantile(v, 0.75) - quantile(v, 0.25)}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

template <class F>
int guarded(std::ostream& log, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "runtime failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kWlacTheoretical: return "wlac_theoretical";
    case Algorithm::kWlacPractical: return "wlac_practical";
    case Algorithm::kNowlAc: return "nowl_ac";
    case Algorithm::kPassive: return "passive";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  ExperimentConfig cfg;
  cfg.raw = j;
  Section s(j, "");
  if (!s.has("schema")) throw ConfigError("schema", "missing");
  if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != kSchemaVersion) {
    throw ConfigError("schema", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const std::string algo = s.text("algorithm");
  if (algo == "wlac_theoretical") cfg.algorithm = Algorithm::kWlacTheoretical;
  else if (algo == "wlac_practical") cfg.algorithm = Algorithm::kWlacPractical;
  else if (algo == "nowl_ac") cfg.algorithm = Algorithm::kNowlAc;
  else if (algo == "passive") cfg.algorithm = Algorithm::kPassive;
  else throw ConfigError("algorithm", "unknown algorithm '" + algo + "'");

  cfg.n = s.count("n");
  cfg.delta = s.number("delta", 0.1);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  cfg.seeds = parse_seeds(s.child("seeds"));
  cfg.output_dir = s.text("output_dir", "out");

  const json* task_j = s.child("task");
  if (task_j == nullptr) throw ConfigError("task", "missing");
  const TaskParse tp = parse_task(*task_j, base_dir);
  cfg.task = tp.task;
  cfg.hypotheses = parse_hypotheses(s.child("hypotheses"), tp, base_dir);
  cfg.weak = parse_weak(s.child("weak_labeler"), cfg.task, cfg.hypotheses);

  const BlockSchedule schedule = parse_schedule(s.child("schedule"), cfg.n);
  cfg.theoretical.schedule = schedule;
  cfg.theoretical.delta = cfg.delta;
  cfg.theoretical.shuffle_seed = tp.shuffle_seed;
  cfg.practical.schedule = schedule;

  const bool theoretical = cfg.algorithm == Algorithm::kWlacTheoretical || cfg.algorithm == Algorithm::kNowlAc ||
                           (cfg.algorithm == Algorithm::kPassive && cfg.hypotheses);
  if (theoretical && !cfg.hypotheses) throw ConfigError("hypotheses", "required by " + algo);
  if (cfg.algorithm == Algorithm::kWlacTheoretical && !cfg.weak) {
    throw ConfigError("weak_labeler", "wlac_theoretical needs a weak labeler");
  }
  if (cfg.algorithm == Algorithm::kNowlAc && cfg.weak) {
    throw ConfigError("weak_labeler", "nowl_ac does not use a weak labeler; set kind 'none'");
  }
  const std::size_t H = cfg.hypotheses ? cfg.hypotheses->size() : 2;
  cfg.theoretical.constants = parse_constants(s.child("constants"), cfg.n, epsilon_m(cfg.n, H, cfg.delta));

  if (const json* e = s.child("engine")) {
    Section es(*e, "engine");
    cfg.theoretical.factor_two = es.flag("factor_two", true);
    cfg.practical.factor_two = cfg.theoretical.factor_two;
    cfg.theoretical.planning_pool_min = es.count("planning_pool_min", cfg.theoretical.planning_pool_min);
    if (es.has("kappa_override")) {
      const double kappa = es.number("kappa_override");
      if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("engine.kappa_override", "must be finite and >= 1");
      cfg.theoretical.kappa_override = kappa;
    }
    es.finish();
  }
  parse_practical(s.child("practical"), cfg);
  s.finish();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

RunResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.algorithm) {
    case Algorithm::kWlacTheoretical:
      return run_wlac_theoretical(cfg.task, cfg.hypotheses, cfg.weak.get(), cfg.theoretical, seed);
    case Algorithm::kNowlAc:
      return run_nowl_ac(cfg.task, cfg.hypotheses, cfg.theoretical, seed);
    case Algorithm::kWlacPractical:
      return run_wlac_practical(cfg.task, cfg.weak.get(), cfg.practical, seed);
    case Algorithm::kPassive:
      if (cfg.hypotheses) return run_passive(cfg.task, cfg.hypotheses, cfg.theoretical.schedule, seed,
                                             cfg.theoretical.shuffle_seed);
      return run_passive_practical(cfg.task, cfg.passive_budget, cfg.practical, seed);
  }
  throw Error("unknown algorithm");
}

std::vector<RunResult> run_trials(const ExperimentConfig& cfg) {
  const auto count = static_cast<std::ptrdiff_t>(cfg.seeds.size());
  std::vector<RunResult> results(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      results[i] = run_trial(cfg, cfg.seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

void write_metrics_csv(std::ostream& out, const std::vector<RunResult>& results) {
  const auto& header = metrics_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& r : results) {
    BlockCounts cum;
    for (const auto& row : r.rows) {
      const BlockCounts& c = row.counts;
      cum += c;
      out << r.algorithm << ',' << row.seed << ',' << row.m << ',' << row.L_m << ',' << c.strong_phase1 << ','
          << c.strong_phase2 << ',' << c.weak << ',' << c.unlabeled_phase1 << ',' << c.unlabeled_phase2 << ','
          << cum.strong() << ',' << cum.weak << ',' << cum.unlabeled() << ',' << int(row.use_wl) << ','
          << fmt(row.wlerr_dot) << ',' << row.stop_reason << ',' << fmt(row.dis_mass) << ',' << fmt(row.p_min)
          << ',' << fmt(row.N_m) << ',' << fmt(row.err_best) << ',' << fmt(row.delta) << ',' << fmt(row.eps) << ','
          << fmt(row.phi) << ',' << fmt(row.excess_risk) << ',' << fmt(row.test_accuracy) << ','
          << row.active_size << ',' << int(row.h_star_active) << ',' << fmt(row.mean_query_prob) << ','
          << row.eval_set_size << ',' << int(row.phase1_budget_exceeded) << ',' << row.solver_iterations << ','
          << fmt(row.solver_max_violation) << ',' << int(row.solver_fallback) << ',' << int(row.solver_infeasible)
          << ',' << fmt(row.kappa) << "\n";
    }
  }
}

json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& results) {
  json per_seed = json::array();
  BlockCounts grand;
  std::uint64_t oracle_strong = 0, oracle_weak = 0;
  std::vector<double> strong, unlabeled, weak, risk, acc;
  for (const auto& r : results) {
    const BlockCounts t = r.ledger.totals();
    if (t.strong() != r.oracle_strong_calls || t.weak != r.oracle_weak_calls) {
      throw Error("ledger totals disagree with oracle call counts for seed " + std::to_string(r.seed));
    }
    grand += t;
    oracle_strong += r.oracle_strong_calls;
    oracle_weak += r.oracle_weak_calls;
    strong.push_back(static_cast<double>(t.strong()));
    unlabeled.push_back(static_cast<double>(t.unlabeled()));
    weak.push_back(static_cast<double>(t.weak));
    risk.push_back(r.final_excess_risk);
    acc.push_back(r.final_accuracy);
    per_seed.push_back({{"seed", r.seed},
                        {"algorithm", r.algorithm},
                        {"blocks", r.rows.size()},
                        {"strong", t.strong()},
                        {"strong_phase1", t.strong_phase1},
                        {"strong_phase2", t.strong_phase2},
                        {"weak", t.weak},
                        {"unlabeled", t.unlabeled()},
                        {"oracle_strong_calls", r.oracle_strong_calls},
                        {"oracle_weak_calls", r.oracle_weak_calls},
                        {"final_excess_risk", r.final_excess_risk},
                        {"final_accuracy", r.final_accuracy},
                        {"h_star_always_active", r.h_star_always_active()},
                        {"stream_exhausted", r.stream_exhausted},
                        {"warnings", r.warnings}});
  }
  json out;
  out["schema"] = kSchemaVersion;
  out["algorithm"] = to_string(cfg.algorithm);
  out["n"] = cfg.n;
  out["delta"] = cfg.delta;
  out["seeds"] = cfg.seeds;
  out["totals"] = {{"strong", grand.strong()},
                   {"strong_phase1", grand.strong_phase1},
                   {"strong_phase2", grand.strong_phase2},
                   {"weak", grand.weak},
                   {"unlabeled", grand.unlabeled()},
                   {"oracle_strong_calls", oracle_strong},
                   {"oracle_weak_calls", oracle_weak}};
  out["strong_queries"] = spread(strong);
  out["weak_queries"] = spread(weak);
  out["unlabeled"] = spread(unlabeled);
  out["final_excess_risk"] = spread(risk);
  out["final_accuracy"] = spread(acc);
  out["per_seed"] = per_seed;
  return out;
}

void write_run_outputs(const fs::path& dir, const ExperimentConfig& cfg, const std::vector<RunResult>& results) {
  ensure_dir(dir);
  const json summary = summarize(cfg, results);
  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary);
    write_metrics_csv(out, results);
    if (!out) throw Error("failed writing " + (dir / "metrics.csv").string());
  }
  std::ofstream out(dir / "summary.json", std::ios::binary);
  out << summary.dump(2) << "\n";
  if (!out) throw Error("failed writing " + (dir / "summary.json").string());
}

json::json_pointer resolve_axis(const json& config, const std::string& axis) {
  static const std::map<std::string, std::string> aliases = {
      {"na_p", "/weak_labeler/p"},   {"p_out", "/weak_labeler/p_out"}, {"band", "/weak_labeler/band"},
      {"noise", "/task/label_noise"}, {"rho", "/task/label_noise"},     {"label_noise", "/task/label_noise"},
      {"n", "/n"},                    {"delta", "/delta"},               {"L1", "/schedule/L1"},
      {"seed", "/seeds"},             {"epsilon", "/task/epsilon"},      {"spread", "/task/spread"}};
  std::string ptr;
  if (auto it = aliases.find(axis); it != aliases.end()) {
    ptr = it->second;
  } else {
    ptr = "/";
    for (char ch : axis) ptr += ch == '.' ? '/' : ch;
  }
  json::json_pointer p(ptr);
  if (axis == "seed" || axis == "seeds") return json::json_pointer("/seeds");
  if (!config.contains(p)) throw ConfigError("axis", "unknown axis '" + axis + "'");
  if (!config.at(p).is_number()) throw ConfigError("axis", "axis '" + axis + "' is not a numeric field");
  return p;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<CurvePoint> build_curves(const std::vector<fs::path>& files) {
  if (files.empty()) throw ConfigError("report", "no metrics files");
  const auto& header = metrics_header();
  auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  const std::size_t c_algo = col("algorithm"), c_seed = col("seed"), c_m = col("m"), c_strong = col("cum_strong"),
                    c_unl = col("cum_unlabeled"), c_risk = col("excess_risk"), c_acc = col("test_accuracy");
  struct Acc {
    std::vector<double> strong, unl, risk, acc;
  };
  std::map<std::string, std::map<int, Acc>> groups;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("report", "cannot open " + f.string());
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != header) {
      throw ConfigError("report", "schema mismatch in " + f.string());
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() != header.size()) {
        throw ConfigError("report", "schema mismatch in " + f.string() + " line " + std::to_string(lineno));
      }
      if (!seen.insert({cells[c_algo], cells[c_seed], cells[c_m]}).second) continue;
      try {
        Acc& a = groups[cells[c_algo]][std::stoi(cells[c_m])];
        a.strong.push_back(std::stod(cells[c_strong]));
        a.unl.push_back(std::stod(cells[c_unl]));
        a.risk.push_back(std::stod(cells[c_risk]));
        a.acc.push_back(std::stod(cells[c_acc]));
      } catch (const std::logic_error&) {
        throw ConfigError("report", "bad number in " + f.string() + " line " + std::to_string(lineno));
      }
    }
  }
  std::vector<CurvePoint> out;
  for (auto& [algo, blocks] : groups) {
    for (auto& [m, a] : blocks) {
      out.push_back({algo, m, median(a.strong), median(a.unl), median(a.risk), median(a.acc), a.strong.size()});
    }
  }
  return out;
}

double query_savings(const std::vector<CurvePoint>& curves) {
  const std::pair<const char*, const char*> pairs[] = {{"wlac_theoretical", "nowl_ac"},
                                                       {"wlac_practical", "nowl_practical"}};
  for (const auto& [wl, nowl] : pairs) {
    std::vector<const CurvePoint*> a, b;
    for (const auto& c : curves) {
      if (c.algorithm == wl) a.push_back(&c);
      if (c.algorithm == nowl) b.push_back(&c);
    }
    if (a.empty() || b.empty()) continue;
    const bool practical = std::string(wl) == "wlac_practical";
    auto risk = [practical](const CurvePoint* c) {
      return practical ? 1.0 - c->median_test_accuracy : c->median_excess_risk;
    };
    const double target = std::max(risk(a.back()), risk(b.back()));
    auto queries_at = [&](const std::vector<const CurvePoint*>& v) {
      for (const auto* c : v)
        if (risk(c) <= target + 1e-12) return c->median_cum_strong;
      return v.back()->median_cum_strong;
    };
    const double qn = queries_at(b);
    if (!(qn > 0.0)) return std::nan("");
    return 1.0 - queries_at(a) / qn;
  }
  return std::nan("");
}

fs::path output_dir_override(const fs::path& fallback) {
  if (const char* env = std::getenv("WLAC_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return fallback;
}

int run_command(const fs::path& config_path, std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    const fs::path dir = output_dir_override(cfg.output_dir);
    const auto results = run_trials(cfg);
    write_run_outputs(dir, cfg, results);
    for (const auto& r : results)
      for (const auto& w : r.warnings) log << "seed " << r.seed << ": " << w << "\n";
    log << "wrote " << (dir / "metrics.csv").string() << " and " << (dir / "summary.json").string() << "\n";
    return 0;
  });
}

int sweep_command(const fs::path& config_path, const std::string& axis, const std::vector<std::string>& values,
                  std::ostream& log) {
  return guarded(log, [&] {
    if (values.empty()) throw ConfigError("values", "no sweep values given");
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config", "cannot open " + config_path.string());
    json base;
    try {
      base = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    const auto ptr = resolve_axis(base, axis);
    const bool seed_axis = ptr.to_string() == "/seeds";

    std::vector<ExperimentConfig> cfgs;
    for (const auto& v : values) {
      json j = base;
      try {
        std::size_t used = 0;
        if (seed_axis) {
          const unsigned long long s = std::stoull(v, &used);
          if (used != v.size()) throw std::invalid_argument(v);
          j["seeds"] = json::array({s});
        } else if (base.at(ptr).is_number_integer()) {
          const long long x = std::stoll(v, &used);
          if (used != v.size()) throw std::invalid_argument(v);
          j[ptr] = x;
        } else {
          const double x = std::stod(v, &used);
          if (used != v.size()) throw std::invalid_argument(v);
          j[ptr] = x;
        }
      } catch (const std::logic_error&) {
        throw ConfigError("values", "'" + v + "' is not a valid value for " + axis);
      }
      cfgs.push_back(parse_config(j, config_path.parent_path()));
    }

    const fs::path root = output_dir_override(cfgs.front().output_dir);
    ensure_dir(root);
    std::ostringstream table;
    table << "axis,value,algorithm,seeds,strong_total,weak_total,unlabeled_total,median_strong,"
             "median_final_excess_risk,median_final_accuracy\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const auto results = run_trials(cfgs[i]);
      const fs::path dir = root / (axis + "=" + values[i]);
      write_run_outputs(dir, cfgs[i], results);
      const json s = summarize(cfgs[i], results);
      table << axis << ',' << values[i] << ',' << to_string(cfgs[i].algorithm) << ',' << cfgs[i].seeds.size() << ','
            << s["totals"]["strong"].get<std::uint64_t>() << ',' << s["totals"]["weak"].get<std::uint64_t>() << ','
            << s["totals"]["unlabeled"].get<std::uint64_t>() << ','
            << fmt(s["strong_queries"]["median"].get<double>()) << ','
            << fmt(s["final_excess_risk"]["median"].get<double>()) << ','
            << fmt(s["final_accuracy"]["median"].get<double>()) << "\n";
      log << "finished " << dir.string() << "\n";
    }
    std::ofstream out(root / "sweep.csv", std::ios::binary);
    out << table.str();
    if (!out) throw Error("failed writing sweep.csv");
    return 0;
  });
}

int report_command(const std::vector<fs::path>& files, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const auto curves = build_curves(files);
    const double savings = query_savings(curves);
    std::set<std::string> algos;
    for (const auto& c : curves) algos.insert(c.algorithm);
    ensure_dir(out_dir);
    std::ofstream out(out_dir / "curves.csv", std::ios::binary);
    out << "# curves from " << files.size() << " metrics file(s)\n";
    out << "# algorithms:";
    for (const auto& a : algos) out << ' ' << a;
    out << "\n# query_savings=" << (std::isnan(savings) ? std::string("nan") : fmt(savings)) << "\n";
    out << "algorithm,m,seeds,median_cum_strong,median_cum_unlabeled,median_excess_risk,median_test_accuracy\n";
    for (const auto& c : curves) {
      out << c.algorithm << ',' << c.m << ',' << c.seeds << ',' << fmt(c.median_cum_strong) << ','
          << fmt(c.median_cum_unlabeled) << ',' << fmt(c.median_excess_risk) << ',' << fmt(c.median_test_accuracy)
          << "\n";
    }
    if (!out) throw Error("failed writing curves.csv");
    log << "wrote " << (out_dir / "curves.csv").string() << "\n";
    return 0;
  });
}

}  // namespace wlac
