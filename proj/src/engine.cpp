#include "wlac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wlac/kernels.hpp"

namespace wlac {
namespace {

struct GroundTruth {
  std::vector<double> risks;
  HypothesisId h_star = 0;
};

GroundTruth ground_truth(const Task& task, const HypothesisClass& cls) {
  GroundTruth g;
  g.risks = task.true_risks(cls);
  g.h_star = static_cast<HypothesisId>(std::min_element(g.risks.begin(), g.risks.end()) - g.risks.begin());
  return g;
}

// E[1(h*(x) != y, x in D)] over the pool, from the task's label law.
double best_error_in_region(const Task& task, const HypothesisClass& cls, HypothesisId h_star,
                            const DisagreementRegion& region, std::span<const Point> pool) {
  double s = 0.0;
  for (const auto& x : pool) {
    if (!region.contains(x)) continue;
    const auto p = task.label_probs(x);
    s += 1.0 - p[static_cast<std::size_t>(cls.predict(h_star, x))];
  }
  return s / static_cast<double>(pool.size());
}

void finish_result(RunResult& r, const Labelers& labelers) {
  r.oracle_strong_calls = labelers.strong_calls();
  r.oracle_weak_calls = labelers.weak_calls();
  r.ledger.check();
}

}  // namespace

std::size_t BlockSchedule::total() const { return std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}); }

BlockSchedule make_schedule(ScheduleKind kind, std::size_t L1, std::size_t n) {
  if (L1 < 3) throw ConfigError("schedule.L1", "must be at least 3");
  if (n < L1) throw ConfigError("n", "must be at least schedule.L1");
  BlockSchedule s;
  s.kind = kind;
  std::size_t sum = 0;
  while (sum < n) {
    std::size_t L = L1;
    if (kind == ScheduleKind::kDoubling && !s.lengths.empty()) L = sum;
    L = std::min(L, n - sum);
    s.lengths.push_back(L);
    sum += L;
  }
  for (std::size_t m = 1, acc = s.lengths[0]; m < s.lengths.size(); acc += s.lengths[m++]) {
    if (s.lengths[m] > acc) throw std::logic_error("make_schedule: block longer than all previous blocks");
  }
  return s;
}

bool RunResult::h_star_always_active() const {
  return std::all_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.h_star_active; });
}

std::vector<CollectedExample> collect_phase2(const QueryPlan& plan, const RegionTest& in_region,
                                             const HypothesisClass& cls, HypothesisId h_m, Stream& stream,
                                             Labelers& labelers, std::size_t L_m, bool want_weak,
                                             RandomSource& rng, RandomSource& weak_rng, BlockCounts& counts) {
  std::vector<CollectedExample> out;
  out.reserve(L_m);
  for (std::size_t t = 0; t < L_m; ++t) {
    Sample s = stream.next(rng);
    ++counts.unlabeled_phase2;
    if (!in_region(s.x)) {
      out.push_back(CollectedExample::out_of_region(s.x, cls.predict(h_m, s.x)));
      continue;
    }
    const double p = plan.prob_at(s.x);
    const bool query = rng.uniform() < p;
    Label weak = 1;
    if (want_weak) {
      weak = labelers.weak(s, weak_rng);
      ++counts.weak;
    }
    if (query) {
      const Label y = labelers.strong(s);
      ++counts.strong_phase2;
      out.push_back(CollectedExample::queried(s.x, y, want_weak ? weak : y, std::max(p, kGlobalPMin)));
    } else {
      out.push_back(CollectedExample::unqueried(s.x, weak));
    }
  }
  return out;
}

RunResult run_wlac_theoretical(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                               const WeakLabeler* weak, const TheoreticalConfig& cfg, std::uint64_t seed) {
  const bool nowl_only = weak == nullptr;
  RunResult result;
  result.algorithm = nowl_only ? "nowl_ac" : "wlac_theoretical";
  result.seed = seed;

  const auto& sched = cfg.schedule;
  const std::size_t H = cls->size(), M = sched.M(), n = sched.total();
  const ScheduleConstants& k = cfg.constants;
  const double eps_final = epsilon_m(n, H, cfg.delta);
  const GroundTruth truth = ground_truth(*task, *cls);
  const bool has_label_law = task->kind() != "replay";

  RandomSource root(seed);
  auto stream = make_stream(task, cfg.shuffle_seed);
  Labelers labelers(weak);

  WlEvalParams params;
  params.max_blocks = M;
  params.n = n;
  params.delta = cfg.delta;
  params.factor_two = cfg.factor_two;

  kernels::LossSums sums(H);
  std::size_t sum_L = 0;
  HypothesisId h_m = 0;
  ActiveSet active = full_active_set(*cls, h_m);
  std::vector<double> prev_means(H, 0.0);
  double err_prev = 0.0;
  const double eps_1 = epsilon_m(sched.lengths.front(), H, cfg.delta);
  double delta_prev = k.c1 * std::sqrt(eps_1) + k.c2 * eps_1 * std::log(3.0);
  double weighted_best_err = 0.0;
  std::vector<EvalExample> carry;

  for (std::size_t mi = 0; mi < M; ++mi) {
    const int m = static_cast<int>(mi) + 1;
    const std::size_t L = sched.lengths[mi];
    BlockCounts& counts = result.ledger.block(m);
    MetricRow row;
    row.seed = seed;
    row.m = m;
    row.L_m = L;
    row.active_size = active.members.size();
    row.h_star_active = active.contains(truth.h_star);

    RandomSource plan_rng = root.split("plan", m);
    RandomSource phase1_rng = root.split("phase1", m);
    RandomSource phase2_rng = root.split("phase2", m);
    RandomSource weak_rng = root.split("weak", m);

    const DisagreementRegion region(cls, active);
    const RegionTest in_region = [&region](const Point& x) { return region.contains(x); };
    std::vector<Point> pool;
    pool.reserve(std::max(cfg.planning_pool_min, L));
    for (std::size_t i = 0; i < std::max(cfg.planning_pool_min, L); ++i) pool.push_back(task->draw(plan_rng).x);
    const double dis = disagreement_mass(region, pool);
    const double pmin = p_min(sum_L, err_prev, n, eps_final, k.c3);

    const OpInstance inst = build_op_instance(cls, h_m, in_region, pool);
    std::vector<double> regret(H);
    for (HypothesisId h = 0; h < H; ++h) regret[h] = prev_means[h] - prev_means[h_m];
    OpConstraintSpec spec = make_constraint_spec(inst, std::move(regret), static_cast<double>(sum_L), delta_prev, k);
    const QueryPlan p_nowl = solve_op(inst, spec, pmin);
    const double N_m = static_cast<double>(L) * p_nowl.expected_in_region();

    QueryPlan plan = p_nowl;
    OpConstraintSpec active_spec = spec;
    bool use_wl = false;
    try {
      if (!nowl_only) {
        double kappa = 1.0;
        if (cfg.kappa_override) {
          kappa = *cfg.kappa_override;
        } else if (weak->introspectable() && dis > 0.0) {
          const KappaReport rep = kappa_of_region(*weak, in_region, pool);
          if (rep.finite()) {
            kappa = rep.kappa;
          } else {
            result.warnings.push_back("block " + std::to_string(m) + ": kappa unbounded, using 1");
          }
        }
        params.kappa = kappa;
        row.kappa = kappa;

        TheoreticalEvalInputs in;
        in.err_bar = std::min(std::max(err_prev, 0.0) + delta_prev, 1.0);
        in.N_m = N_m;
        in.L_m = L;
        in.p_min = pmin;
        in.dis_mass = dis;
        WlEvalOutcome ev =
            wl_eval_theoretical(*stream, labelers, in_region, in, std::move(carry), params, phase1_rng, counts);
        carry = std::move(ev.eval_set);
        use_wl = ev.use_wl;
        row.use_wl = ev.use_wl;
        row.wlerr_dot = ev.wlerr_dot;
        row.stop_reason = to_string(ev.stop_reason);
        row.phase1_budget_exceeded = ev.budget_exceeded;
        row.eval_set_size = carry.size();
        if (use_wl) {
          OpConstraintSpec spec_wl = spec;
          spec_wl.use_wl = true;
          spec_wl.wlerr_dot = ev.wlerr_dot;
          active_spec = spec_wl;
          plan = solve_op(inst, spec_wl, pmin);
          if (plan.diagnostics.infeasible || min_slack(plan, inst, spec_wl) < -1e-6) {
            plan = feasible_fallback(p_nowl, ev.wlerr_dot, pmin);
          }
        }
      }

      const auto batch = collect_phase2(plan, in_region, *cls, h_m, *stream, labelers, L, !nowl_only, phase2_rng,
                                        weak_rng, counts);
      kernels::accumulate_losses(*cls, batch, sums);
    } catch (const StreamExhausted&) {
      result.stream_exhausted = true;
      break;
    }
    sum_L += L;

    const EstimatorMode mode = use_wl ? EstimatorMode::kUseWl : EstimatorMode::kNowl;
    result.audit.push_back({m, use_wl, mode});
    const std::vector<double> means = sums.means(mode);
    const auto h_next = static_cast<HypothesisId>(std::min_element(means.begin(), means.end()) - means.begin());
    const double err_best = means[h_next];
    const double eps = epsilon_m(sum_L, H, cfg.delta);
    const double delta = delta_m(err_best, eps, sum_L, k);

    if (has_label_law) {
      weighted_best_err +=
          static_cast<double>(L) * best_error_in_region(*task, *cls, truth.h_star, region, pool);
    }
    row.counts = counts;
    row.dis_mass = dis;
    row.p_min = pmin;
    row.N_m = N_m;
    row.err_best = err_best;
    row.delta = delta;
    row.eps = eps;
    row.phi = dis / (weighted_best_err / static_cast<double>(sum_L) + std::log(static_cast<double>(sum_L)) * eps);
    row.excess_risk = truth.risks[h_next] - truth.risks[truth.h_star];
    row.mean_query_prob = plan.mean_in_region();
    row.solver_iterations = plan.diagnostics.iterations;
    row.solver_max_violation = plan.diagnostics.max_violation;
    row.solver_fallback = plan.diagnostics.used_fallback;
    row.solver_infeasible = plan.diagnostics.infeasible;
    if (inst.cells->num_cells() > 0) {
      const auto floor_plan =
          QueryPlan::per_cell(inst.cells, std::vector<double>(inst.cells->num_cells(), pmin), pmin);
      row.floor_slack = min_slack(floor_plan, inst, active_spec);
    }
    result.rows.push_back(row);

    active = build_active_set(*cls, means, h_next, k.gamma * delta);
    h_m = h_next;
    prev_means = means;
    err_prev = err_best;
    delta_prev = delta;
  }

  result.final_hypothesis = h_m;
  result.final_excess_risk = truth.risks[h_m] - truth.risks[truth.h_star];
  finish_result(result, labelers);
  return result;
}

RunResult run_nowl_ac(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                      const TheoreticalConfig& cfg, std::uint64_t seed) {
  return run_wlac_theoretical(std::move(task), std::move(cls), nullptr, cfg, seed);
}

RunResult run_passive(std::shared_ptr<const Task> task, std::shared_ptr<const HypothesisClass> cls,
                      const BlockSchedule& schedule, std::uint64_t seed, std::optional<std::uint64_t> shuffle_seed) {
  RunResult result;
  result.algorithm = "passive";
  result.seed = seed;
  const GroundTruth truth = ground_truth(*task, *cls);
  RandomSource root(seed);
  auto stream = make_stream(task, shuffle_seed);
  Labelers labelers(nullptr);
  kernels::LossSums sums(cls->size());
  HypothesisId h = 0;
  for (std::size_t mi = 0; mi < schedule.M(); ++mi) {
    const int m = static_cast<int>(mi) + 1;
    const std::size_t L = schedule.lengths[mi];
    RandomSource rng = root.split("phase2", m);
    BlockCounts& counts = result.ledger.block(m);
    std::vector<CollectedExample> batch;
    batch.reserve(L);
    try {
      for (std::size_t t = 0; t < L; ++t) {
        Sample s = stream->next(rng);
        ++counts.unlabeled_phase2;
        const Label y = labelers.strong(s);
        ++counts.strong_phase2;
        batch.push_back(CollectedExample::queried(s.x, y, y, 1.0));
      }
    } catch (const StreamExhausted&) {
      result.stream_exhausted = true;
    }
    kernels::accumulate_losses(*cls, batch, sums);
    const auto means = sums.means(EstimatorMode::kNowl);
    h = static_cast<HypothesisId>(std::min_element(means.begin(), means.end()) - means.begin());
    result.audit.push_back({m, false, EstimatorMode::kNowl});
    MetricRow row;
    row.seed = seed;
    row.m = m;
    row.L_m = L;
    row.counts = counts;
    row.dis_mass = 1.0;
    row.mean_query_prob = 1.0;
    row.err_best = means[h];
    row.excess_risk = truth.risks[h] - truth.risks[truth.h_star];
    row.active_size = cls->size();
    result.rows.push_back(row);
    if (result.stream_exhausted) break;
  }
  result.final_hypothesis = h;
  result.final_excess_risk = truth.risks[h] - truth.risks[truth.h_star];
  finish_result(result, labelers);
  return result;
}

std::vector<bool> base_al_select(const BaseAlSpec& spec, const LinearSoftmaxModel* model,
                                 std::span<const Point> batch, RandomSource& rng) {
  std::vector<bool> sel(batch.size(), model == nullptr);
  if (model == nullptr) return sel;
  if (spec.kind == BaseAlKind::kEntropyThreshold) {
    if (spec.threshold < 0.0) throw ConfigError("base_al.threshold", "must be nonnegative");
    for (std::size_t i = 0; i < batch.size(); ++i) sel[i] = model->entropy(batch[i]) >= spec.threshold;
    return sel;
  }
  if (spec.budget > batch.size()) throw ConfigError("base_al.budget", "larger than the batch");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  for (std::size_t i = 0; i < spec.budget; ++i) sel[idx[i]] = true;
  return sel;
}

namespace {

struct PracticalSetup {
  std::vector<LabeledPoint> validation;
  std::vector<LabeledPoint> test;
};

PracticalSetup practical_setup(const Task& task, const PracticalConfig& cfg, const RandomSource& root) {
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) {
    throw ConfigError("practical.val_fraction", "must lie in (0, 1)");
  }
  PracticalSetup s;
  RandomSource val_rng = root.split("validation");
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(cfg.schedule.total()))));
  for (std::size_t i = 0; i < n_val; ++i) {
    Sample d = task.draw(val_rng);
    s.validation.push_back({d.x, d.y});
  }
  // The test set is shared by every algorithm and seed so accuracies are comparable.
  RandomSource test_rng(0x7e57);
  for (std::size_t i = 0; i < cfg.test_size; ++i) {
    Sample d = task.draw(test_rng);
    s.test.push_back({d.x, d.y});
  }
  return s;
}

std::vector<TrainTerm> training_terms(std::span<const CollectedExample> data, std::span<const EvalExample> eval,
                                      EstimatorMode mode) {
  std::vector<TrainTerm> terms;
  terms.reserve(2 * data.size() + eval.size());
  for (const auto& z : data) {
    if (mode == EstimatorMode::kUseWl) {
      if (z.weight() != 0.0) terms.push_back({&z.x(), z.y(), z.weight()});
      if (z.weight() != 1.0) terms.push_back({&z.x(), z.weak(), 1.0 - z.weight()});
    } else if (z.weight() != 0.0) {
      terms.push_back({&z.x(), z.y(), z.weight()});
    }
  }
  for (const auto& e : eval)
    if (e.labeled) terms.push_back({&e.x, e.y, 1.0});
  return terms;
}

}  // namespace

RunResult run_wlac_practical(std::shared_ptr<const Task> task, const WeakLabeler* weak, const PracticalConfig& cfg,
                             std::uint64_t seed) {
  RunResult result;
  result.algorithm = weak == nullptr ? "nowl_practical" : "wlac_practical";
  result.seed = seed;
  RandomSource root(seed);
  const PracticalSetup setup = practical_setup(*task, cfg, root);
  auto stream = make_stream(task);
  Labelers labelers(weak);

  std::optional<LinearSoftmaxModel> model;
  double err_val = 1.0;
  std::vector<CollectedExample> data;
  std::vector<EvalExample> carry;
  std::vector<Point> observed;

  for (std::size_t mi = 0; mi < cfg.schedule.M(); ++mi) {
    const int m = static_cast<int>(mi) + 1;
    const std::size_t L = cfg.schedule.lengths[mi];
    BlockCounts& counts = result.ledger.block(m);
    RandomSource batch_rng = root.split("batch", m);
    RandomSource select_rng = root.split("select", m);
    RandomSource phase1_rng = root.split("phase1", m);
    RandomSource phase2_rng = root.split("phase2", m);
    RandomSource weak_rng = root.split("weak", m);
    MetricRow row;
    row.seed = seed;
    row.m = m;
    row.L_m = L;

    std::vector<Sample> batch;
    try {
      for (std::size_t i = 0; i < L; ++i) batch.push_back(stream->next(batch_rng));
    } catch (const StreamExhausted&) {
      result.stream_exhausted = true;
      if (batch.empty()) break;
    }
    std::vector<Point> xs;
    for (const auto& s : batch) xs.push_back(s.x);
    const LinearSoftmaxModel* current = model ? &*model : nullptr;
    const std::vector<bool> selected = base_al_select(cfg.base_al, current, xs, select_rng);
    observed.insert(observed.end(), xs.begin(), xs.end());

    RegionTest in_region = [&](const Point& x) {
      if (current == nullptr || cfg.base_al.kind == BaseAlKind::kUniform) return true;
      return current->entropy(x) >= cfg.base_al.threshold;
    };
    std::size_t in_count = 0;
    for (const auto& x : observed) in_count += in_region(x);
    const double dis_hat = static_cast<double>(in_count) / static_cast<double>(observed.size());

    bool use_wl = false;
    double prob = 1.0;
    std::size_t consumed = 0;
    if (weak != nullptr) {
      PracticalEvalInputs in;
      in.err_val = err_val;
      in.L_plus = cfg.L_plus;
      in.dis_mass = dis_hat;
      in.p_min = cfg.p_min;
      in.factor_two = cfg.factor_two;
      WlEvalOutcome ev = wl_eval_practical(batch, selected, labelers, in_region, in, std::move(carry), phase1_rng,
                                           counts);
      carry = std::move(ev.eval_set);
      use_wl = ev.use_wl;
      consumed = ev.consumed;
      row.use_wl = use_wl;
      row.wlerr_dot = ev.wlerr_dot;
      row.stop_reason = to_string(ev.stop_reason);
      row.eval_set_size = carry.size();
      prob = solve_op_practical(ev.wlerr_dot, cfg.p_min).scalar_value();
    }

    for (std::size_t i = consumed; i < batch.size(); ++i) {
      const Sample& s = batch[i];
      ++counts.unlabeled_phase2;
      if (!selected[i]) {
        data.push_back(CollectedExample::out_of_region(s.x, current ? current->predict(s.x) : 0));
        continue;
      }
      const bool query = phase2_rng.uniform() < prob;
      Label wl = 1;
      if (weak != nullptr) {
        wl = labelers.weak(s, weak_rng);
        ++counts.weak;
      }
      if (query) {
        const Label y = labelers.strong(s);
        ++counts.strong_phase2;
        data.push_back(CollectedExample::queried(s.x, y, weak != nullptr ? wl : y, prob));
      } else {
        data.push_back(CollectedExample::unqueried(s.x, wl));
      }
    }

    const EstimatorMode mode = use_wl ? EstimatorMode::kUseWl : EstimatorMode::kNowl;
    result.audit.push_back({m, use_wl, mode});
    const auto terms = training_terms(data, carry, mode);
    LinearSoftmaxModel next(task->num_classes(), task->dim());
    next.fit(terms, setup.validation, cfg.train);
    model = std::move(next);
    err_val = model->zero_one_error(setup.validation);

    row.counts = counts;
    row.dis_mass = dis_hat;
    row.p_min = cfg.p_min;
    row.mean_query_prob = prob;
    row.err_best = err_val;
    row.test_accuracy = 1.0 - model->zero_one_error(setup.test);
    result.rows.push_back(row);
    if (result.stream_exhausted) break;
  }
  result.final_accuracy = result.rows.empty() ? 0.0 : result.rows.back().test_accuracy;
  finish_result(result, labelers);
  return result;
}

RunResult run_passive_practical(std::shared_ptr<const Task> task, std::size_t budget, const PracticalConfig& cfg,
                                std::uint64_t seed) {
  RunResult result;
  result.algorithm = "passive_practical";
  result.seed = seed;
  RandomSource root(seed);
  const PracticalSetup setup = practical_setup(*task, cfg, root);
  auto stream = make_stream(task);
  Labelers labelers(nullptr);
  RandomSource rng = root.split("passive");
  BlockCounts& counts = result.ledger.block(1);
  std::vector<LabeledPoint> data;
  try {
    for (std::size_t i = 0; i < budget; ++i) {
      Sample s = stream->next(rng);
      ++counts.unlabeled_phase2;
      ++counts.strong_phase2;
      data.push_back({s.x, labelers.strong(s)});
    }
  } catch (const StreamExhausted&) {
    result.stream_exhausted = true;
  }
  std::vector<TrainTerm> terms;
  for (const auto& z : data) terms.push_back({&z.x, z.y, 1.0});
  LinearSoftmaxModel model(task->num_classes(), task->dim());
  model.fit(terms, setup.validation, cfg.train);
  MetricRow row;
  row.seed = seed;
  row.m = 1;
  row.L_m = budget;
  row.counts = counts;
  row.dis_mass = 1.0;
  row.mean_query_prob = 1.0;
  row.err_best = model.zero_one_error(setup.validation);
  row.test_accuracy = 1.0 - model.zero_one_error(setup.test);
  result.rows.push_back(row);
  result.final_accuracy = row.test_accuracy;
  finish_result(result, labelers);
  return result;
}

}  // namespace wlac
