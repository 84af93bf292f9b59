#include "wlac/opsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wlac {
namespace {

std::vector<Label> signature(const HypothesisClass& cls, const Point& x) {
  std::vector<Label> s(cls.size());
  for (HypothesisId h = 0; h < cls.size(); ++h) s[h] = cls.predict(h, x);
  return s;
}

double squared_distance(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::vector<Run> runs_from_mask(const std::vector<char>& mask) {
  std::vector<Run> runs;
  for (std::size_t c = 0; c < mask.size();) {
    if (!mask[c]) {
      ++c;
      continue;
    }
    std::size_t e = c;
    while (e < mask.size() && mask[e]) ++e;
    runs.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(e)});
    c = e;
  }
  return runs;
}

// Shared state of one solve: group right-hand sides and per-cell prefix sums.
struct Problem {
  const OpInstance& inst;
  double f;
  double p_min;
  std::vector<double> b;  // per group
  std::vector<char> covered;

  std::size_t cells() const { return inst.cells->num_cells(); }

  std::vector<double> lhs(const std::vector<double>& P) const {
    std::vector<double> prefix(cells() + 1, 0.0);
    for (std::size_t c = 0; c < cells(); ++c) prefix[c + 1] = prefix[c] + inst.cells->mass(c) / P[c];
    std::vector<double> out(inst.groups.size(), 0.0);
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      for (const auto& r : inst.groups[g]) out[g] += prefix[r.end] - prefix[r.begin];
      out[g] *= f;
    }
    return out;
  }

  double max_ratio(const std::vector<double>& P) const {
    const auto l = lhs(P);
    double r = 0.0;
    for (std::size_t g = 0; g < l.size(); ++g) r = std::max(r, l[g] / b[g]);
    return r;
  }

  double objective(const std::vector<double>& P) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cells(); ++c) s += inst.cells->mass(c) / (1.0 - P[c]);
    return s;
  }

  // Rescales covered cells until the tightest constraint holds with equality
  // (or every covered cell sits on a bound).
  void repair(std::vector<double>& P) const {
    for (int it = 0; it < 200; ++it) {
      const double r = max_ratio(P);
      if (std::abs(r - 1.0) <= 1e-12 || r == 0.0) return;
      bool changed = false;
      for (std::size_t c = 0; c < cells(); ++c) {
        if (!covered[c]) continue;
        const double v = std::clamp(P[c] * r, p_min, kProbCeiling);
        changed |= v != P[c];
        P[c] = v;
      }
      if (!changed) return;
    }
  }
};

}  // namespace

CellIndex::CellIndex(std::shared_ptr<const HypothesisClass> cls, const RegionTest& in_region,
                     std::span<const Point> pool)
    : cls_(std::move(cls)), pool_cell_(pool.size(), npos) {
  grid_ = dynamic_cast<const ThresholdGrid*>(cls_.get());
  std::vector<std::size_t> counts;
  if (grid_ != nullptr) {
    std::vector<std::size_t> key_of(pool.size(), npos);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (in_region(pool[i])) {
        key_of[i] = grid_->cuts_below(pool[i]);
        keys_.push_back(key_of[i]);
      }
    }
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
    counts.assign(keys_.size(), 0);
    reps_.resize(keys_.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (key_of[i] == npos) continue;
      const auto c = static_cast<std::size_t>(std::lower_bound(keys_.begin(), keys_.end(), key_of[i]) - keys_.begin());
      if (counts[c]++ == 0) reps_[c] = pool[i];
      pool_cell_[i] = c;
    }
  } else {
    std::vector<std::vector<Label>> sig_of(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!in_region(pool[i])) continue;
      sig_of[i] = signature(*cls_, pool[i]);
      by_sig_.emplace(sig_of[i], 0);
    }
    std::size_t next = 0;
    for (auto& [sig, id] : by_sig_) id = next++;
    counts.assign(next, 0);
    reps_.resize(next);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (sig_of[i].empty()) continue;
      const std::size_t c = by_sig_.at(sig_of[i]);
      if (counts[c]++ == 0) reps_[c] = pool[i];
      pool_cell_[i] = c;
    }
  }
  mass_.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    mass_[c] = static_cast<double>(counts[c]) / static_cast<double>(pool.size());
  }
}

std::size_t CellIndex::locate(const Point& x) const {
  if (mass_.empty()) return npos;
  if (grid_ != nullptr) {
    const std::size_t key = grid_->cuts_below(x);
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it != keys_.end() && *it == key) return static_cast<std::size_t>(it - keys_.begin());
    if (it == keys_.end()) return keys_.size() - 1;
    if (it == keys_.begin()) return 0;
    const auto c = static_cast<std::size_t>(it - keys_.begin());
    return (*it - key) < (key - *(it - 1)) ? c : c - 1;
  }
  const auto it = by_sig_.find(signature(*cls_, x));
  if (it != by_sig_.end()) return it->second;
  std::size_t best = 0;
  for (std::size_t c = 1; c < reps_.size(); ++c) {
    if (squared_distance(x, reps_[c]) < squared_distance(x, reps_[best])) best = c;
  }
  return best;
}

OpInstance build_op_instance(std::shared_ptr<const HypothesisClass> cls, HypothesisId incumbent,
                             const RegionTest& in_region, std::span<const Point> pool) {
  OpInstance inst;
  inst.incumbent = incumbent;
  inst.cells = std::make_shared<CellIndex>(cls, in_region, pool);
  const CellIndex& cells = *inst.cells;
  const std::size_t H = cls->size(), C = cells.num_cells();
  inst.group_of.assign(H, CellIndex::npos);
  inst.indicator_mass.assign(H, 0.0);

  std::vector<double> prefix(C + 1, 0.0);
  for (std::size_t c = 0; c < C; ++c) prefix[c + 1] = prefix[c] + cells.mass(c);

  std::map<std::vector<Run>, std::size_t> group_ids;
  std::vector<std::vector<Label>> preds;
  if (!cells.threshold()) {
    preds.resize(H, std::vector<Label>(C));
    for (std::size_t c = 0; c < C; ++c) {
      for (HypothesisId h = 0; h < H; ++h) preds[h][c] = cls->predict(h, cells.representative(c));
    }
  }
  for (HypothesisId h = 0; h < H; ++h) {
    std::vector<Run> runs;
    if (cells.threshold()) {
      // h(x) = 1[h < key]; h and the incumbent disagree on keys in (min, max].
      const auto& keys = cells.threshold_keys();
      const std::size_t lo = std::min(h, incumbent), hi = std::max(h, incumbent);
      const auto b = static_cast<std::uint32_t>(std::upper_bound(keys.begin(), keys.end(), lo) - keys.begin());
      const auto e = static_cast<std::uint32_t>(std::upper_bound(keys.begin(), keys.end(), hi) - keys.begin());
      if (e > b) runs.push_back({b, e});
    } else {
      std::vector<char> mask(C);
      for (std::size_t c = 0; c < C; ++c) mask[c] = preds[h][c] != preds[incumbent][c];
      runs = runs_from_mask(mask);
    }
    for (const auto& r : runs) inst.indicator_mass[h] += prefix[r.end] - prefix[r.begin];
    if (runs.empty()) continue;
    auto [it, fresh] = group_ids.emplace(runs, inst.groups.size());
    if (fresh) inst.groups.push_back(std::move(runs));
    inst.group_of[h] = it->second;
  }
  return inst;
}

double OpConstraintSpec::b_nowl(HypothesisId h) const {
  return 2.0 * alpha * alpha * indicator_mass[h] + 2.0 * beta * beta * gamma * regret[h] * tau_prev * delta_prev +
         xi * tau_prev * delta_prev * delta_prev;
}

OpConstraintSpec make_constraint_spec(const OpInstance& inst, std::vector<double> regret, double tau_prev,
                                      double delta_prev, const ScheduleConstants& k) {
  if (regret.size() != inst.indicator_mass.size()) throw std::invalid_argument("make_constraint_spec: regret size");
  OpConstraintSpec s;
  s.indicator_mass = inst.indicator_mass;
  s.regret = std::move(regret);
  s.tau_prev = tau_prev;
  s.delta_prev = delta_prev;
  s.alpha = k.alpha;
  s.beta = k.beta;
  s.gamma = k.gamma;
  s.xi = k.xi;
  return s;
}

QueryPlan QueryPlan::scalar(double p, double p_min) {
  QueryPlan q;
  q.mode_ = Mode::kScalar;
  q.scalar_ = p;
  q.p_min_ = p_min;
  return q;
}

QueryPlan QueryPlan::per_cell(std::shared_ptr<const CellIndex> cells, std::vector<double> probs, double p_min) {
  if (probs.size() != cells->num_cells()) throw std::invalid_argument("QueryPlan: one probability per cell");
  QueryPlan q;
  q.mode_ = Mode::kPerPoint;
  q.cells_ = std::move(cells);
  q.probs_ = std::move(probs);
  q.p_min_ = p_min;
  return q;
}

double QueryPlan::prob_at(const Point& x) const {
  if (mode_ == Mode::kScalar) return scalar_;
  const std::size_t c = cells_->locate(x);
  return c == CellIndex::npos ? p_min_ : probs_[c];
}

double QueryPlan::expected_in_region() const {
  if (mode_ == Mode::kScalar) throw std::logic_error("QueryPlan: scalar plan has no pool");
  double s = 0.0;
  for (std::size_t c = 0; c < probs_.size(); ++c) s += cells_->mass(c) * probs_[c];
  return s;
}

double QueryPlan::mean_in_region() const {
  if (mode_ == Mode::kScalar) return scalar_;
  double s = 0.0, m = 0.0;
  for (std::size_t c = 0; c < probs_.size(); ++c) {
    s += cells_->mass(c) * probs_[c];
    m += cells_->mass(c);
  }
  return m > 0.0 ? s / m : p_min_;
}

double constraint_lhs(const QueryPlan& plan, const OpInstance& inst, HypothesisId h, const OpConstraintSpec& spec) {
  const std::size_t g = inst.group_of.at(h);
  if (g == CellIndex::npos) return 0.0;
  double s = 0.0;
  for (const auto& r : inst.groups[g]) {
    for (std::size_t c = r.begin; c < r.end; ++c) {
      const double p = plan.mode() == QueryPlan::Mode::kScalar ? plan.scalar_value() : plan.cell_probs()[c];
      s += inst.cells->mass(c) / p;
    }
  }
  return s * spec.factor();
}

double constraint_slack(const QueryPlan& plan, const OpInstance& inst, HypothesisId h, const OpConstraintSpec& spec) {
  return spec.b(h) - constraint_lhs(plan, inst, h, spec);
}

double min_slack(const QueryPlan& plan, const OpInstance& inst, const OpConstraintSpec& spec) {
  double best = std::numeric_limits<double>::infinity();
  for (HypothesisId h = 0; h < inst.group_of.size(); ++h) best = std::min(best, constraint_slack(plan, inst, h, spec));
  return best;
}

QueryPlan solve_op(const OpInstance& inst, const OpConstraintSpec& spec, double p_min, const SolverOptions& opt) {
  const std::size_t C = inst.cells->num_cells(), G = inst.groups.size();
  p_min = std::clamp(p_min, kGlobalPMin, kProbCeiling);
  Problem pb{inst, spec.factor(), p_min, std::vector<double>(G, std::numeric_limits<double>::infinity()),
             std::vector<char>(C, 0)};
  for (HypothesisId h = 0; h < inst.group_of.size(); ++h) {
    const std::size_t g = inst.group_of[h];
    if (g != CellIndex::npos) pb.b[g] = std::min(pb.b[g], spec.b(h));
  }
  for (const auto& runs : inst.groups)
    for (const auto& r : runs) std::fill(pb.covered.begin() + r.begin, pb.covered.begin() + r.end, 1);

  auto finish = [&](std::vector<double> P, std::size_t iterations, double dual) {
    QueryPlan plan = QueryPlan::per_cell(inst.cells, std::move(P), p_min);
    plan.diagnostics.iterations = iterations;
    plan.diagnostics.objective = pb.objective(plan.cell_probs());
    plan.diagnostics.dual_bound = dual;
    plan.diagnostics.max_violation = -min_slack(plan, inst, spec);
    return plan;
  };

  std::vector<double> P(C, p_min);
  if (G == 0 || pb.f == 0.0) return finish(P, 0, pb.objective(P));

  {
    std::vector<double> top(C, kProbCeiling);
    const auto l = pb.lhs(top);
    for (std::size_t g = 0; g < G; ++g) {
      if (l[g] > pb.b[g] * (1.0 + 1e-12)) {
        QueryPlan plan = finish(top, 0, 0.0);
        plan.diagnostics.infeasible = true;
        return plan;
      }
    }
  }
  if (pb.max_ratio(P) <= 1.0) return finish(P, 0, pb.objective(P));

  std::vector<double> lambda(G, 1.0 / pb.f);
  std::vector<double> Lam(C + 1);
  std::vector<double> best_P;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  std::size_t t = 0;
  for (t = 1; t <= opt.max_iterations; ++t) {
    std::fill(Lam.begin(), Lam.end(), 0.0);
    for (std::size_t g = 0; g < G; ++g) {
      for (const auto& r : inst.groups[g]) {
        Lam[r.begin] += lambda[g];
        Lam[r.end] -= lambda[g];
      }
    }
    double run = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      run += Lam[c];
      const double s = std::sqrt(std::max(pb.f * run, 0.0));
      P[c] = std::clamp(s / (1.0 + s), p_min, kProbCeiling);
      Lam[c] = std::max(run, 0.0);
    }
    const auto l = pb.lhs(P);

    if (t % opt.check_every == 0 || t == opt.max_iterations) {
      double dual = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        dual += inst.cells->mass(c) * (1.0 / (1.0 - P[c]) + pb.f * Lam[c] / P[c]);
      }
      for (std::size_t g = 0; g < G; ++g) dual -= lambda[g] * pb.b[g];
      best_dual = std::max(best_dual, dual);
      std::vector<double> cand = P;
      pb.repair(cand);
      if (pb.max_ratio(cand) <= 1.0 + 1e-9) {
        const double obj = pb.objective(cand);
        if (obj < best_obj) {
          best_obj = obj;
          best_P = std::move(cand);
        }
      }
      if (best_obj - best_dual <= opt.gap_tolerance * std::max(best_obj, 1e-12)) break;
    }

    const double step = opt.step / std::sqrt(static_cast<double>(t));
    for (std::size_t g = 0; g < G; ++g) {
      const double grad = std::clamp(step * (l[g] / pb.b[g] - 1.0), -5.0, 5.0);
      lambda[g] = std::max(lambda[g] * std::exp(grad), 1e-300);
    }
  }
  if (best_P.empty()) {
    best_P.assign(C, kProbCeiling);
    pb.repair(best_P);
  }
  return finish(std::move(best_P), std::min(t, opt.max_iterations), best_dual);
}

QueryPlan feasible_fallback(const QueryPlan& p_nowl, double wlerr_dot, double p_min) {
  if (p_nowl.mode() == QueryPlan::Mode::kScalar) {
    return QueryPlan::scalar(std::clamp(4.0 * p_nowl.scalar_value() * wlerr_dot, p_min, 1.0), p_min);
  }
  std::vector<double> probs = p_nowl.cell_probs();
  for (double& p : probs) p = std::clamp(4.0 * p * wlerr_dot, p_min, 1.0);
  QueryPlan plan = QueryPlan::per_cell(p_nowl.cells(), std::move(probs), p_min);
  plan.diagnostics.used_fallback = true;
  return plan;
}

QueryPlan solve_op_practical(double wlerr_dot, double p_min) {
  return QueryPlan::scalar(std::max(wlerr_dot, p_min), p_min);
}

}  // namespace wlac
