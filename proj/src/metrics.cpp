#include "xtnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace xtnet {

namespace {

std::string combo_str(const TreatmentCombo& t) {
  std::string s = "(";
  for (std::size_t k = 0; k < t.size(); ++k)
    s += (k ? "," : "") + std::to_string(t[k]);
  return s + ")";
}

// Ascending ranks with ties averaged.
std::vector<double> tied_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

bool dominates(const TreatmentCombo& hi, const TreatmentCombo& lo) {
  for (std::size_t k = 0; k < hi.size(); ++k)
    if (hi[k] < lo[k]) return false;
  return true;
}

}  // namespace

std::pair<double, double> ranking_error(
    const std::vector<std::vector<double>>& pred,
    const std::vector<std::vector<double>>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("ranking_error: shape mismatch");
  std::vector<double> per_unit;
  per_unit.reserve(pred.size());
  for (std::size_t u = 0; u < pred.size(); ++u) {
    const std::size_t c = pred[u].size();
    if (c < 2 || truth[u].size() != c)
      throw std::invalid_argument(
          "ranking_error: need at least 2 combos per unit");
    const auto rp = tied_ranks(pred[u]);
    const auto rt = tied_ranks(truth[u]);
    double footrule = 0.0;
    for (std::size_t i = 0; i < c; ++i) footrule += std::abs(rp[i] - rt[i]);
    per_unit.push_back(footrule / static_cast<double>((c * c) / 2));
  }
  const double n = static_cast<double>(per_unit.size());
  const double mean =
      std::accumulate(per_unit.begin(), per_unit.end(), 0.0) / n;
  double var = 0.0;
  for (double e : per_unit) var += (e - mean) * (e - mean);
  return {mean, std::sqrt(var / n)};
}

CostModel CostModel::unit(const std::vector<int>& levels) {
  CostModel cm;
  for (int a : levels) {
    std::vector<double> c(static_cast<std::size_t>(a) + 1);
    for (int l = 0; l <= a; ++l) c[static_cast<std::size_t>(l)] = l;
    cm.level_costs.push_back(std::move(c));
  }
  return cm;
}

double CostModel::cost(const TreatmentCombo& t) const {
  if (t.size() != level_costs.size())
    throw std::invalid_argument("CostModel: category count mismatch");
  double c = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0 || static_cast<std::size_t>(t[k]) >= level_costs[k].size())
      throw std::invalid_argument("CostModel: level out of range");
    c += level_costs[k][static_cast<std::size_t>(t[k])];
  }
  return c;
}

void CostModel::validate() const {
  for (const auto& col : level_costs) {
    if (col.empty() || col[0] != 0.0)
      throw std::invalid_argument("CostModel: level-0 cost must be 0");
    for (std::size_t l = 1; l < col.size(); ++l)
      if (col[l] < col[l - 1])
        throw std::invalid_argument("CostModel: costs must be non-decreasing");
  }
}

void UnitInstance::validate() const {
  const std::size_t n = combo_count(levels);
  if (ey.size() != n || ec.size() != n)
    throw std::invalid_argument("UnitInstance: per-combo array size mismatch");
  if (ey[0] != 0.0 || ec[0] != 0.0)
    throw std::invalid_argument("UnitInstance: baseline combo must be zeroed");
  for (double v : ey)
    if (!std::isfinite(v))
      throw std::invalid_argument("UnitInstance: non-finite outcome");
  for (double v : ec)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("UnitInstance: bad cost");
}

UnitInstance unit_from_model(UpliftModel& model, const double* x,
                             const std::vector<int>& levels,
                             const CostModel& costs, std::size_t id) {
  UnitInstance u;
  u.id = id;
  u.levels = levels;
  for (const auto& t : enumerate_combos(levels)) {
    u.ey.push_back(predicted_cate(model, x, t)[0]);
    u.ec.push_back(costs.cost(t));
  }
  return u;
}

UnitInstance unit_from_oracle(const PotentialOutcomeOracle& oracle,
                              const double* x, const CostModel& costs,
                              std::size_t id) {
  UnitInstance u;
  u.id = id;
  u.levels = oracle.config().levels;
  for (const auto& t : enumerate_combos(u.levels)) {
    u.ey.push_back(true_cate(oracle, x, t));
    u.ec.push_back(costs.cost(t));
  }
  return u;
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::qini: return "qini";
    case PolicyKind::aucc: return "aucc";
    case PolicyKind::mv_aucc: return "mv_aucc";
    case PolicyKind::mcmv_aucc: return "mcmv_aucc";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "qini") return PolicyKind::qini;
  if (s == "aucc") return PolicyKind::aucc;
  if (s == "mv_aucc") return PolicyKind::mv_aucc;
  if (s == "mcmv_aucc") return PolicyKind::mcmv_aucc;
  throw std::invalid_argument("unknown policy kind: " + s);
}

namespace {

// Group means over all combos at one intensity level.
struct GroupStats {
  std::vector<double> y_mean, c_mean;  // indexed by intensity q
};

GroupStats group_stats(const UnitInstance& u) {
  const auto combos = enumerate_combos(u.levels);
  const int qmax = total_level(TreatmentCombo(
      u.levels.begin(), u.levels.end()));
  GroupStats g;
  g.y_mean.assign(static_cast<std::size_t>(qmax) + 1, 0.0);
  g.c_mean.assign(static_cast<std::size_t>(qmax) + 1, 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(qmax) + 1, 0);
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto q = static_cast<std::size_t>(total_level(combos[i]));
    g.y_mean[q] += u.ey[i];
    g.c_mean[q] += u.ec[i];
    ++count[q];
  }
  for (std::size_t q = 0; q < count.size(); ++q) {
    g.y_mean[q] /= static_cast<double>(count[q]);
    g.c_mean[q] /= static_cast<double>(count[q]);
  }
  return g;
}

}  // namespace

double policy_score(PolicyKind kind, const UnitInstance& u,
                    const TreatmentCombo& to, const TreatmentCombo& from) {
  const std::size_t it = combo_index(to, u.levels);
  const std::size_t io = combo_index(from, u.levels);
  switch (kind) {
    case PolicyKind::qini:
      return u.ey[it];
    case PolicyKind::aucc:
      if (u.ec[it] <= 0.0)
        throw std::invalid_argument("policy_score: combo " + combo_str(to) +
                                    " has zero expected cost");
      return u.ey[it] / u.ec[it];
    case PolicyKind::mv_aucc: {
      const double dc = u.ec[it] - u.ec[io];
      if (dc <= 0.0)
        throw std::invalid_argument("policy_score: step to " + combo_str(to) +
                                    " has non-positive marginal cost");
      return (u.ey[it] - u.ey[io]) / dc;
    }
    case PolicyKind::mcmv_aucc: {
      const int q = total_level(to);
      if (q != total_level(from) + 1)
        throw std::invalid_argument(
            "policy_score: mcmv_aucc steps raise intensity by exactly 1");
      const auto g = group_stats(u);
      const auto qi = static_cast<std::size_t>(q);
      const double dc = g.c_mean[qi] - g.c_mean[qi - 1];
      if (dc <= 0.0)
        throw std::invalid_argument("policy_score: intensity group " +
                                    std::to_string(q) +
                                    " has non-positive marginal cost");
      return (g.y_mean[qi] - g.y_mean[qi - 1]) / dc;
    }
  }
  throw std::invalid_argument("policy_score: bad kind");
}

namespace {

// Whole-combo policies (qini, aucc): one global descending-score sweep;
// a later pick may upgrade a unit to a dominating combo.
AllocationPlan allocate_whole_combo(PolicyKind kind,
                                    const std::vector<UnitInstance>& units,
                                    double budget) {
  struct Cand {
    double score;
    std::size_t unit;
    std::size_t combo_idx;
  };
  std::vector<TreatmentCombo> combos;
  if (!units.empty()) combos = enumerate_combos(units[0].levels);
  std::vector<Cand> cands;
  for (std::size_t u = 0; u < units.size(); ++u)
    for (std::size_t c = 1; c < combos.size(); ++c) {
      if (units[u].ec[c] <= 0.0) continue;
      const double score = kind == PolicyKind::qini
                               ? units[u].ey[c]
                               : units[u].ey[c] / units[u].ec[c];
      cands.push_back({score, u, c});
    }
  std::stable_sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.unit != b.unit) return a.unit < b.unit;
    return combos[a.combo_idx] < combos[b.combo_idx];
  });

  AllocationPlan plan;
  plan.kind = kind;
  if (!units.empty()) plan.levels = units[0].levels;
  std::vector<std::size_t> cur(units.size(), 0);  // current combo index
  double spent = 0.0;
  for (const Cand& c : cands) {
    const auto& u = units[c.unit];
    if (!dominates(combos[c.combo_idx], combos[cur[c.unit]])) continue;
    const double inc = u.ec[c.combo_idx] - u.ec[cur[c.unit]];
    if (inc <= 0.0) continue;
    if (spent + inc > budget + 1e-12) continue;
    plan.increments.push_back({u.id, combos[cur[c.unit]], combos[c.combo_idx],
                               inc, c.score});
    spent += inc;
    cur[c.unit] = c.combo_idx;
  }
  return plan;
}

// Stepwise policies (mv_aucc, mcmv_aucc): lazy max-heap over per-unit
// candidate steps; entries are invalidated by a per-unit version stamp.
AllocationPlan allocate_stepwise(PolicyKind kind,
                                 const std::vector<UnitInstance>& units,
                                 double budget) {
  struct Entry {
    double score;
    std::size_t unit;
    TreatmentCombo to;
    std::size_t version;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score < b.score;  // max-heap on score
    if (a.unit != b.unit) return a.unit > b.unit;
    return a.to > b.to;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);

  std::vector<TreatmentCombo> cur;
  std::vector<std::size_t> version(units.size(), 0);
  std::vector<GroupStats> stats;
  const bool grouped = kind == PolicyKind::mcmv_aucc;
  for (const auto& u : units) {
    cur.push_back(baseline_combo(u.levels.size()));
    if (grouped) stats.push_back(group_stats(u));
  }

  auto push_candidates = [&](std::size_t ui) {
    const auto& u = units[ui];
    const auto& from = cur[ui];
    const std::size_t io = combo_index(from, u.levels);
    if (!grouped) {
      for (std::size_t k = 0; k < u.levels.size(); ++k) {
        if (from[k] >= u.levels[k]) continue;
        TreatmentCombo to = from;
        ++to[k];
        const std::size_t it = combo_index(to, u.levels);
        const double dc = u.ec[it] - u.ec[io];
        if (dc <= 0.0) continue;
        heap.push({(u.ey[it] - u.ey[io]) / dc, ui, std::move(to), version[ui]});
      }
    } else {
      const auto q = static_cast<std::size_t>(total_level(from));
      if (q + 1 >= stats[ui].y_mean.size()) return;  // already at max intensity
      // realize the increment as the best predicted combo reachable at
      // the next intensity
      const auto combos = enumerate_combos(u.levels);
      double best_y = 0.0;
      const TreatmentCombo* best = nullptr;
      for (std::size_t c = 0; c < combos.size(); ++c) {
        if (static_cast<std::size_t>(total_level(combos[c])) != q + 1) continue;
        if (!dominates(combos[c], from)) continue;
        if (!best || u.ey[c] > best_y ||
            (u.ey[c] == best_y && combos[c] < *best)) {
          best_y = u.ey[c];
          best = &combos[c];
        }
      }
      if (!best) return;
      const std::size_t it = combo_index(*best, u.levels);
      if (u.ec[it] - u.ec[io] <= 0.0) return;
      const double dcm = stats[ui].c_mean[q + 1] - stats[ui].c_mean[q];
      if (dcm <= 0.0) return;
      const double gamma = (stats[ui].y_mean[q + 1] - stats[ui].y_mean[q]) / dcm;
      heap.push({gamma, ui, *best, version[ui]});
    }
  };

  for (std::size_t ui = 0; ui < units.size(); ++ui) push_candidates(ui);

  AllocationPlan plan;
  plan.kind = kind;
  if (!units.empty()) plan.levels = units[0].levels;
  double spent = 0.0;
  while (!heap.empty()) {
    Entry e = heap.top();
    heap.pop();
    if (e.version != version[e.unit]) continue;  // stale
    const auto& u = units[e.unit];
    const double inc = u.ec[combo_index(e.to, u.levels)] -
                       u.ec[combo_index(cur[e.unit], u.levels)];
    if (spent + inc > budget + 1e-12) continue;  // never affordable again
    plan.increments.push_back({u.id, cur[e.unit], e.to, inc, e.score});
    spent += inc;
    cur[e.unit] = e.to;
    ++version[e.unit];
    push_candidates(e.unit);
  }
  return plan;
}

}  // namespace

AllocationPlan allocate(PolicyKind kind, const std::vector<UnitInstance>& units,
                        double budget) {
  if (budget < 0.0) throw std::invalid_argument("allocate: negative budget");
  for (const auto& u : units) u.validate();
  switch (kind) {
    case PolicyKind::qini:
    case PolicyKind::aucc:
      return allocate_whole_combo(kind, units, budget);
    case PolicyKind::mv_aucc:
    case PolicyKind::mcmv_aucc:
      return allocate_stepwise(kind, units, budget);
  }
  throw std::invalid_argument("allocate: bad kind");
}

namespace {

// (cumulative cost, cumulative actual outcome) checkpoints of a plan.
std::vector<std::pair<double, double>> plan_checkpoints(
    const AllocationPlan& plan,
    const std::vector<std::vector<double>>& actual_ey,
    const std::vector<int>& levels,
    const std::vector<std::size_t>& order) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(order.size());
  double cost = 0.0, outcome = 0.0;
  for (std::size_t i : order) {
    const Increment& inc = plan.increments[i];
    if (inc.unit >= actual_ey.size())
      throw std::invalid_argument("uplift_curve: actuals missing unit " +
                                  std::to_string(inc.unit));
    const auto& row = actual_ey[inc.unit];
    const std::size_t it = combo_index(inc.to, levels);
    const std::size_t io = combo_index(inc.from, levels);
    if (it >= row.size() || io >= row.size())
      throw std::invalid_argument("uplift_curve: actuals missing combo");
    cost += inc.cost;
    outcome += row[it] - row[io];
    pts.emplace_back(cost, outcome);
  }
  return pts;
}

std::vector<double> sample_step(const std::vector<std::pair<double, double>>& pts,
                                const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  std::size_t i = 0;
  double cum = 0.0;
  for (double b : grid) {
    while (i < pts.size() && pts[i].first <= b + 1e-12) cum = pts[i++].second;
    out.push_back(cum);
  }
  return out;
}

}  // namespace

UpliftCurve uplift_curve(const AllocationPlan& plan,
                         const std::vector<std::vector<double>>& actual_ey,
                         const std::vector<double>& budget_grid) {
  std::vector<std::size_t> order(plan.increments.size());
  std::iota(order.begin(), order.end(), 0);
  UpliftCurve curve;
  curve.budgets = budget_grid;
  curve.outcomes = sample_step(
      plan_checkpoints(plan, actual_ey, plan.levels, order), budget_grid);
  return curve;
}

UpliftCurve random_baseline_curve(const AllocationPlan& plan,
                                  const std::vector<std::vector<double>>& actual_ey,
                                  const std::vector<double>& budget_grid,
                                  std::size_t shuffles, std::uint64_t seed) {
  UpliftCurve avg;
  avg.budgets = budget_grid;
  avg.outcomes.assign(budget_grid.size(), 0.0);
  if (plan.increments.empty() || shuffles == 0) return avg;

  const auto& levels = plan.levels;
  // per-unit chains must stay in order; shuffle the interleaving only
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> chains;
  {
    std::vector<std::size_t> chain_of;
    std::vector<std::size_t> unit_ids;
    for (std::size_t i = 0; i < plan.increments.size(); ++i) {
      const std::size_t uid = plan.increments[i].unit;
      std::size_t c = 0;
      for (; c < unit_ids.size(); ++c)
        if (unit_ids[c] == uid) break;
      if (c == unit_ids.size()) {
        unit_ids.push_back(uid);
        chains.emplace_back();
      }
      chains[c].push_back(i);
      labels.push_back(c);
    }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < shuffles; ++s) {
    std::vector<std::size_t> lab = labels;
    std::shuffle(lab.begin(), lab.end(), rng);
    std::vector<std::size_t> next(chains.size(), 0);
    std::vector<std::size_t> order;
    order.reserve(lab.size());
    for (std::size_t c : lab) order.push_back(chains[c][next[c]++]);
    const auto out =
        sample_step(plan_checkpoints(plan, actual_ey, levels, order), budget_grid);
    for (std::size_t i = 0; i < out.size(); ++i) avg.outcomes[i] += out[i];
  }
  for (double& v : avg.outcomes) v /= static_cast<double>(shuffles);
  return avg;
}

double curve_area_score(const UpliftCurve& curve, const UpliftCurve& random_curve,
                        double b_max) {
  if (curve.budgets != random_curve.budgets)
    throw std::invalid_argument("curve_area_score: mismatched budget grids");
  if (curve.budgets.size() < 2 || b_max <= 0.0)
    throw std::invalid_argument("curve_area_score: degenerate grid");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.budgets.size(); ++i) {
    const double d0 = curve.outcomes[i - 1] - random_curve.outcomes[i - 1];
    const double d1 = curve.outcomes[i] - random_curve.outcomes[i];
    area += 0.5 * (d0 + d1) * (curve.budgets[i] - curve.budgets[i - 1]);
  }
  return area / b_max;
}

std::vector<double> budget_grid(double b_max, std::size_t points) {
  if (points < 2 || b_max <= 0.0)
    throw std::invalid_argument("budget_grid: need b_max > 0 and >= 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = b_max * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

void write_curve_csv(const UpliftCurve& curve, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "budget,outcome\n");
  for (std::size_t i = 0; i < curve.budgets.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\n", curve.budgets[i], curve.outcomes[i]);
  std::fclose(f);
}

double evaluate_policy(PolicyKind kind, const std::vector<UnitInstance>& pred_units,
                       const std::vector<std::vector<double>>& actual_ey,
                       double budget, std::size_t grid_points,
                       std::uint64_t seed) {
  const auto plan = allocate(kind, pred_units, budget);
  const auto grid = budget_grid(budget, grid_points);
  const auto curve = uplift_curve(plan, actual_ey, grid);
  const auto base = random_baseline_curve(plan, actual_ey, grid, 32, seed);
  return curve_area_score(curve, base, budget);
}

namespace {

bool integer_costs(const std::vector<UnitInstance>& units) {
  for (const auto& u : units)
    for (double c : u.ec)
      if (std::abs(c - std::round(c)) > 1e-6) return false;
  return true;
}

std::vector<double> knapsack_table(const std::vector<UnitInstance>& units,
                                   std::size_t b_int) {
  std::vector<double> dp(b_int + 1, 0.0);
  for (const auto& u : units) {
    std::vector<double> next(b_int + 1,
                             -std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b <= b_int; ++b)
      for (std::size_t c = 0; c < u.combos(); ++c) {
        const auto cost = static_cast<std::size_t>(std::llround(u.ec[c]));
        if (cost > b) continue;
        next[b] = std::max(next[b], dp[b - cost] + u.ey[c]);
      }
    dp = std::move(next);
  }
  return dp;
}

}  // namespace

std::vector<double> ideal_outcome_table(const std::vector<UnitInstance>& units,
                                        double b_max) {
  for (const auto& u : units) u.validate();
  if (b_max < 0.0)
    throw std::invalid_argument("ideal_outcome_table: negative budget");
  if (!integer_costs(units))
    throw std::invalid_argument(
        "ideal_outcome_table: requires integer expected costs");
  return knapsack_table(units, static_cast<std::size_t>(b_max + 1e-9));
}

double ideal_allocation(const std::vector<UnitInstance>& units, double budget) {
  for (const auto& u : units) u.validate();
  if (budget < 0.0) throw std::invalid_argument("ideal_allocation: negative budget");
  if (units.empty()) return 0.0;
  if (integer_costs(units))
    return knapsack_table(units, static_cast<std::size_t>(budget + 1e-9)).back();

  // fractional costs: exhaustive search over assignment vectors
  double combos_pow = 1.0;
  for (const auto& u : units) combos_pow *= static_cast<double>(u.combos());
  if (combos_pow > (1 << 24))
    throw std::invalid_argument(
        "ideal_allocation: instance too large for exact search; use integer "
        "costs or a greedy bound");
  double best = 0.0;
  std::vector<std::size_t> pick(units.size(), 0);
  while (true) {
    double cost = 0.0, val = 0.0;
    for (std::size_t u = 0; u < units.size(); ++u) {
      cost += units[u].ec[pick[u]];
      val += units[u].ey[pick[u]];
    }
    if (cost <= budget + 1e-12) best = std::max(best, val);
    std::size_t u = 0;
    for (; u < units.size(); ++u) {
      if (++pick[u] < units[u].combos()) break;
      pick[u] = 0;
    }
    if (u == units.size()) break;
  }
  return best;
}

void TheoremInstanceConfig::validate() const {
  if (levels.size() < 2)
    throw std::invalid_argument("TheoremInstanceConfig: need >= 2 categories");
  for (int a : levels)
    if (a < 1)
      throw std::invalid_argument("TheoremInstanceConfig: levels must be >= 1");
  if (interaction_max < 0.0)
    throw std::invalid_argument("TheoremInstanceConfig: G must be >= 0");
  if (interaction_density < 0.0 || interaction_density > 1.0)
    throw std::invalid_argument("TheoremInstanceConfig: rho must be in [0,1]");
  if (model_noise < 0.0)
    throw std::invalid_argument("TheoremInstanceConfig: noise must be >= 0");
  if (units == 0 || instances == 0 || model_draws == 0)
    throw std::invalid_argument("TheoremInstanceConfig: counts must be positive");
  if (budget_points < 2)
    throw std::invalid_argument("TheoremInstanceConfig: budget_points >= 2");
}

std::vector<TheoremInstance> gen_theorem_instances(
    const TheoremInstanceConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> quality(0.15, 1.85);
  std::uniform_real_distribution<double> jitter(0.96, 1.04);
  std::uniform_real_distribution<double> gmag(0.5, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.model_noise);

  const std::size_t m = cfg.levels.size();
  const auto combos = enumerate_combos(cfg.levels);
  const std::size_t active_units = static_cast<std::size_t>(
      std::ceil(cfg.interaction_density * static_cast<double>(cfg.units) - 1e-9));

  // E[Y] from per-category response curves plus a pairwise interaction
  // that grows with the combined level once both categories are active.
  auto build_ey = [&](const std::vector<std::vector<double>>& f,
                      const std::vector<double>& g) {
    std::vector<double> ey;
    ey.reserve(combos.size());
    for (const auto& t : combos) {
      double y = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        y += f[k][static_cast<std::size_t>(t[k])];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          if (t[i] > 0 && t[j] > 0)
            y += g[i * m + j] * (t[i] + t[j] - 1) /
                 (cfg.levels[i] + cfg.levels[j] - 1);
      ey.push_back(y);
    }
    return ey;
  };

  std::vector<TheoremInstance> out;
  out.reserve(cfg.instances);
  for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
    TheoremInstance ti;
    std::vector<std::vector<std::vector<double>>> inst_f;  // unit, cat, level
    std::vector<std::vector<double>> inst_g;               // unit, pair
    for (std::size_t ui = 0; ui < cfg.units; ++ui) {
      // concave strictly-increasing response: a per-unit quality scale
      // times a shared geometric decay, lightly jittered per category
      // (units are heterogeneous, categories within a unit are not)
      const double q_u = quality(rng);
      std::vector<std::vector<double>> f(m);
      for (std::size_t k = 0; k < m; ++k) {
        f[k].assign(static_cast<std::size_t>(cfg.levels[k]) + 1, 0.0);
        double decay = 1.0;
        for (int l = 1; l <= cfg.levels[k]; ++l) {
          f[k][static_cast<std::size_t>(l)] =
              f[k][static_cast<std::size_t>(l) - 1] + q_u * jitter(rng) * decay;
          decay *= 0.9;
        }
      }
      // bounded pairwise interaction, active on a rho fraction of units
      std::vector<double> g(m * m, 0.0);
      const bool active = ui < active_units && cfg.interaction_max > 0.0;
      for (std::size_t i = 0; i < m && active; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          g[i * m + j] = cfg.interaction_max * gmag(rng);

      UnitInstance u;
      u.id = ui;
      u.levels = cfg.levels;
      u.ey = build_ey(f, g);
      for (const auto& t : combos)
        u.ec.push_back(static_cast<double>(total_level(t)));
      ti.truth.push_back(std::move(u));
      ti.b_max += ti.truth.back().ec.back();
      inst_f.push_back(std::move(f));
      inst_g.push_back(std::move(g));
    }
    for (std::size_t draw = 0; draw < cfg.model_draws; ++draw) {
      std::vector<UnitInstance> pred;
      pred.reserve(cfg.units);
      for (std::size_t ui = 0; ui < cfg.units; ++ui) {
        // model uncertainty enters at the response-curve level: each
        // estimated per-level marginal carries its own error, which
        // then propagates through the prefix sums
        const auto& f = inst_f[ui];
        auto g = inst_g[ui];
        for (double& v : g)
          if (v > 0.0) v = std::max(0.0, v + noise(rng));
        UnitInstance u = ti.truth[ui];
        u.ey = build_ey(f, g);
        for (std::size_t c = 1; c < u.ey.size(); ++c) u.ey[c] += noise(rng);
        pred.push_back(std::move(u));
      }
      ti.preds.push_back(std::move(pred));
    }
    validate_assumptions(ti.truth, cfg);
    out.push_back(std::move(ti));
  }
  return out;
}

void validate_assumptions(const std::vector<UnitInstance>& truth,
                          const TheoremInstanceConfig& cfg) {
  const auto combos = enumerate_combos(cfg.levels);
  const std::size_t m = cfg.levels.size();
  std::size_t multi_total = 0, multi_active = 0;
  for (const auto& u : truth) {
    u.validate();
    // single-category responses: strictly increasing, concave
    for (std::size_t k = 0; k < m; ++k) {
      double prev_val = 0.0, prev_diff = std::numeric_limits<double>::infinity();
      for (int l = 1; l <= cfg.levels[k]; ++l) {
        TreatmentCombo t(m, 0);
        t[k] = l;
        const double val = u.ey[combo_index(t, cfg.levels)];
        const double diff = val - prev_val;
        if (diff <= 1e-12)
          throw std::runtime_error("assumptions: response not strictly increasing");
        if (diff >= prev_diff + 1e-12)
          throw std::runtime_error("assumptions: response not concave");
        prev_val = val;
        prev_diff = diff;
      }
    }
    // interactions: bounded, zero unless >= 2 active categories
    for (std::size_t c = 0; c < combos.size(); ++c) {
      double additive = 0.0;
      int active_cats = 0;
      for (std::size_t k = 0; k < m; ++k) {
        TreatmentCombo t(m, 0);
        t[k] = combos[c][k];
        additive += u.ey[combo_index(t, cfg.levels)];
        active_cats += combos[c][k] > 0;
      }
      const double inter = u.ey[c] - additive;
      const double pairs_bound =
          cfg.interaction_max * static_cast<double>(m * (m - 1)) / 2.0;
      if (inter < -1e-9 || inter > pairs_bound + 1e-9)
        throw std::runtime_error("assumptions: interaction out of bounds");
      if (active_cats <= 1 && std::abs(inter) > 1e-9)
        throw std::runtime_error(
            "assumptions: interaction active below two categories");
      if (active_cats >= 2) {
        ++multi_total;
        if (inter > 1e-9) ++multi_active;
      }
    }
    // costs strictly increasing in every level raise
    for (std::size_t c = 0; c < combos.size(); ++c)
      for (std::size_t k = 0; k < m; ++k) {
        if (combos[c][k] >= cfg.levels[k]) continue;
        TreatmentCombo t = combos[c];
        ++t[k];
        if (u.ec[combo_index(t, cfg.levels)] <= u.ec[c])
          throw std::runtime_error("assumptions: cost not strictly increasing");
      }
  }
  if (cfg.interaction_max > 0.0 && multi_total > 0) {
    const double density = static_cast<double>(multi_active) /
                           static_cast<double>(multi_total);
    if (density + 1e-9 < cfg.interaction_density)
      throw std::runtime_error("assumptions: interaction density below rho");
  }
}

namespace {

double instance_metric_error(PolicyKind kind, const TheoremInstance& inst,
                             std::size_t grid_points,
                             const std::vector<double>& ideal_table) {
  const auto grid = budget_grid(inst.b_max, grid_points);
  std::vector<std::vector<double>> actual;
  actual.reserve(inst.truth.size());
  for (const auto& u : inst.truth) actual.push_back(u.ey);
  double total = 0.0;
  for (const auto& pred : inst.preds) {
    const auto plan = allocate(kind, pred, inst.b_max);
    const auto curve = uplift_curve(plan, actual, grid);
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double o0 =
          ideal_table[static_cast<std::size_t>(grid[i - 1] + 1e-9)] -
          curve.outcomes[i - 1];
      const double o1 = ideal_table[static_cast<std::size_t>(grid[i] + 1e-9)] -
                        curve.outcomes[i];
      integral += 0.5 * (std::abs(o0) + std::abs(o1)) * (grid[i] - grid[i - 1]);
    }
    total += integral;
  }
  return total / static_cast<double>(inst.preds.size());
}

}  // namespace

double expected_metric_error(PolicyKind kind,
                             const std::vector<TheoremInstance>& instances,
                             std::size_t grid_points) {
  if (instances.empty())
    throw std::invalid_argument("expected_metric_error: no instances");
  double total = 0.0;
  for (const auto& inst : instances)
    total += instance_metric_error(kind, inst, grid_points,
                                   ideal_outcome_table(inst.truth, inst.b_max));
  return total / static_cast<double>(instances.size());
}

namespace {

// Lemma RoI Ordering: along every single-category path the total RoI
// f(l)/c(l) strictly decreases with the level.
bool lemma_roi_ordering(const std::vector<UnitInstance>& truth) {
  for (const auto& u : truth) {
    const std::size_t m = u.levels.size();
    for (std::size_t k = 0; k < m; ++k) {
      double prev = std::numeric_limits<double>::infinity();
      for (int l = 1; l <= u.levels[k]; ++l) {
        TreatmentCombo t(m, 0);
        t[k] = l;
        const std::size_t i = combo_index(t, u.levels);
        const double roi = u.ey[i] / u.ec[i];
        if (roi >= prev - 1e-12) return false;
        prev = roi;
      }
    }
  }
  return true;
}

// A.1 exchange: demote the deepest Qini pick to its best intensity-1
// combo and re-spend the savings optimally; the result should not fall
// below the Qini outcome.
bool exchange_check(const TheoremInstance& inst, std::size_t grid_points) {
  (void)grid_points;
  const double budget = std::floor(inst.b_max / 2.0);
  if (budget <= 0.0) return true;
  const auto plan = allocate(PolicyKind::qini, inst.truth, budget);
  // final assignment per unit
  std::vector<TreatmentCombo> cur;
  for (const auto& u : inst.truth) cur.push_back(baseline_combo(u.levels.size()));
  for (const auto& inc : plan.increments) cur[inc.unit] = inc.to;
  double qini_outcome = 0.0;
  for (std::size_t ui = 0; ui < inst.truth.size(); ++ui)
    qini_outcome +=
        inst.truth[ui].ey[combo_index(cur[ui], inst.truth[ui].levels)];

  // deepest (costliest) multi-intensity pick
  std::size_t target = inst.truth.size();
  double target_cost = 0.0;
  for (std::size_t ui = 0; ui < inst.truth.size(); ++ui) {
    if (total_level(cur[ui]) < 2) continue;
    const double c =
        inst.truth[ui].ec[combo_index(cur[ui], inst.truth[ui].levels)];
    if (target == inst.truth.size() || c > target_cost) {
      target = ui;
      target_cost = c;
    }
  }
  if (target == inst.truth.size()) return true;  // nothing to exchange

  // best intensity-1 replacement for the target unit
  const auto& tu = inst.truth[target];
  const auto combos = enumerate_combos(tu.levels);
  double best_y = -std::numeric_limits<double>::infinity();
  double best_c = 0.0;
  for (std::size_t c = 0; c < combos.size(); ++c)
    if (total_level(combos[c]) == 1 && tu.ey[c] > best_y) {
      best_y = tu.ey[c];
      best_c = tu.ec[c];
    }
  TreatmentCombo t1best;
  for (std::size_t c = 0; c < combos.size(); ++c)
    if (total_level(combos[c]) == 1 && tu.ey[c] == best_y) {
      t1best = combos[c];
      break;
    }
  // re-spend the savings over everything still purchasable, which
  // includes upgrading the demoted unit again from its new floor
  std::vector<UnitInstance> pool;
  for (std::size_t ui = 0; ui < inst.truth.size(); ++ui)
    if (ui != target) pool.push_back(inst.truth[ui]);
  UnitInstance rebased = tu;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    if (dominates(combos[c], t1best)) {
      rebased.ey[c] = tu.ey[c] - best_y;
      rebased.ec[c] = tu.ec[c] - best_c;
    } else {
      rebased.ey[c] = 0.0;
      rebased.ec[c] = 0.0;
    }
  }
  pool.push_back(std::move(rebased));
  const double exchanged = best_y + ideal_allocation(pool, budget - best_c);
  return exchanged >= qini_outcome - 1e-9;
}

}  // namespace

DominanceReport theorem_harness(const TheoremInstanceConfig& cfg) {
  const auto instances = gen_theorem_instances(cfg);
  DominanceReport report;
  for (const auto& inst : instances) {
    const auto ideal = ideal_outcome_table(inst.truth, inst.b_max);
    InstanceReport r;
    r.lemma_roi_ordering = lemma_roi_ordering(inst.truth);
    r.exchange_check = exchange_check(inst, cfg.budget_points);
    r.err_qini = instance_metric_error(PolicyKind::qini, inst,
                                       cfg.budget_points, ideal);
    r.err_aucc = instance_metric_error(PolicyKind::aucc, inst,
                                       cfg.budget_points, ideal);
    r.err_mv = instance_metric_error(PolicyKind::mv_aucc, inst,
                                     cfg.budget_points, ideal);
    r.err_mcmv = instance_metric_error(PolicyKind::mcmv_aucc, inst,
                                       cfg.budget_points, ideal);
    const double tol = 1e-9;
    r.chain_ok = r.err_mcmv <= r.err_mv + tol && r.err_mv <= r.err_aucc + tol &&
                 r.err_aucc <= r.err_qini + tol;
    r.strict_mcmv_lt_mv = r.err_mcmv < r.err_mv - 1e-12;
    report.instances.push_back(r);
  }
  const double n = static_cast<double>(report.instances.size());
  std::size_t lemma = 0, exchange = 0, chain = 0, strict = 0;
  for (const auto& r : report.instances) {
    lemma += r.lemma_roi_ordering;
    exchange += r.exchange_check;
    chain += r.chain_ok;
    strict += r.strict_mcmv_lt_mv;
    report.mean_err_qini += r.err_qini / n;
    report.mean_err_aucc += r.err_aucc / n;
    report.mean_err_mv += r.err_mv / n;
    report.mean_err_mcmv += r.err_mcmv / n;
  }
  report.lemma_rate = lemma / n;
  report.exchange_rate = exchange / n;
  report.chain_rate = chain / n;
  report.strict_rate = strict / n;
  return report;
}

std::string DominanceReport::to_json() const {
  nlohmann::json j;
  j["lemma_rate"] = lemma_rate;
  j["exchange_rate"] = exchange_rate;
  j["chain_rate"] = chain_rate;
  j["strict_rate"] = strict_rate;
  j["mean_err"] = {{"qini", mean_err_qini},
                   {"aucc", mean_err_aucc},
                   {"mv_aucc", mean_err_mv},
                   {"mcmv_aucc", mean_err_mcmv}};
  auto& arr = j["instances"];
  for (const auto& r : instances)
    arr.push_back({{"lemma", r.lemma_roi_ordering},
                   {"exchange", r.exchange_check},
                   {"chain", r.chain_ok},
                   {"strict_mcmv_lt_mv", r.strict_mcmv_lt_mv},
                   {"err_qini", r.err_qini},
                   {"err_aucc", r.err_aucc},
                   {"err_mv", r.err_mv},
                   {"err_mcmv", r.err_mcmv}});
  return j.dump(2);
}

}  // namespace xtnet
