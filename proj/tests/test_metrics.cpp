#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "xtnet/metrics.hpp"

using namespace xtnet;

namespace {

UnitInstance make_unit(std::size_t id, std::vector<int> levels,
                       std::vector<double> ey, std::vector<double> ec) {
  UnitInstance u;
  u.id = id;
  u.levels = std::move(levels);
  u.ey = std::move(ey);
  u.ec = std::move(ec);
  u.validate();
  return u;
}

// single-category unit with unit costs per level
UnitInstance path_unit(std::size_t id, std::vector<double> ey) {
  const int top = static_cast<int>(ey.size()) - 1;
  std::vector<double> ec(ey.size());
  for (std::size_t l = 0; l < ec.size(); ++l) ec[l] = static_cast<double>(l);
  return make_unit(id, {top}, std::move(ey), std::move(ec));
}

double plan_outcome(const AllocationPlan& plan,
                    const std::vector<UnitInstance>& units) {
  double total = 0.0;
  std::vector<TreatmentCombo> cur(units.size());
  for (std::size_t u = 0; u < units.size(); ++u)
    cur[u] = baseline_combo(units[u].levels.size());
  for (const auto& inc : plan.increments) cur[inc.unit] = inc.to;
  for (std::size_t u = 0; u < units.size(); ++u)
    total += units[u].ey[combo_index(cur[u], units[u].levels)];
  return total;
}

std::vector<std::vector<double>> actuals_of(
    const std::vector<UnitInstance>& units) {
  std::vector<std::vector<double>> out;
  for (const auto& u : units) out.push_back(u.ey);
  return out;
}

}  // namespace

TEST_CASE("ranking error examples") {
  auto [m0, s0] = ranking_error({{1.0, 2.0, 3.0}}, {{1.0, 2.0, 3.0}});
  CHECK(m0 == 0.0);
  CHECK(s0 == 0.0);

  auto [m1, s1] = ranking_error({{1.0, 2.0}}, {{2.0, 1.0}});
  CHECK(m1 == doctest::Approx(1.0));

  // pred ranks (1,2,3,4) vs true (2,1,4,3): footrule 4, max floor(16/2)=8
  auto [m2, s2] = ranking_error({{10.0, 20.0, 30.0, 40.0}},
                                {{20.0, 10.0, 40.0, 30.0}});
  CHECK(m2 == doctest::Approx(0.5));

  // ties take average ranks: pred (1.5,1.5) vs true (1,2) -> footrule 1
  auto [m3, s3] = ranking_error({{5.0, 5.0}}, {{1.0, 2.0}});
  CHECK(m3 == doctest::Approx(0.5));
}

TEST_CASE("ranking error bounds and validation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(9), b(9);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    auto [m, s] = ranking_error({a}, {b});
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
  CHECK_THROWS(ranking_error({{1.0}}, {{1.0}}));
  CHECK_THROWS(ranking_error({{1.0, 2.0}}, {{1.0}}));
}

TEST_CASE("cost model") {
  auto cm = CostModel::unit({2, 3});
  CHECK(cm.cost({0, 0}) == 0.0);
  CHECK(cm.cost({2, 3}) == 5.0);
  CHECK(cm.cost({1, 2}) == 3.0);
  CHECK_THROWS(cm.cost({3, 0}));
  cm.validate();

  CostModel bad;
  bad.level_costs = {{0.0, 2.0, 1.0}};
  CHECK_THROWS(bad.validate());
  CostModel bad0;
  bad0.level_costs = {{0.5, 1.0}};
  CHECK_THROWS(bad0.validate());
}

TEST_CASE("policy score examples") {
  // single category path: ey (0,3,5), ec (0,1,2)
  auto a = make_unit(9, {1}, {0.0, 2.0}, {0.0, 4.0});
  CHECK(policy_score(PolicyKind::aucc, a, {1}, {0}) == doctest::Approx(0.5));

  auto u = path_unit(0, {0.0, 3.0, 5.0});
  CHECK(policy_score(PolicyKind::mv_aucc, u, {2}, {1}) == doctest::Approx(2.0));
  CHECK(policy_score(PolicyKind::qini, u, {2}, {0}) == doctest::Approx(5.0));

  // mcmv on m=2, levels {1,1}: group q=1 averages (0,1) and (1,0)
  auto v = make_unit(1, {1, 1}, {0.0, 0.4, 0.6, 1.5}, {0.0, 1.0, 1.0, 2.0});
  CHECK(policy_score(PolicyKind::mcmv_aucc, v, {0, 1}, {0, 0}) ==
        doctest::Approx(0.5));
  CHECK(policy_score(PolicyKind::mcmv_aucc, v, {1, 1}, {0, 1}) ==
        doctest::Approx((1.5 - 0.5) / (2.0 - 1.0)));
  CHECK_THROWS(policy_score(PolicyKind::mcmv_aucc, v, {1, 1}, {0, 0}));

  auto w = make_unit(2, {1}, {0.0, 1.0}, {0.0, 0.0});
  CHECK_THROWS(policy_score(PolicyKind::aucc, w, {1}, {0}));
  CHECK_THROWS(policy_score(PolicyKind::mv_aucc, w, {1}, {0}));
}

TEST_CASE("allocate: zero budget and level ordering") {
  auto u = path_unit(0, {0.0, 5.0, 8.0, 9.0});
  for (auto kind : {PolicyKind::qini, PolicyKind::aucc, PolicyKind::mv_aucc,
                    PolicyKind::mcmv_aucc})
    CHECK(allocate(kind, {u}, 0.0).increments.empty());

  auto plan = allocate(PolicyKind::mv_aucc, {u}, 3.0);
  REQUIRE(plan.increments.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(plan.increments[i].to[0] == static_cast<int>(i) + 1);
    if (i) CHECK(plan.increments[i].score < plan.increments[i - 1].score);
  }
  CHECK(plan.increments[0].score == doctest::Approx(5.0));
  CHECK(plan.increments[1].score == doctest::Approx(3.0));
  CHECK(plan.increments[2].score == doctest::Approx(1.0));
}

TEST_CASE("allocate: brute-force assignment oracle") {
  std::vector<UnitInstance> units = {path_unit(0, {0.0, 5.0, 8.0}),
                                     path_unit(1, {0.0, 4.0, 7.0}),
                                     path_unit(2, {0.0, 2.0, 3.0})};
  const double budget = 4.0;
  double best = 0.0;
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int c = 0; c <= 2; ++c)
        if (a + b + c <= budget)
          best = std::max(best, units[0].ey[static_cast<std::size_t>(a)] +
                                    units[1].ey[static_cast<std::size_t>(b)] +
                                    units[2].ey[static_cast<std::size_t>(c)]);
  auto plan = allocate(PolicyKind::mv_aucc, units, budget);
  CHECK(plan_outcome(plan, units) == doctest::Approx(best));
  CHECK(best == doctest::Approx(15.0));
}

TEST_CASE("allocate: plan invariants and ties") {
  std::vector<UnitInstance> units = {
      make_unit(0, {2, 2}, {0.0, 0.5, 0.8, 0.0, 0.7, 1.2, 0.0, 0.9, 1.4},
                {0.0, 1.0, 2.0, 1.0, 2.0, 3.0, 2.0, 3.0, 4.0}),
      make_unit(1, {2, 2}, {0.0, 0.5, 0.8, 0.0, 0.7, 1.2, 0.0, 0.9, 1.4},
                {0.0, 1.0, 2.0, 1.0, 2.0, 3.0, 2.0, 3.0, 4.0})};
  for (auto kind : {PolicyKind::qini, PolicyKind::aucc, PolicyKind::mv_aucc,
                    PolicyKind::mcmv_aucc}) {
    auto plan = allocate(kind, units, 5.0);
    REQUIRE(!plan.increments.empty());
    // identical units: ties resolve to the lower unit id first
    CHECK(plan.increments[0].unit == 0);
    double spent = 0.0;
    std::vector<TreatmentCombo> cur(units.size(), baseline_combo(2));
    for (const auto& inc : plan.increments) {
      CHECK(inc.cost > 0.0);
      CHECK(inc.from == cur[inc.unit]);
      for (std::size_t k = 0; k < 2; ++k) CHECK(inc.to[k] >= inc.from[k]);
      spent += inc.cost;
      cur[inc.unit] = inc.to;
    }
    CHECK(spent <= 5.0 + 1e-12);
  }
}

TEST_CASE("allocate: mcmv realizes the best predicted combo in the group") {
  auto u = make_unit(0, {1, 1}, {0.0, 0.2, 0.9, 1.0}, {0.0, 1.0, 1.0, 2.0});
  auto plan = allocate(PolicyKind::mcmv_aucc, {u}, 2.0);
  REQUIRE(plan.increments.size() == 2);
  CHECK(plan.increments[0].to == TreatmentCombo{1, 0});  // 0.9 > 0.2
  CHECK(plan.increments[1].to == TreatmentCombo{1, 1});
}

TEST_CASE("uplift curve examples and prefix-sum oracle") {
  std::vector<UnitInstance> units = {path_unit(0, {0.0, 1.0})};
  auto actual = actuals_of(units);
  AllocationPlan empty;
  empty.levels = {1};
  auto flat = uplift_curve(empty, actual, {0.0, 1.0, 2.0});
  for (double o : flat.outcomes) CHECK(o == 0.0);

  AllocationPlan one;
  one.levels = {1};
  one.increments.push_back({0, {0}, {1}, 2.0, 1.0});
  auto c = uplift_curve(one, actual, {0.0, 1.0, 2.0, 3.0});
  CHECK(c.outcomes[0] == 0.0);
  CHECK(c.outcomes[1] == 0.0);
  CHECK(c.outcomes[2] == doctest::Approx(1.0));
  CHECK(c.outcomes[3] == doctest::Approx(1.0));

  // random concave batch: curve values equal an independent prefix-sum
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::vector<UnitInstance> batch;
  for (std::size_t i = 0; i < 6; ++i) {
    double d = mag(rng);
    batch.push_back(path_unit(i, {0.0, d, d * 1.7, d * 2.1}));
  }
  auto acts = actuals_of(batch);
  auto plan = allocate(PolicyKind::mv_aucc, batch, 10.0);
  std::vector<double> cum_cost{0.0}, cum_gain{0.0};
  for (const auto& inc : plan.increments) {
    const auto& u = batch[inc.unit];
    cum_cost.push_back(cum_cost.back() + inc.cost);
    cum_gain.push_back(cum_gain.back() +
                       u.ey[combo_index(inc.to, u.levels)] -
                       u.ey[combo_index(inc.from, u.levels)]);
  }
  auto grid = budget_grid(10.0, 41);
  auto curve = uplift_curve(plan, acts, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double expect = 0.0;
    for (std::size_t i = 0; i < cum_cost.size(); ++i)
      if (cum_cost[i] <= grid[g] + 1e-12) expect = cum_gain[i];
    CHECK(curve.outcomes[g] == doctest::Approx(expect));
  }

  std::vector<std::vector<double>> short_actual = {{0.0}};
  CHECK_THROWS(uplift_curve(one, short_actual, {0.0, 1.0}));
}

TEST_CASE("curve area score") {
  UpliftCurve a, b;
  a.budgets = b.budgets = {0.0, 1.0, 2.0, 3.0, 4.0};
  a.outcomes = {0.0, 1.0, 1.5, 2.0, 2.5};
  b.outcomes = a.outcomes;
  CHECK(curve_area_score(a, b, 4.0) == doctest::Approx(0.0));
  for (auto& o : a.outcomes) o += 0.25;  // constant gap
  CHECK(curve_area_score(a, b, 4.0) == doctest::Approx(0.25));
  for (auto& o : a.outcomes) o -= 0.5;  // negative gap allowed
  CHECK(curve_area_score(a, b, 4.0) == doctest::Approx(-0.25));
}

TEST_CASE("random baseline endpoint and determinism") {
  std::vector<UnitInstance> units = {path_unit(0, {0.0, 3.0, 4.0}),
                                     path_unit(1, {0.0, 2.0, 3.5})};
  auto acts = actuals_of(units);
  auto plan = allocate(PolicyKind::mv_aucc, units, 4.0);
  auto grid = budget_grid(4.0, 21);
  auto r1 = random_baseline_curve(plan, acts, grid, 32, 7);
  auto r2 = random_baseline_curve(plan, acts, grid, 32, 7);
  CHECK(r1.outcomes == r2.outcomes);
  auto curve = uplift_curve(plan, acts, grid);
  // all increments fit in the budget, so every shuffle ends at the same spot
  CHECK(r1.outcomes.back() == doctest::Approx(curve.outcomes.back()));
  // a shuffled ordering cannot beat the greedy one on a concave instance
  for (std::size_t g = 0; g < grid.size(); ++g)
    CHECK(r1.outcomes[g] <= curve.outcomes[g] + 1e-9);
}

TEST_CASE("ideal allocation oracles") {
  auto u = path_unit(0, {0.0, 1.0, 3.0});
  CHECK(ideal_allocation({u}, 1.0) == doctest::Approx(1.0));
  CHECK(ideal_allocation({u}, 2.0) == doctest::Approx(3.0));
  CHECK(ideal_allocation({u}, 0.0) == doctest::Approx(0.0));

  auto table = ideal_outcome_table({u}, 2.0);
  REQUIRE(table.size() == 3);
  CHECK(table[0] == doctest::Approx(0.0));
  CHECK(table[1] == doctest::Approx(1.0));
  CHECK(table[2] == doctest::Approx(3.0));
  for (std::size_t b = 1; b < table.size(); ++b) CHECK(table[b] >= table[b - 1]);
}

TEST_CASE("greedy equals ideal on concave instances") {
  TheoremInstanceConfig cfg;
  cfg.interaction_max = 0.0;
  cfg.model_noise = 0.0;
  cfg.model_draws = 1;
  cfg.instances = 20;
  cfg.seed = 21;
  auto instances = gen_theorem_instances(cfg);
  CHECK(expected_metric_error(PolicyKind::mv_aucc, instances,
                              cfg.budget_points) == doctest::Approx(0.0));
  for (const auto& inst : instances) {
    auto table = ideal_outcome_table(inst.truth, inst.b_max);
    auto plan = allocate(PolicyKind::mv_aucc, inst.truth, inst.b_max);
    auto curve =
        uplift_curve(plan, actuals_of(inst.truth), budget_grid(inst.b_max, 33));
    for (std::size_t g = 0; g < curve.budgets.size(); ++g) {
      const auto fb = static_cast<std::size_t>(std::floor(curve.budgets[g]));
      CHECK(curve.outcomes[g] ==
            doctest::Approx(table[fb]).epsilon(1e-9));
    }
  }
}

TEST_CASE("ideal dominates every policy on a non-concave instance") {
  // interaction-heavy unit: deep combo worth far more than its parts
  std::vector<UnitInstance> units = {
      make_unit(0, {1, 1}, {0.0, 0.1, 0.1, 3.0}, {0.0, 1.0, 1.0, 2.0}),
      make_unit(1, {1, 1}, {0.0, 0.5, 0.6, 1.2}, {0.0, 1.0, 1.0, 2.0}),
      make_unit(2, {1, 1}, {0.0, 0.4, 0.3, 0.8}, {0.0, 1.0, 1.0, 2.0})};
  const double budget = 3.0;
  // enumeration oracle over all 4^3 assignments
  const auto combos = enumerate_combos({1, 1});
  double best = 0.0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 4; ++c) {
        const double cost = units[0].ec[a] + units[1].ec[b] + units[2].ec[c];
        if (cost > budget) continue;
        best = std::max(best, units[0].ey[a] + units[1].ey[b] + units[2].ey[c]);
      }
  CHECK(ideal_allocation(units, budget) == doctest::Approx(best));
  for (auto kind : {PolicyKind::qini, PolicyKind::aucc, PolicyKind::mv_aucc,
                    PolicyKind::mcmv_aucc}) {
    auto plan = allocate(kind, units, budget);
    CHECK(plan_outcome(plan, units) <= best + 1e-9);
  }
}

TEST_CASE("ideal allocation fractional-cost fallback") {
  auto u = make_unit(0, {2}, {0.0, 1.0, 1.8}, {0.0, 0.5, 1.25});
  CHECK(ideal_allocation({u}, 1.0) == doctest::Approx(1.0));
  CHECK(ideal_allocation({u}, 1.25) == doctest::Approx(1.8));

  // too many fractional units for enumeration
  std::vector<UnitInstance> big;
  for (std::size_t i = 0; i < 30; ++i)
    big.push_back(make_unit(i, {2}, {0.0, 1.0, 1.8}, {0.0, 0.5, 1.25}));
  CHECK_THROWS(ideal_allocation(big, 5.0));
}

TEST_CASE("expected metric error: exact values and draw averaging") {
  // two units; predictions swap their order, so the plan realizes the
  // worse unit first: |gap| = 0.5 exactly on [1,2)
  TheoremInstance inst;
  inst.truth = {path_unit(0, {0.0, 1.0}), path_unit(1, {0.0, 0.5})};
  inst.b_max = 2.0;
  auto swapped = inst.truth;
  std::swap(swapped[0].ey, swapped[1].ey);
  inst.preds = {swapped};
  for (auto kind : {PolicyKind::qini, PolicyKind::aucc, PolicyKind::mv_aucc})
    CHECK(expected_metric_error(kind, {inst}, 101) == doctest::Approx(0.5));

  // perfect predictions contribute zero, so two draws halve the error
  TheoremInstance both = inst;
  both.preds = {inst.truth, swapped};
  CHECK(expected_metric_error(PolicyKind::mv_aucc, {both}, 101) ==
        doctest::Approx(0.25));

  TheoremInstance perfect = inst;
  perfect.preds = {inst.truth};
  CHECK(expected_metric_error(PolicyKind::mv_aucc, {perfect}, 101) ==
        doctest::Approx(0.0));
}

TEST_CASE("instance generator: validation and structure") {
  TheoremInstanceConfig cfg;
  cfg.instances = 4;
  cfg.units = 6;
  cfg.model_draws = 2;
  cfg.seed = 5;
  auto instances = gen_theorem_instances(cfg);
  REQUIRE(instances.size() == 4);
  for (const auto& inst : instances) {
    validate_assumptions(inst.truth, cfg);  // validator re-scan
    CHECK(inst.preds.size() == 2);
    CHECK(inst.b_max > 0.0);
    for (const auto& u : inst.truth) u.validate();
  }

  TheoremInstanceConfig bad = cfg;
  bad.interaction_density = 1.5;
  CHECK_THROWS(gen_theorem_instances(bad));
  TheoremInstanceConfig bad2 = cfg;
  bad2.model_noise = -0.1;
  CHECK_THROWS(gen_theorem_instances(bad2));
}

TEST_CASE("instance generator: G=0 makes mv and mcmv paths coincide") {
  TheoremInstanceConfig cfg;
  cfg.interaction_max = 0.0;
  cfg.model_noise = 0.0;
  cfg.model_draws = 1;
  cfg.instances = 3;
  cfg.seed = 31;

  // single unit: the realized step sequence is identical, so the two
  // policies produce the same outcome at every budget
  cfg.units = 1;
  for (const auto& inst : gen_theorem_instances(cfg)) {
    auto grid = budget_grid(inst.b_max, 65);
    auto acts = actuals_of(inst.truth);
    auto cm = uplift_curve(allocate(PolicyKind::mv_aucc, inst.truth, inst.b_max),
                           acts, grid);
    auto cg = uplift_curve(
        allocate(PolicyKind::mcmv_aucc, inst.truth, inst.b_max), acts, grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
      CHECK(cm.outcomes[g] == doctest::Approx(cg.outcomes[g]));
  }

  // multiple units: per-unit paths still coincide (only the cross-unit
  // interleaving may differ), and both exhaust the full budget
  cfg.units = 8;
  for (const auto& inst : gen_theorem_instances(cfg)) {
    auto pm = allocate(PolicyKind::mv_aucc, inst.truth, inst.b_max);
    auto pg = allocate(PolicyKind::mcmv_aucc, inst.truth, inst.b_max);
    std::vector<std::vector<TreatmentCombo>> path_m(8), path_g(8);
    for (const auto& inc : pm.increments) path_m[inc.unit].push_back(inc.to);
    for (const auto& inc : pg.increments) path_g[inc.unit].push_back(inc.to);
    CHECK(path_m == path_g);
    CHECK(plan_outcome(pm, inst.truth) ==
          doctest::Approx(plan_outcome(pg, inst.truth)));
  }
}

TEST_CASE("instance generator: distributed beats concentrated with large G") {
  TheoremInstanceConfig cfg;
  cfg.interaction_max = 3.0;
  cfg.instances = 2;
  cfg.units = 6;
  cfg.model_draws = 1;
  cfg.seed = 13;
  for (const auto& inst : gen_theorem_instances(cfg)) {
    for (const auto& u : inst.truth) {
      // compare (4,0) against (1,3) at equal intensity q=4
      const double conc = u.ey[combo_index({4, 0}, u.levels)];
      const double dist = u.ey[combo_index({1, 3}, u.levels)];
      const double interaction =
          dist - (u.ey[combo_index({1, 0}, u.levels)] +
                  u.ey[combo_index({0, 3}, u.levels)]);
      if (interaction > 1.0)  // interacting unit with a sizable g
        CHECK(dist > conc);
    }
  }
}

TEST_CASE("scale invariance of allocation orderings") {
  TheoremInstanceConfig cfg;
  cfg.instances = 1;
  cfg.units = 6;
  cfg.model_draws = 1;
  cfg.seed = 77;
  auto inst = gen_theorem_instances(cfg)[0];
  auto scaled = inst.truth;
  const double c = 2.5;
  for (auto& u : scaled)
    for (auto& v : u.ec) v *= c;
  for (auto kind : {PolicyKind::qini, PolicyKind::aucc, PolicyKind::mv_aucc,
                    PolicyKind::mcmv_aucc}) {
    auto p1 = allocate(kind, inst.truth, 20.0);
    auto p2 = allocate(kind, scaled, 20.0 * c);
    REQUIRE(p1.increments.size() == p2.increments.size());
    for (std::size_t i = 0; i < p1.increments.size(); ++i) {
      CHECK(p1.increments[i].unit == p2.increments[i].unit);
      CHECK(p1.increments[i].to == p2.increments[i].to);
    }
  }
}

TEST_CASE("dominance property: pointwise-better curves give lower error") {
  TheoremInstanceConfig cfg;
  cfg.instances = 10;
  cfg.units = 8;
  cfg.model_draws = 4;
  cfg.seed = 99;
  auto instances = gen_theorem_instances(cfg);
  for (const auto& inst : instances) {
    auto table = ideal_outcome_table(inst.truth, inst.b_max);
    auto grid = budget_grid(inst.b_max, cfg.budget_points);
    auto acts = actuals_of(inst.truth);
    for (const auto& preds : inst.preds) {
      auto cm = uplift_curve(allocate(PolicyKind::mv_aucc, preds, inst.b_max),
                             acts, grid);
      auto cg = uplift_curve(allocate(PolicyKind::mcmv_aucc, preds, inst.b_max),
                             acts, grid);
      bool mv_dominates = true, mcmv_dominates = true;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        // no policy exceeds the exact optimum
        const auto fb = static_cast<std::size_t>(std::floor(grid[g]));
        CHECK(cm.outcomes[g] <= table[fb] + 1e-9);
        CHECK(cg.outcomes[g] <= table[fb] + 1e-9);
        if (cm.outcomes[g] < cg.outcomes[g] - 1e-12) mv_dominates = false;
        if (cg.outcomes[g] < cm.outcomes[g] - 1e-12) mcmv_dominates = false;
      }
      TheoremInstance single = inst;
      single.preds = {preds};
      const double em =
          expected_metric_error(PolicyKind::mv_aucc, {single}, cfg.budget_points);
      const double eg = expected_metric_error(PolicyKind::mcmv_aucc, {single},
                                              cfg.budget_points);
      if (mv_dominates) CHECK(em <= eg + 1e-9);
      if (mcmv_dominates) CHECK(eg <= em + 1e-9);
    }
  }
}

TEST_CASE("evaluate_policy ranks good predictions above anti-ordered ones") {
  TheoremInstanceConfig cfg;
  cfg.instances = 1;
  cfg.units = 10;
  cfg.model_draws = 1;
  cfg.seed = 17;
  auto inst = gen_theorem_instances(cfg)[0];
  auto acts = actuals_of(inst.truth);
  auto anti = inst.truth;
  for (auto& u : anti)
    for (auto& v : u.ey) v = -v;
  const double good = evaluate_policy(PolicyKind::mv_aucc, inst.truth, acts,
                                      inst.b_max / 2.0, 101, 4);
  const double bad = evaluate_policy(PolicyKind::mv_aucc, anti, acts,
                                     inst.b_max / 2.0, 101, 4);
  CHECK(good > bad);
  CHECK(good > 0.0);
}

TEST_CASE("budget grid and curve csv") {
  auto g = budget_grid(10.0);
  REQUIRE(g.size() == 101);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(g[50] == doctest::Approx(5.0));

  UpliftCurve c;
  c.budgets = {0.0, 1.0, 2.0};
  c.outcomes = {0.0, 0.5, 0.75};
  const std::string path = "test_curve_out.csv";
  write_curve_csv(c, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "budget,outcome");
  double b, o;
  char comma;
  in >> b >> comma >> o;
  CHECK(b == 0.0);
  CHECK(o == 0.0);
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("theorem harness report") {
  TheoremInstanceConfig cfg;
  cfg.instances = 6;
  cfg.units = 8;
  cfg.model_draws = 8;
  cfg.seed = 3;
  auto rep = theorem_harness(cfg);
  REQUIRE(rep.instances.size() == 6);
  CHECK(rep.lemma_rate == doctest::Approx(1.0));
  CHECK(rep.exchange_rate == doctest::Approx(1.0));
  CHECK(rep.chain_rate >= 0.0);
  CHECK(rep.chain_rate <= 1.0);
  for (const auto& r : rep.instances) {
    CHECK(r.err_qini >= 0.0);
    CHECK(r.err_mcmv >= 0.0);
  }
  auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["instances"].size() == 6);
  CHECK(j["lemma_rate"].get<double>() == doctest::Approx(1.0));
  CHECK(j["mean_err"].contains("mcmv_aucc"));
}
