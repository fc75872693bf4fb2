#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xtnet/datagen.hpp"
#include "xtnet/model.hpp"

namespace xtnet {

// Spearman footrule distance between predicted and true per-combo
// orderings, one row per unit, normalized by floor(c^2/2). Ties get
// average ranks. Returns (mean, std) over units.
std::pair<double, double> ranking_error(
    const std::vector<std::vector<double>>& pred,
    const std::vector<std::vector<double>>& truth);

// Per-category cumulative cost of raising a treatment to each level;
// entry [k][l] is the cost of level l, with [k][0] == 0.
struct CostModel {
  std::vector<std::vector<double>> level_costs;

  static CostModel unit(const std::vector<int>& levels);  // cost = sum of levels
  double cost(const TreatmentCombo& t) const;
  void validate() const;
};

// One decision unit: baseline-subtracted expected outcome and expected
// cost per combo, indexed by combo_index over `levels`.
struct UnitInstance {
  std::size_t id = 0;
  std::vector<int> levels;
  std::vector<double> ey;  // ey[combo_index(t0)] == 0
  std::vector<double> ec;  // ec[combo_index(t0)] == 0

  std::size_t combos() const { return ey.size(); }
  void validate() const;
};

UnitInstance unit_from_model(UpliftModel& model, const double* x,
                             const std::vector<int>& levels,
                             const CostModel& costs, std::size_t id);
UnitInstance unit_from_oracle(const PotentialOutcomeOracle& oracle,
                              const double* x, const CostModel& costs,
                              std::size_t id);

enum class PolicyKind { qini, aucc, mv_aucc, mcmv_aucc };

std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

// Score a single step `from -> to` for one unit under the given policy.
// qini ignores cost; aucc uses total RoI of `to`; mv_aucc the marginal
// RoI of the step; mcmv_aucc the intensity-group-averaged marginal RoI
// gamma(x, Q(to)), which requires Q(to) == Q(from) + 1.
double policy_score(PolicyKind kind, const UnitInstance& u,
                    const TreatmentCombo& to, const TreatmentCombo& from);

struct Increment {
  std::size_t unit = 0;
  TreatmentCombo from, to;
  double cost = 0.0;   // expected incremental cost
  double score = 0.0;  // ordering score under the policy
};

struct AllocationPlan {
  PolicyKind kind = PolicyKind::qini;
  std::vector<int> levels;  // combo bounds, for indexing actuals
  std::vector<Increment> increments;
};

// Greedy descending-score allocation under `budget`. qini and aucc pick
// whole combos per unit (later picks may upgrade a unit to a dominating
// combo, paying the cost difference); mv_aucc raises one category by
// one level at a time; mcmv_aucc raises intensity by one, realized as
// the best predicted combo reachable at the new intensity. Unaffordable
// steps are skipped and the scan continues; ties break by (unit id,
// combo lexicographic).
AllocationPlan allocate(PolicyKind kind, const std::vector<UnitInstance>& units,
                        double budget);

struct UpliftCurve {
  std::vector<double> budgets;
  std::vector<double> outcomes;
};

// Walk the plan in order, accumulating actual incremental outcome
// actual[unit][to] - actual[unit][from] against cumulative expected
// cost, then sample the step function on the grid.
UpliftCurve uplift_curve(const AllocationPlan& plan,
                         const std::vector<std::vector<double>>& actual_ey,
                         const std::vector<double>& budget_grid);

// Expected curve of the same increments applied in uniformly random
// order (per-unit order preserved), averaged over `shuffles` draws.
UpliftCurve random_baseline_curve(const AllocationPlan& plan,
                                  const std::vector<std::vector<double>>& actual_ey,
                                  const std::vector<double>& budget_grid,
                                  std::size_t shuffles, std::uint64_t seed);

// Trapezoidal area of (curve - random_curve) over [0, b_max] / b_max.
double curve_area_score(const UpliftCurve& curve, const UpliftCurve& random_curve,
                        double b_max);

std::vector<double> budget_grid(double b_max, std::size_t points = 101);

void write_curve_csv(const UpliftCurve& curve, const std::string& path);

// Convenience: allocate on predictions, evaluate on actuals, subtract
// the shuffled baseline, return the area score.
double evaluate_policy(PolicyKind kind, const std::vector<UnitInstance>& pred_units,
                       const std::vector<std::vector<double>>& actual_ey,
                       double budget, std::size_t grid_points,
                       std::uint64_t seed);

// Exact optimum of sum E[Y] over one-combo-per-unit assignments with
// total expected cost <= budget. Requires integer costs (within 1e-6)
// for the knapsack DP; small fractional instances (<= 12 units, <= 6
// combos) fall back to enumeration, larger ones throw.
double ideal_allocation(const std::vector<UnitInstance>& units, double budget);

// Optimal outcome at every integer budget 0..floor(b_max) in one DP pass.
std::vector<double> ideal_outcome_table(const std::vector<UnitInstance>& units,
                                        double b_max);

// Appendix-style synthetic instance family for the dominance harness.
struct TheoremInstanceConfig {
  std::vector<int> levels = {4, 4};        // per-category max level
  double interaction_max = 0.5;            // G
  double interaction_density = 1.0;        // rho
  double model_noise = 0.1;                // sigma on predicted E[Y]
  std::size_t model_draws = 64;            // prediction sets per instance
  std::size_t units = 12;
  std::size_t instances = 200;
  std::size_t budget_points = 101;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TheoremInstance {
  std::vector<UnitInstance> truth;
  // model_draws independent noisy prediction sets (same costs as truth)
  std::vector<std::vector<UnitInstance>> preds;
  double b_max = 0.0;
};

std::vector<TheoremInstance> gen_theorem_instances(const TheoremInstanceConfig& cfg);

// Re-checks the A.2 assumptions on a generated truth instance:
// per-category responses strictly increasing and concave, interactions
// in [0, G] and zero when any involved level is zero, active-interaction
// density >= rho, costs strictly increasing in total level.
void validate_assumptions(const std::vector<UnitInstance>& truth,
                          const TheoremInstanceConfig& cfg);

// Mean over instances and prediction draws of the trapezoidal integral
// over the budget grid of |O*(B) - O_kind(B)|, with O* from the exact
// ideal allocation on the truth side.
double expected_metric_error(PolicyKind kind,
                             const std::vector<TheoremInstance>& instances,
                             std::size_t grid_points);

struct InstanceReport {
  bool lemma_roi_ordering = false;
  bool exchange_check = false;
  double err_qini = 0.0, err_aucc = 0.0, err_mv = 0.0, err_mcmv = 0.0;
  bool chain_ok = false;          // mcmv <= mv <= aucc <= qini (tolerance)
  bool strict_mcmv_lt_mv = false;
};

struct DominanceReport {
  std::vector<InstanceReport> instances;
  double lemma_rate = 0.0;
  double exchange_rate = 0.0;
  double chain_rate = 0.0;
  double strict_rate = 0.0;
  double mean_err_qini = 0.0, mean_err_aucc = 0.0, mean_err_mv = 0.0,
         mean_err_mcmv = 0.0;

  std::string to_json() const;
};

DominanceReport theorem_harness(const TheoremInstanceConfig& cfg);

}  // namespace xtnet
