#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xtnet/tensor.hpp"

namespace xtnet {

// One level choice per treatment category; all-zeros is the baseline t0.
using TreatmentCombo = std::vector<int>;

inline TreatmentCombo baseline_combo(std::size_t m) { return TreatmentCombo(m, 0); }

// At most one nonzero category (includes t0).
bool is_isolated(const TreatmentCombo& t);

void validate_combo(const TreatmentCombo& t, const std::vector<int>& levels);

// Mixed-radix index of a combo with radix (a_k + 1) per category.
std::size_t combo_index(const TreatmentCombo& t, const std::vector<int>& levels);
std::size_t combo_count(const std::vector<int>& levels);
// All combos in combo_index order.
std::vector<TreatmentCombo> enumerate_combos(const std::vector<int>& levels);
// Treatment intensity Q(t) = sum of levels.
int total_level(const TreatmentCombo& t);

enum class SynDataset { syn1, syn2, syn3 };

std::string to_string(SynDataset id);
SynDataset syn_dataset_from_string(const std::string& s);

enum class Origin : std::uint8_t { observational = 0, rct = 1 };

struct SynthConfig {
  SynDataset dataset_id = SynDataset::syn1;
  std::size_t n_train = 64000;
  std::size_t n_test = 8000;
  std::size_t feature_dim = 8;
  // Unpublished constants; defaults are documented and overridable.
  // Outcome/treatment coefficients are drawn from U(-1,1) per seed when
  // left empty (see DerivedCoeffs in the manifest).
  std::vector<double> coeffs_a;              // outcome-score coefficients
  std::vector<std::vector<double>> coeffs_t; // per-category score coefficients
  double w_t1 = 1.0, w_t2 = 1.0, w_t3 = 1.0;
  double gaussian_sigma = 0.05;              // sigma = r
  double uniform_lo = -0.05, uniform_hi = 0.05;
  std::vector<int> levels = {4, 4};          // a_k; levels run 0..a_k
  int outcome_bins = 0;                      // 0 = continuous outcome
  double obs_fraction = 0.5;
  std::uint64_t seed = 1;

  std::size_t num_categories() const { return levels.size(); }
  void validate() const;
};

struct Dataset {
  Tensor features;   // n x d, min-max normalized to [0,1]
  std::vector<TreatmentCombo> treatments;
  Tensor outcomes;   // n x s
  std::vector<Origin> origin;
  std::vector<int> levels;  // a_k

  std::size_t size() const { return features.rows; }
  std::size_t num_categories() const { return levels.size(); }
  std::size_t num_outcomes() const { return outcomes.cols; }
};

// Coefficients materialized from the seed (recorded in the manifest so a
// run is replayable from it alone).
struct DerivedCoeffs {
  std::vector<double> outcome;               // a_1..a_15
  std::vector<std::vector<double>> treatment; // per category
};

// Noiseless potential outcome y(x, t) on the same normalized scale as
// the observed outcomes (bounds taken from the noisy training scores).
class PotentialOutcomeOracle {
 public:
  PotentialOutcomeOracle() = default;
  PotentialOutcomeOracle(SynthConfig cfg, DerivedCoeffs coeffs, double s_lo,
                         double s_hi)
      : cfg_(std::move(cfg)), coeffs_(std::move(coeffs)), s_lo_(s_lo), s_hi_(s_hi) {}

  // x: normalized feature row of length feature_dim.
  double outcome(const double* x, const TreatmentCombo& t) const;
  double outcome(const Tensor& features, std::size_t row,
                 const TreatmentCombo& t) const {
    return outcome(&features.data[row * features.cols], t);
  }

  const SynthConfig& config() const { return cfg_; }

 private:
  SynthConfig cfg_;
  DerivedCoeffs coeffs_;
  double s_lo_ = 0.0, s_hi_ = 1.0;
};

struct SynthResult {
  Dataset train;
  Dataset test;
  PotentialOutcomeOracle oracle;
  DerivedCoeffs coeffs;
};

// (v - min)/(max - min); a constant column maps to all 0.5.
std::vector<double> minmax_normalize(const std::vector<double>& column);

SynthResult gen_synthetic(const SynthConfig& cfg);

// oracle(x, t) - oracle(x, t0)
double true_cate(const PotentialOutcomeOracle& oracle, const double* x,
                 const TreatmentCombo& t);

// CSV with header x1..xd,t1..tm,y1..ys,origin. Byte-stable for a fixed
// dataset so exports hash identically across runs.
void write_dataset_csv(const Dataset& d, const std::string& path);
Dataset read_dataset_csv(const std::string& path, const std::vector<int>& levels);

std::string synth_manifest_json(const SynthConfig& cfg, const DerivedCoeffs& coeffs);

}  // namespace xtnet
