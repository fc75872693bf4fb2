#include "xtnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace xtnet {

bool is_isolated(const TreatmentCombo& t) {
  int nonzero = 0;
  for (int v : t)
    if (v > 0) ++nonzero;
  return nonzero <= 1;
}

void validate_combo(const TreatmentCombo& t, const std::vector<int>& levels) {
  if (t.size() != levels.size())
    throw std::invalid_argument("combo has " + std::to_string(t.size()) +
                                " categories, expected " +
                                std::to_string(levels.size()));
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] < 0 || t[k] > levels[k])
      throw std::invalid_argument("combo level " + std::to_string(t[k]) +
                                  " outside 0.." + std::to_string(levels[k]) +
                                  " for category " + std::to_string(k + 1));
}

std::size_t combo_index(const TreatmentCombo& t, const std::vector<int>& levels) {
  validate_combo(t, levels);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    idx = idx * (static_cast<std::size_t>(levels[k]) + 1) +
          static_cast<std::size_t>(t[k]);
  return idx;
}

std::size_t combo_count(const std::vector<int>& levels) {
  std::size_t n = 1;
  for (int a : levels) n *= static_cast<std::size_t>(a) + 1;
  return n;
}

std::vector<TreatmentCombo> enumerate_combos(const std::vector<int>& levels) {
  std::vector<TreatmentCombo> out;
  out.reserve(combo_count(levels));
  TreatmentCombo t(levels.size(), 0);
  while (true) {
    out.push_back(t);
    std::size_t k = levels.size();
    while (k > 0) {
      --k;
      if (t[k] < levels[k]) {
        ++t[k];
        break;
      }
      t[k] = 0;
      if (k == 0) return out;
    }
  }
}

int total_level(const TreatmentCombo& t) {
  int q = 0;
  for (int v : t) q += v;
  return q;
}

std::string to_string(SynDataset id) {
  switch (id) {
    case SynDataset::syn1: return "syn1";
    case SynDataset::syn2: return "syn2";
    case SynDataset::syn3: return "syn3";
  }
  return "?";
}

SynDataset syn_dataset_from_string(const std::string& s) {
  if (s == "syn1") return SynDataset::syn1;
  if (s == "syn2") return SynDataset::syn2;
  if (s == "syn3") return SynDataset::syn3;
  throw std::invalid_argument("unknown dataset id: " + s);
}

void SynthConfig::validate() const {
  if (n_train == 0 || n_test == 0)
    throw std::invalid_argument("SynthConfig: sample counts must be positive");
  if (feature_dim < 8)
    throw std::invalid_argument("SynthConfig: generators use 8 features");
  if (levels.empty())
    throw std::invalid_argument("SynthConfig: need at least one category");
  for (int a : levels)
    if (a < 1) throw std::invalid_argument("SynthConfig: levels a_k must be >= 1");
  if (obs_fraction < 0.0 || obs_fraction > 1.0)
    throw std::invalid_argument("SynthConfig: obs_fraction must be in [0,1]");
  if (gaussian_sigma < 0.0)
    throw std::invalid_argument("SynthConfig: gaussian_sigma must be >= 0");
  if (uniform_lo > uniform_hi)
    throw std::invalid_argument("SynthConfig: bad uniform noise range");
  if (outcome_bins < 0)
    throw std::invalid_argument("SynthConfig: outcome_bins must be >= 0");
}

std::vector<double> minmax_normalize(const std::vector<double>& column) {
  if (column.empty())
    throw std::invalid_argument("minmax_normalize: empty column");
  const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(column.size());
  if (lo == hi) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < column.size(); ++i)
    out[i] = (column[i] - lo) / (hi - lo);
  return out;
}

namespace {

// Raw per-category treatment score before noise/binning.
double treatment_score(SynDataset id, const std::vector<double>& a,
                       const double* x) {
  switch (id) {
    case SynDataset::syn1: {
      double t = 0.0;
      for (int i = 0; i < 5; ++i) t += a[i] * x[i];
      for (int i = 0; i < 4; ++i) t += a[i] * x[i] * x[i + 1];
      return t + x[0] * x[0] + std::sin(x[2]) + std::exp(-x[4]);
    }
    case SynDataset::syn2: {
      double t = 0.0;
      for (int i = 0; i < 3; ++i) t += a[i] * x[i] + a[i] * x[i] * x[i + 1];
      return t + x[2] * x[2];
    }
    case SynDataset::syn3: {
      double t = 0.0;
      for (int i = 0; i < 3; ++i) t += a[i] * x[i];
      return t;
    }
  }
  return 0.0;
}

// Base score S(x) without treatment effects.
double base_score(SynDataset id, const std::vector<double>& a, const double* x) {
  switch (id) {
    case SynDataset::syn1: {
      double s = 0.0;
      for (int i = 0; i < 8; ++i) s += a[i] * x[i];
      s += a[8] * x[0] * x[1] + a[9] * x[2] * x[3];
      s += a[10] * x[3] * x[4] * x[5] + a[11] * x[5] * x[7] * x[0];
      s += a[12] * x[4] * x[4] + a[13] * std::sin(x[7]) + a[14] * std::exp(-x[2]);
      return s;
    }
    case SynDataset::syn2: {
      double s = 0.0;
      for (int i = 0; i < 8; ++i) s += a[i] * x[i];
      s += a[8] * x[0] * x[1] + a[9] * x[2] * x[3];
      s += a[12] * x[4] * x[4] + a[13] * std::sin(x[7]);
      return s;
    }
    case SynDataset::syn3: {
      double s = 0.0;
      for (int i = 0; i < 8; ++i) s += a[i] * x[i];
      return s;
    }
  }
  return 0.0;
}

// Total treatment effect t^effect for the first two categories. Extra
// categories beyond two reuse the category-1/2 response alternately
// without an interaction term (the tables define two categories).
double effect_total(const SynthConfig& cfg, const double* x,
                    const TreatmentCombo& t) {
  const double w1 = cfg.w_t1, w2 = cfg.w_t2, w3 = cfg.w_t3;
  const double t1 = t.empty() ? 0.0 : static_cast<double>(t[0]);
  const double t2 = t.size() < 2 ? 0.0 : static_cast<double>(t[1]);
  switch (cfg.dataset_id) {
    case SynDataset::syn1: {
      const double e1 = 3.0 * w1 * (std::exp(-t1 / 5.0) - std::exp(0.2)) *
                        (std::sin(x[2]) - std::exp(-x[6] - x[4]) +
                         std::sqrt(x[2] + x[5] * x[5]));
      const double e2 = -w2 * (std::log(5.0 * t2 + 0.5) - std::log(1.5)) *
                        (std::cos(x[2]) - x[3] * x[1] + x[5] * x[5] +
                         std::abs(x[0]));
      // The interaction formula's log argument can be non-positive; the
      // interaction is defined as 0 there.
      const double arg = (5.0 * t1 - 1.0) * (t1 + t2 - 1.0);
      const double e12 =
          arg > 0.0 ? w3 * std::log(arg) * (-x[0] + x[1] * x[1] * x[1]) : 0.0;
      return e1 + e2 + e12;
    }
    case SynDataset::syn2: {
      const double t1n = t1 / cfg.levels[0];
      const double t2n = t.size() < 2 ? 0.0 : t2 / cfg.levels[1];
      const double e1 = w1 * t1n * (x[0] + x[1] + x[2]);
      const double e2 = -w2 * t2n * (x[3] + x[4] + x[5]);
      return e1 + e2 + 2.0 * w3 * (t1n * t2n) * (-x[6] + x[7]);
    }
    case SynDataset::syn3: {
      const double t1n = t1 / cfg.levels[0];
      const double t2n = t.size() < 2 ? 0.0 : t2 / cfg.levels[1];
      const double e1 = w1 * t1n * (x[0] + x[1]);
      const double e2 = -w2 * t2n * (x[3] + x[4]);
      return e1 + e2 + 2.0 * w3 * (t1n * t2n) * (x[1] - x[5]);
    }
  }
  return 0.0;
}

// Bin edges b_i = i/m'; returns the 0-based bin of v in [0,1].
int bin_level(double v, int bins) {
  int b = static_cast<int>(std::ceil(v * bins)) - 1;
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

double PotentialOutcomeOracle::outcome(const double* x,
                                       const TreatmentCombo& t) const {
  validate_combo(t, cfg_.levels);
  const double s = base_score(cfg_.dataset_id, coeffs_.outcome, x) +
                   effect_total(cfg_, x, t);
  return (s - s_lo_) / (s_hi_ - s_lo_);
}

double true_cate(const PotentialOutcomeOracle& oracle, const double* x,
                 const TreatmentCombo& t) {
  return oracle.outcome(x, t) -
         oracle.outcome(x, baseline_combo(t.size()));
}

SynthResult gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  std::uniform_real_distribution<double> unoise(cfg.uniform_lo, cfg.uniform_hi);
  std::normal_distribution<double> gnoise(0.0, cfg.gaussian_sigma);

  const std::size_t m = cfg.num_categories();
  const std::size_t d = cfg.feature_dim;
  const std::size_t n = cfg.n_train + cfg.n_test;

  // Coefficients: honor overrides, otherwise draw from U(-1,1).
  DerivedCoeffs coeffs;
  coeffs.outcome = cfg.coeffs_a;
  while (coeffs.outcome.size() < 15) coeffs.outcome.push_back(u11(rng));
  coeffs.treatment = cfg.coeffs_t;
  while (coeffs.treatment.size() < m) {
    std::vector<double> a(5);
    for (double& v : a) v = u11(rng);
    coeffs.treatment.push_back(std::move(a));
  }
  for (auto& a : coeffs.treatment)
    while (a.size() < 5) a.push_back(u11(rng));

  // Features: seeded uniform, then per-column min-max normalization over
  // the full train+test pool.
  Tensor X(n, d);
  for (double& v : X.data) v = u11(rng);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = X.at(i, j);
    col = minmax_normalize(col);
    for (std::size_t i = 0; i < n; ++i) X.at(i, j) = col[i];
  }

  // Origin flags: exact observational fraction per split.
  std::vector<Origin> origin(n, Origin::rct);
  const std::size_t obs_train =
      static_cast<std::size_t>(std::llround(cfg.obs_fraction * cfg.n_train));
  const std::size_t obs_test =
      static_cast<std::size_t>(std::llround(cfg.obs_fraction * cfg.n_test));
  for (std::size_t i = 0; i < obs_train; ++i) origin[i] = Origin::observational;
  for (std::size_t i = 0; i < obs_test; ++i)
    origin[cfg.n_train + i] = Origin::observational;

  // Treatment levels. Observational rows follow the noisy score binned
  // with edges b_i = i/(a_k+1); RCT rows draw uniformly over 0..a_k.
  std::vector<TreatmentCombo> combos(n, TreatmentCombo(m, 0));
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> noisy(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = treatment_score(cfg.dataset_id, coeffs.treatment[k],
                                 &X.data[i * d]);
      v += unoise(rng);
      if (cfg.dataset_id == SynDataset::syn1) v += gnoise(rng);
      noisy[i] = v;
    }
    // Normalization bounds over observational rows only.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i)
      if (origin[i] == Origin::observational) {
        lo = std::min(lo, noisy[i]);
        hi = std::max(hi, noisy[i]);
      }
    std::uniform_int_distribution<int> ulevel(0, cfg.levels[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const int level = ulevel(rng);  // drawn for every row to keep the
                                      // stream aligned; used on RCT rows
      if (origin[i] == Origin::rct) {
        combos[i][k] = level;
      } else {
        const double v = hi > lo ? (noisy[i] - lo) / (hi - lo) : 0.5;
        combos[i][k] = bin_level(v, cfg.levels[k] + 1);
      }
    }
  }

  // Outcomes.
  std::vector<double> s_noisy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = &X.data[i * d];
    double v = base_score(cfg.dataset_id, coeffs.outcome, x) +
               effect_total(cfg, x, combos[i]);
    switch (cfg.dataset_id) {
      case SynDataset::syn1:
      case SynDataset::syn2:
        v += gnoise(rng) + unoise(rng);
        break;
      case SynDataset::syn3:
        v += gnoise(rng);
        break;
    }
    s_noisy[i] = v;
  }
  double s_lo = std::numeric_limits<double>::infinity(), s_hi = -s_lo;
  for (std::size_t i = 0; i < cfg.n_train; ++i) {
    s_lo = std::min(s_lo, s_noisy[i]);
    s_hi = std::max(s_hi, s_noisy[i]);
  }
  if (s_lo == s_hi) {
    s_lo -= 0.5;
    s_hi += 0.5;
  }
  Tensor Y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double y = std::clamp((s_noisy[i] - s_lo) / (s_hi - s_lo), 0.0, 1.0);
    if (cfg.outcome_bins > 0) y = bin_level(y, cfg.outcome_bins);
    Y.at(i, 0) = y;
  }

  // Seeded shuffle within each split so origins are interleaved.
  auto build_split = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), begin);
    std::shuffle(idx.begin(), idx.end(), rng);
    Dataset ds;
    ds.features = Tensor(count, d);
    ds.outcomes = Tensor(count, 1);
    ds.treatments.resize(count);
    ds.origin.resize(count);
    ds.levels = cfg.levels;
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t i = idx[r];
      for (std::size_t j = 0; j < d; ++j) ds.features.at(r, j) = X.at(i, j);
      ds.outcomes.at(r, 0) = Y.at(i, 0);
      ds.treatments[r] = combos[i];
      ds.origin[r] = origin[i];
    }
    return ds;
  };

  SynthResult out;
  out.train = build_split(0, cfg.n_train);
  out.test = build_split(cfg.n_train, cfg.n_test);
  out.coeffs = coeffs;
  out.oracle = PotentialOutcomeOracle(cfg, coeffs, s_lo, s_hi);
  return out;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::size_t dim = d.features.cols, m = d.num_categories(),
                    s = d.num_outcomes();
  for (std::size_t j = 0; j < dim; ++j) std::fprintf(f, "x%zu,", j + 1);
  for (std::size_t k = 0; k < m; ++k) std::fprintf(f, "t%zu,", k + 1);
  for (std::size_t j = 0; j < s; ++j) std::fprintf(f, "y%zu,", j + 1);
  std::fprintf(f, "origin\n");
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j)
      std::fprintf(f, "%.17g,", d.features.at(i, j));
    for (std::size_t k = 0; k < m; ++k)
      std::fprintf(f, "%d,", d.treatments[i][k]);
    for (std::size_t j = 0; j < s; ++j)
      std::fprintf(f, "%.17g,", d.outcomes.at(i, j));
    std::fprintf(f, "%s\n", d.origin[i] == Origin::rct ? "rct" : "obs");
  }
  std::fclose(f);
}

Dataset read_dataset_csv(const std::string& path,
                         const std::vector<int>& levels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::size_t dim = 0, m = 0, s = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      if (tok[0] == 'x') ++dim;
      else if (tok[0] == 't') ++m;
      else if (tok[0] == 'y') ++s;
    }
  }
  if (m != levels.size())
    throw std::runtime_error("csv has " + std::to_string(m) +
                             " treatment columns, expected " +
                             std::to_string(levels.size()));
  std::vector<double> feats, ys;
  std::vector<TreatmentCombo> combos;
  std::vector<Origin> origin;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    TreatmentCombo c(m, 0);
    for (std::size_t j = 0; j < dim; ++j) {
      std::getline(ss, tok, ',');
      feats.push_back(std::stod(tok));
    }
    for (std::size_t k = 0; k < m; ++k) {
      std::getline(ss, tok, ',');
      c[k] = std::stoi(tok);
    }
    for (std::size_t j = 0; j < s; ++j) {
      std::getline(ss, tok, ',');
      ys.push_back(std::stod(tok));
    }
    std::getline(ss, tok, ',');
    validate_combo(c, levels);
    combos.push_back(std::move(c));
    origin.push_back(tok == "rct" ? Origin::rct : Origin::observational);
  }
  Dataset d;
  const std::size_t n = combos.size();
  d.features = Tensor(n, dim);
  d.features.data = std::move(feats);
  d.outcomes = Tensor(n, s);
  d.outcomes.data = std::move(ys);
  d.treatments = std::move(combos);
  d.origin = std::move(origin);
  d.levels = levels;
  return d;
}

std::string synth_manifest_json(const SynthConfig& cfg,
                                const DerivedCoeffs& coeffs) {
  nlohmann::json j;
  j["dataset_id"] = to_string(cfg.dataset_id);
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  j["feature_dim"] = cfg.feature_dim;
  j["w_t"] = {cfg.w_t1, cfg.w_t2, cfg.w_t3};
  j["gaussian_sigma"] = cfg.gaussian_sigma;
  j["uniform_range"] = {cfg.uniform_lo, cfg.uniform_hi};
  j["levels"] = cfg.levels;
  j["outcome_bins"] = cfg.outcome_bins;
  j["obs_fraction"] = cfg.obs_fraction;
  j["seed"] = cfg.seed;
  j["coeffs_outcome"] = coeffs.outcome;
  j["coeffs_treatment"] = coeffs.treatment;
  return j.dump(2);
}

}  // namespace xtnet
