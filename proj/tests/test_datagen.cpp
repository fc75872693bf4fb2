#include <cmath>
#include <cstdio>
#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "xtnet/datagen.hpp"

using namespace xtnet;

namespace {

SynthConfig small_cfg(SynDataset id, std::uint64_t seed = 7) {
  SynthConfig cfg;
  cfg.dataset_id = id;
  cfg.n_train = 400;
  cfg.n_test = 100;
  cfg.seed = seed;
  return cfg;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.features.data == b.features.data &&
         a.outcomes.data == b.outcomes.data && a.treatments == b.treatments &&
         a.origin == b.origin;
}

}  // namespace

TEST_CASE("minmax normalization examples") {
  auto v = minmax_normalize({0.0, 5.0, 10.0});
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(1.0));

  auto c = minmax_normalize({7.0, 7.0, 7.0});
  for (double x : c) CHECK(x == doctest::Approx(0.5));

  auto w = minmax_normalize({1.0, 2.0, 4.0});
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0));
  CHECK(w[2] == doctest::Approx(1.0));
}

TEST_CASE("combo helpers") {
  CHECK(is_isolated({0, 0}));
  CHECK(is_isolated({3, 0}));
  CHECK_FALSE(is_isolated({1, 2}));
  CHECK_NOTHROW(validate_combo({4, 0}, {4, 4}));
  CHECK_THROWS_AS(validate_combo({5, 0}, {4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(validate_combo({1}, {4, 4}), std::invalid_argument);
}

TEST_CASE("generation is reproducible from the seed") {
  for (auto id : {SynDataset::syn1, SynDataset::syn2, SynDataset::syn3}) {
    auto a = gen_synthetic(small_cfg(id));
    auto b = gen_synthetic(small_cfg(id));
    CHECK(same_dataset(a.train, b.train));
    CHECK(same_dataset(a.test, b.test));
    CHECK(a.coeffs.outcome == b.coeffs.outcome);
  }
  auto c = gen_synthetic(small_cfg(SynDataset::syn2, 8));
  auto d = gen_synthetic(small_cfg(SynDataset::syn2, 7));
  CHECK_FALSE(same_dataset(c.train, d.train));
}

TEST_CASE("features, levels, outcomes and origin counts are in range") {
  auto res = gen_synthetic(small_cfg(SynDataset::syn1));
  for (const Dataset* ds : {&res.train, &res.test}) {
    for (double x : ds->features.data) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    for (double y : ds->outcomes.data) {
      CHECK(y >= 0.0);
      CHECK(y <= 1.0);
    }
    for (const auto& t : ds->treatments) CHECK_NOTHROW(validate_combo(t, ds->levels));
  }
  std::size_t obs = 0;
  for (Origin o : res.train.origin)
    if (o == Origin::observational) ++obs;
  CHECK(obs == 200);
}

TEST_CASE("syn3 with zero effect weights has zero true cate everywhere") {
  auto cfg = small_cfg(SynDataset::syn3);
  cfg.w_t1 = cfg.w_t2 = cfg.w_t3 = 0.0;
  auto res = gen_synthetic(cfg);
  for (std::size_t i = 0; i < 20; ++i)
    for (int t1 = 0; t1 <= 4; ++t1)
      for (int t2 = 0; t2 <= 4; ++t2) {
        const double c = true_cate(res.oracle, &res.test.features.data[i * 8],
                                   {t1, t2});
        CHECK(std::abs(c) < 1e-14);
      }
}

TEST_CASE("syn3 and syn2 effects are additive when the interaction weight is zero") {
  for (auto id : {SynDataset::syn2, SynDataset::syn3}) {
    auto cfg = small_cfg(id);
    cfg.w_t3 = 0.0;
    auto res = gen_synthetic(cfg);
    for (std::size_t i = 0; i < 100; ++i) {
      const double* x = &res.test.features.data[i * 8];
      for (int t1 = 1; t1 <= 4; ++t1)
        for (int t2 = 1; t2 <= 4; ++t2) {
          const double joint = true_cate(res.oracle, x, {t1, t2});
          const double split = true_cate(res.oracle, x, {t1, 0}) +
                               true_cate(res.oracle, x, {0, t2});
          CHECK(joint == doctest::Approx(split).epsilon(1e-10));
        }
    }
  }
}

TEST_CASE("syn2 cate for an isolated treatment is linear in the level and features") {
  auto res = gen_synthetic(small_cfg(SynDataset::syn2));
  double ratio0 = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const double* x = &res.test.features.data[i * 8];
    const double c1 = true_cate(res.oracle, x, {1, 0});
    const double c2 = true_cate(res.oracle, x, {2, 0});
    const double c4 = true_cate(res.oracle, x, {4, 0});
    CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-10));
    CHECK(c4 == doctest::Approx(4.0 * c1).epsilon(1e-10));
    // proportional to x1'+x2'+x3' with one dataset-wide constant
    const double feat = x[0] + x[1] + x[2];
    if (feat > 1e-6) {
      const double r = c1 / feat;
      if (i == 0) ratio0 = r;
      else CHECK(r == doctest::Approx(ratio0).epsilon(1e-8));
    }
  }
}

TEST_CASE("syn1 interaction term is guarded to zero outside its domain") {
  auto cfg = small_cfg(SynDataset::syn1);
  cfg.w_t1 = cfg.w_t2 = 0.0;  // isolate the interaction
  cfg.w_t3 = 1.0;
  auto res = gen_synthetic(cfg);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < 30; ++i) {
    const double* x = &res.test.features.data[i * 8];
    // (5 t1 - 1)(t1 + t2 - 1) <= 0 for these combos
    CHECK(std::abs(true_cate(res.oracle, x, {1, 0})) < 1e-14);
    CHECK(std::abs(true_cate(res.oracle, x, {0, 1})) < 1e-14);
    CHECK(std::abs(true_cate(res.oracle, x, {0, 4})) < 1e-14);
    if (std::abs(true_cate(res.oracle, x, {1, 1})) > 1e-12) any_nonzero = true;
  }
  CHECK(any_nonzero);
}

TEST_CASE("noiseless outcomes match the oracle on training rows") {
  auto cfg = small_cfg(SynDataset::syn3);
  cfg.gaussian_sigma = 0.0;
  cfg.uniform_lo = cfg.uniform_hi = 0.0;
  auto res = gen_synthetic(cfg);
  for (std::size_t i = 0; i < res.train.size(); ++i) {
    const double want =
        res.oracle.outcome(res.train.features, i, res.train.treatments[i]);
    CHECK(res.train.outcomes.at(i, 0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("observational assignment follows the score; rct does not") {
  auto cfg = small_cfg(SynDataset::syn3);
  cfg.n_train = 16000;
  cfg.n_test = 1000;
  auto res = gen_synthetic(cfg);
  std::vector<double> lvl_obs, sc_obs, lvl_rct, sc_rct;
  const auto& a = res.coeffs.treatment[0];
  for (std::size_t i = 0; i < res.train.size(); ++i) {
    const double* x = &res.train.features.data[i * 8];
    const double score = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
    if (res.train.origin[i] == Origin::observational) {
      lvl_obs.push_back(res.train.treatments[i][0]);
      sc_obs.push_back(score);
    } else {
      lvl_rct.push_back(res.train.treatments[i][0]);
      sc_rct.push_back(score);
    }
  }
  CHECK(pearson(lvl_obs, sc_obs) > 0.5);
  CHECK(std::abs(pearson(lvl_rct, sc_rct)) < 0.05);
}

TEST_CASE("with zero noise observational levels equal the binned score") {
  auto cfg = small_cfg(SynDataset::syn3);
  cfg.gaussian_sigma = 0.0;
  cfg.uniform_lo = cfg.uniform_hi = 0.0;
  auto res = gen_synthetic(cfg);
  const auto& a = res.coeffs.treatment[0];
  // recompute obs normalization bounds over both splits
  double lo = 1e300, hi = -1e300;
  auto score = [&](const Dataset& ds, std::size_t i) {
    const double* x = &ds.features.data[i * 8];
    return a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
  };
  for (const Dataset* ds : {&res.train, &res.test})
    for (std::size_t i = 0; i < ds->size(); ++i)
      if (ds->origin[i] == Origin::observational) {
        lo = std::min(lo, score(*ds, i));
        hi = std::max(hi, score(*ds, i));
      }
  for (std::size_t i = 0; i < res.train.size(); ++i) {
    if (res.train.origin[i] != Origin::observational) continue;
    const double v = (score(res.train, i) - lo) / (hi - lo);
    int want = static_cast<int>(std::ceil(v * 5.0)) - 1;
    want = std::max(0, std::min(4, want));
    CHECK(res.train.treatments[i][0] == want);
  }
}

TEST_CASE("outcome binning keeps outcomes in the declared bin range") {
  auto cfg = small_cfg(SynDataset::syn2);
  cfg.outcome_bins = 4;
  auto res = gen_synthetic(cfg);
  for (double y : res.train.outcomes.data) {
    CHECK(y == std::floor(y));
    CHECK(y >= 0.0);
    CHECK(y <= 3.0);
  }
}

TEST_CASE("csv round trip preserves the dataset exactly") {
  auto res = gen_synthetic(small_cfg(SynDataset::syn1));
  const std::string path = "datagen_roundtrip.csv";
  write_dataset_csv(res.train, path);
  Dataset back = read_dataset_csv(path, res.train.levels);
  CHECK(same_dataset(res.train, back));
  std::remove(path.c_str());
}

TEST_CASE("manifest records the config and derived coefficients") {
  auto cfg = small_cfg(SynDataset::syn2);
  auto res = gen_synthetic(cfg);
  auto j = nlohmann::json::parse(synth_manifest_json(cfg, res.coeffs));
  CHECK(j["dataset_id"] == "syn2");
  CHECK(j["coeffs_outcome"].size() == 15);
  CHECK(j["coeffs_treatment"].size() == 2);
  CHECK(j["seed"] == 7);
  // replaying with the recorded coefficients reproduces the data
  SynthConfig replay = cfg;
  replay.coeffs_a = res.coeffs.outcome;
  replay.coeffs_t = res.coeffs.treatment;
  auto res2 = gen_synthetic(replay);
  CHECK(res2.coeffs.outcome == res.coeffs.outcome);
}

TEST_CASE("config validation rejects bad inputs") {
  SynthConfig cfg;
  cfg.obs_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.levels = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.feature_dim = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
