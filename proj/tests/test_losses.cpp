#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "xtnet/losses.hpp"

using namespace xtnet;
using ad::Parameter;
using ad::Tape;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c,
                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(r, c);
  for (double& x : t.data) x = d(rng);
  return t;
}

// Independent summation oracle for BCE.
double bce_oracle(const Tensor& p, const Tensor& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j)
      s += y.at(i, j) * std::log(p.at(i, j)) +
           (1.0 - y.at(i, j)) * std::log(1.0 - p.at(i, j));
  return -s / static_cast<double>(p.size());
}

// Exact OT between equal-size uniform clouds: minimum over permutations
// of the average squared distance.
double exact_ot(const Tensor& A, const Tensor& B) {
  const std::size_t n = A.rows;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) {
        const double diff = A.at(i, k) - B.at(perm[i], k);
        d += diff * diff;
      }
      cost += d;
    }
    best = std::min(best, cost / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("bce analytic values") {
  Tape t;
  Tensor p(1, 1, 0.5), y1(1, 1, 1.0), yh(1, 1, 0.5);
  CHECK(bce_factual(t, t.constant(p), y1)->value.item() ==
        doctest::Approx(std::log(2.0)));
  CHECK(bce_factual(t, t.constant(p), yh)->value.item() ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("bce matches summation oracle on random batches") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor p = random_tensor(rng, 8, 3, 0.02, 0.98);
    Tensor y = random_tensor(rng, 8, 3, 0.0, 1.0);
    Tape t;
    CHECK(bce_factual(t, t.constant(p), y)->value.item() ==
          doctest::Approx(bce_oracle(p, y)).epsilon(1e-12));
  }
}

TEST_CASE("bce rejects unclamped predictions") {
  Tape t;
  Tensor p(1, 1, 1.0), y(1, 1, 1.0);
  CHECK_THROWS_AS(bce_factual(t, t.constant(p), y), std::invalid_argument);
}

TEST_CASE("sinkhorn divergence of a set with itself is zero") {
  std::mt19937_64 rng(2);
  Tensor A = random_tensor(rng, 6, 3);
  CHECK(std::abs(sinkhorn_divergence(A, A, 0.1, 20)) < 1e-6);
}

TEST_CASE("sinkhorn on singletons recovers squared distance") {
  Tensor p(1, 2), q(1, 2);
  p.data = {0.0, 0.0};
  q.data = {0.6, -0.8};
  CHECK(sinkhorn_divergence(p, q, 0.01, 50) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sinkhorn approaches exact OT for small epsilon (4-point oracle)") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    Tensor A = random_tensor(rng, 4, 2);
    Tensor B = random_tensor(rng, 4, 2);
    const double exact = exact_ot(A, B);
    Tape t;
    const double ent =
        sinkhorn_ot(t, t.constant(A), t.constant(B), 0.01, 400)->value.item();
    CHECK(std::abs(ent - exact) / std::max(1e-12, exact) < 0.02);
  }
}

TEST_CASE("sinkhorn symmetry and non-negativity") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor A = random_tensor(rng, 3 + rng() % 5, 3);
    Tensor B = random_tensor(rng, 3 + rng() % 5, 3);
    const double ab = sinkhorn_divergence(A, B, 0.1, 20);
    const double ba = sinkhorn_divergence(B, A, 0.1, 20);
    CHECK(std::abs(ab - ba) < 1e-10);
    CHECK(ab > -1e-9);
  }
}

TEST_CASE("sinkhorn rejects dimension mismatch") {
  Tape t;
  auto A = t.constant(Tensor(2, 3, 0.1));
  auto B = t.constant(Tensor(2, 4, 0.1));
  CHECK_THROWS_AS(sinkhorn_ot(t, A, B, 0.1, 5), std::invalid_argument);
}

TEST_CASE("sinkhorn divergence gradient passes grad_check") {
  std::mt19937_64 rng(5);
  Parameter A("A", random_tensor(rng, 5, 2));
  Parameter B("B", random_tensor(rng, 5, 2));
  auto build = [&](Tape& t) {
    return sinkhorn_divergence(t, t.param(A), t.param(B), 0.1, 20);
  };
  CHECK(ad::grad_check(build, {&A, &B}, 1e-5) < 1e-3);
}

TEST_CASE("imbalance loss: single group is zero, identical groups are zero") {
  std::mt19937_64 rng(6);
  LossConfig cfg;
  Tensor H = random_tensor(rng, 5, 4);
  Tape t;
  auto single = imbalance_loss(t, {t.constant(H)}, cfg);
  CHECK(single->value.item() == 0.0);
  auto twin = imbalance_loss(t, {t.constant(H), t.constant(H)}, cfg);
  CHECK(std::abs(twin->value.item()) < 1e-6);
}

TEST_CASE("imbalance loss over three groups equals sum of pairwise divergences") {
  std::mt19937_64 rng(7);
  LossConfig cfg;
  Tensor A = random_tensor(rng, 4, 3), B = random_tensor(rng, 5, 3),
         C = random_tensor(rng, 6, 3);
  Tape t;
  auto loss = imbalance_loss(t, {t.constant(A), t.constant(B), t.constant(C)}, cfg);
  const double want = sinkhorn_divergence(A, B, cfg.sinkhorn_epsilon, cfg.sinkhorn_iters) +
                      sinkhorn_divergence(A, C, cfg.sinkhorn_epsilon, cfg.sinkhorn_iters) +
                      sinkhorn_divergence(B, C, cfg.sinkhorn_epsilon, cfg.sinkhorn_iters);
  CHECK(loss->value.item() == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("imbalance loss skips groups below min_group_size") {
  std::mt19937_64 rng(8);
  LossConfig cfg;
  cfg.min_group_size = 3;
  Tensor A = random_tensor(rng, 4, 3), tiny = random_tensor(rng, 2, 3);
  Tape t;
  auto loss = imbalance_loss(t, {t.constant(A), t.constant(tiny)}, cfg);
  CHECK(loss->value.item() == 0.0);
}

TEST_CASE("imbalance loss gradient w.r.t. hidden features") {
  std::mt19937_64 rng(9);
  LossConfig cfg;
  Parameter H1("H1", random_tensor(rng, 4, 3));
  Parameter H2("H2", random_tensor(rng, 5, 3));
  auto build = [&](Tape& t) {
    return imbalance_loss(t, {t.param(H1), t.param(H2)}, cfg);
  };
  CHECK(ad::grad_check(build, {&H1, &H2}, 1e-5) < 1e-3);
}

TEST_CASE("total loss weighting") {
  LossConfig cfg;
  Tape t;
  auto f = t.constant(Tensor::scalar(2.0));
  auto i = t.constant(Tensor::scalar(3.0));
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 1.0;
  CHECK(total_loss(t, f, i, cfg)->value.item() == doctest::Approx(5.0));
  cfg.lambda2 = 0.0;
  CHECK(total_loss(t, f, i, cfg)->value.item() == doctest::Approx(2.0));
  LossConfig defaults;
  CHECK(defaults.lambda1 == doctest::Approx(0.1));
  CHECK(defaults.lambda2 == doctest::Approx(0.01));
}
