// Compares the OpenMP kernels against their serial reference on the
// shapes the trainer actually hits, and verifies they agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "xtnet/kernels.hpp"

using xtnet::Tensor;
namespace k = xtnet::kernels;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(r, c);
  for (auto& v : t.data) v = u(rng);
  return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double, std::milli>(elapsed).count() / reps;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
  return worst;
}

}  // namespace

int main() {
  std::mt19937_64 rng(42);
  std::printf("%-18s %8s %8s %10s %10s %9s\n", "kernel", "n", "d", "serial_ms",
              "openmp_ms", "speedup");

  const int reps = 5;
  for (std::size_t n : {256, 1024, 4096}) {
    for (std::size_t d : {32, 128}) {
      auto A = random_tensor(rng, n, d);
      auto B = random_tensor(rng, d, d);
      Tensor out(n, d), ref(n, d);
      const double ts =
          time_ms([&] { k::serial::matmul(A, B, ref); }, reps);
      const double tp = time_ms([&] { k::matmul(A, B, out); }, reps);
      std::printf("%-18s %8zu %8zu %10.3f %10.3f %8.2fx  (max diff %.2e)\n",
                  "matmul", n, d, ts, tp, ts / tp, max_abs_diff(out, ref));

      auto C = random_tensor(rng, n / 2, d);
      Tensor dist(n, n / 2), dist_ref(n, n / 2);
      const double ds =
          time_ms([&] { k::serial::pairwise_sqdist(A, C, dist_ref); }, reps);
      const double dp = time_ms([&] { k::pairwise_sqdist(A, C, dist); }, reps);
      std::printf("%-18s %8zu %8zu %10.3f %10.3f %8.2fx  (max diff %.2e)\n",
                  "pairwise_sqdist", n, d, ds, dp, ds / dp,
                  max_abs_diff(dist, dist_ref));
    }
  }
  return 0;
}
