#include "xtnet/kernels.hpp"

#include <cstdint>
#include <stdexcept>

namespace xtnet::kernels {

namespace {
void check_inner(const Tensor& A, const Tensor& B, std::size_t a_dim,
                 std::size_t b_dim, const char* op) {
  if (a_dim != b_dim)
    throw std::invalid_argument(std::string(op) + ": inner dims differ, " +
                                A.shape_str() + " vs " + B.shape_str());
}
}  // namespace

void matmul(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.rows, "matmul");
  out = Tensor(A.rows, B.cols);
  const std::int64_t n = static_cast<std::int64_t>(A.rows);
#pragma omp parallel for schedule(static) if (n > 63)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* a = &A.data[i * A.cols];
    double* o = &out.data[i * out.cols];
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = a[k];
      if (aik == 0.0) continue;
      const double* b = &B.data[k * B.cols];
      for (std::size_t j = 0; j < B.cols; ++j) o[j] += aik * b[j];
    }
  }
}

void matmul_tn(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.rows, B.rows, "matmul_tn");
  out = Tensor(A.cols, B.cols);
  const std::int64_t k = static_cast<std::int64_t>(A.cols);
#pragma omp parallel for schedule(static) if (k > 63)
  for (std::int64_t i = 0; i < k; ++i) {
    double* o = &out.data[i * out.cols];
    for (std::size_t r = 0; r < A.rows; ++r) {
      const double a = A.data[r * A.cols + i];
      if (a == 0.0) continue;
      const double* b = &B.data[r * B.cols];
      for (std::size_t j = 0; j < B.cols; ++j) o[j] += a * b[j];
    }
  }
}

void matmul_nt(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.cols, "matmul_nt");
  out = Tensor(A.rows, B.rows);
  const std::int64_t n = static_cast<std::int64_t>(A.rows);
#pragma omp parallel for schedule(static) if (n > 63)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* a = &A.data[i * A.cols];
    double* o = &out.data[i * out.cols];
    for (std::size_t j = 0; j < B.rows; ++j) {
      const double* b = &B.data[j * B.cols];
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) s += a[k] * b[k];
      o[j] = s;
    }
  }
}

void pairwise_sqdist(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.cols, "pairwise_sqdist");
  out = Tensor(A.rows, B.rows);
  const std::int64_t n = static_cast<std::int64_t>(A.rows);
#pragma omp parallel for schedule(static) if (n > 63)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* a = &A.data[i * A.cols];
    double* o = &out.data[i * out.cols];
    for (std::size_t j = 0; j < B.rows; ++j) {
      const double* b = &B.data[j * B.cols];
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
      }
      o[j] = s;
    }
  }
}

void pairwise_sqdist_grad_a(const Tensor& A, const Tensor& B, const Tensor& g,
                            Tensor& gA) {
  const std::int64_t n = static_cast<std::int64_t>(A.rows);
#pragma omp parallel for schedule(static) if (n > 63)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* a = &A.data[i * A.cols];
    double* ga = &gA.data[i * A.cols];
    for (std::size_t j = 0; j < B.rows; ++j) {
      const double gij = g.at(i, j);
      if (gij == 0.0) continue;
      const double* b = &B.data[j * B.cols];
      for (std::size_t k = 0; k < A.cols; ++k)
        ga[k] += gij * 2.0 * (a[k] - b[k]);
    }
  }
}

void pairwise_sqdist_grad_b(const Tensor& A, const Tensor& B, const Tensor& g,
                            Tensor& gB) {
  const std::int64_t m = static_cast<std::int64_t>(B.rows);
#pragma omp parallel for schedule(static) if (m > 63)
  for (std::int64_t j = 0; j < m; ++j) {
    const double* b = &B.data[j * B.cols];
    double* gb = &gB.data[j * B.cols];
    for (std::size_t i = 0; i < A.rows; ++i) {
      const double gij = g.at(i, j);
      if (gij == 0.0) continue;
      const double* a = &A.data[i * A.cols];
      for (std::size_t k = 0; k < B.cols; ++k)
        gb[k] -= gij * 2.0 * (a[k] - b[k]);
    }
  }
}

namespace serial {

void matmul(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.rows, "matmul");
  out = Tensor(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double a = A.at(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) out.at(i, j) += a * B.at(k, j);
    }
}

void matmul_tn(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.rows, B.rows, "matmul_tn");
  out = Tensor(A.cols, B.cols);
  for (std::size_t i = 0; i < A.cols; ++i)
    for (std::size_t r = 0; r < A.rows; ++r) {
      const double a = A.at(r, i);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) out.at(i, j) += a * B.at(r, j);
    }
}

void matmul_nt(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.cols, "matmul_nt");
  out = Tensor(A.rows, B.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < B.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(j, k);
      out.at(i, j) = s;
    }
}

void pairwise_sqdist(const Tensor& A, const Tensor& B, Tensor& out) {
  check_inner(A, B, A.cols, B.cols, "pairwise_sqdist");
  out = Tensor(A.rows, B.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < B.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) {
        const double d = A.at(i, k) - B.at(j, k);
        s += d * d;
      }
      out.at(i, j) = s;
    }
}

}  // namespace serial

}  // namespace xtnet::kernels
