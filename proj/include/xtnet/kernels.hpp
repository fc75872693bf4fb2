#pragma once

#include "xtnet/tensor.hpp"

// Dense inner-loop kernels. The default implementations parallelize over
// output rows with OpenMP; every output element is written by exactly one
// thread, so results are bit-identical to the serial reference regardless
// of thread count. The serial versions under kernels::serial are kept for
// testing and for the kernel benchmark.
namespace xtnet::kernels {

// out = A (n x k) * B (k x m)
void matmul(const Tensor& A, const Tensor& B, Tensor& out);

// out = A^T (k x n -> n x k form) * B:  out (k x m) = A(n x k)^T * B(n x m)
void matmul_tn(const Tensor& A, const Tensor& B, Tensor& out);

// out (n x k) = A(n x m) * B(k x m)^T
void matmul_nt(const Tensor& A, const Tensor& B, Tensor& out);

// out_ij = ||a_i - b_j||^2 for row points. A (n x d), B (m x d) -> out (n x m)
void pairwise_sqdist(const Tensor& A, const Tensor& B, Tensor& out);

// gA_ik += sum_j g_ij * 2 * (a_ik - b_jk)
void pairwise_sqdist_grad_a(const Tensor& A, const Tensor& B, const Tensor& g,
                            Tensor& gA);
// gB_jk += sum_i g_ij * (-2) * (a_ik - b_jk)
void pairwise_sqdist_grad_b(const Tensor& A, const Tensor& B, const Tensor& g,
                            Tensor& gB);

namespace serial {
void matmul(const Tensor& A, const Tensor& B, Tensor& out);
void matmul_tn(const Tensor& A, const Tensor& B, Tensor& out);
void matmul_nt(const Tensor& A, const Tensor& B, Tensor& out);
void pairwise_sqdist(const Tensor& A, const Tensor& B, Tensor& out);
}  // namespace serial

}  // namespace xtnet::kernels
