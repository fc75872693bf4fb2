#pragma once

#include <vector>

#include "xtnet/autodiff.hpp"

namespace xtnet {

struct LossConfig {
  double lambda1 = 0.1;
  double lambda2 = 0.01;
  double sinkhorn_epsilon = 0.1;
  int sinkhorn_iters = 20;
  int min_group_size = 2;
  double clamp_eps = 0.01;

  void validate() const;
};

// Mean binary cross-entropy over all entries. pred must already be
// clamped into (0,1) by the caller; values outside throw.
ad::NodeRef bce_factual(ad::Tape& tape, ad::NodeRef pred, const Tensor& y);

// Entropic OT cost <P, C> between uniform point clouds with squared
// Euclidean ground cost, fixed iteration count, differentiable by
// unrolling. Updates are simultaneous (Jacobi) so the value is symmetric
// in (A, B) at any iteration count.
ad::NodeRef sinkhorn_ot(ad::Tape& tape, ad::NodeRef A, ad::NodeRef B,
                        double epsilon, int iters);

// Debiased divergence OT(A,B) - OT(A,A)/2 - OT(B,B)/2.
ad::NodeRef sinkhorn_divergence(ad::Tape& tape, ad::NodeRef A, ad::NodeRef B,
                                double epsilon, int iters);

// Convenience value-only form.
double sinkhorn_divergence(const Tensor& A, const Tensor& B, double epsilon,
                           int iters);

// Sum of pairwise Sinkhorn divergences over distinct treatment groups
// with at least min_group_size members. `groups` holds the hidden
// feature block of each group.
ad::NodeRef imbalance_loss(ad::Tape& tape, const std::vector<ad::NodeRef>& groups,
                           const LossConfig& cfg);

ad::NodeRef total_loss(ad::Tape& tape, ad::NodeRef factual, ad::NodeRef imb,
                       const LossConfig& cfg);

}  // namespace xtnet
