#include "xtnet/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace xtnet {

using ad::NodeRef;
using ad::Tape;

void LossConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0)
    throw std::invalid_argument("LossConfig: lambdas must be >= 0");
  if (sinkhorn_epsilon <= 0)
    throw std::invalid_argument("LossConfig: sinkhorn_epsilon must be > 0");
  if (sinkhorn_iters < 1)
    throw std::invalid_argument("LossConfig: sinkhorn_iters must be >= 1");
  if (min_group_size < 2)
    throw std::invalid_argument("LossConfig: min_group_size must be >= 2");
  if (clamp_eps <= 0 || clamp_eps >= 0.5)
    throw std::invalid_argument("LossConfig: clamp_eps must be in (0, 0.5)");
}

NodeRef bce_factual(Tape& tape, NodeRef pred, const Tensor& y) {
  if (!pred->value.same_shape(y))
    throw std::invalid_argument("bce_factual: pred " + pred->value.shape_str() +
                                " vs y " + Tensor(y).shape_str());
  for (double p : pred->value.data)
    if (p <= 0.0 || p >= 1.0)
      throw std::invalid_argument(
          "bce_factual: prediction outside (0,1); clamp before the loss");
  auto yn = tape.constant(y);
  auto one_minus_y = tape.affine(yn, -1.0, 1.0);
  auto one_minus_p = tape.affine(pred, -1.0, 1.0);
  auto ll = tape.add(tape.mul(yn, tape.log(pred)),
                     tape.mul(one_minus_y, tape.log(one_minus_p)));
  return tape.affine(tape.mean(ll), -1.0, 0.0);
}

NodeRef sinkhorn_ot(Tape& tape, NodeRef A, NodeRef B, double epsilon,
                    int iters) {
  if (A->value.cols != B->value.cols)
    throw std::invalid_argument("sinkhorn_ot: point dims differ, " +
                                A->value.shape_str() + " vs " +
                                B->value.shape_str());
  const std::size_t n = A->value.rows;
  const std::size_t m = B->value.rows;
  if (n == 0 || m == 0)
    throw std::invalid_argument("sinkhorn_ot: empty point set");
  const double log_an = std::log(1.0 / static_cast<double>(n));
  const double log_bm = std::log(1.0 / static_cast<double>(m));

  auto C = tape.pairwise_sqdist(A, B);            // n x m
  auto negC = tape.affine(C, -1.0 / epsilon, 0.0);  // -C/eps
  auto negCt = tape.transpose(negC);                // m x n

  auto f = tape.constant(Tensor(n, 1));  // potentials, start at zero
  auto g = tape.constant(Tensor(m, 1));
  for (int it = 0; it < iters; ++it) {
    // Damped simultaneous update from the previous (f, g). Undamped
    // Jacobi oscillates; averaging with the previous iterate converges
    // and keeps the symmetry in (A, B).
    auto gs = tape.transpose(tape.affine(g, 1.0 / epsilon, 0.0));  // 1 x m
    auto fs = tape.transpose(tape.affine(f, 1.0 / epsilon, 0.0));  // 1 x n
    auto fn = tape.affine(
        tape.affine(tape.logsumexp_rows(tape.add_rowvec(negC, gs)), 1.0, log_bm),
        -epsilon, 0.0);
    auto gn = tape.affine(
        tape.affine(tape.logsumexp_rows(tape.add_rowvec(negCt, fs)), 1.0, log_an),
        -epsilon, 0.0);
    f = tape.add(tape.affine(f, 0.5, 0.0), tape.affine(fn, 0.5, 0.0));
    g = tape.add(tape.affine(g, 0.5, 0.0), tape.affine(gn, 0.5, 0.0));
  }

  // P_ij = (1/nm) exp((f_i + g_j - C_ij)/eps); cost = sum P_ij C_ij
  auto logits = tape.add_colvec(
      tape.add_rowvec(negC, tape.transpose(tape.affine(g, 1.0 / epsilon, 0.0))),
      tape.affine(f, 1.0 / epsilon, 0.0));
  auto P = tape.affine(tape.exp(logits), 1.0 / static_cast<double>(n * m), 0.0);
  return tape.sum(tape.mul(P, C));
}

NodeRef sinkhorn_divergence(Tape& tape, NodeRef A, NodeRef B, double epsilon,
                            int iters) {
  auto ab = sinkhorn_ot(tape, A, B, epsilon, iters);
  auto aa = sinkhorn_ot(tape, A, A, epsilon, iters);
  auto bb = sinkhorn_ot(tape, B, B, epsilon, iters);
  return tape.sub(ab, tape.affine(tape.add(aa, bb), 0.5, 0.0));
}

double sinkhorn_divergence(const Tensor& A, const Tensor& B, double epsilon,
                           int iters) {
  Tape tape;
  return sinkhorn_divergence(tape, tape.constant(A), tape.constant(B), epsilon,
                             iters)
      ->value.item();
}

NodeRef imbalance_loss(Tape& tape, const std::vector<NodeRef>& groups,
                       const LossConfig& cfg) {
  std::vector<NodeRef> eligible;
  for (const auto& g : groups)
    if (g->value.rows >= static_cast<std::size_t>(cfg.min_group_size))
      eligible.push_back(g);

  NodeRef acc = tape.constant(Tensor::scalar(0.0));
  // Cache the self-transport terms; each group appears in many pairs.
  std::vector<NodeRef> self(eligible.size());
  for (std::size_t i = 0; i < eligible.size(); ++i)
    for (std::size_t j = i + 1; j < eligible.size(); ++j) {
      if (!self[i])
        self[i] = sinkhorn_ot(tape, eligible[i], eligible[i],
                              cfg.sinkhorn_epsilon, cfg.sinkhorn_iters);
      if (!self[j])
        self[j] = sinkhorn_ot(tape, eligible[j], eligible[j],
                              cfg.sinkhorn_epsilon, cfg.sinkhorn_iters);
      auto cross = sinkhorn_ot(tape, eligible[i], eligible[j],
                               cfg.sinkhorn_epsilon, cfg.sinkhorn_iters);
      auto div = tape.sub(
          cross, tape.affine(tape.add(self[i], self[j]), 0.5, 0.0));
      acc = tape.add(acc, div);
    }
  return acc;
}

NodeRef total_loss(Tape& tape, NodeRef factual, NodeRef imb,
                   const LossConfig& cfg) {
  return tape.add(tape.affine(factual, cfg.lambda1, 0.0),
                  tape.affine(imb, cfg.lambda2, 0.0));
}

}  // namespace xtnet
