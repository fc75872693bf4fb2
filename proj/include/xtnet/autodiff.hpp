#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "xtnet/tensor.hpp"

// Minimal reverse-mode automatic differentiation over dense tensors.
// A Tape records nodes in creation order (a topological order of the
// graph); backward() runs a single reverse sweep. Tapes are cheap and
// disposable: trainable state lives in Parameter objects that outlive
// the tape, and param() binds a leaf node to one of them so backward()
// accumulates into Parameter::grad.
namespace xtnet::ad {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  // Adam state, owned here so optimizer steps stay per-parameter.
  Tensor adam_m;
  Tensor adam_v;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.rows, value.cols),
        adam_m(value.rows, value.cols),
        adam_v(value.rows, value.cols) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

struct Node;
using NodeRef = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // same shape as value, zero until backward touches it
  std::vector<NodeRef> parents;
  std::function<void(Node&)> backprop;  // distributes this->grad to parents
  Parameter* bound = nullptr;           // set for param leaves
  const char* op = "leaf";
  std::size_t idx = 0;
};

class Tape {
 public:
  explicit Tape(std::uint64_t seed = 0) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }
  std::size_t num_nodes() const { return order_.size(); }

  NodeRef constant(Tensor t);
  NodeRef param(Parameter& p);  // leaf bound to p; backward adds into p.grad

  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);  // elementwise, identical shapes
  NodeRef matmul(NodeRef a, NodeRef b);
  NodeRef transpose(NodeRef a);
  NodeRef affine(NodeRef a, double scale, double shift);  // scale*a + shift
  NodeRef neg(NodeRef a) { return affine(std::move(a), -1.0, 0.0); }
  NodeRef add_rowvec(NodeRef m, NodeRef r);  // m (n x c) + broadcast r (1 x c)
  NodeRef add_colvec(NodeRef m, NodeRef v);  // m (n x c) + broadcast v (n x 1)

  NodeRef sigmoid(NodeRef a);
  NodeRef tanh(NodeRef a);
  NodeRef relu(NodeRef a);
  NodeRef exp(NodeRef a);
  NodeRef log(NodeRef a);  // throws on non-positive input
  NodeRef clamp(NodeRef a, double lo, double hi);  // zero grad outside (lo,hi)

  NodeRef sum(NodeRef a);   // 1x1
  NodeRef mean(NodeRef a);  // 1x1

  NodeRef concat_cols(NodeRef a, NodeRef b);
  NodeRef slice_cols(NodeRef a, std::size_t from, std::size_t to);  // [from,to)
  NodeRef reshape(NodeRef a, std::size_t r, std::size_t c);

  NodeRef logsumexp_rows(NodeRef a);           // (n x c) -> (n x 1)
  NodeRef pairwise_sqdist(NodeRef a, NodeRef b);

  // Reverse sweep from a scalar root; leaf grads land in bound Parameters.
  void backward(const NodeRef& root);
  void zero_grad();

 private:
  NodeRef make(const char* op, Tensor value, std::vector<NodeRef> parents,
               std::function<void(Node&)> backprop);

  std::vector<NodeRef> order_;
  std::mt19937_64 rng_;
};

// Uniform init in [-sqrt(1/fan_in), sqrt(1/fan_in)].
Tensor init_uniform(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                    std::size_t fan_in);

// Max over parameter coordinates of
// |analytic - central_difference| / max(1, |central_difference|).
// `build` must construct the same scalar graph on every call.
double grad_check(const std::function<NodeRef(Tape&)>& build,
                  const std::vector<Parameter*>& params, double step);

}  // namespace xtnet::ad
