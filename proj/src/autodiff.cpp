#include "xtnet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xtnet/kernels.hpp"

namespace xtnet::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              a.shape_str() + " vs " + b.shape_str());
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_error(op, a, b);
}

}  // namespace

NodeRef Tape::make(const char* op, Tensor value, std::vector<NodeRef> parents,
                   std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->grad = Tensor(value.rows, value.cols);
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backprop = std::move(backprop);
  n->op = op;
  n->idx = order_.size();
  order_.push_back(n);
  return n;
}

NodeRef Tape::constant(Tensor t) { return make("const", std::move(t), {}, nullptr); }

NodeRef Tape::param(Parameter& p) {
  auto n = make("param", p.value, {}, nullptr);
  n->bound = &p;
  n->backprop = [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.bound->grad[i] += self.grad[i];
  };
  return n;
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  require_same("add", a->value, b->value);
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b->value[i];
  return make("add", std::move(v), {a, b}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      self.parents[0]->grad[i] += self.grad[i];
      self.parents[1]->grad[i] += self.grad[i];
    }
  });
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
  require_same("sub", a->value, b->value);
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b->value[i];
  return make("sub", std::move(v), {a, b}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      self.parents[0]->grad[i] += self.grad[i];
      self.parents[1]->grad[i] -= self.grad[i];
    }
  });
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
  require_same("mul", a->value, b->value);
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b->value[i];
  return make("mul", std::move(v), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      pa.grad[i] += self.grad[i] * pb.value[i];
      pb.grad[i] += self.grad[i] * pa.value[i];
    }
  });
}

NodeRef Tape::matmul(NodeRef a, NodeRef b) {
  Tensor v;
  kernels::matmul(a->value, b->value, v);
  return make("matmul", std::move(v), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    Tensor ga, gb;
    kernels::matmul_nt(self.grad, pb.value, ga);  // g * B^T
    kernels::matmul_tn(pa.value, self.grad, gb);  // A^T * g
    for (std::size_t i = 0; i < ga.size(); ++i) pa.grad[i] += ga[i];
    for (std::size_t i = 0; i < gb.size(); ++i) pb.grad[i] += gb[i];
  });
}

NodeRef Tape::transpose(NodeRef a) {
  Tensor v(a->value.cols, a->value.rows);
  for (std::size_t i = 0; i < a->value.rows; ++i)
    for (std::size_t j = 0; j < a->value.cols; ++j)
      v.at(j, i) = a->value.at(i, j);
  return make("transpose", std::move(v), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.rows; ++i)
      for (std::size_t j = 0; j < self.grad.cols; ++j)
        p.grad.at(j, i) += self.grad.at(i, j);
  });
}

NodeRef Tape::affine(NodeRef a, double scale, double shift) {
  Tensor v = a->value;
  for (double& x : v.data) x = scale * x + shift;
  return make("affine", std::move(v), {a}, [scale](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.parents[0]->grad[i] += scale * self.grad[i];
  });
}

NodeRef Tape::add_rowvec(NodeRef m, NodeRef r) {
  if (r->value.rows != 1 || r->value.cols != m->value.cols)
    shape_error("add_rowvec", m->value, r->value);
  Tensor v = m->value;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) v.at(i, j) += r->value[j];
  return make("add_rowvec", std::move(v), {m, r}, [](Node& self) {
    Node& pm = *self.parents[0];
    Node& pr = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.rows; ++i)
      for (std::size_t j = 0; j < self.grad.cols; ++j) {
        pm.grad.at(i, j) += self.grad.at(i, j);
        pr.grad[j] += self.grad.at(i, j);
      }
  });
}

NodeRef Tape::add_colvec(NodeRef m, NodeRef v_) {
  if (v_->value.cols != 1 || v_->value.rows != m->value.rows)
    shape_error("add_colvec", m->value, v_->value);
  Tensor v = m->value;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) v.at(i, j) += v_->value[i];
  return make("add_colvec", std::move(v), {m, v_}, [](Node& self) {
    Node& pm = *self.parents[0];
    Node& pv = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.rows; ++i)
      for (std::size_t j = 0; j < self.grad.cols; ++j) {
        pm.grad.at(i, j) += self.grad.at(i, j);
        pv.grad[i] += self.grad.at(i, j);
      }
  });
}

NodeRef Tape::sigmoid(NodeRef a) {
  Tensor v = a->value;
  for (double& x : v.data) x = 1.0 / (1.0 + std::exp(-x));
  return make("sigmoid", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = self.value[i];
      self.parents[0]->grad[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

NodeRef Tape::tanh(NodeRef a) {
  Tensor v = a->value;
  for (double& x : v.data) x = std::tanh(x);
  return make("tanh", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double t = self.value[i];
      self.parents[0]->grad[i] += self.grad[i] * (1.0 - t * t);
    }
  });
}

NodeRef Tape::relu(NodeRef a) {
  Tensor v = a->value;
  for (double& x : v.data) x = x > 0.0 ? x : 0.0;
  return make("relu", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (self.parents[0]->value[i] > 0.0)
        self.parents[0]->grad[i] += self.grad[i];
  });
}

NodeRef Tape::exp(NodeRef a) {
  Tensor v = a->value;
  for (double& x : v.data) x = std::exp(x);
  return make("exp", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.parents[0]->grad[i] += self.grad[i] * self.value[i];
  });
}

NodeRef Tape::log(NodeRef a) {
  Tensor v = a->value;
  for (double& x : v.data) {
    if (x <= 0.0)
      throw std::domain_error("log: non-positive input " + std::to_string(x));
    x = std::log(x);
  }
  return make("log", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.parents[0]->grad[i] += self.grad[i] / self.parents[0]->value[i];
  });
}

NodeRef Tape::clamp(NodeRef a, double lo, double hi) {
  Tensor v = a->value;
  for (double& x : v.data) x = std::min(std::max(x, lo), hi);
  return make("clamp", std::move(v), {a}, [lo, hi](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double x = self.parents[0]->value[i];
      if (x > lo && x < hi) self.parents[0]->grad[i] += self.grad[i];
    }
  });
}

NodeRef Tape::sum(NodeRef a) {
  double s = 0.0;
  for (double x : a->value.data) s += x;
  return make("sum", Tensor::scalar(s), {a}, [](Node& self) {
    const double g = self.grad[0];
    for (double& x : self.parents[0]->grad.data) x += g;
  });
}

NodeRef Tape::mean(NodeRef a) {
  double s = 0.0;
  for (double x : a->value.data) s += x;
  const double n = static_cast<double>(a->value.size());
  return make("mean", Tensor::scalar(s / n), {a}, [n](Node& self) {
    const double g = self.grad[0] / n;
    for (double& x : self.parents[0]->grad.data) x += g;
  });
}

NodeRef Tape::concat_cols(NodeRef a, NodeRef b) {
  if (a->value.rows != b->value.rows)
    shape_error("concat_cols", a->value, b->value);
  Tensor v(a->value.rows, a->value.cols + b->value.cols);
  for (std::size_t i = 0; i < v.rows; ++i) {
    for (std::size_t j = 0; j < a->value.cols; ++j) v.at(i, j) = a->value.at(i, j);
    for (std::size_t j = 0; j < b->value.cols; ++j)
      v.at(i, a->value.cols + j) = b->value.at(i, j);
  }
  return make("concat_cols", std::move(v), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.rows; ++i) {
      for (std::size_t j = 0; j < pa.value.cols; ++j)
        pa.grad.at(i, j) += self.grad.at(i, j);
      for (std::size_t j = 0; j < pb.value.cols; ++j)
        pb.grad.at(i, j) += self.grad.at(i, pa.value.cols + j);
    }
  });
}

NodeRef Tape::slice_cols(NodeRef a, std::size_t from, std::size_t to) {
  if (from >= to || to > a->value.cols)
    throw std::invalid_argument("slice_cols: bad range on " + a->value.shape_str());
  Tensor v(a->value.rows, to - from);
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) v.at(i, j) = a->value.at(i, from + j);
  return make("slice_cols", std::move(v), {a}, [from](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.rows; ++i)
      for (std::size_t j = 0; j < self.grad.cols; ++j)
        p.grad.at(i, from + j) += self.grad.at(i, j);
  });
}

NodeRef Tape::reshape(NodeRef a, std::size_t r, std::size_t c) {
  if (r * c != a->value.size())
    throw std::invalid_argument("reshape: size mismatch for " + a->value.shape_str());
  Tensor v(r, c);
  v.data = a->value.data;
  return make("reshape", std::move(v), {a}, [](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.parents[0]->grad[i] += self.grad[i];
  });
}

NodeRef Tape::logsumexp_rows(NodeRef a) {
  const Tensor& x = a->value;
  Tensor v(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) s += std::exp(x.at(i, j) - mx);
    v[i] = mx + std::log(s);
  }
  return make("logsumexp_rows", std::move(v), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.value.rows; ++i) {
      const double g = self.grad[i];
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < p.value.cols; ++j)
        p.grad.at(i, j) += g * std::exp(p.value.at(i, j) - self.value[i]);
    }
  });
}

NodeRef Tape::pairwise_sqdist(NodeRef a, NodeRef b) {
  Tensor v;
  kernels::pairwise_sqdist(a->value, b->value, v);
  return make("pairwise_sqdist", std::move(v), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    kernels::pairwise_sqdist_grad_a(pa.value, pb.value, self.grad, pa.grad);
    kernels::pairwise_sqdist_grad_b(pa.value, pb.value, self.grad, pb.grad);
  });
}

void Tape::backward(const NodeRef& root) {
  if (!root->value.is_scalar())
    throw std::invalid_argument("backward: root must be scalar, got " +
                                root->value.shape_str());
  root->grad[0] += 1.0;
  for (std::size_t i = root->idx + 1; i-- > 0;) {
    Node& n = *order_[i];
    if (n.backprop) n.backprop(n);
  }
}

void Tape::zero_grad() {
  for (auto& n : order_)
    std::fill(n->grad.data.begin(), n->grad.data.end(), 0.0);
}

Tensor init_uniform(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                    std::size_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (double& x : t.data) x = dist(rng);
  return t;
}

double grad_check(const std::function<NodeRef(Tape&)>& build,
                  const std::vector<Parameter*>& params, double step) {
  // Analytic gradients.
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    NodeRef root = build(tape);
    if (!std::isfinite(root->value.item()))
      throw std::runtime_error("grad_check: non-finite objective");
    tape.backward(root);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto eval = [&]() {
    Tape tape;
    const double v = build(tape)->value.item();
    if (!std::isfinite(v))
      throw std::runtime_error("grad_check: non-finite objective");
    return v;
  };

  double max_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + step;
      const double fp = eval();
      p->value[i] = orig - step;
      const double fm = eval();
      p->value[i] = orig;
      const double num = (fp - fm) / (2.0 * step);
      const double err =
          std::abs(analytic[pi][i] - num) / std::max(1.0, std::abs(num));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace xtnet::ad
