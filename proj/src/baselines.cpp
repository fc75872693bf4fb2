#include "xtnet/baselines.hpp"

#include <stdexcept>

namespace xtnet {

using ad::NodeRef;
using ad::Parameter;
using ad::Tape;

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::blr_concat: return "blr_concat";
    case BaselineKind::multi_head: return "multi_head";
    case BaselineKind::interaction_linear: return "interaction_linear";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "blr_concat") return BaselineKind::blr_concat;
  if (s == "multi_head") return BaselineKind::multi_head;
  if (s == "interaction_linear") return BaselineKind::interaction_linear;
  throw std::invalid_argument("unknown baseline kind: " + s);
}

std::size_t BaselineConfig::combo_count() const {
  return xtnet::combo_count(levels);
}

void BaselineConfig::validate() const {
  if (feature_dim == 0) throw std::invalid_argument("BaselineConfig: feature_dim");
  if (num_outcomes == 0) throw std::invalid_argument("BaselineConfig: num_outcomes");
  if (levels.empty()) throw std::invalid_argument("BaselineConfig: levels empty");
  for (int a : levels)
    if (a < 1) throw std::invalid_argument("BaselineConfig: levels must be >= 1");
  if (widths.empty())
    throw std::invalid_argument("BaselineConfig: need at least one hidden layer");
  for (std::size_t w : widths)
    if (w == 0) throw std::invalid_argument("BaselineConfig: zero width");
  if (clamp_eps <= 0.0 || clamp_eps >= 0.5)
    throw std::invalid_argument("BaselineConfig: clamp_eps must be in (0, 0.5)");
  if (kind == BaselineKind::interaction_linear && levels.size() != 2)
    throw std::invalid_argument(
        "BaselineConfig: interaction_linear needs exactly two categories");
}

namespace {

struct Layer {
  Parameter w, b;
  Layer(std::mt19937_64& rng, const std::string& tag, std::size_t in,
        std::size_t out)
      : w(tag + ".w", ad::init_uniform(rng, in, out, in)),
        b(tag + ".b", ad::init_uniform(rng, 1, out, in)) {}
  NodeRef apply(Tape& t, NodeRef h) {
    return t.add_rowvec(t.matmul(std::move(h), t.param(w)), t.param(b));
  }
};

class BaselineBase : public UpliftModel {
 public:
  explicit BaselineBase(BaselineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }
  std::vector<Parameter*> phase1_params() override { return {}; }
  bool two_phase() override { return false; }
  std::size_t num_outcomes() const override { return cfg_.num_outcomes; }
  std::size_t num_categories() const override { return cfg_.levels.size(); }

  std::vector<double> predict_preclamp(const double* x,
                                       const TreatmentCombo& combo) override {
    Tape tape;
    Tensor row(1, cfg_.feature_dim);
    std::copy(x, x + cfg_.feature_dim, row.data.begin());
    return preclamp(tape, tape.constant(std::move(row)), combo, nullptr)
        ->value.data;
  }
  NodeRef predict_group(Tape& tape, const Tensor& X, const TreatmentCombo& combo,
                        NodeRef* hidden) override {
    auto pre = preclamp(tape, tape.constant(X), combo, hidden);
    return tape.clamp(pre, cfg_.clamp_eps, 1.0 - cfg_.clamp_eps);
  }

 protected:
  virtual NodeRef preclamp(Tape& tape, NodeRef X, const TreatmentCombo& combo,
                           NodeRef* hidden) = 0;

  NodeRef activate(Tape& t, NodeRef h) const {
    switch (cfg_.activation) {
      case Activation::relu: return t.relu(std::move(h));
      case Activation::sigmoid: return t.sigmoid(std::move(h));
      case Activation::tanh: return t.tanh(std::move(h));
    }
    return h;
  }
  std::vector<double> encode(const TreatmentCombo& combo) const {
    validate_combo(combo, cfg_.levels);
    std::vector<double> enc(combo.size());
    for (std::size_t k = 0; k < combo.size(); ++k)
      enc[k] = static_cast<double>(combo[k]) / cfg_.levels[k];
    return enc;
  }

  BaselineConfig cfg_;
};

// MLP with the normalized combo concatenated at the middle hidden layer.
class BlrConcat : public BaselineBase {
 public:
  explicit BlrConcat(BaselineConfig cfg) : BaselineBase(std::move(cfg)) {
    std::mt19937_64 rng(cfg_.seed);
    mid_ = cfg_.widths.size() / 2;
    std::size_t in = cfg_.feature_dim;
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
      if (l == mid_) in += cfg_.num_categories();
      layers_.emplace_back(rng, "layer" + std::to_string(l), in, cfg_.widths[l]);
      in = cfg_.widths[l];
    }
    out_ = std::make_unique<Layer>(rng, "out", in, cfg_.num_outcomes);
  }

  std::vector<Parameter*> phase2_params() override {
    std::vector<Parameter*> out;
    for (auto& l : layers_) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    out.push_back(&out_->w);
    out.push_back(&out_->b);
    return out;
  }

 protected:
  NodeRef preclamp(Tape& t, NodeRef X, const TreatmentCombo& combo,
                   NodeRef* hidden) override {
    const auto enc = encode(combo);
    const std::size_t n = X->value.rows;
    Tensor E(n, enc.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < enc.size(); ++k) E.at(i, k) = enc[k];
    auto En = t.constant(std::move(E));
    NodeRef h = X;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (l == mid_) {
        if (hidden) *hidden = h;
        h = t.concat_cols(h, En);
      }
      h = activate(t, layers_[l].apply(t, h));
    }
    return t.sigmoid(out_->apply(t, h));
  }

 private:
  std::vector<Layer> layers_;
  std::unique_ptr<Layer> out_;
  std::size_t mid_ = 0;
};

// Shared trunk with one sigmoid head per treatment combo.
class MultiHead : public BaselineBase {
 public:
  explicit MultiHead(BaselineConfig cfg) : BaselineBase(std::move(cfg)) {
    std::mt19937_64 rng(cfg_.seed);
    std::size_t in = cfg_.feature_dim;
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
      trunk_.emplace_back(rng, "trunk" + std::to_string(l), in, cfg_.widths[l]);
      in = cfg_.widths[l];
    }
    for (std::size_t h = 0; h < cfg_.combo_count(); ++h)
      heads_.emplace_back(rng, "head" + std::to_string(h), in, cfg_.num_outcomes);
  }

  std::vector<Parameter*> phase2_params() override {
    std::vector<Parameter*> out;
    for (auto& l : trunk_) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    for (auto& l : heads_) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    return out;
  }

  Parameter& head_weight(std::size_t idx) { return heads_[idx].w; }

 protected:
  NodeRef preclamp(Tape& t, NodeRef X, const TreatmentCombo& combo,
                   NodeRef* hidden) override {
    NodeRef h = X;
    for (auto& l : trunk_) h = activate(t, l.apply(t, h));
    if (hidden) *hidden = h;
    return t.sigmoid(heads_[combo_index(combo, cfg_.levels)].apply(t, h));
  }

 private:
  std::vector<Layer> trunk_;
  std::vector<Layer> heads_;
};

// Dual tower: sigmoid control outcome plus bilinear treatment elasticity.
class InteractionLinear : public BaselineBase {
 public:
  explicit InteractionLinear(BaselineConfig cfg) : BaselineBase(std::move(cfg)) {
    std::mt19937_64 rng(cfg_.seed);
    std::size_t in = cfg_.feature_dim;
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
      control_.emplace_back(rng, "control" + std::to_string(l), in, cfg_.widths[l]);
      elastic_.emplace_back(rng, "elastic" + std::to_string(l), in, cfg_.widths[l]);
      in = cfg_.widths[l];
    }
    control_out_ = std::make_unique<Layer>(rng, "controlout", in, cfg_.num_outcomes);
    elastic_out_ =
        std::make_unique<Layer>(rng, "elasticout", in, 3 * cfg_.num_outcomes);
  }

  std::vector<Parameter*> phase2_params() override {
    std::vector<Parameter*> out;
    auto push = [&](std::vector<Layer>& ls) {
      for (auto& l : ls) {
        out.push_back(&l.w);
        out.push_back(&l.b);
      }
    };
    push(control_);
    push(elastic_);
    out.push_back(&control_out_->w);
    out.push_back(&control_out_->b);
    out.push_back(&elastic_out_->w);
    out.push_back(&elastic_out_->b);
    return out;
  }

  Parameter& elasticity_weight() { return elastic_out_->w; }
  Parameter& elasticity_bias() { return elastic_out_->b; }

 protected:
  NodeRef preclamp(Tape& t, NodeRef X, const TreatmentCombo& combo,
                   NodeRef* hidden) override {
    const auto enc = encode(combo);
    NodeRef hc = X;
    for (auto& l : control_) hc = activate(t, l.apply(t, hc));
    if (hidden) *hidden = hc;
    auto y0 = t.sigmoid(control_out_->apply(t, hc));
    NodeRef he = X;
    for (auto& l : elastic_) he = activate(t, l.apply(t, he));
    auto z = elastic_out_->apply(t, he);  // n x 3s: (z1, z2, z3) per outcome
    const std::size_t s = cfg_.num_outcomes;
    auto z1 = t.slice_cols(z, 0, s);
    auto z2 = t.slice_cols(z, s, 2 * s);
    auto z3 = t.slice_cols(z, 2 * s, 3 * s);
    auto lift = t.add(t.add(t.affine(z1, enc[0], 0.0), t.affine(z2, enc[1], 0.0)),
                      t.affine(z3, enc[0] * enc[1], 0.0));
    return t.add(y0, lift);
  }

 private:
  std::vector<Layer> control_, elastic_;
  std::unique_ptr<Layer> control_out_, elastic_out_;
};

}  // namespace

std::unique_ptr<UpliftModel> make_baseline(const BaselineConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case BaselineKind::blr_concat: return std::make_unique<BlrConcat>(cfg);
    case BaselineKind::multi_head: return std::make_unique<MultiHead>(cfg);
    case BaselineKind::interaction_linear:
      return std::make_unique<InteractionLinear>(cfg);
  }
  throw std::invalid_argument("make_baseline: bad kind");
}

}  // namespace xtnet
