#include "xtnet/model.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace xtnet {

using ad::NodeRef;
using ad::Parameter;
using ad::Tape;

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

std::size_t DominantEffectTable::dominant(std::size_t outcome) const {
  if (outcome >= gaps.rows)
    throw std::out_of_range("dominant: outcome index out of range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < gaps.cols; ++i)
    if (gaps.at(outcome, i) > gaps.at(outcome, best)) best = i;
  return best;
}

DominantEffectTable estimate_dominance(const Dataset& data) {
  const std::size_t m = data.num_categories();
  const std::size_t s = data.num_outcomes();
  bool any_rct = false;
  for (Origin o : data.origin)
    if (o == Origin::rct) any_rct = true;
  if (!any_rct)
    throw std::runtime_error(
        "estimate_dominance: dataset has no RCT rows; supply a "
        "config_override dominance table instead");

  DominantEffectTable table;
  table.gaps = Tensor(s, m);
  table.source = DominantEffectTable::Source::rct_estimate;
  struct Acc {
    double treated_sum = 0, control_sum = 0;
    std::size_t treated_n = 0, control_n = 0;
  };
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      // key = levels of every other category
      std::map<std::vector<int>, Acc> cells;
      for (std::size_t r = 0; r < data.size(); ++r) {
        if (data.origin[r] != Origin::rct) continue;
        std::vector<int> key = data.treatments[r];
        const int ti = key[i];
        key.erase(key.begin() + static_cast<long>(i));
        Acc& a = cells[key];
        if (ti > 0) {
          a.treated_sum += data.outcomes.at(r, j);
          ++a.treated_n;
        } else {
          a.control_sum += data.outcomes.at(r, j);
          ++a.control_n;
        }
      }
      double num = 0.0, den = 0.0;
      for (const auto& [key, a] : cells) {
        if (a.treated_n == 0 || a.control_n == 0) continue;
        const double diff = a.treated_sum / a.treated_n -
                            a.control_sum / a.control_n;
        num += static_cast<double>(a.treated_n) * diff;
        den += static_cast<double>(a.treated_n);
      }
      table.gaps.at(j, i) = den > 0 ? num / den : 0.0;
    }
  return table;
}

void XTNetConfig::validate() const {
  if (feature_dim == 0) throw std::invalid_argument("XTNetConfig: feature_dim");
  if (num_outcomes == 0) throw std::invalid_argument("XTNetConfig: num_outcomes");
  if (levels.empty()) throw std::invalid_argument("XTNetConfig: levels empty");
  for (int a : levels)
    if (a < 1) throw std::invalid_argument("XTNetConfig: levels must be >= 1");
  if (backbone_widths.empty())
    throw std::invalid_argument("XTNetConfig: need at least one backbone layer");
  for (std::size_t w : trunk_widths)
    if (w == 0) throw std::invalid_argument("XTNetConfig: zero trunk width");
  for (std::size_t w : backbone_widths)
    if (w == 0) throw std::invalid_argument("XTNetConfig: zero backbone width");
  for (std::size_t w : head_widths)
    if (w == 0) throw std::invalid_argument("XTNetConfig: zero head width");
  if (clamp_eps <= 0.0 || clamp_eps >= 0.5)
    throw std::invalid_argument("XTNetConfig: clamp_eps must be in (0, 0.5)");
}

std::vector<Parameter*> UpliftModel::all_params() {
  auto out = phase1_params();
  auto p2 = phase2_params();
  out.insert(out.end(), p2.begin(), p2.end());
  return out;
}

std::vector<double> predicted_cate(UpliftModel& model, const double* x,
                                   const TreatmentCombo& combo) {
  auto at_t = model.predict_preclamp(x, combo);
  auto at_0 = model.predict_preclamp(x, baseline_combo(combo.size()));
  for (std::size_t i = 0; i < at_t.size(); ++i) at_t[i] -= at_0[i];
  return at_t;
}

XTNet::XTNet(XTNetConfig cfg, DominantEffectTable dominance)
    : cfg_(std::move(cfg)), dominance_(std::move(dominance)) {
  cfg_.validate();
  if (dominance_.gaps.rows != cfg_.num_outcomes ||
      dominance_.gaps.cols != cfg_.num_categories())
    throw std::invalid_argument("XTNet: dominance table shape mismatch");
  for (double g : dominance_.gaps.data)
    if (!std::isfinite(g))
      throw std::invalid_argument("XTNet: non-finite dominance entry");

  std::mt19937_64 rng(cfg_.seed);
  const std::size_t d = cfg_.feature_dim;
  const std::size_t m = cfg_.num_categories();

  basic_.resize(cfg_.use_basicnet ? cfg_.num_outcomes : 0);
  for (std::size_t j = 0; j < basic_.size(); ++j) {
    Basic& b = basic_[j];
    b.dominant_cat = dominance_.dominant(j);
    std::size_t in = d;
    for (std::size_t l = 0; l < cfg_.trunk_widths.size(); ++l) {
      const std::size_t out = cfg_.trunk_widths[l];
      const std::string tag = "basic" + std::to_string(j) + ".trunk" +
                              std::to_string(l);
      b.trunk_w.emplace_back(tag + ".w", ad::init_uniform(rng, in, out, in));
      b.trunk_b.emplace_back(tag + ".b", ad::init_uniform(rng, 1, out, in));
      in = out;
    }
    const int a = cfg_.levels[b.dominant_cat];
    for (int l = 1; l <= a; ++l) {
      const std::string tag = "basic" + std::to_string(j) + ".head" +
                              std::to_string(l);
      b.head_w.emplace_back(tag + ".w", ad::init_uniform(rng, in, 1, in));
      b.head_b.emplace_back(tag + ".b", ad::init_uniform(rng, 1, 1, in));
    }
  }

  std::size_t in = d;
  for (std::size_t l = 0; l < cfg_.backbone_widths.size(); ++l) {
    const std::size_t out = cfg_.backbone_widths[l];
    const std::string tag = "backbone" + std::to_string(l);
    backbone_w_.emplace_back(tag + ".w", ad::init_uniform(rng, in, out, in));
    backbone_b_.emplace_back(tag + ".b", ad::init_uniform(rng, 1, out, in));
    const std::size_t flat = in * out + out;
    // bias starts at 1 so training begins from the unmasked backbone
    mask_w_.emplace_back("mask" + std::to_string(l) + ".w",
                         ad::init_uniform(rng, flat, m, m));
    mask_b_.emplace_back("mask" + std::to_string(l) + ".b",
                         Tensor(flat, 1, 1.0));
    in = out;
  }
  for (std::size_t l = 0; l < cfg_.head_widths.size(); ++l) {
    const std::size_t out = cfg_.head_widths[l];
    const std::string tag = "effecthead" + std::to_string(l);
    head_w_.emplace_back(tag + ".w", ad::init_uniform(rng, in, out, in));
    head_b_.emplace_back(tag + ".b", ad::init_uniform(rng, 1, out, in));
    in = out;
  }
  head_w_.emplace_back("effectout.w",
                       ad::init_uniform(rng, in, cfg_.num_outcomes, in));
  head_b_.emplace_back("effectout.b",
                       ad::init_uniform(rng, 1, cfg_.num_outcomes, in));
}

NodeRef XTNet::activate(Tape& tape, NodeRef h) const {
  switch (cfg_.activation) {
    case Activation::relu: return tape.relu(std::move(h));
    case Activation::sigmoid: return tape.sigmoid(std::move(h));
    case Activation::tanh: return tape.tanh(std::move(h));
  }
  return h;
}

std::vector<double> XTNet::encode_combo(const TreatmentCombo& combo) const {
  validate_combo(combo, cfg_.levels);
  std::vector<double> enc(combo.size());
  for (std::size_t k = 0; k < combo.size(); ++k)
    enc[k] = static_cast<double>(combo[k]) / cfg_.levels[k];
  return enc;
}

NodeRef XTNet::basicnet_forward(Tape& tape, NodeRef X,
                                const TreatmentCombo& combo) {
  validate_combo(combo, cfg_.levels);
  if (basic_.empty())
    throw std::logic_error("basicnet_forward: model built without a BasicNet");
  const std::size_t n = X->value.rows;
  NodeRef out;
  for (auto& b : basic_) {
    NodeRef col;
    const int level = combo[b.dominant_cat];
    if (level == 0) {
      col = tape.constant(Tensor(n, 1));
    } else {
      NodeRef h = X;
      for (std::size_t l = 0; l < b.trunk_w.size(); ++l)
        h = activate(tape, tape.add_rowvec(tape.matmul(h, tape.param(b.trunk_w[l])),
                                           tape.param(b.trunk_b[l])));
      const int a = cfg_.levels[b.dominant_cat];
      // suffix product of sigmoid heads: output is non-decreasing in level
      for (int l = level; l <= a; ++l) {
        auto gamma = tape.sigmoid(tape.add_rowvec(
            tape.matmul(h, tape.param(b.head_w[static_cast<std::size_t>(l - 1)])),
            tape.param(b.head_b[static_cast<std::size_t>(l - 1)])));
        col = col ? tape.mul(col, gamma) : gamma;
      }
    }
    out = out ? tape.concat_cols(out, col) : col;
  }
  return out;
}

std::vector<NodeRef> XTNet::masknet_forward(Tape& tape,
                                            const TreatmentCombo& combo) {
  const auto enc = encode_combo(combo);
  Tensor e(enc.size(), 1);
  e.data = enc;
  auto en = tape.constant(std::move(e));
  std::vector<NodeRef> masks;
  for (std::size_t l = 0; l < mask_w_.size(); ++l) {
    auto mask = tape.add(tape.matmul(tape.param(mask_w_[l]), en),
                         tape.param(mask_b_[l]));
    if (cfg_.mask_sigmoid) mask = tape.sigmoid(mask);
    masks.push_back(mask);
  }
  return masks;
}

NodeRef XTNet::effectnet_forward(Tape& tape, NodeRef X,
                                 const std::vector<NodeRef>& masks,
                                 NodeRef* hidden) {
  if (masks.size() != backbone_w_.size())
    throw std::invalid_argument("effectnet_forward: wrong mask count");
  NodeRef h = X;
  for (std::size_t l = 0; l < backbone_w_.size(); ++l) {
    const std::size_t in = backbone_w_[l].value.rows;
    const std::size_t out = backbone_w_[l].value.cols;
    const std::size_t flat = in * out + out;
    if (masks[l]->value.rows != flat || masks[l]->value.cols != 1)
      throw std::invalid_argument("effectnet_forward: mask shape mismatch");
    auto row = tape.reshape(masks[l], 1, flat);
    auto mw = tape.reshape(tape.slice_cols(row, 0, in * out), in, out);
    auto mb = tape.slice_cols(row, in * out, flat);
    // masked affine layers, deliberately without activation in between
    h = tape.add_rowvec(tape.matmul(h, tape.mul(mw, tape.param(backbone_w_[l]))),
                        tape.mul(mb, tape.param(backbone_b_[l])));
  }
  if (hidden) *hidden = h;
  NodeRef g = h;
  for (std::size_t l = 0; l + 1 < head_w_.size(); ++l)
    g = activate(tape, tape.add_rowvec(tape.matmul(g, tape.param(head_w_[l])),
                                       tape.param(head_b_[l])));
  return tape.tanh(tape.add_rowvec(tape.matmul(g, tape.param(head_w_.back())),
                                   tape.param(head_b_.back())));
}

NodeRef XTNet::preclamp_forward(Tape& tape, NodeRef X,
                                const TreatmentCombo& combo, NodeRef* hidden) {
  auto effect = effectnet_forward(tape, X, masknet_forward(tape, combo), hidden);
  // without a BasicNet the effect head is recentered onto the outcome scale
  if (!cfg_.use_basicnet) return tape.affine(effect, 1.0, 0.5);
  return tape.add(basicnet_forward(tape, X, combo), effect);
}

NodeRef XTNet::predict_group(Tape& tape, const Tensor& X,
                             const TreatmentCombo& combo, NodeRef* hidden) {
  auto pre = preclamp_forward(tape, tape.constant(X), combo, hidden);
  return tape.clamp(pre, cfg_.clamp_eps, 1.0 - cfg_.clamp_eps);
}

NodeRef XTNet::phase1_predict_group(Tape& tape, const Tensor& X,
                                    const TreatmentCombo& combo) {
  auto basic = basicnet_forward(tape, tape.constant(X), combo);
  return tape.clamp(basic, cfg_.clamp_eps, 1.0 - cfg_.clamp_eps);
}

std::vector<double> XTNet::predict_preclamp(const double* x,
                                            const TreatmentCombo& combo) {
  Tape tape;
  Tensor row(1, cfg_.feature_dim);
  std::copy(x, x + cfg_.feature_dim, row.data.begin());
  auto pre = preclamp_forward(tape, tape.constant(std::move(row)), combo, nullptr);
  return pre->value.data;
}

std::vector<Parameter*> XTNet::phase1_params() {
  std::vector<Parameter*> out;
  for (auto& b : basic_) {
    for (auto& p : b.trunk_w) out.push_back(&p);
    for (auto& p : b.trunk_b) out.push_back(&p);
    for (auto& p : b.head_w) out.push_back(&p);
    for (auto& p : b.head_b) out.push_back(&p);
  }
  return out;
}

std::vector<Parameter*> XTNet::phase2_params() {
  std::vector<Parameter*> out;
  for (auto& p : backbone_w_) out.push_back(&p);
  for (auto& p : backbone_b_) out.push_back(&p);
  for (auto& p : mask_w_) out.push_back(&p);
  for (auto& p : mask_b_) out.push_back(&p);
  for (auto& p : head_w_) out.push_back(&p);
  for (auto& p : head_b_) out.push_back(&p);
  return out;
}

std::unique_ptr<XTNet> make_xtnet(const XTNetConfig& cfg, const Dataset& rct_data) {
  return std::make_unique<XTNet>(cfg, estimate_dominance(rct_data));
}

}  // namespace xtnet
