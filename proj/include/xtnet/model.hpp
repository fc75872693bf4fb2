#pragma once

#include <memory>
#include <string>
#include <vector>

#include "xtnet/autodiff.hpp"
#include "xtnet/datagen.hpp"

namespace xtnet {

enum class Activation { relu, sigmoid, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Per outcome j and category i: estimate of E[y(x,t) - y(x,t^{-i})],
// i.e. how much switching category i off changes the outcome.
struct DominantEffectTable {
  enum class Source { rct_estimate, config_override };
  Tensor gaps;  // s x m
  Source source = Source::rct_estimate;

  // Largest gap wins; ties break toward the lowest category index.
  std::size_t dominant(std::size_t outcome) const;
};

// Mean outcome gap between RCT rows with t_i > 0 and rows with t_i = 0
// matched on the other categories' levels, weighted by treated count.
DominantEffectTable estimate_dominance(const Dataset& data);

struct XTNetConfig {
  std::size_t feature_dim = 8;
  std::vector<int> levels = {4, 4};  // a_k
  std::size_t num_outcomes = 1;      // s
  std::vector<std::size_t> trunk_widths = {8};      // BasicNet hidden layers
  std::vector<std::size_t> backbone_widths = {8, 8};  // EffectNet, K layers
  std::vector<std::size_t> head_widths = {8};       // effect head hidden layers
  Activation activation = Activation::relu;
  double clamp_eps = 0.01;
  bool mask_sigmoid = false;  // squash masks into (0,1); default raw linear
  bool use_basicnet = true;   // false drops BasicNet (ablation configuration)
  std::uint64_t seed = 1;

  std::size_t num_categories() const { return levels.size(); }
  void validate() const;
};

// Shared surface for XTNet and the comparison estimators: the trainer
// batches rows by treatment combo, so a forward always sees one combo.
class UpliftModel {
 public:
  virtual ~UpliftModel() = default;

  // Prediction for a block of rows sharing `combo`, clamped into
  // (eps, 1-eps) for the BCE loss. If `hidden` is non-null it receives
  // the representation the imbalance loss compares across groups.
  virtual ad::NodeRef predict_group(ad::Tape& tape, const Tensor& X,
                                    const TreatmentCombo& combo,
                                    ad::NodeRef* hidden) = 0;

  // Prediction the phase-1 step trains on; defaults to the full forward
  // for single-phase models.
  virtual ad::NodeRef phase1_predict_group(ad::Tape& tape, const Tensor& X,
                                           const TreatmentCombo& combo) {
    return predict_group(tape, X, combo, nullptr);
  }

  // Value-only prediction for one row, before clamping (used for CATE).
  virtual std::vector<double> predict_preclamp(const double* x,
                                               const TreatmentCombo& combo) = 0;

  // Parameter groups for the two training phases. Single-phase models
  // return an empty phase-1 group and everything in phase 2.
  virtual std::vector<ad::Parameter*> phase1_params() = 0;
  virtual std::vector<ad::Parameter*> phase2_params() = 0;
  virtual bool two_phase() { return !phase1_params().empty(); }

  std::vector<ad::Parameter*> all_params();
  virtual std::size_t num_outcomes() const = 0;
  virtual std::size_t num_categories() const = 0;
};

// predict_preclamp(x, combo) - predict_preclamp(x, t0)
std::vector<double> predicted_cate(UpliftModel& model, const double* x,
                                   const TreatmentCombo& combo);

class XTNet : public UpliftModel {
 public:
  XTNet(XTNetConfig cfg, DominantEffectTable dominance);

  ad::NodeRef predict_group(ad::Tape& tape, const Tensor& X,
                            const TreatmentCombo& combo,
                            ad::NodeRef* hidden) override;
  // BasicNet alone, clamped: what the phase-1 factual loss sees.
  ad::NodeRef phase1_predict_group(ad::Tape& tape, const Tensor& X,
                                   const TreatmentCombo& combo) override;
  std::vector<double> predict_preclamp(const double* x,
                                       const TreatmentCombo& combo) override;
  std::vector<ad::Parameter*> phase1_params() override;  // BasicNet
  std::vector<ad::Parameter*> phase2_params() override;  // EffectNet + MaskNet
  bool two_phase() override { return cfg_.use_basicnet; }
  std::size_t num_outcomes() const override { return cfg_.num_outcomes; }
  std::size_t num_categories() const override { return cfg_.levels.size(); }

  const XTNetConfig& config() const { return cfg_; }
  const DominantEffectTable& dominance() const { return dominance_; }

  // Component forwards, exposed for tests and inspection.
  ad::NodeRef basicnet_forward(ad::Tape& tape, ad::NodeRef X,
                               const TreatmentCombo& combo);  // n x s
  // One mask node per backbone layer pair, flattened [W | b] per layer.
  std::vector<ad::NodeRef> masknet_forward(ad::Tape& tape,
                                           const TreatmentCombo& combo);
  // Returns the effect output (n x s, in (-1,1)); *hidden gets the
  // backbone representation when non-null.
  ad::NodeRef effectnet_forward(ad::Tape& tape, ad::NodeRef X,
                                const std::vector<ad::NodeRef>& masks,
                                ad::NodeRef* hidden);

 private:
  ad::NodeRef preclamp_forward(ad::Tape& tape, ad::NodeRef X,
                               const TreatmentCombo& combo, ad::NodeRef* hidden);
  ad::NodeRef activate(ad::Tape& tape, ad::NodeRef h) const;
  std::vector<double> encode_combo(const TreatmentCombo& combo) const;

  XTNetConfig cfg_;
  DominantEffectTable dominance_;

  // BasicNet, per outcome: trunk layers then one linear head per level
  // 1..a_{k*} of that outcome's dominant category.
  struct Basic {
    std::vector<ad::Parameter> trunk_w, trunk_b;
    std::vector<ad::Parameter> head_w, head_b;
    std::size_t dominant_cat = 0;
  };
  std::vector<Basic> basic_;

  std::vector<ad::Parameter> backbone_w_, backbone_b_;
  std::vector<ad::Parameter> mask_w_, mask_b_;  // per layer, affine in enc(t)
  std::vector<ad::Parameter> head_w_, head_b_;
};

std::unique_ptr<XTNet> make_xtnet(const XTNetConfig& cfg, const Dataset& rct_data);

}  // namespace xtnet
