#pragma once

#include <memory>

#include "xtnet/model.hpp"

namespace xtnet {

enum class BaselineKind { blr_concat, multi_head, interaction_linear };

std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineConfig {
  BaselineKind kind = BaselineKind::blr_concat;
  std::size_t feature_dim = 8;
  std::vector<int> levels = {4, 4};
  std::size_t num_outcomes = 1;
  std::vector<std::size_t> widths = {8, 8};  // hidden layers
  Activation activation = Activation::relu;
  double clamp_eps = 0.01;
  std::uint64_t seed = 1;

  std::size_t num_categories() const { return levels.size(); }
  // Heads of the multi_head estimator, one per treatment combo.
  std::size_t combo_count() const;
  void validate() const;
};

std::unique_ptr<UpliftModel> make_baseline(const BaselineConfig& cfg);

}  // namespace xtnet
