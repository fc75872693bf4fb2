#include "xtnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace xtnet {

using ad::NodeRef;
using ad::Parameter;
using ad::Tape;

void TrainConfig::validate() const {
  if (learning_rate <= 0.0)
    throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1)
    throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  loss.validate();
}

std::vector<std::size_t> filter_isolated(const Dataset& data,
                                         const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows)
    if (is_isolated(data.treatments[r])) out.push_back(r);
  return out;
}

namespace {

Tensor gather_rows(const Tensor& src, const std::vector<std::size_t>& rows) {
  Tensor out(rows.size(), src.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < src.cols; ++j)
      out.at(i, j) = src.at(rows[i], j);
  return out;
}

std::map<TreatmentCombo, std::vector<std::size_t>> group_by_combo(
    const Dataset& data, const std::vector<std::size_t>& rows) {
  std::map<TreatmentCombo, std::vector<std::size_t>> groups;
  for (std::size_t r : rows) groups[data.treatments[r]].push_back(r);
  return groups;
}

void step_params(const TrainConfig& cfg, const std::vector<Parameter*>& params,
                 std::size_t& step) {
  if (cfg.optimizer == Optimizer::adam) ++step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (Parameter* p : params) {
    if (cfg.optimizer == Optimizer::sgd) {
      for (std::size_t i = 0; i < p->value.size(); ++i)
        p->value.data[i] -= cfg.learning_rate * p->grad.data[i];
    } else {
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double g = p->grad.data[i];
        double& m = p->adam_m.data[i];
        double& v = p->adam_v.data[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        p->value.data[i] -=
            cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
      }
    }
    p->zero_grad();
  }
}

// Group-size-weighted mean of per-group mean BCE: equals the plain mean
// over the sub-batch because every group shares one combo.
NodeRef weighted_factual(Tape& tape, const Dataset& data,
                         const std::map<TreatmentCombo, std::vector<std::size_t>>& groups,
                         std::size_t total_rows,
                         const std::function<NodeRef(const Tensor&, const TreatmentCombo&)>& fwd) {
  NodeRef acc = tape.constant(Tensor::scalar(0.0));
  for (const auto& [combo, rows] : groups) {
    auto pred = fwd(gather_rows(data.features, rows), combo);
    auto bce = bce_factual(tape, pred, gather_rows(data.outcomes, rows));
    const double w =
        static_cast<double>(rows.size()) / static_cast<double>(total_rows);
    acc = tape.add(acc, tape.affine(bce, w, 0.0));
  }
  return acc;
}

[[noreturn]] void abort_nonfinite(std::size_t epoch, std::size_t batch,
                                  const char* phase, double factual,
                                  double imbalance, double total) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "train: non-finite loss at epoch %zu batch %zu (%s): "
                "factual=%g imbalance=%g total=%g",
                epoch, batch, phase, factual, imbalance, total);
  throw std::runtime_error(buf);
}

}  // namespace

TrainResult train(UpliftModel& model, const Dataset& data,
                  const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("train: empty dataset");

  std::mt19937_64 rng(cfg.seed);
  auto p1 = model.phase1_params();
  auto p2 = model.phase2_params();
  std::size_t step1 = 0, step2 = 0;
  const bool two_phase = model.two_phase();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochTrace trace;
    double weight_sum = 0.0;
    for (std::size_t start = 0, batch_no = 0; start < n;
         start += cfg.batch_size, ++batch_no) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                     order.begin() + static_cast<long>(stop));

      if (two_phase) {
        auto iso = filter_isolated(data, batch);
        if (iso.empty()) {
          ++trace.skipped_phase1;
        } else {
          Tape tape;
          auto factual = weighted_factual(
              tape, data, group_by_combo(data, iso), iso.size(),
              [&](const Tensor& X, const TreatmentCombo& combo) {
                return model.phase1_predict_group(tape, X, combo);
              });
          // scaled by lambda1 so lambda1 = 0 disables the phase entirely
          auto loss = tape.affine(factual, cfg.loss.lambda1, 0.0);
          if (!loss->value.all_finite())
            abort_nonfinite(epoch, batch_no, "phase1", factual->value.item(),
                            0.0, loss->value.item());
          tape.backward(loss);
          step_params(cfg, p1, step1);
        }
      }

      Tape tape;
      std::vector<NodeRef> hiddens;
      auto factual = weighted_factual(
          tape, data, group_by_combo(data, batch), batch.size(),
          [&](const Tensor& X, const TreatmentCombo& combo) {
            NodeRef hidden;
            auto pred = model.predict_group(tape, X, combo, &hidden);
            if (hidden) hiddens.push_back(hidden);
            return pred;
          });
      auto imb = imbalance_loss(tape, hiddens, cfg.loss);
      auto total = total_loss(tape, factual, imb, cfg.loss);
      if (!total->value.all_finite() || !factual->value.all_finite() ||
          !imb->value.all_finite())
        abort_nonfinite(epoch, batch_no, "phase2", factual->value.item(),
                        imb->value.item(), total->value.item());
      tape.backward(total);
      step_params(cfg, p2, step2);
      // phase-1 parameters stay frozen here; drop any gradient that
      // leaked through the additive composition
      for (Parameter* p : p1) p->zero_grad();

      const double w = static_cast<double>(batch.size());
      trace.factual += w * factual->value.item();
      trace.imbalance += w * imb->value.item();
      trace.total += w * total->value.item();
      weight_sum += w;
    }
    trace.factual /= weight_sum;
    trace.imbalance /= weight_sum;
    trace.total /= weight_sum;
    result.trace.push_back(trace);
  }
  return result;
}

void write_loss_trace_csv(const TrainResult& result, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "epoch,factual,imbalance,total\n");
  for (std::size_t e = 0; e < result.trace.size(); ++e)
    std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", e, result.trace[e].factual,
                 result.trace[e].imbalance, result.trace[e].total);
  std::fclose(f);
}

}  // namespace xtnet
