#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dualgnn/graph/graph.hpp"
#include "dualgnn/graph/seed.hpp"
#include "dualgnn/model/dual.hpp"
#include "dualgnn/model/losses.hpp"
#include "dualgnn/train/adam.hpp"

namespace dualgnn {

enum class TrainMode { Baseline, Dual, PrimaryPlusCluster, AuxiliaryPlusCluster };

inline std::string_view mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::Baseline: return "gcn";
    case TrainMode::Dual: return "dual";
    case TrainMode::PrimaryPlusCluster: return "prim-cluster";
    case TrainMode::AuxiliaryPlusCluster: return "aux-cluster";
  }
  return "?";
}

inline TrainMode parse_mode(std::string_view s) {
  for (auto m : {TrainMode::Baseline, TrainMode::Dual, TrainMode::PrimaryPlusCluster, TrainMode::AuxiliaryPlusCluster})
    if (s == mode_name(m)) return m;
  if (s == "baseline") return TrainMode::Baseline;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (gcn|dual|prim-cluster|aux-cluster)");
}

/// Whether the reported predictions come from the auxiliary classifier.
inline bool predicts_with_auxiliary(TrainMode m) {
  return m == TrainMode::Dual || m == TrainMode::AuxiliaryPlusCluster;
}

struct TrainConfig {
  std::size_t epochs = 500;
  double lr = 1e-2;
  double lr_decay = 0.5;  // gamma
  std::size_t lr_step = 50;
  double weight_decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  TrainMode mode = TrainMode::Dual;
  Seed seed{};

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw std::invalid_argument("lr_decay must lie in (0, 1]");
    if (lr_step < 1) throw std::invalid_argument("lr_step must be >= 1");
  }
};

/// Step schedule: lr * gamma^floor(epoch / lr_step).
inline double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  return cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch / cfg.lr_step));
}

/// Fraction of `nodes` whose argmax prediction (lowest index on ties) equals the label.
inline double evaluate(const Matrix& probs, std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw std::invalid_argument("evaluate: empty mask");
  std::size_t correct = 0;
  for (auto i : nodes) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c)
      if (probs(row, c) > probs(row, best)) best = c;
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

struct RunRecord {
  double test_accuracy = 0.0;  // from the mode's reporting classifier
  double val_accuracy = 0.0;
  double primary_test_accuracy = 0.0;
  double primary_val_accuracy = 0.0;
  std::optional<double> aux_test_accuracy;
  std::optional<double> aux_val_accuracy;
  std::vector<LossBreakdown> losses;  // one per epoch
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  RunRecord record;
  DualModelParams params;
};

namespace detail {

inline std::vector<Parameter*> trainable(DualModelParams& p, TrainMode mode) {
  std::vector<ParamGroup> groups;
  switch (mode) {
    case TrainMode::Baseline:
      groups = {ParamGroup::PrimaryEncoder, ParamGroup::PrimaryClassifier};
      break;
    case TrainMode::PrimaryPlusCluster:
      groups = {ParamGroup::PrimaryEncoder, ParamGroup::PrimaryClassifier, ParamGroup::ClusterHead};
      break;
    case TrainMode::AuxiliaryPlusCluster:
      groups = {ParamGroup::PrimaryEncoder, ParamGroup::ClusterHead, ParamGroup::AuxEncoder, ParamGroup::AuxClassifier};
      break;
    case TrainMode::Dual:
      return p.all();
  }
  std::vector<Parameter*> out;
  for (auto g : groups)
    for (Parameter* q : p.group(g)) out.push_back(q);
  return out;
}

inline ForwardOptions forward_options(TrainMode mode) {
  ForwardOptions o;
  o.primary_head = mode != TrainMode::AuxiliaryPlusCluster;
  o.cluster = mode != TrainMode::Baseline;
  o.auxiliary = mode == TrainMode::Dual || mode == TrainMode::AuxiliaryPlusCluster;
  return o;
}

inline void check_mincut_bounds(const MincutTerms& t, std::size_t epoch) {
  constexpr double tol = 1e-9;
  const double cut = t.cut.item(), reg = t.regularizer.item();
  if (cut < -1.0 - tol || cut > tol || reg < -tol || reg > 2.0 + tol)
    throw std::logic_error("epoch " + std::to_string(epoch) + ": clustering loss terms out of bounds (cut " +
                           std::to_string(cut) + ", regularizer " + std::to_string(reg) + ")");
}

}  // namespace detail

/// Full-batch training: each epoch runs a forward pass, the joint loss for the
/// mode, backward, and one Adam step on the mode's parameter groups. The model
/// after the last epoch is evaluated.
inline TrainResult train_model(const Graph& g, const ModelConfig& model_cfg, const TrainConfig& cfg) {
  cfg.validate();
  model_cfg.validate(g.num_classes);
  if (g.train.empty()) throw std::invalid_argument("train: empty train mask");
  const auto started = std::chrono::steady_clock::now();

  const GraphOperators ops = GraphOperators::from(g);
  TrainResult result{{}, DualModelParams::glorot(g.feature_dim(), g.num_classes, model_cfg, cfg.seed)};
  DualModelParams& params = result.params;
  RunRecord& rec = result.record;
  rec.seed = cfg.seed.value;
  rec.losses.reserve(cfg.epochs);

  const std::vector<Parameter*> active = detail::trainable(params, cfg.mode);
  AdamState adam(active);
  const AdamConfig adam_cfg{cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay};
  const ForwardOptions fwd = detail::forward_options(cfg.mode);
  const bool use_ce = fwd.primary_head;
  const bool use_aux = fwd.auxiliary;
  const bool use_sc = fwd.cluster;
  bool warned = false;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) try {
    Tape tape;
    DualOutputs out = forward_dual(tape, ops, params, model_cfg, fwd);
    std::optional<Tensor> ce, ce_aux, sc;
    if (use_ce) ce = cross_entropy_masked(out.primary.logits, g.labels, g.train);
    if (use_aux) ce_aux = cross_entropy_masked(out.auxiliary.logits, g.labels, g.train);
    if (use_sc) {
      MincutTerms m = mincut_loss(out.assignment, ops.normalized, ops.normalized_degree);
      detail::check_mincut_bounds(m, epoch);
      if (!m.cut_defined && !warned) {
        std::clog << "warning: input graph has no edges; clustering loss uses the regularizer only\n";
        warned = true;
      }
      sc = m.total;
    }
    JointLoss loss = joint_loss(tape, ce, ce_aux, sc);
    if (!std::isfinite(loss.breakdown.total))
      throw TrainingDiverged("loss is not finite at epoch " + std::to_string(epoch));
    rec.losses.push_back(loss.breakdown);

    for (Parameter* p : active) p->zero_grad();
    tape.backward(loss.total);
    adam_step(active, adam, lr_at(epoch, cfg), adam_cfg);
  } catch (const NumericError& e) {
    throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
  }

  Tape tape;
  DualOutputs out;
  try {
    out = forward_dual(tape, ops, params, model_cfg, fwd);
  } catch (const NumericError& e) {
    throw TrainingDiverged(std::string("final evaluation: ") + e.what());
  }
  if (fwd.primary_head) {
    rec.primary_test_accuracy = evaluate(out.primary.probs.value(), g.labels, g.test);
    rec.primary_val_accuracy = g.val.empty() ? 0.0 : evaluate(out.primary.probs.value(), g.labels, g.val);
  }
  if (fwd.auxiliary) {
    rec.aux_test_accuracy = evaluate(out.auxiliary.probs.value(), g.labels, g.test);
    rec.aux_val_accuracy = g.val.empty() ? 0.0 : evaluate(out.auxiliary.probs.value(), g.labels, g.val);
  }
  if (predicts_with_auxiliary(cfg.mode)) {
    rec.test_accuracy = *rec.aux_test_accuracy;
    rec.val_accuracy = *rec.aux_val_accuracy;
  } else {
    rec.test_accuracy = rec.primary_test_accuracy;
    rec.val_accuracy = rec.primary_val_accuracy;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

inline RunRecord train(const Graph& g, const ModelConfig& model_cfg, const TrainConfig& cfg) {
  return train_model(g, model_cfg, cfg).record;
}

}  // namespace dualgnn
