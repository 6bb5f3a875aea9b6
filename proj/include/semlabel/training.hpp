#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semlabel/graph_data.hpp"
#include "semlabel/label_encoding.hpp"
#include "semlabel/sage_model.hpp"

namespace semlabel {

enum class LossKind { CosineEmbedding, SoftmaxCrossEntropy, SigmoidBinaryCrossEntropy };
enum class OptimizerKind { Adam, Sgd };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

struct TrainConfig {
  LossKind loss = LossKind::CosineEmbedding;
  int epochs = 300;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<int> early_stop_patience;
  std::size_t hidden_dim = 1024;

  void validate() const;
};

TrainConfig train_config_from_json(const std::string& json_text);
std::string serialize_train_config(const TrainConfig& cfg);

/// Per-layer parameter gradients, shaped like the model.
struct Gradients {
  std::vector<Matrix> dW;
  std::vector<std::vector<double>> db;

  static Gradients zeros_like(const SageModel& model);
};

/// 1 - cos(e_p, e_t). A zero-norm prediction counts as loss 1 with zero
/// gradient (an uninformative direction must not crash training); a
/// zero-norm target is a hard error.
double cosine_embedding_loss(std::span<const double> e_p, std::span<const double> e_t);

/// dL/de_p of the cosine embedding loss; orthogonal to e_p.
std::vector<double> cosine_loss_grad(std::span<const double> e_p,
                                     std::span<const double> e_t);

struct LossGrad {
  double loss;
  std::vector<double> grad;
};

/// Numerically stable -log softmax(logits)[true_class] and its gradient
/// softmax(logits) - one_hot(true_class).
LossGrad softmax_cross_entropy(std::span<const double> logits, int true_class);

/// Mean-over-classes binary cross-entropy of per-class sigmoids against the
/// one-hot target (the literal reading of a sigmoid-checked output).
LossGrad sigmoid_binary_cross_entropy(std::span<const double> logits, int true_class);

struct BackwardResult {
  double mean_loss = 0.0;
  Gradients grads;
};

/// Reverse-mode pass over the cached full-graph forward. labels[i] is the
/// target class of node_ids[i]; per-node losses are averaged over the batch,
/// so a duplicated id contributes twice. The table supplies target vectors
/// for the cosine loss and is ignored by the logit losses.
BackwardResult backward(const SageModel& model, const Dataset& ds,
                        std::span<const int> node_ids, std::span<const int> labels,
                        LossKind loss, const EncodingTable& table,
                        const ForwardCache& cache);

struct TrainedModel {
  SageModel model;
  LossKind loss = LossKind::CosineEmbedding;
};

struct TrainResult {
  TrainedModel trained;
  std::vector<double> history;  // per-epoch mean training loss
};

/// Full-batch training loop: deterministic for a fixed config, Adam or SGD,
/// optional early stop when the best loss stops improving by 1e-6 for
/// `early_stop_patience` epochs. Output dim follows the table for the cosine
/// loss and the vocabulary for the logit losses.
TrainResult train(const Dataset& ds, std::span<const int> train_ids,
                  const EncodingTable& table, const TrainConfig& cfg);

std::string history_to_csv(const std::vector<double>& history);

}  // namespace semlabel
