#include "semlabel/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/kernels.hpp"

namespace semlabel {

using nlohmann::ordered_json;

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::CosineEmbedding: return "cosine";
    case LossKind::SoftmaxCrossEntropy: return "softmax";
    case LossKind::SigmoidBinaryCrossEntropy: return "sigmoid_bce";
  }
  return "unknown";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "cosine") return LossKind::CosineEmbedding;
  if (name == "softmax") return LossKind::SoftmaxCrossEntropy;
  if (name == "sigmoid_bce") return LossKind::SigmoidBinaryCrossEntropy;
  throw Error("bad-loss", "unknown loss '" + name + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("bad-epochs", "epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error("bad-learning-rate", "learning_rate must be > 0");
  if (hidden_dim < 1) throw Error("bad-dimension", "hidden_dim must be >= 1");
  if (early_stop_patience && *early_stop_patience < 1)
    throw Error("bad-patience", "early_stop_patience must be >= 1");
}

TrainConfig train_config_from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("train config: ") + e.what());
  }
  TrainConfig cfg;
  if (doc.contains("loss")) cfg.loss = loss_kind_from_name(doc["loss"].get<std::string>());
  if (doc.contains("epochs")) cfg.epochs = doc["epochs"].get<int>();
  if (doc.contains("learning_rate")) cfg.learning_rate = doc["learning_rate"].get<double>();
  if (doc.contains("optimizer")) {
    const auto name = doc["optimizer"].get<std::string>();
    if (name == "adam") cfg.optimizer = OptimizerKind::Adam;
    else if (name == "sgd") cfg.optimizer = OptimizerKind::Sgd;
    else throw Error("bad-optimizer", "unknown optimizer '" + name + "'");
  }
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("hidden_dim")) cfg.hidden_dim = doc["hidden_dim"].get<std::size_t>();
  if (doc.contains("early_stop_patience") && !doc["early_stop_patience"].is_null())
    cfg.early_stop_patience = doc["early_stop_patience"].get<int>();
  cfg.validate();
  return cfg;
}

std::string serialize_train_config(const TrainConfig& cfg) {
  ordered_json doc;
  doc["loss"] = loss_kind_name(cfg.loss);
  doc["epochs"] = cfg.epochs;
  doc["learning_rate"] = cfg.learning_rate;
  doc["optimizer"] = cfg.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
  doc["seed"] = cfg.seed;
  doc["hidden_dim"] = cfg.hidden_dim;
  if (cfg.early_stop_patience) doc["early_stop_patience"] = *cfg.early_stop_patience;
  return doc.dump(2) + "\n";
}

Gradients Gradients::zeros_like(const SageModel& model) {
  Gradients g;
  for (const auto& layer : model.layers) {
    g.dW.emplace_back(layer.W.rows, layer.W.cols);
    g.db.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

namespace {

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

double cosine_embedding_loss(std::span<const double> e_p, std::span<const double> e_t) {
  if (e_p.size() != e_t.size())
    throw Error("dim-mismatch", "cosine loss: vector lengths differ");
  const double nt = l2_norm(e_t);
  if (nt == 0.0) throw Error("zero-vector", "cosine loss: zero target vector");
  const double np = l2_norm(e_p);
  if (np == 0.0) return 1.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < e_p.size(); ++i) dot += e_p[i] * e_t[i];
  return 1.0 - dot / (np * nt);
}

std::vector<double> cosine_loss_grad(std::span<const double> e_p,
                                     std::span<const double> e_t) {
  if (e_p.size() != e_t.size())
    throw Error("dim-mismatch", "cosine loss grad: vector lengths differ");
  const double nt = l2_norm(e_t);
  if (nt == 0.0) throw Error("zero-vector", "cosine loss grad: zero target vector");
  const double np = l2_norm(e_p);
  std::vector<double> grad(e_p.size(), 0.0);
  if (np == 0.0) return grad;  // uninformative direction, no learning signal
  double dot = 0.0;
  for (std::size_t i = 0; i < e_p.size(); ++i) dot += e_p[i] * e_t[i];
  const double inv = 1.0 / (np * nt);
  const double self = dot / (np * np * np * nt);
  for (std::size_t i = 0; i < e_p.size(); ++i)
    grad[i] = -(e_t[i] * inv - e_p[i] * self);
  return grad;
}

LossGrad softmax_cross_entropy(std::span<const double> logits, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= logits.size())
    throw Error("bad-class", "softmax: class index out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  LossGrad out;
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(logits[i] - mx);
    sum += out.grad[i];
  }
  for (double& g : out.grad) g /= sum;
  out.loss = -(logits[static_cast<std::size_t>(true_class)] - mx - std::log(sum));
  out.grad[static_cast<std::size_t>(true_class)] -= 1.0;
  return out;
}

LossGrad sigmoid_binary_cross_entropy(std::span<const double> logits, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= logits.size())
    throw Error("bad-class", "sigmoid bce: class index out of range");
  const double inv_k = 1.0 / static_cast<double>(logits.size());
  LossGrad out;
  out.loss = 0.0;
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = static_cast<std::size_t>(true_class) == i ? 1.0 : 0.0;
    // log(1 + e^-|z|) + max(z, 0) - y*z is the stable form of
    // -y*log(sigmoid) - (1-y)*log(1-sigmoid).
    out.loss += (std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - y * z) * inv_k;
    const double s = 1.0 / (1.0 + std::exp(-z));
    out.grad[i] = (s - y) * inv_k;
  }
  return out;
}

BackwardResult backward(const SageModel& model, const Dataset& ds,
                        std::span<const int> node_ids, std::span<const int> labels,
                        LossKind loss, const EncodingTable& table,
                        const ForwardCache& cache) {
  const std::size_t n_layers = model.layers.size();
  if (cache.H.size() != n_layers + 1 || cache.X.size() != n_layers ||
      cache.Z.size() != n_layers)
    throw Error("cache-mismatch", "forward cache does not match the model");
  if (cache.H[0].rows != ds.nodes.size())
    throw Error("cache-mismatch", "forward cache does not match the dataset");
  if (node_ids.size() != labels.size())
    throw Error("dim-mismatch", "backward: node_ids and labels differ in length");
  if (node_ids.empty()) throw Error("empty-batch", "backward: empty node batch");
  const std::size_t out_dim = model.out_dim();
  if (loss == LossKind::CosineEmbedding && table.dim != out_dim)
    throw Error("dim-mismatch", "backward: table dim != model out dim");

  const Matrix& out = cache.H[n_layers];
  Matrix d_out(out.rows, out.cols);
  double loss_sum = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(node_ids.size());
  // Serial accumulation: node_ids may contain duplicates, each adds its share.
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const auto v = static_cast<std::size_t>(node_ids[i]);
    if (v >= out.rows) throw Error("unknown-node", "backward: node id out of range");
    const std::span<const double> e_p{out.row(v), out.cols};
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= ds.vocabulary.size())
      throw Error("bad-class", "backward: label out of range");
    double* dst = d_out.row(v);
    switch (loss) {
      case LossKind::CosineEmbedding: {
        loss_sum += cosine_embedding_loss(e_p, table.row(static_cast<std::size_t>(label)));
        const auto g = cosine_loss_grad(e_p, table.row(static_cast<std::size_t>(label)));
        for (std::size_t j = 0; j < out.cols; ++j) dst[j] += g[j] * inv_batch;
        break;
      }
      case LossKind::SoftmaxCrossEntropy: {
        const auto lg = softmax_cross_entropy(e_p, label);
        loss_sum += lg.loss;
        for (std::size_t j = 0; j < out.cols; ++j) dst[j] += lg.grad[j] * inv_batch;
        break;
      }
      case LossKind::SigmoidBinaryCrossEntropy: {
        const auto lg = sigmoid_binary_cross_entropy(e_p, label);
        loss_sum += lg.loss;
        for (std::size_t j = 0; j < out.cols; ++j) dst[j] += lg.grad[j] * inv_batch;
        break;
      }
    }
  }

  BackwardResult result;
  result.mean_loss = loss_sum * inv_batch;
  result.grads.dW.resize(n_layers);
  result.grads.db.resize(n_layers);

  Matrix d_h = std::move(d_out);
  Matrix d_z, d_x;
  for (std::size_t k = n_layers; k-- > 0;) {
    if (k + 1 < n_layers)
      kernels::relu_backward(cache.Z[k], d_h, d_z);  // hidden layers are ReLU
    else
      d_z = std::move(d_h);  // final layer is identity
    kernels::matmul_at_b(d_z, cache.X[k], result.grads.dW[k]);
    result.grads.db[k].assign(model.layers[k].b.size(), 0.0);
    kernels::column_sums(d_z, result.grads.db[k]);
    if (k > 0) {
      kernels::matmul_ab(d_z, model.layers[k].W, d_x);
      kernels::neighbor_mean_backward(d_x, ds.adjacency, d_h);
    }
  }
  return result;
}

namespace {

/// Adam / SGD over the model parameters. Updates are elementwise and
/// parallelized per weight row; zero gradients from a fresh state leave the
/// parameters untouched.
class Optimizer {
 public:
  Optimizer(const SageModel& model, const TrainConfig& cfg) : cfg_(cfg) {
    if (cfg.optimizer == OptimizerKind::Adam) {
      m_ = Gradients::zeros_like(model);
      v_ = Gradients::zeros_like(model);
    }
  }

  void step(SageModel& model, const Gradients& grads) {
    ++t_;
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
      auto& layer = model.layers[k];
      if (cfg_.optimizer == OptimizerKind::Sgd) {
        kernels::parallel_for(layer.W.rows, kernels::Exec::Parallel, [&](std::size_t r) {
          double* w = layer.W.row(r);
          const double* g = grads.dW[k].row(r);
          for (std::size_t c = 0; c < layer.W.cols; ++c)
            w[c] -= cfg_.learning_rate * g[c];
        });
        for (std::size_t j = 0; j < layer.b.size(); ++j)
          layer.b[j] -= cfg_.learning_rate * grads.db[k][j];
        continue;
      }
      const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
      const double bias1 = 1.0 - std::pow(b1, t_);
      const double bias2 = 1.0 - std::pow(b2, t_);
      auto adam_update = [&](double& w, double& m, double& v, double g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double mhat = m / bias1;
        const double vhat = v / bias2;
        w -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      };
      kernels::parallel_for(layer.W.rows, kernels::Exec::Parallel, [&](std::size_t r) {
        double* w = layer.W.row(r);
        double* m = m_.dW[k].row(r);
        double* v = v_.dW[k].row(r);
        const double* g = grads.dW[k].row(r);
        for (std::size_t c = 0; c < layer.W.cols; ++c) adam_update(w[c], m[c], v[c], g[c]);
      });
      for (std::size_t j = 0; j < layer.b.size(); ++j)
        adam_update(layer.b[j], m_.db[k][j], v_.db[k][j], grads.db[k][j]);
    }
  }

 private:
  TrainConfig cfg_;
  Gradients m_, v_;
  long long t_ = 0;
};

}  // namespace

TrainResult train(const Dataset& ds, std::span<const int> train_ids,
                  const EncodingTable& table, const TrainConfig& cfg) {
  cfg.validate();
  if (train_ids.empty()) throw Error("empty-train-set", "train: no training nodes");
  if (table.vectors.rows != ds.vocabulary.size())
    throw Error("dim-mismatch", "train: table rows != vocabulary size");

  const std::size_t out_dim =
      cfg.loss == LossKind::CosineEmbedding ? table.dim : ds.vocabulary.size();
  SageModel model = init_model(ds.feature_dim(), cfg.hidden_dim, out_dim, cfg.seed);

  std::vector<int> labels;
  labels.reserve(train_ids.size());
  for (int id : train_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= ds.nodes.size())
      throw Error("unknown-node", "train: node id out of range");
    labels.push_back(ds.nodes[static_cast<std::size_t>(id)].label_id);
  }

  TrainResult result;
  Optimizer opt(model, cfg);
  ForwardCache cache;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    forward(model, ds, {}, &cache);
    auto bw = backward(model, ds, train_ids, labels, cfg.loss, table, cache);
    if (!std::isfinite(bw.mean_loss))
      throw Error("nan-loss", "training diverged at epoch " + std::to_string(epoch) +
                                  " (loss is not finite)");
    result.history.push_back(bw.mean_loss);
    opt.step(model, bw.grads);
    if (cfg.early_stop_patience) {
      if (bw.mean_loss < best - 1e-6) {
        best = bw.mean_loss;
        stale = 0;
      } else if (++stale >= *cfg.early_stop_patience) {
        break;
      }
    }
  }
  result.trained = TrainedModel{std::move(model), cfg.loss};
  return result;
}

std::string history_to_csv(const std::vector<double>& history) {
  std::ostringstream out;
  out << "epoch,mean_loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << history[i] << '\n';
  return out.str();
}

}  // namespace semlabel
