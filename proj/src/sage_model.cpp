#include "semlabel/sage_model.hpp"

#include <cmath>

#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/kernels.hpp"
#include "semlabel/rng.hpp"

namespace semlabel {

using nlohmann::ordered_json;

namespace {

SageLayer init_layer(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  SageLayer layer;
  layer.W.resize(out_dim, 2 * in_dim);
  layer.b.assign(out_dim, 0.0);
  const double fan_in = static_cast<double>(2 * in_dim);
  const double fan_out = static_cast<double>(out_dim);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : layer.W.data) w = rng.uniform(-limit, limit);
  return layer;
}

}  // namespace

SageModel init_model(std::size_t in_dim, std::size_t hidden_dim,
                     std::size_t out_dim, std::uint64_t seed) {
  if (in_dim < 1 || hidden_dim < 1 || out_dim < 1)
    throw Error("bad-dimension", "model dimensions must be >= 1");
  Rng rng(seed);
  SageModel model;
  model.layers.push_back(init_layer(in_dim, hidden_dim, rng));
  model.layers.push_back(init_layer(hidden_dim, hidden_dim, rng));
  model.layers.push_back(init_layer(hidden_dim, out_dim, rng));
  return model;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& layers = ckpt.model.layers;
  if (layers.size() != 3)
    throw Error("bad-checkpoint", "checkpoint format holds exactly 3 layers");
  ordered_json doc;
  doc["dims"] = {layers[0].in_dim(), layers[0].out_dim(), layers[1].out_dim(),
                 layers[2].out_dim()};
  ordered_json jlayers = ordered_json::array();
  for (const auto& layer : layers) {
    ordered_json jl;
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < layer.W.rows; ++r) {
      ordered_json row = ordered_json::array();
      for (std::size_t c = 0; c < layer.W.cols; ++c) row.push_back(layer.W(r, c));
      rows.push_back(std::move(row));
    }
    jl["W"] = std::move(rows);
    jl["b"] = layer.b;
    jlayers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(jlayers);
  doc["seed"] = ckpt.seed;
  return doc.dump() + "\n";
}

Checkpoint load_checkpoint(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("checkpoint: ") + e.what());
  }
  if (!doc.contains("dims") || !doc.contains("layers"))
    throw Error("bad-checkpoint", "checkpoint lacks dims/layers");
  const auto dims = doc["dims"].get<std::vector<std::size_t>>();
  if (dims.size() != 4 || doc["layers"].size() != 3)
    throw Error("bad-checkpoint", "checkpoint format holds exactly 3 layers");

  Checkpoint ckpt;
  if (doc.contains("seed")) ckpt.seed = doc["seed"].get<std::uint64_t>();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& jl = doc["layers"][k];
    SageLayer layer;
    const auto& rows = jl.at("W");
    layer.W.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < layer.W.rows; ++r) {
      if (rows[r].size() != layer.W.cols)
        throw Error("bad-checkpoint", "ragged weight matrix");
      for (std::size_t c = 0; c < layer.W.cols; ++c)
        layer.W(r, c) = rows[r][c].get<double>();
    }
    layer.b = jl.at("b").get<std::vector<double>>();
    if (layer.b.size() != layer.W.rows || layer.W.cols != 2 * dims[k] ||
        layer.W.rows != dims[k + 1])
      throw Error("bad-checkpoint", "layer shapes disagree with dims");
    for (double w : layer.W.data)
      if (!std::isfinite(w)) throw Error("bad-checkpoint", "non-finite weight");
    ckpt.model.layers.push_back(std::move(layer));
  }
  return ckpt;
}

Matrix forward(const SageModel& model, const Dataset& ds,
               std::span<const int> node_ids, ForwardCache* cache) {
  if (model.layers.empty()) throw Error("bad-model", "model has no layers");
  if (ds.feature_dim() != model.in_dim())
    throw Error("feature-dim-mismatch",
                "dataset features have dim " + std::to_string(ds.feature_dim()) +
                    ", model expects " + std::to_string(model.in_dim()));

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  const std::size_t n_layers = model.layers.size();
  c.H.resize(n_layers + 1);
  c.X.resize(n_layers);
  c.Z.resize(n_layers);
  c.H[0] = ds.feature_matrix();

  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto& layer = model.layers[k];
    if (c.H[k].cols != layer.in_dim())
      throw Error("bad-model", "layer " + std::to_string(k) + " input dim mismatch");
    kernels::concat_neighbor_mean(c.H[k], ds.adjacency, c.X[k]);
    kernels::linear(c.X[k], layer.W, layer.b, c.Z[k]);
    c.H[k + 1] = c.Z[k];
    if (k + 1 < n_layers) kernels::relu_inplace(c.H[k + 1]);
  }

  const Matrix& out = c.H[n_layers];
  for (double v : out.data)
    if (!std::isfinite(v))
      throw Error("non-finite-output", "forward pass produced NaN/Inf");

  Matrix selected(node_ids.size(), out.cols);
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const int id = node_ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= ds.nodes.size())
      throw Error("unknown-node", "forward: no node with id " + std::to_string(id));
    const double* src = out.row(static_cast<std::size_t>(id));
    std::copy(src, src + out.cols, selected.row(i));
  }
  return selected;
}

}  // namespace semlabel
