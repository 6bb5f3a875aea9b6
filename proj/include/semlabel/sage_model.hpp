#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semlabel/graph_data.hpp"
#include "semlabel/matrix.hpp"

namespace semlabel {

/// One GraphSAGE mean-aggregator layer: a linear map over the concatenation
/// [self ; neighbor mean], so W has shape out_dim x (2 * in_dim).
struct SageLayer {
  Matrix W;
  std::vector<double> b;

  std::size_t in_dim() const { return W.cols / 2; }
  std::size_t out_dim() const { return W.rows; }
};

struct SageModel {
  std::vector<SageLayer> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
};

/// Three layers in -> hidden -> hidden -> out. Weights are Glorot-uniform,
/// biases zero, deterministic for a fixed seed.
SageModel init_model(std::size_t in_dim, std::size_t hidden_dim,
                     std::size_t out_dim, std::uint64_t seed);

struct Checkpoint {
  SageModel model;
  std::uint64_t seed = 0;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& json_text);

/// Per-layer intermediates from a full-graph forward pass, enough to run
/// backprop: H[k] are representations (H[0] = raw features), X[k] the
/// concatenated layer inputs, Z[k] the pre-activations.
struct ForwardCache {
  std::vector<Matrix> H;
  std::vector<Matrix> X;
  std::vector<Matrix> Z;
};

/// Runs the network over the whole graph (hidden layers ReLU, final layer
/// identity; isolated nodes aggregate a zero vector) and returns the output
/// rows for node_ids in order. Pass a cache to keep intermediates.
Matrix forward(const SageModel& model, const Dataset& ds,
               std::span<const int> node_ids, ForwardCache* cache = nullptr);

}  // namespace semlabel
