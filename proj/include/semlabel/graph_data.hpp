#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semlabel/label_encoding.hpp"
#include "semlabel/matrix.hpp"

namespace semlabel {

struct Node {
  int id = 0;
  std::vector<double> features;
  int label_id = 0;
  int project_id = 0;
};

/// Undirected node-attributed graph partitioned into projects. Immutable
/// after construction; safe to share read-only across fold workers.
struct Dataset {
  std::vector<Node> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;  // sorted neighbor ids per node
  std::vector<std::string> projects;
  LabelVocabulary vocabulary;

  std::size_t feature_dim() const {
    return nodes.empty() ? 0 : nodes.front().features.size();
  }
  Matrix feature_matrix() const;
  std::vector<int> project_node_ids(int project_id) const;
  std::vector<int> all_node_ids() const;

  /// Checks every structural invariant, including that adjacency equals a
  /// rebuild from the edge list.
  void validate() const;
};

/// Builds sorted adjacency from an edge list; rejects self-loops, duplicate
/// edges and dangling endpoints.
std::vector<std::vector<int>> build_adjacency(std::size_t n_nodes,
                                              const std::vector<std::pair<int, int>>& edges);

Dataset load_dataset(const std::string& json_text);
std::string serialize_dataset(const Dataset& ds);

struct FoldSpec {
  int fold_index = 0;
  int test_project = 0;
  std::vector<int> train_node_ids;
  std::vector<int> test_node_ids;
};

/// Leave-one-project-out folds: fold k tests on project k and trains on the
/// rest. Requires at least two projects.
std::vector<FoldSpec> make_folds(const Dataset& ds);

std::vector<int> neighbors(const Dataset& ds, int id);

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_projects = 5;
  int generic_types = 6;
  int subtypes_per_type = 7;
  int nodes_per_project = 120;
  double intra_edge_prob = 0.05;
  double inter_edge_prob = 0.01;
  int feature_dim = 64;
  double sibling_confusion = 0.5;

  void validate() const;
};

SynthConfig synth_config_from_json(const std::string& json_text);
std::string serialize_synth_config(const SynthConfig& cfg);

/// Unit prototype directions used by the generator; exposed so tests can
/// check their geometry directly.
struct SynthPrototypes {
  Matrix generic;  // generic_types x feature_dim
  Matrix subtype;  // generic_types*subtypes_per_type x feature_dim
};

SynthPrototypes synth_prototypes(const SynthConfig& cfg);

/// Deterministic BIM-like generator. Labels form a two-level hierarchy
/// (generic family -> subtype); node features are the family prototype plus
/// a (1 - sibling_confusion)-weighted subtype prototype plus Gaussian noise;
/// edges are denser inside a family than across and never cross projects.
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace semlabel
