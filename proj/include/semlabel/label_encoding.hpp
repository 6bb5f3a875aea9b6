#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semlabel/matrix.hpp"

namespace semlabel {

/// Ordered label vocabulary. generic_group, when present, maps each label to
/// the index of its coarse family (subtype -> generic type).
struct LabelVocabulary {
  std::vector<std::string> labels;
  std::optional<std::vector<int>> generic_group;

  std::size_t size() const { return labels.size(); }
  int group_count() const;
  void validate() const;

  /// Builds a vocabulary from label strings, deriving generic_group from a
  /// "<family>/<subtype>" naming convention. Groups are only assigned when
  /// every label contains a '/'; group indices follow first appearance.
  static LabelVocabulary with_groups_from_names(std::vector<std::string> names);
};

enum class EncodingKind { OneHot, Loaded, Fetched, Compacted, SyntheticHierarchical };

const char* encoding_kind_name(EncodingKind kind);

/// Per-label target vectors, one row per vocabulary label in vocabulary order.
struct EncodingTable {
  Matrix vectors;
  std::size_t dim = 0;
  EncodingKind kind = EncodingKind::OneHot;

  std::span<const double> row(std::size_t label_id) const {
    return {vectors.row(label_id), dim};
  }
};

EncodingTable one_hot_table(const LabelVocabulary& vocab);

/// Parses the embedding-table file format: a JSON object mapping every
/// vocabulary label to a numeric vector. Rows are reordered to vocabulary
/// order.
EncodingTable load_embedding_table(const std::string& json_text,
                                   const LabelVocabulary& vocab);

std::string serialize_embedding_table(const EncodingTable& table,
                                      const LabelVocabulary& vocab);

struct EmbeddingEndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string auth_token;
  int batch_size = 16;
  /// Text sent for each label; "{label}" expands to the label string.
  std::string prompt_template = "{label}";
};

/// Fetches one vector per label from an OpenAI-compatible /v1/embeddings
/// endpoint, in sequential batches of batch_size. Response vectors are
/// reordered by their "index" field before alignment with the input order.
EncodingTable fetch_embeddings(const EmbeddingEndpointConfig& endpoint,
                               const LabelVocabulary& vocab);

/// Matryoshka-style compaction: keep the first target_dim components of each
/// row, then L2-renormalize to unit norm.
EncodingTable compact(const EncodingTable& table, std::size_t target_dim);

/// Deterministic two-level hierarchical encoding: each label vector blends a
/// unit group direction with a label-unique unit direction so that pairwise
/// cosine is within_group_cos inside a group and 0 across groups. Requires
/// dim >= group count + label count.
EncodingTable synth_hierarchical_table(const LabelVocabulary& vocab,
                                       std::size_t dim, std::uint64_t seed,
                                       double within_group_cos);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Nearest-embedding decoding: argmax over labels of cosine similarity with
/// the prediction. Ties resolve to the lowest label index.
int decode_nearest(std::span<const double> prediction, const EncodingTable& table);

}  // namespace semlabel
