#include "semlabel/label_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/rng.hpp"

namespace semlabel {

using nlohmann::ordered_json;

int LabelVocabulary::group_count() const {
  if (!generic_group) return 0;
  int mx = -1;
  for (int g : *generic_group) mx = std::max(mx, g);
  return mx + 1;
}

void LabelVocabulary::validate() const {
  if (labels.empty()) throw Error("empty-vocabulary", "vocabulary has no labels");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw Error("duplicate-label", "vocabulary labels are not distinct");
  if (generic_group) {
    if (generic_group->size() != labels.size())
      throw Error("bad-groups", "generic_group size differs from label count");
    const int n = group_count();
    std::vector<bool> present(static_cast<std::size_t>(n), false);
    for (int g : *generic_group) {
      if (g < 0 || g >= n) throw Error("bad-groups", "group index out of range");
      present[static_cast<std::size_t>(g)] = true;
    }
    for (bool p : present)
      if (!p) throw Error("bad-groups", "group indices are not dense");
  }
}

LabelVocabulary LabelVocabulary::with_groups_from_names(
    std::vector<std::string> names) {
  LabelVocabulary vocab;
  vocab.labels = std::move(names);
  bool all_have_family = !vocab.labels.empty();
  for (const auto& name : vocab.labels)
    all_have_family = all_have_family && name.find('/') != std::string::npos;
  if (all_have_family) {
    std::vector<int> groups;
    std::map<std::string, int> family_ids;
    for (const auto& name : vocab.labels) {
      const std::string family = name.substr(0, name.find('/'));
      auto [it, _] = family_ids.try_emplace(family, static_cast<int>(family_ids.size()));
      groups.push_back(it->second);
    }
    vocab.generic_group = std::move(groups);
  }
  vocab.validate();
  return vocab;
}

const char* encoding_kind_name(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::OneHot: return "one-hot";
    case EncodingKind::Loaded: return "loaded";
    case EncodingKind::Fetched: return "fetched";
    case EncodingKind::Compacted: return "compacted";
    case EncodingKind::SyntheticHierarchical: return "synthetic-hierarchical";
  }
  return "unknown";
}

namespace {

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void check_rows_nonzero(const EncodingTable& table, const LabelVocabulary& vocab) {
  for (std::size_t i = 0; i < table.vectors.rows; ++i) {
    if (l2_norm(table.row(i)) == 0.0)
      throw Error("zero-vector", "embedding for label '" + vocab.labels[i] +
                                     "' is the zero vector");
  }
}

}  // namespace

EncodingTable one_hot_table(const LabelVocabulary& vocab) {
  vocab.validate();
  const std::size_t n = vocab.size();
  EncodingTable table;
  table.dim = n;
  table.kind = EncodingKind::OneHot;
  table.vectors.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) table.vectors(i, i) = 1.0;
  return table;
}

EncodingTable load_embedding_table(const std::string& json_text,
                                   const LabelVocabulary& vocab) {
  vocab.validate();
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("embedding table: ") + e.what());
  }
  if (!doc.is_object())
    throw Error("malformed-json", "embedding table must be a JSON object");

  EncodingTable table;
  table.kind = EncodingKind::Loaded;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& label = vocab.labels[i];
    auto it = doc.find(label);
    if (it == doc.end())
      throw Error("missing-label", "embedding table lacks label '" + label + "'");
    if (!it->is_array())
      throw Error("malformed-json", "embedding for '" + label + "' is not an array");
    if (i == 0) {
      dim = it->size();
      if (dim == 0) throw Error("zero-vector", "embedding vectors are empty");
      table.dim = dim;
      table.vectors.resize(vocab.size(), dim);
    } else if (it->size() != dim) {
      throw Error("dim-mismatch", "embedding for '" + label + "' has length " +
                                      std::to_string(it->size()) + ", expected " +
                                      std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& cell = (*it)[j];
      if (!cell.is_number())
        throw Error("malformed-json", "embedding for '" + label + "' has a non-numeric entry");
      table.vectors(i, j) = cell.get<double>();
    }
  }
  check_rows_nonzero(table, vocab);
  return table;
}

std::string serialize_embedding_table(const EncodingTable& table,
                                      const LabelVocabulary& vocab) {
  ordered_json doc = ordered_json::object();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < table.dim; ++j) row.push_back(table.vectors(i, j));
    doc[vocab.labels[i]] = std::move(row);
  }
  return doc.dump(2) + "\n";
}

EncodingTable compact(const EncodingTable& table, std::size_t target_dim) {
  if (target_dim < 1 || target_dim > table.dim)
    throw Error("bad-target-dim",
                "target_dim " + std::to_string(target_dim) + " outside [1, " +
                    std::to_string(table.dim) + "]");
  EncodingTable out;
  out.kind = EncodingKind::Compacted;
  out.dim = target_dim;
  out.vectors.resize(table.vectors.rows, target_dim);
  for (std::size_t i = 0; i < table.vectors.rows; ++i) {
    const double* src = table.vectors.row(i);
    const double norm = l2_norm({src, target_dim});
    if (norm == 0.0)
      throw Error("zero-vector", "truncated prefix of row " + std::to_string(i) +
                                     " is the zero vector");
    double* dst = out.vectors.row(i);
    for (std::size_t j = 0; j < target_dim; ++j) dst[j] = src[j] / norm;
  }
  return out;
}

namespace {

/// Draws `count` unit vectors of length `dim`, orthogonalized against all
/// previously returned rows while the dimension allows it.
Matrix orthonormal_rows(std::size_t count, std::size_t dim, Rng& rng) {
  Matrix rows(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    double* v = rows.row(i);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t j = 0; j < dim; ++j) v[j] = rng.normal();
      if (i < dim) {
        for (std::size_t k = 0; k < i; ++k) {
          const double* u = rows.row(k);
          double dot = 0.0;
          for (std::size_t j = 0; j < dim; ++j) dot += v[j] * u[j];
          for (std::size_t j = 0; j < dim; ++j) v[j] -= dot * u[j];
        }
      }
      const double norm = l2_norm({v, dim});
      if (norm > 1e-8) {
        for (std::size_t j = 0; j < dim; ++j) v[j] /= norm;
        break;
      }
    }
  }
  return rows;
}

}  // namespace

EncodingTable synth_hierarchical_table(const LabelVocabulary& vocab,
                                       std::size_t dim, std::uint64_t seed,
                                       double within_group_cos) {
  vocab.validate();
  if (!vocab.generic_group)
    throw Error("missing-groups", "hierarchical table needs generic_group");
  if (within_group_cos <= 0.0 || within_group_cos >= 1.0)
    throw Error("bad-cosine", "within_group_cos must be in (0, 1)");
  const std::size_t n_groups = static_cast<std::size_t>(vocab.group_count());
  const std::size_t n_labels = vocab.size();
  if (dim < n_groups + n_labels)
    throw Error("dim-too-small", "dim must be at least group count + label count (" +
                                     std::to_string(n_groups + n_labels) + ")");

  Rng rng(seed);
  const Matrix dirs = orthonormal_rows(n_groups + n_labels, dim, rng);

  EncodingTable table;
  table.kind = EncodingKind::SyntheticHierarchical;
  table.dim = dim;
  table.vectors.resize(n_labels, dim);
  const double group_w = std::sqrt(within_group_cos);
  const double label_w = std::sqrt(1.0 - within_group_cos);
  for (std::size_t i = 0; i < n_labels; ++i) {
    const auto g = static_cast<std::size_t>((*vocab.generic_group)[i]);
    const double* gdir = dirs.row(g);
    const double* ldir = dirs.row(n_groups + i);
    double* out = table.vectors.row(i);
    for (std::size_t j = 0; j < dim; ++j)
      out[j] = group_w * gdir[j] + label_w * ldir[j];
  }
  return table;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("dim-mismatch", "cosine_similarity: vector lengths differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw Error("zero-vector", "cosine_similarity: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

int decode_nearest(std::span<const double> prediction, const EncodingTable& table) {
  if (prediction.size() != table.dim)
    throw Error("dim-mismatch", "decode_nearest: prediction length " +
                                    std::to_string(prediction.size()) +
                                    " != table dim " + std::to_string(table.dim));
  if (l2_norm(prediction) == 0.0)
    throw Error("zero-vector", "decode_nearest: zero prediction vector");
  int best = 0;
  double best_cos = cosine_similarity(prediction, table.row(0));
  for (std::size_t i = 1; i < table.vectors.rows; ++i) {
    const double c = cosine_similarity(prediction, table.row(i));
    if (c > best_cos) {
      best_cos = c;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace semlabel
