#include "semlabel/graph_data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/rng.hpp"

namespace semlabel {

using nlohmann::ordered_json;

Matrix Dataset::feature_matrix() const {
  Matrix m(nodes.size(), feature_dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& f = nodes[i].features;
    std::copy(f.begin(), f.end(), m.row(i));
  }
  return m;
}

std::vector<int> Dataset::project_node_ids(int project_id) const {
  std::vector<int> ids;
  for (const auto& node : nodes)
    if (node.project_id == project_id) ids.push_back(node.id);
  return ids;
}

std::vector<int> Dataset::all_node_ids() const {
  std::vector<int> ids(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

std::vector<std::vector<int>> build_adjacency(
    std::size_t n_nodes, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n_nodes);
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes ||
        static_cast<std::size_t>(v) >= n_nodes)
      throw Error("dangling-edge", "edge (" + std::to_string(u) + ", " +
                                       std::to_string(v) + ") references a missing node");
    if (u == v)
      throw Error("self-loop", "self-loop at node " + std::to_string(u));
    const auto key = std::minmax(u, v);
    if (!seen.insert(key).second)
      throw Error("duplicate-edge", "edge (" + std::to_string(u) + ", " +
                                        std::to_string(v) + ") appears twice");
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

void Dataset::validate() const {
  vocabulary.validate();
  if (projects.empty()) throw Error("no-projects", "dataset has no projects");
  const std::size_t dim = feature_dim();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.id != static_cast<int>(i))
      throw Error("bad-node-id", "node ids must be dense 0..n-1");
    if (node.features.size() != dim)
      throw Error("feature-dim-mismatch",
                  "node " + std::to_string(node.id) + " has " +
                      std::to_string(node.features.size()) + " features, expected " +
                      std::to_string(dim));
    for (double f : node.features)
      if (!std::isfinite(f))
        throw Error("non-finite-feature",
                    "node " + std::to_string(node.id) + " has a non-finite feature");
    if (node.label_id < 0 || static_cast<std::size_t>(node.label_id) >= vocabulary.size())
      throw Error("unknown-label", "node " + std::to_string(node.id) +
                                       " has label id " + std::to_string(node.label_id) +
                                       " outside the vocabulary");
    if (node.project_id < 0 || static_cast<std::size_t>(node.project_id) >= projects.size())
      throw Error("unknown-project", "node " + std::to_string(node.id) +
                                         " has project id " + std::to_string(node.project_id));
  }
  if (adjacency != build_adjacency(nodes.size(), edges))
    throw Error("bad-adjacency", "adjacency does not match the edge list");
}

Dataset load_dataset(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("dataset: ") + e.what());
  }
  for (const char* key : {"projects", "labels", "nodes", "edges"})
    if (!doc.contains(key))
      throw Error("malformed-json", std::string("dataset lacks '") + key + "'");

  Dataset ds;
  ds.projects = doc["projects"].get<std::vector<std::string>>();
  ds.vocabulary =
      LabelVocabulary::with_groups_from_names(doc["labels"].get<std::vector<std::string>>());

  for (const auto& jn : doc["nodes"]) {
    Node node;
    node.id = jn.at("id").get<int>();
    node.project_id = jn.at("project").get<int>();
    node.label_id = jn.at("label").get<int>();
    node.features = jn.at("features").get<std::vector<double>>();
    ds.nodes.push_back(std::move(node));
  }
  for (const auto& je : doc["edges"]) {
    if (!je.is_array() || je.size() != 2)
      throw Error("malformed-json", "edges must be [u, v] pairs");
    ds.edges.emplace_back(je[0].get<int>(), je[1].get<int>());
  }
  ds.adjacency = build_adjacency(ds.nodes.size(), ds.edges);
  ds.validate();
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  ordered_json doc;
  doc["projects"] = ds.projects;
  doc["labels"] = ds.vocabulary.labels;
  ordered_json nodes = ordered_json::array();
  for (const auto& node : ds.nodes) {
    ordered_json jn;
    jn["id"] = node.id;
    jn["project"] = node.project_id;
    jn["label"] = node.label_id;
    jn["features"] = node.features;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const auto& [u, v] : ds.edges) edges.push_back(ordered_json::array({u, v}));
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::vector<FoldSpec> make_folds(const Dataset& ds) {
  if (ds.projects.size() < 2)
    throw Error("too-few-projects", "leave-one-project-out needs >= 2 projects");
  std::vector<FoldSpec> folds;
  for (std::size_t p = 0; p < ds.projects.size(); ++p) {
    FoldSpec fold;
    fold.fold_index = static_cast<int>(p);
    fold.test_project = static_cast<int>(p);
    for (const auto& node : ds.nodes) {
      if (node.project_id == static_cast<int>(p))
        fold.test_node_ids.push_back(node.id);
      else
        fold.train_node_ids.push_back(node.id);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::vector<int> neighbors(const Dataset& ds, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= ds.nodes.size())
    throw Error("unknown-node", "no node with id " + std::to_string(id));
  return ds.adjacency[static_cast<std::size_t>(id)];
}

void SynthConfig::validate() const {
  if (n_projects < 1 || generic_types < 1 || subtypes_per_type < 1 ||
      nodes_per_project < 1 || feature_dim < 1)
    throw Error("bad-count", "synthetic config counts must be >= 1");
  for (double p : {intra_edge_prob, inter_edge_prob})
    if (!(p >= 0.0 && p <= 1.0))
      throw Error("bad-probability", "edge probabilities must be in [0, 1]");
  if (!(sibling_confusion >= 0.0 && sibling_confusion <= 1.0))
    throw Error("bad-probability", "sibling_confusion must be in [0, 1]");
}

SynthConfig synth_config_from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("synthetic config: ") + e.what());
  }
  SynthConfig cfg;
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("n_projects")) cfg.n_projects = doc["n_projects"].get<int>();
  if (doc.contains("generic_types")) cfg.generic_types = doc["generic_types"].get<int>();
  if (doc.contains("subtypes_per_type"))
    cfg.subtypes_per_type = doc["subtypes_per_type"].get<int>();
  if (doc.contains("nodes_per_project"))
    cfg.nodes_per_project = doc["nodes_per_project"].get<int>();
  if (doc.contains("intra_edge_prob")) cfg.intra_edge_prob = doc["intra_edge_prob"].get<double>();
  if (doc.contains("inter_edge_prob")) cfg.inter_edge_prob = doc["inter_edge_prob"].get<double>();
  if (doc.contains("feature_dim")) cfg.feature_dim = doc["feature_dim"].get<int>();
  if (doc.contains("sibling_confusion"))
    cfg.sibling_confusion = doc["sibling_confusion"].get<double>();
  cfg.validate();
  return cfg;
}

std::string serialize_synth_config(const SynthConfig& cfg) {
  ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["n_projects"] = cfg.n_projects;
  doc["generic_types"] = cfg.generic_types;
  doc["subtypes_per_type"] = cfg.subtypes_per_type;
  doc["nodes_per_project"] = cfg.nodes_per_project;
  doc["intra_edge_prob"] = cfg.intra_edge_prob;
  doc["inter_edge_prob"] = cfg.inter_edge_prob;
  doc["feature_dim"] = cfg.feature_dim;
  doc["sibling_confusion"] = cfg.sibling_confusion;
  return doc.dump(2) + "\n";
}

namespace {

const char* kFamilyNames[] = {"wall", "slab",   "column",     "beam",  "stair",
                              "foundation", "parapet", "lintel", "ramp",  "roof"};
const char* kSubtypeNames[] = {"core",      "interior",  "perimeter", "entrance",
                               "penthouse", "auxiliary", "transfer",  "basement",
                               "balcony",   "loadbearing", "ornamental", "miscellaneous"};

std::string family_name(int g) {
  constexpr int kPool = static_cast<int>(std::size(kFamilyNames));
  std::string name = kFamilyNames[g % kPool];
  if (g >= kPool) name += std::to_string(g / kPool + 1);
  return name;
}

std::string subtype_name(int s) {
  constexpr int kPool = static_cast<int>(std::size(kSubtypeNames));
  std::string name = kSubtypeNames[s % kPool];
  if (s >= kPool) name += std::to_string(s / kPool + 1);
  return name;
}

// Keeps the generator's own draws independent of the prototype draws so
// synth_prototypes(cfg) matches what generate_synthetic used.
constexpr std::uint64_t kBodyStream = 0x9e3779b97f4a7c15ull;

double noise_scale() { return 0.1; }

/// Draws `count` unit rows orthogonalized against `prior` rows and earlier
/// rows of the result while the dimension allows it.
Matrix orthonormal_block(std::size_t count, std::size_t dim, Rng& rng,
                         const Matrix* prior) {
  const std::size_t n_prior = prior ? prior->rows : 0;
  Matrix rows(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    double* v = rows.row(i);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t j = 0; j < dim; ++j) v[j] = rng.normal();
      if (n_prior + i < dim) {
        auto project_out = [&](const double* u) {
          double dot = 0.0;
          for (std::size_t j = 0; j < dim; ++j) dot += v[j] * u[j];
          for (std::size_t j = 0; j < dim; ++j) v[j] -= dot * u[j];
        };
        for (std::size_t k = 0; k < n_prior; ++k) project_out(prior->row(k));
        for (std::size_t k = 0; k < i; ++k) project_out(rows.row(k));
      }
      double norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) norm += v[j] * v[j];
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (std::size_t j = 0; j < dim; ++j) v[j] /= norm;
        break;
      }
    }
  }
  return rows;
}

}  // namespace

SynthPrototypes synth_prototypes(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto dim = static_cast<std::size_t>(cfg.feature_dim);
  SynthPrototypes protos;
  protos.generic = orthonormal_block(static_cast<std::size_t>(cfg.generic_types), dim,
                                     rng, nullptr);
  protos.subtype = orthonormal_block(
      static_cast<std::size_t>(cfg.generic_types) * cfg.subtypes_per_type, dim, rng,
      &protos.generic);
  return protos;
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const SynthPrototypes protos = synth_prototypes(cfg);
  Rng rng(cfg.seed ^ kBodyStream);

  const int n_labels = cfg.generic_types * cfg.subtypes_per_type;
  Dataset ds;
  std::vector<std::string> label_names;
  for (int t = 0; t < n_labels; ++t) {
    const int g = t / cfg.subtypes_per_type;
    const int s = t % cfg.subtypes_per_type;
    label_names.push_back(family_name(g) + "/" + subtype_name(s));
  }
  ds.vocabulary = LabelVocabulary::with_groups_from_names(std::move(label_names));
  for (int p = 0; p < cfg.n_projects; ++p)
    ds.projects.push_back("project_" + std::string(1, static_cast<char>('A' + p % 26)) +
                          (p >= 26 ? std::to_string(p / 26) : ""));

  const auto dim = static_cast<std::size_t>(cfg.feature_dim);
  const double subtype_w = 1.0 - cfg.sibling_confusion;
  for (int p = 0; p < cfg.n_projects; ++p) {
    for (int i = 0; i < cfg.nodes_per_project; ++i) {
      Node node;
      node.id = static_cast<int>(ds.nodes.size());
      node.project_id = p;
      node.label_id = i % n_labels;  // round-robin keeps every class populated
      const int g = node.label_id / cfg.subtypes_per_type;
      node.features.resize(dim);
      const double* gp = protos.generic.row(static_cast<std::size_t>(g));
      const double* sp = protos.subtype.row(static_cast<std::size_t>(node.label_id));
      for (std::size_t j = 0; j < dim; ++j)
        node.features[j] = gp[j] + subtype_w * sp[j] + noise_scale() * rng.normal();
      ds.nodes.push_back(std::move(node));
    }
  }

  // Edges stay inside one project; probability depends on whether the two
  // nodes share a generic family.
  const int per = cfg.nodes_per_project;
  for (int p = 0; p < cfg.n_projects; ++p) {
    const int base = p * per;
    for (int i = 0; i < per; ++i) {
      for (int j = i + 1; j < per; ++j) {
        const int gi = ds.nodes[static_cast<std::size_t>(base + i)].label_id /
                       cfg.subtypes_per_type;
        const int gj = ds.nodes[static_cast<std::size_t>(base + j)].label_id /
                       cfg.subtypes_per_type;
        const double prob = gi == gj ? cfg.intra_edge_prob : cfg.inter_edge_prob;
        if (rng.uniform() < prob) ds.edges.emplace_back(base + i, base + j);
      }
    }
  }
  ds.adjacency = build_adjacency(ds.nodes.size(), ds.edges);
  ds.validate();
  return ds;
}

}  // namespace semlabel
