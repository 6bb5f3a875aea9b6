#include "semlabel/experiment.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semlabel/error.hpp"

namespace semlabel {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file-not-found", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("file-write", "cannot write '" + path + "'");
  out << content;
}

namespace {

EncodingSpec encoding_spec_from_json(const ordered_json& js, std::size_t index) {
  EncodingSpec spec;
  const auto kind = js.at("kind").get<std::string>();
  if (kind == "onehot") spec.kind = EncodingSpec::Kind::OneHot;
  else if (kind == "file") spec.kind = EncodingSpec::Kind::File;
  else if (kind == "fetch") spec.kind = EncodingSpec::Kind::Fetch;
  else if (kind == "synth") spec.kind = EncodingSpec::Kind::Synth;
  else throw Error("bad-encoding-kind", "unknown encoding kind '" + kind + "'");

  spec.name = js.value("name", kind + "_" + std::to_string(index));
  if (spec.kind == EncodingSpec::Kind::File) spec.path = js.at("path").get<std::string>();
  if (spec.kind == EncodingSpec::Kind::Fetch) {
    spec.endpoint.base_url = js.at("endpoint").get<std::string>();
    spec.endpoint.model_name = js.value("model", std::string{});
    if (js.contains("batch_size")) spec.endpoint.batch_size = js["batch_size"].get<int>();
    if (js.contains("prompt_template"))
      spec.endpoint.prompt_template = js["prompt_template"].get<std::string>();
    if (const char* token = std::getenv("SEMLABEL_API_TOKEN"))
      spec.endpoint.auth_token = token;
  }
  if (spec.kind == EncodingSpec::Kind::Synth) {
    spec.dim = js.at("dim").get<std::size_t>();
    if (js.contains("seed")) spec.seed = js["seed"].get<std::uint64_t>();
    if (js.contains("within_group_cos"))
      spec.within_group_cos = js["within_group_cos"].get<double>();
  }
  if (js.contains("compact_dim") && !js["compact_dim"].is_null())
    spec.compact_dim = js["compact_dim"].get<std::size_t>();
  if (js.contains("loss")) spec.loss = loss_kind_from_name(js["loss"].get<std::string>());
  return spec;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("experiment config: ") + e.what());
  }
  ExperimentConfig cfg;
  if (doc.contains("dataset")) cfg.dataset_path = doc["dataset"].get<std::string>();
  if (doc.contains("synth")) cfg.synth = synth_config_from_json(doc["synth"].dump());
  if (!cfg.dataset_path && !cfg.synth)
    throw Error("bad-config", "experiment needs 'dataset' or 'synth'");
  if (cfg.dataset_path && cfg.synth)
    throw Error("bad-config", "'dataset' and 'synth' are mutually exclusive");
  if (!doc.contains("encodings") || doc["encodings"].empty())
    throw Error("bad-config", "experiment needs at least one encoding spec");
  std::size_t index = 0;
  for (const auto& js : doc["encodings"])
    cfg.encodings.push_back(encoding_spec_from_json(js, index++));
  if (doc.contains("train")) cfg.train = train_config_from_json(doc["train"].dump());
  if (doc.contains("alpha")) cfg.alpha = doc["alpha"].get<double>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  return cfg;
}

std::string sanitize_file_stem(const std::string& name) {
  std::string out;
  for (char c : name)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
  return out.empty() ? "unnamed" : out;
}

EncodingTable resolve_encoding(const EncodingSpec& spec, const LabelVocabulary& vocab,
                               const std::optional<std::string>& persist_dir) {
  EncodingTable table;
  switch (spec.kind) {
    case EncodingSpec::Kind::OneHot:
      table = one_hot_table(vocab);
      break;
    case EncodingSpec::Kind::File:
      table = load_embedding_table(read_text_file(spec.path), vocab);
      break;
    case EncodingSpec::Kind::Fetch:
      table = fetch_embeddings(spec.endpoint, vocab);
      if (persist_dir) {
        write_text_file(*persist_dir + "/embeddings_" + sanitize_file_stem(spec.name) + ".json",
                   serialize_embedding_table(table, vocab));
      }
      break;
    case EncodingSpec::Kind::Synth:
      table = synth_hierarchical_table(vocab, spec.dim, spec.seed, spec.within_group_cos);
      break;
  }
  if (spec.compact_dim) table = compact(table, *spec.compact_dim);
  return table;
}

ExperimentOutcome run_crossval_experiment(const ExperimentConfig& cfg) {
  const Dataset ds = cfg.dataset_path ? load_dataset(read_text_file(*cfg.dataset_path))
                                      : generate_synthetic(*cfg.synth);
  fs::create_directories(cfg.output_dir);

  ExperimentOutcome outcome;
  std::ostringstream csv;
  csv << "encoding,dimensions,weighted_f1\n";
  csv.precision(17);
  for (const auto& spec : cfg.encodings) {
    const EncodingTable table = resolve_encoding(spec, ds.vocabulary, cfg.output_dir);
    TrainConfig train_cfg = cfg.train;
    train_cfg.loss = spec.effective_loss();
    CrossValReport report = cross_validate(ds, table, train_cfg);
    report.encoding_name = spec.name;
    csv << spec.name << ',' << report.encoding_dim << ',' << report.overall_weighted_f1
        << '\n';
    outcome.reports.push_back(std::move(report));
  }

  for (const auto& report : outcome.reports) {
    const std::string path =
        cfg.output_dir + "/crossval_" + sanitize_file_stem(report.encoding_name) + ".json";
    write_text_file(path, serialize_crossval_report(report));
    outcome.report_paths.push_back(path);
  }
  outcome.summary_csv_path = cfg.output_dir + "/summary.csv";
  write_text_file(outcome.summary_csv_path, csv.str());
  return outcome;
}

std::string compare_reports_json(const std::vector<CrossValReport>& reports,
                                 double alpha) {
  if (reports.size() < 2)
    throw Error("bad-config", "compare needs at least two reports");
  ordered_json doc;
  doc["alpha"] = alpha;
  doc["n"] = reports.front().per_class_mean_f1.size();
  ordered_json names = ordered_json::array();
  for (const auto& r : reports) names.push_back(r.encoding_name);
  doc["reports"] = std::move(names);

  ordered_json pairs = ordered_json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const auto [x, y] = collect_paired_scores(reports[i], reports[j]);
      const auto cmp = stats::compare_encodings(x, y, alpha);
      ordered_json row;
      row["a"] = reports[i].encoding_name;
      row["b"] = reports[j].encoding_name;
      row["normality_p"] = cmp.normality.p_value;
      row["normality_W"] = cmp.normality.statistic;
      row["normal_path_taken"] = cmp.normal_path_taken;
      row["test"] = stats::test_kind_name(cmp.significance.test);
      row["statistic"] = cmp.significance.statistic;
      row["p"] = cmp.significance.p_value;
      row["n_effective"] = cmp.significance.n_effective;
      row["significant"] = cmp.significant;
      double gap = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) gap += x[k] - y[k];
      row["mean_f1_gap"] = gap / static_cast<double>(x.size());
      pairs.push_back(std::move(row));
    }
  }
  doc["pairs"] = std::move(pairs);
  return doc.dump(2) + "\n";
}

}  // namespace semlabel
