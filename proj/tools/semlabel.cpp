#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/evaluation.hpp"
#include "semlabel/experiment.hpp"
#include "semlabel/graph_data.hpp"
#include "semlabel/label_encoding.hpp"
#include "semlabel/pca.hpp"
#include "semlabel/stats.hpp"
#include "semlabel/training.hpp"

namespace {

using namespace semlabel;
using nlohmann::ordered_json;

LabelVocabulary vocab_from_file(const std::string& path) {
  const auto text = read_text_file(path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("vocabulary source: ") + e.what());
  }
  if (doc.is_array())
    return LabelVocabulary::with_groups_from_names(doc.get<std::vector<std::string>>());
  if (doc.is_object() && doc.contains("labels"))
    return LabelVocabulary::with_groups_from_names(
        doc["labels"].get<std::vector<std::string>>());
  throw Error("bad-vocabulary",
              "expected a JSON array of labels or an object with a 'labels' field");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct GenDataArgs {
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> projects, generic_types, subtypes, nodes_per_project, feature_dim;
  std::optional<double> intra, inter, confusion;
};

int cmd_gen_data(const GenDataArgs& args) {
  SynthConfig cfg;
  if (!args.config_path.empty())
    cfg = synth_config_from_json(read_text_file(args.config_path));
  if (args.seed) cfg.seed = *args.seed;
  if (args.projects) cfg.n_projects = *args.projects;
  if (args.generic_types) cfg.generic_types = *args.generic_types;
  if (args.subtypes) cfg.subtypes_per_type = *args.subtypes;
  if (args.nodes_per_project) cfg.nodes_per_project = *args.nodes_per_project;
  if (args.feature_dim) cfg.feature_dim = *args.feature_dim;
  if (args.intra) cfg.intra_edge_prob = *args.intra;
  if (args.inter) cfg.inter_edge_prob = *args.inter;
  if (args.confusion) cfg.sibling_confusion = *args.confusion;
  cfg.validate();
  const Dataset ds = generate_synthetic(cfg);
  write_text_file(args.out_path, serialize_dataset(ds));
  std::cerr << "wrote " << ds.nodes.size() << " nodes, " << ds.edges.size()
            << " edges, " << ds.vocabulary.size() << " labels to " << args.out_path
            << "\n";
  return 0;
}

struct EmbedArgs {
  std::string labels_from, mode = "onehot", out_path;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  double within_group_cos = 0.8;
  std::string endpoint_url, model_name, prompt_template = "{label}";
  int batch_size = 16;
  std::optional<std::size_t> compact_dim;
};

int cmd_embed(const EmbedArgs& args) {
  const LabelVocabulary vocab = vocab_from_file(args.labels_from);
  EncodingTable table;
  if (args.mode == "onehot") {
    table = one_hot_table(vocab);
  } else if (args.mode == "synth") {
    table = synth_hierarchical_table(vocab, args.dim, args.seed, args.within_group_cos);
  } else if (args.mode == "fetch") {
    EmbeddingEndpointConfig endpoint;
    endpoint.base_url = args.endpoint_url;
    endpoint.model_name = args.model_name;
    endpoint.batch_size = args.batch_size;
    endpoint.prompt_template = args.prompt_template;
    if (const char* token = std::getenv("SEMLABEL_API_TOKEN"))
      endpoint.auth_token = token;
    table = fetch_embeddings(endpoint, vocab);
  } else {
    throw Error("bad-mode", "embed mode must be onehot, synth or fetch");
  }
  if (args.compact_dim) table = compact(table, *args.compact_dim);
  write_text_file(args.out_path, serialize_embedding_table(table, vocab));
  std::cerr << "wrote " << vocab.size() << " x " << table.dim << " table ("
            << encoding_kind_name(table.kind) << ") to " << args.out_path << "\n";
  return 0;
}

int cmd_compact(const std::string& table_path, std::size_t dim,
                const std::string& out_path) {
  const auto text = read_text_file(table_path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("embedding table: ") + e.what());
  }
  if (!doc.is_object()) throw Error("malformed-json", "embedding table must be an object");
  std::vector<std::string> names;
  for (const auto& [key, _] : doc.items()) names.push_back(key);
  LabelVocabulary vocab;
  vocab.labels = names;  // keep file order; groups are irrelevant here
  const EncodingTable table = load_embedding_table(text, vocab);
  const EncodingTable compacted = compact(table, dim);
  write_text_file(out_path, serialize_embedding_table(compacted, vocab));
  return 0;
}

struct TrainArgs {
  std::string data_path, table_path, out_model, history_path;
  std::string loss = "cosine";
  std::string train_config_path;
  std::optional<int> epochs, patience;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> hidden;
  std::optional<std::string> optimizer;
};

TrainConfig build_train_config(const TrainArgs& args) {
  TrainConfig cfg;
  if (!args.train_config_path.empty())
    cfg = train_config_from_json(read_text_file(args.train_config_path));
  cfg.loss = loss_kind_from_name(args.loss);
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.lr) cfg.learning_rate = *args.lr;
  if (args.seed) cfg.seed = *args.seed;
  if (args.hidden) cfg.hidden_dim = *args.hidden;
  if (args.patience) cfg.early_stop_patience = *args.patience;
  if (args.optimizer)
    cfg.optimizer = *args.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& args) {
  const Dataset ds = load_dataset(read_text_file(args.data_path));
  const EncodingTable table =
      load_embedding_table(read_text_file(args.table_path), ds.vocabulary);
  const TrainConfig cfg = build_train_config(args);
  const auto ids = ds.all_node_ids();
  const TrainResult result = train(ds, ids, table, cfg);
  write_text_file(args.out_model,
                  serialize_checkpoint({result.trained.model, cfg.seed}));
  if (!args.history_path.empty())
    write_text_file(args.history_path, history_to_csv(result.history));
  std::cerr << "trained " << result.history.size() << " epochs, final loss "
            << (result.history.empty() ? 0.0 : result.history.back()) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& model_path,
                 const std::string& table_path, const std::string& loss,
                 const std::string& project, const std::string& out_path) {
  const Dataset ds = load_dataset(read_text_file(data_path));
  const EncodingTable table =
      load_embedding_table(read_text_file(table_path), ds.vocabulary);
  const Checkpoint ckpt = load_checkpoint(read_text_file(model_path));
  const TrainedModel trained{ckpt.model, loss_kind_from_name(loss)};

  std::vector<int> ids;
  if (project.empty()) {
    ids = ds.all_node_ids();
  } else {
    int pid = -1;
    for (std::size_t p = 0; p < ds.projects.size(); ++p)
      if (ds.projects[p] == project) pid = static_cast<int>(p);
    if (pid < 0) {
      try {
        pid = std::stoi(project);
      } catch (...) {
        pid = -1;
      }
    }
    if (pid < 0 || static_cast<std::size_t>(pid) >= ds.projects.size())
      throw Error("unknown-project", "no project '" + project + "'");
    ids = ds.project_node_ids(pid);
  }
  const EvalReport report = evaluate(trained, ds, ids, table);
  write_text_file(out_path, serialize_eval_report(report));
  std::cerr << "weighted F1 " << report.weighted_f1 << " over " << ids.size()
            << " nodes\n";
  return 0;
}

struct CrossvalArgs {
  std::string config_path;
  std::optional<std::string> dataset, output_dir;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

int cmd_crossval(const CrossvalArgs& args) {
  ExperimentConfig cfg = experiment_config_from_json(read_text_file(args.config_path));
  if (args.dataset) {
    cfg.dataset_path = *args.dataset;
    cfg.synth.reset();
  }
  if (args.output_dir) cfg.output_dir = *args.output_dir;
  if (args.alpha) cfg.alpha = *args.alpha;
  if (args.seed) cfg.train.seed = *args.seed;
  if (args.epochs) cfg.train.epochs = *args.epochs;
  const ExperimentOutcome outcome = run_crossval_experiment(cfg);
  for (std::size_t i = 0; i < outcome.reports.size(); ++i)
    std::cerr << outcome.reports[i].encoding_name << ": weighted F1 "
              << outcome.reports[i].overall_weighted_f1 << " -> "
              << outcome.report_paths[i] << "\n";
  std::cerr << "summary: " << outcome.summary_csv_path << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths, double alpha,
                const std::string& out_path) {
  std::vector<CrossValReport> reports;
  for (const auto& path : report_paths)
    reports.push_back(crossval_report_from_json(read_text_file(path)));
  const std::string json = compare_reports_json(reports, alpha);
  if (out_path.empty())
    std::cout << json;
  else
    write_text_file(out_path, json);
  return 0;
}

int cmd_project2d(const std::string& table_path, const std::string& out_path) {
  const auto text = read_text_file(table_path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("embedding table: ") + e.what());
  }
  if (!doc.is_object()) throw Error("malformed-json", "embedding table must be an object");
  std::vector<std::string> names;
  for (const auto& [key, _] : doc.items()) names.push_back(key);
  LabelVocabulary vocab;
  vocab.labels = names;
  const EncodingTable table = load_embedding_table(text, vocab);
  const Matrix coords = pca_project_2d(table);
  std::ostringstream csv;
  csv << "label,x,y\n";
  csv.precision(17);
  for (std::size_t i = 0; i < vocab.size(); ++i)
    csv << csv_quote(vocab.labels[i]) << ',' << coords(i, 0) << ',' << coords(i, 1)
        << '\n';
  write_text_file(out_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "semlabel: graph-node classifiers trained against semantic label "
      "encodings, with one-hot baselines, leave-one-project-out cross-validation "
      "and a normality-gated significance pipeline"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* sc_gen = app.add_subcommand("gen-data", "Generate a synthetic BIM-like dataset");
  sc_gen->add_option("--config", gen.config_path, "Synthetic config JSON");
  sc_gen->add_option("--out", gen.out_path, "Output dataset path")->required();
  sc_gen->add_option("--seed", gen.seed);
  sc_gen->add_option("--projects", gen.projects);
  sc_gen->add_option("--generic-types", gen.generic_types);
  sc_gen->add_option("--subtypes-per-type", gen.subtypes);
  sc_gen->add_option("--nodes-per-project", gen.nodes_per_project);
  sc_gen->add_option("--feature-dim", gen.feature_dim);
  sc_gen->add_option("--intra-edge-prob", gen.intra);
  sc_gen->add_option("--inter-edge-prob", gen.inter);
  sc_gen->add_option("--sibling-confusion", gen.confusion);

  EmbedArgs embed;
  auto* sc_embed = app.add_subcommand("embed", "Build or fetch an embedding table");
  sc_embed->add_option("--labels-from", embed.labels_from,
                       "Dataset JSON or JSON array of labels")->required();
  sc_embed->add_option("--mode", embed.mode, "onehot | synth | fetch");
  sc_embed->add_option("--out", embed.out_path)->required();
  sc_embed->add_option("--dim", embed.dim, "Synthetic table dimension");
  sc_embed->add_option("--seed", embed.seed);
  sc_embed->add_option("--within-group-cos", embed.within_group_cos);
  sc_embed->add_option("--endpoint", embed.endpoint_url, "Embeddings API base URL");
  sc_embed->add_option("--model", embed.model_name);
  sc_embed->add_option("--batch-size", embed.batch_size);
  sc_embed->add_option("--prompt-template", embed.prompt_template,
                       "Text per label; {label} expands to the label");
  std::size_t embed_compact = 0;
  sc_embed->add_option("--compact", embed_compact, "Compact to this dimension after acquisition");

  std::string cpt_table, cpt_out;
  std::size_t cpt_dim = 0;
  auto* sc_compact = app.add_subcommand(
      "compact", "Truncate-and-renormalize an embedding table file");
  sc_compact->add_option("--table", cpt_table)->required();
  sc_compact->add_option("--dim", cpt_dim)->required();
  sc_compact->add_option("--out", cpt_out)->required();

  TrainArgs train_args;
  auto* sc_train = app.add_subcommand("train", "Train on all nodes of a dataset");
  sc_train->add_option("--data", train_args.data_path)->required();
  sc_train->add_option("--table", train_args.table_path)->required();
  sc_train->add_option("--loss", train_args.loss, "cosine | softmax | sigmoid_bce");
  sc_train->add_option("--train-config", train_args.train_config_path);
  sc_train->add_option("--epochs", train_args.epochs);
  sc_train->add_option("--lr", train_args.lr);
  sc_train->add_option("--seed", train_args.seed);
  sc_train->add_option("--hidden", train_args.hidden);
  sc_train->add_option("--patience", train_args.patience);
  sc_train->add_option("--optimizer", train_args.optimizer, "adam | sgd");
  sc_train->add_option("--out-model", train_args.out_model)->required();
  sc_train->add_option("--history", train_args.history_path, "Per-epoch loss CSV");

  std::string ev_data, ev_model, ev_table, ev_loss = "cosine", ev_project, ev_out;
  auto* sc_eval = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  sc_eval->add_option("--data", ev_data)->required();
  sc_eval->add_option("--model", ev_model)->required();
  sc_eval->add_option("--table", ev_table)->required();
  sc_eval->add_option("--loss", ev_loss);
  sc_eval->add_option("--project", ev_project, "Restrict to one project (name or index)");
  sc_eval->add_option("--out", ev_out)->required();

  CrossvalArgs cv;
  auto* sc_cv = app.add_subcommand(
      "crossval", "Leave-one-project-out cross-validation over encoding specs");
  sc_cv->add_option("--config", cv.config_path, "Experiment config JSON")->required();
  sc_cv->add_option("--dataset", cv.dataset);
  sc_cv->add_option("--output-dir", cv.output_dir);
  sc_cv->add_option("--alpha", cv.alpha);
  sc_cv->add_option("--seed", cv.seed);
  sc_cv->add_option("--epochs", cv.epochs);

  std::vector<std::string> cmp_reports;
  double cmp_alpha = 0.05;
  std::string cmp_out;
  auto* sc_cmp = app.add_subcommand(
      "compare", "Pairwise significance tests between cross-validation reports");
  sc_cmp->add_option("reports", cmp_reports, "Two or more crossval report JSONs")
      ->expected(-2);
  sc_cmp->add_option("--alpha", cmp_alpha);
  sc_cmp->add_option("--out", cmp_out, "Output JSON (stdout when omitted)");

  std::string p2_table, p2_out;
  auto* sc_p2 = app.add_subcommand(
      "project2d",
      "Project an embedding table to 2-D via PCA (deterministic stand-in for "
      "stochastic neighbor embeddings)");
  sc_p2->add_option("--table", p2_table)->required();
  sc_p2->add_option("--out", p2_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_gen->parsed()) return cmd_gen_data(gen);
    if (sc_embed->parsed()) {
      if (embed_compact > 0) embed.compact_dim = embed_compact;
      return cmd_embed(embed);
    }
    if (sc_compact->parsed()) return cmd_compact(cpt_table, cpt_dim, cpt_out);
    if (sc_train->parsed()) return cmd_train(train_args);
    if (sc_eval->parsed())
      return cmd_evaluate(ev_data, ev_model, ev_table, ev_loss, ev_project, ev_out);
    if (sc_cv->parsed()) return cmd_crossval(cv);
    if (sc_cmp->parsed()) return cmd_compare(cmp_reports, cmp_alpha, cmp_out);
    if (sc_p2->parsed()) return cmd_project2d(p2_table, p2_out);
  } catch (const semlabel::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
