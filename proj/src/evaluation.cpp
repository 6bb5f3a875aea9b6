#include "semlabel/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "semlabel/error.hpp"
#include "semlabel/kernels.hpp"

namespace semlabel {

using nlohmann::ordered_json;

long long ConfusionMatrix::total() const {
  long long sum = 0;
  for (long long c : counts) sum += c;
  return sum;
}

ConfusionMatrix confusion_from_pairs(std::span<const int> truths,
                                     std::span<const int> predictions,
                                     std::size_t n_classes) {
  if (truths.size() != predictions.size())
    throw Error("dim-mismatch", "confusion: truths and predictions differ in length");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i], p = predictions[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes ||
        static_cast<std::size_t>(p) >= n_classes)
      throw Error("bad-class", "confusion: class index out of range");
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

EvalReport report_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t k = cm.n_classes;
  EvalReport report;
  report.per_class.resize(k);
  double weighted_sum = 0.0;
  double macro_sum = 0.0;
  long long total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    long long tp = cm.at(c, c), fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    auto& m = report.per_class[c];
    m.label_id = static_cast<int>(c);
    m.support = tp + fn;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = m.support > 0 ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    weighted_sum += static_cast<double>(m.support) * m.f1;
    macro_sum += m.f1;
    total += m.support;
  }
  report.weighted_f1 = total > 0 ? weighted_sum / static_cast<double>(total) : 0.0;
  report.macro_f1 = k > 0 ? macro_sum / static_cast<double>(k) : 0.0;
  return report;
}

std::vector<int> predict(const TrainedModel& trained, const Dataset& ds,
                         std::span<const int> node_ids, const EncodingTable& table) {
  const Matrix out = forward(trained.model, ds, node_ids);
  std::vector<int> preds(node_ids.size(), 0);
  if (trained.loss == LossKind::CosineEmbedding) {
    if (table.dim != out.cols)
      throw Error("dim-mismatch", "predict: table dim != model output dim");
    // Exceptions may not cross the omp region; collect and rethrow.
    std::vector<std::string> errors(node_ids.size());
    kernels::parallel_for(node_ids.size(), kernels::Exec::Parallel, [&](std::size_t i) {
      try {
        preds[i] = decode_nearest({out.row(i), out.cols}, table);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (!errors[i].empty())
        throw Error("decode-failed",
                    "node " + std::to_string(node_ids[i]) + ": " + errors[i]);
  } else {
    kernels::parallel_for(node_ids.size(), kernels::Exec::Parallel, [&](std::size_t i) {
      const double* row = out.row(i);
      std::size_t best = 0;
      for (std::size_t c = 1; c < out.cols; ++c)
        if (row[c] > row[best]) best = c;
      preds[i] = static_cast<int>(best);
    });
  }
  return preds;
}

EvalReport evaluate(const TrainedModel& trained, const Dataset& ds,
                    std::span<const int> test_ids, const EncodingTable& table) {
  if (test_ids.empty()) throw Error("empty-test-set", "evaluate: no test nodes");
  const std::vector<int> preds = predict(trained, ds, test_ids, table);
  std::vector<int> truths(test_ids.size());
  for (std::size_t i = 0; i < test_ids.size(); ++i)
    truths[i] = ds.nodes[static_cast<std::size_t>(test_ids[i])].label_id;
  return report_from_confusion(
      confusion_from_pairs(truths, preds, ds.vocabulary.size()));
}

CrossValReport cross_validate(const Dataset& ds, const EncodingTable& table,
                              const TrainConfig& cfg, FoldExec exec) {
  const std::vector<FoldSpec> folds = make_folds(ds);
  const std::size_t n_folds = folds.size();

  struct FoldOutcome {
    EvalReport report;
    std::vector<int> truths, preds;
    std::string error;
  };
  std::vector<FoldOutcome> outcomes(n_folds);

  kernels::parallel_for(
      n_folds,
      exec == FoldExec::Parallel ? kernels::Exec::Parallel : kernels::Exec::Serial,
      [&](std::size_t k) {
        auto& out = outcomes[k];
        try {
          TrainConfig fold_cfg = cfg;
          fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
          const auto trained = train(ds, folds[k].train_node_ids, table, fold_cfg);
          out.preds = predict(trained.trained, ds, folds[k].test_node_ids, table);
          out.truths.reserve(folds[k].test_node_ids.size());
          for (int id : folds[k].test_node_ids)
            out.truths.push_back(ds.nodes[static_cast<std::size_t>(id)].label_id);
          out.report = report_from_confusion(
              confusion_from_pairs(out.truths, out.preds, ds.vocabulary.size()));
        } catch (const std::exception& e) {
          out.error = e.what();
        }
      });

  for (std::size_t k = 0; k < n_folds; ++k)
    if (!outcomes[k].error.empty())
      throw Error("fold-failed", "fold " + std::to_string(k) + ": " + outcomes[k].error);

  CrossValReport report;
  report.labels = ds.vocabulary.labels;
  report.encoding_dim = table.dim;
  report.encoding_name = encoding_kind_name(table.kind);
  report.per_class_mean_f1.assign(ds.vocabulary.size(), 0.0);

  std::vector<int> pooled_truths, pooled_preds;
  for (std::size_t k = 0; k < n_folds; ++k) {
    auto& out = outcomes[k];
    report.folds.push_back({folds[k].fold_index, folds[k].test_project,
                            std::move(out.report)});
    pooled_truths.insert(pooled_truths.end(), out.truths.begin(), out.truths.end());
    pooled_preds.insert(pooled_preds.end(), out.preds.begin(), out.preds.end());
    for (std::size_t c = 0; c < ds.vocabulary.size(); ++c)
      report.per_class_mean_f1[c] += report.folds.back().report.per_class[c].f1;
  }
  for (double& f : report.per_class_mean_f1) f /= static_cast<double>(n_folds);
  report.overall_weighted_f1 =
      report_from_confusion(
          confusion_from_pairs(pooled_truths, pooled_preds, ds.vocabulary.size()))
          .weighted_f1;
  return report;
}

std::pair<std::vector<double>, std::vector<double>> collect_paired_scores(
    const CrossValReport& a, const CrossValReport& b) {
  if (a.labels != b.labels)
    throw Error("vocab-mismatch", "paired scores need reports over the same vocabulary");
  return {a.per_class_mean_f1, b.per_class_mean_f1};
}

namespace {

ordered_json eval_report_to_json(const EvalReport& report) {
  ordered_json doc;
  ordered_json per_class = ordered_json::array();
  for (const auto& m : report.per_class) {
    ordered_json jm;
    jm["label_id"] = m.label_id;
    jm["precision"] = m.precision;
    jm["recall"] = m.recall;
    jm["f1"] = m.f1;
    jm["support"] = m.support;
    per_class.push_back(std::move(jm));
  }
  doc["per_class"] = std::move(per_class);
  doc["weighted_f1"] = report.weighted_f1;
  doc["macro_f1"] = report.macro_f1;
  return doc;
}

EvalReport eval_report_from_json(const ordered_json& doc) {
  EvalReport report;
  for (const auto& jm : doc.at("per_class")) {
    ClassMetrics m;
    m.label_id = jm.at("label_id").get<int>();
    m.precision = jm.at("precision").get<double>();
    m.recall = jm.at("recall").get<double>();
    m.f1 = jm.at("f1").get<double>();
    m.support = jm.at("support").get<long long>();
    report.per_class.push_back(m);
  }
  report.weighted_f1 = doc.at("weighted_f1").get<double>();
  report.macro_f1 = doc.at("macro_f1").get<double>();
  return report;
}

}  // namespace

std::string serialize_eval_report(const EvalReport& report) {
  return eval_report_to_json(report).dump(2) + "\n";
}

std::string serialize_crossval_report(const CrossValReport& report) {
  ordered_json doc;
  doc["encoding"] = report.encoding_name;
  doc["dimensions"] = report.encoding_dim;
  doc["labels"] = report.labels;
  ordered_json folds = ordered_json::array();
  for (const auto& fold : report.folds) {
    ordered_json jf;
    jf["fold_index"] = fold.fold_index;
    jf["test_project"] = fold.test_project;
    jf["report"] = eval_report_to_json(fold.report);
    folds.push_back(std::move(jf));
  }
  doc["folds"] = std::move(folds);
  doc["per_class_mean_f1"] = report.per_class_mean_f1;
  doc["overall_weighted_f1"] = report.overall_weighted_f1;
  return doc.dump(2) + "\n";
}

CrossValReport crossval_report_from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error("malformed-json", std::string("crossval report: ") + e.what());
  }
  CrossValReport report;
  report.encoding_name = doc.at("encoding").get<std::string>();
  report.encoding_dim = doc.at("dimensions").get<std::size_t>();
  report.labels = doc.at("labels").get<std::vector<std::string>>();
  for (const auto& jf : doc.at("folds")) {
    FoldReport fold;
    fold.fold_index = jf.at("fold_index").get<int>();
    fold.test_project = jf.at("test_project").get<int>();
    fold.report = eval_report_from_json(jf.at("report"));
    report.folds.push_back(std::move(fold));
  }
  report.per_class_mean_f1 = doc.at("per_class_mean_f1").get<std::vector<double>>();
  report.overall_weighted_f1 = doc.at("overall_weighted_f1").get<double>();
  return report;
}

}  // namespace semlabel
