#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semlabel/graph_data.hpp"
#include "semlabel/label_encoding.hpp"
#include "semlabel/training.hpp"

namespace semlabel {

/// Row = true class, column = predicted class.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<long long> counts;

  explicit ConfusionMatrix(std::size_t n = 0) : n_classes(n), counts(n * n, 0) {}
  long long& at(std::size_t t, std::size_t p) { return counts[t * n_classes + p]; }
  long long at(std::size_t t, std::size_t p) const { return counts[t * n_classes + p]; }
  long long total() const;
};

ConfusionMatrix confusion_from_pairs(std::span<const int> truths,
                                     std::span<const int> predictions,
                                     std::size_t n_classes);

struct ClassMetrics {
  int label_id = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support = 0;
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;
  double weighted_f1 = 0.0;
  double macro_f1 = 0.0;
};

/// Precision/recall/F1 with the 0-when-undefined convention; weighted F1 is
/// support-weighted, macro F1 averages over the whole vocabulary.
EvalReport report_from_confusion(const ConfusionMatrix& cm);

/// Label predictions for node_ids: nearest-embedding decoding for
/// cosine-trained models, logit argmax for the baselines (ties to the lowest
/// class index).
std::vector<int> predict(const TrainedModel& trained, const Dataset& ds,
                         std::span<const int> node_ids, const EncodingTable& table);

EvalReport evaluate(const TrainedModel& trained, const Dataset& ds,
                    std::span<const int> test_ids, const EncodingTable& table);

struct FoldReport {
  int fold_index = 0;
  int test_project = 0;
  EvalReport report;
};

struct CrossValReport {
  std::vector<FoldReport> folds;
  std::vector<double> per_class_mean_f1;  // mean across folds, one per label
  double overall_weighted_f1 = 0.0;       // pooled over all fold test nodes
  std::vector<std::string> labels;        // vocabulary echo for pairing checks
  std::string encoding_name;
  std::size_t encoding_dim = 0;
};

enum class FoldExec { Sequential, Parallel };

/// Leave-one-project-out driver: one independent train+evaluate per fold,
/// fold k seeded with cfg.seed + k. Fold order in the report is by fold
/// index regardless of execution order.
CrossValReport cross_validate(const Dataset& ds, const EncodingTable& table,
                              const TrainConfig& cfg,
                              FoldExec exec = FoldExec::Parallel);

/// Paired per-class samples for the statistics pipeline: x_i and y_i are the
/// mean-across-folds F1 of class i under reports a and b.
std::pair<std::vector<double>, std::vector<double>> collect_paired_scores(
    const CrossValReport& a, const CrossValReport& b);

std::string serialize_crossval_report(const CrossValReport& report);
CrossValReport crossval_report_from_json(const std::string& json_text);
std::string serialize_eval_report(const EvalReport& report);

}  // namespace semlabel
