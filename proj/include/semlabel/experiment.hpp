#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semlabel/evaluation.hpp"
#include "semlabel/graph_data.hpp"
#include "semlabel/label_encoding.hpp"
#include "semlabel/stats.hpp"
#include "semlabel/training.hpp"

namespace semlabel {

/// One encoding to run through cross-validation. kind selects how the table
/// is produced; loss defaults to softmax for one-hot and cosine otherwise.
struct EncodingSpec {
  enum class Kind { OneHot, File, Fetch, Synth };

  std::string name;
  Kind kind = Kind::OneHot;
  std::string path;                       // kind == File
  EmbeddingEndpointConfig endpoint;       // kind == Fetch
  std::size_t dim = 0;                    // kind == Synth
  std::uint64_t seed = 0;                 // kind == Synth
  double within_group_cos = 0.8;          // kind == Synth
  std::optional<std::size_t> compact_dim; // applied after acquisition
  std::optional<LossKind> loss;

  LossKind effective_loss() const {
    if (loss) return *loss;
    return kind == Kind::OneHot ? LossKind::SoftmaxCrossEntropy
                                : LossKind::CosineEmbedding;
  }
};

struct ExperimentConfig {
  std::optional<std::string> dataset_path;
  std::optional<SynthConfig> synth;
  std::vector<EncodingSpec> encodings;
  TrainConfig train;
  double alpha = 0.05;
  std::string output_dir = "out";
};

ExperimentConfig experiment_config_from_json(const std::string& json_text);

/// Builds the encoding table for a spec against a vocabulary. When a fetch
/// spec is resolved, persist_dir (if set) receives a replayable copy in the
/// embedding-table file format.
EncodingTable resolve_encoding(const EncodingSpec& spec, const LabelVocabulary& vocab,
                               const std::optional<std::string>& persist_dir);

struct ExperimentOutcome {
  std::vector<CrossValReport> reports;
  std::vector<std::string> report_paths;
  std::string summary_csv_path;
};

/// Runs cross-validation for every encoding spec and writes one report JSON
/// per encoding plus the combined encoding/dimensions/weighted-F1 CSV. All
/// files are written after computation finishes, in config order.
ExperimentOutcome run_crossval_experiment(const ExperimentConfig& cfg);

/// Pairwise comparison report over two or more cross-validation reports,
/// one row per unordered pair.
std::string compare_reports_json(const std::vector<CrossValReport>& reports,
                                 double alpha);

std::string sanitize_file_stem(const std::string& name);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace semlabel
