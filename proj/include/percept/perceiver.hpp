#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "percept/aggregate.hpp"
#include "percept/catalog.hpp"
#include "percept/corpus.hpp"
#include "percept/encoder.hpp"

namespace percept {

struct TrainConfig {
  int epochs = 10;
  std::array<double, 3> split_ratios = {0.7, 0.1, 0.2};
  double learning_rate = 0.05;
  int batch_size = 16;
  int max_input_length = 512;  // whitespace tokens
  std::uint64_t seed = 0;
  std::string selection_metric = "mean_validation_pearson";

  // Throws kInvalidConfig.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Mean raw rating per catalog statement (catalog order). mask[i] is false
// for statements nobody rated; values[i] is then 0.
struct LabelVector {
  std::vector<double> values;
  std::vector<bool> mask;

  bool operator==(const LabelVector&) const = default;
};

struct LabeledDocument {
  NewsDocument doc;
  LabelVector labels;
};

// Labels are not reverse-coded. Documents whose records carry no ratings are
// dropped and reported in `warnings`.
std::map<std::string, LabelVector> build_labels(const std::vector<AnnotationRecord>& records,
                                                const StatementCatalog& catalog,
                                                std::vector<std::string>* warnings = nullptr);

// Documents that have labels, in input order.
std::vector<LabeledDocument> join_labels(const std::vector<NewsDocument>& docs,
                                         const std::map<std::string, LabelVector>& labels);

struct DatasetSplit {
  std::vector<LabeledDocument> train;
  std::vector<LabeledDocument> validation;
  std::vector<LabeledDocument> test;
};

// Seeded shuffle, then cut at round(n * r1) and round(n * (r1 + r2)).
// Throws kTooFewDocuments below 10 documents.
DatasetSplit split_dataset(const std::vector<LabeledDocument>& items,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

// Title, newline, body; keeps the first `max_tokens` whitespace tokens.
std::string model_input_text(const std::string& title, const std::string& body, int max_tokens);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> validation_metric;
};

struct TrainingMetadata {
  TrainConfig config;
  int best_epoch = 0;
  std::optional<double> best_validation_metric;
  std::vector<EpochRecord> history;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

// Encoder plus a linear head with one output per catalog statement. Immutable
// once built, so one instance can serve concurrent predictions.
class ScorerModel {
 public:
  ScorerModel(std::shared_ptr<const TextEncoder> encoder, Eigen::MatrixXd weights,
              Eigen::VectorXd bias, std::vector<std::string> statement_ids,
              std::string catalog_hash, std::string catalog_version, TrainingMetadata metadata);

  const TextEncoder& encoder() const { return *encoder_; }
  std::shared_ptr<const TextEncoder> encoder_ptr() const { return encoder_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  const std::vector<std::string>& statement_ids() const { return statement_ids_; }
  const std::string& catalog_hash() const { return catalog_hash_; }
  const std::string& catalog_version() const { return catalog_version_; }
  const TrainingMetadata& metadata() const { return metadata_; }

  // Head outputs before clamping.
  Eigen::VectorXd raw_outputs(const std::string& input_text) const;
  // Binary weights blob and its digest; the first 12 hex chars act as the
  // model version.
  std::string weights_blob() const;
  std::string weights_sha256() const;
  std::string version() const;

 private:
  std::shared_ptr<const TextEncoder> encoder_;
  Eigen::MatrixXd weights_;  // statements x encoder width
  Eigen::VectorXd bias_;
  std::vector<std::string> statement_ids_;
  std::string catalog_hash_;
  std::string catalog_version_;
  TrainingMetadata metadata_;
};

struct StatementScores {
  std::string doc_id;
  std::map<std::string, double> scores;  // clamped to [1,5]
};

struct Prediction {
  StatementScores statements;
  PerceptionProfile profile;
};

// Throws kCatalogMismatch, or kEmptyText when title and body are both blank.
Prediction predict(const ScorerModel& model, const NewsDocument& doc,
                   const StatementCatalog& catalog);

using EpochCallback = std::function<void(int epoch, const ScorerModel& snapshot,
                                         std::optional<double> validation_metric)>;

// Adam on masked mean squared error; returns the snapshot from the epoch
// with the highest validation metric (earliest on ties). Throws
// kInvalidParameter for empty splits, kDivergence on a non-finite loss.
ScorerModel train(const std::vector<LabeledDocument>& train_set,
                  const std::vector<LabeledDocument>& validation_set, const TrainConfig& config,
                  std::shared_ptr<const TextEncoder> encoder, const StatementCatalog& catalog,
                  const EpochCallback& on_epoch = {});

struct EvaluationReport {
  DimensionMap<std::optional<double>> pearson;  // nullopt: zero variance
  DimensionMap<std::size_t> n;
  std::optional<double> overall;  // mean over defined dimensions
};

// Per-dimension Pearson r between predicted and reference profiles, paired by
// doc_id. Throws kTooFewDocuments below 3 pairs.
EvaluationReport evaluate_profiles(const std::vector<PerceptionProfile>& predicted,
                                   const std::vector<PerceptionProfile>& reference);

// Reference profiles are derived from the label vectors with the shared
// aggregation rule (reverse coding on).
EvaluationReport evaluate(const ScorerModel& model, const std::vector<LabeledDocument>& test_set,
                          const StatementCatalog& catalog);

// dimension,pearson_r,n
std::string evaluation_csv(const EvaluationReport& report);
nlohmann::json evaluation_json(const EvaluationReport& report);

PerceptionProfile label_profile(const std::string& doc_id, const LabelVector& labels,
                                const StatementCatalog& catalog);

// Directory with metadata.json and weights.bin.
void save_model(const ScorerModel& model, const std::filesystem::path& dir);
// Throws kFormat for a missing, truncated or tampered artifact and
// kCatalogMismatch when the artifact was trained against another catalog.
ScorerModel load_model(const std::filesystem::path& dir, const StatementCatalog& catalog);

nlohmann::json model_metadata_json(const ScorerModel& model);

}  // namespace percept
