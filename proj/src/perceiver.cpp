#include "percept/perceiver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/util.hpp"

namespace percept {

namespace {

constexpr char kWeightsMagic[8] = {'P', 'R', 'C', 'P', 'T', 'W', '0', '1'};
constexpr int kFormatVersion = 1;
constexpr const char* kMetadataFile = "metadata.json";
constexpr const char* kWeightsFile = "weights.bin";

static_assert(std::endian::native == std::endian::little, "weights blob assumes little endian");

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// Same as evaluate_profiles but yields nullopt instead of throwing when the
// validation split is too small to correlate.
std::optional<double> validation_metric(const ScorerModel& model,
                                        const std::vector<LabeledDocument>& docs,
                                        const StatementCatalog& catalog) {
  if (docs.size() < 3) return std::nullopt;
  return evaluate(model, docs, catalog).overall;
}

Eigen::MatrixXd encode_all(const TextEncoder& encoder, const std::vector<LabeledDocument>& docs,
                           int max_tokens) {
  Eigen::MatrixXd features(static_cast<Eigen::Index>(encoder.width()),
                           static_cast<Eigen::Index>(docs.size()));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    features.col(static_cast<Eigen::Index>(i)) =
        encoder.encode(model_input_text(docs[i].doc.title, docs[i].doc.body, max_tokens));
  }
  return features;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "split ratios must be non-negative");
  }
  const double total = split_ratios[0] + split_ratios[1] + split_ratios[2];
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "split ratios sum to " + format_double(total));
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be positive");
  }
  if (batch_size < 1) throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  if (max_input_length < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_input_length must be >= 1");
  }
  if (selection_metric != "mean_validation_pearson") {
    throw Error(ErrorCode::kInvalidConfig, "unsupported selection_metric '" + selection_metric + "'");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"split_ratios", c.split_ratios},
       {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size},
       {"max_input_length", c.max_input_length},
       {"seed", c.seed},
       {"selection_metric", c.selection_metric}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.split_ratios = j.value("split_ratios", d.split_ratios);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.max_input_length = j.value("max_input_length", d.max_input_length);
  c.seed = j.value("seed", d.seed);
  c.selection_metric = j.value("selection_metric", d.selection_metric);
}

std::map<std::string, LabelVector> build_labels(const std::vector<AnnotationRecord>& records,
                                                const StatementCatalog& catalog,
                                                std::vector<std::string>* warnings) {
  const std::size_t k = catalog.size();
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> acc;
  for (const auto& record : records) {
    auto& [sums, counts] = acc[record.doc_id];
    if (sums.empty()) {
      sums.assign(k, 0.0);
      counts.assign(k, 0);
    }
    for (const auto& [id, rating] : record.ratings) {
      const auto idx = catalog.index_of(id);
      if (!idx) throw Error(ErrorCode::kUnknownStatement, "unknown statement '" + id + "'");
      sums[*idx] += rating;
      counts[*idx] += 1;
    }
  }
  std::map<std::string, LabelVector> labels;
  for (const auto& [doc_id, sc] : acc) {
    const auto& [sums, counts] = sc;
    LabelVector lv;
    lv.values.assign(k, 0.0);
    lv.mask.assign(k, false);
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (counts[i] > 0) {
        lv.values[i] = sums[i] / counts[i];
        lv.mask[i] = true;
        any = true;
      }
    }
    if (!any) {
      if (warnings) warnings->push_back("document " + doc_id + " has no ratings; dropped");
      continue;
    }
    labels.emplace(doc_id, std::move(lv));
  }
  return labels;
}

std::vector<LabeledDocument> join_labels(const std::vector<NewsDocument>& docs,
                                         const std::map<std::string, LabelVector>& labels) {
  std::vector<LabeledDocument> out;
  for (const auto& doc : docs) {
    auto it = labels.find(doc.doc_id);
    if (it != labels.end()) out.push_back({doc, it->second});
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<LabeledDocument>& items,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (items.size() < 10) {
    throw Error(ErrorCode::kTooFewDocuments,
                "need at least 10 labeled documents, got " + std::to_string(items.size()));
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  // Shuffle a doc_id-sorted order so the split does not depend on input order.
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return items[a].doc.doc_id < items[b].doc.doc_id; });
  Rng rng(seed);
  rng.shuffle(order);
  const double n = static_cast<double>(items.size());
  const auto cut1 = static_cast<std::size_t>(std::llround(n * ratios[0]));
  const auto cut2 =
      std::min(items.size(), static_cast<std::size_t>(std::llround(n * (ratios[0] + ratios[1]))));
  DatasetSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& target = i < cut1 ? split.train : (i < cut2 ? split.validation : split.test);
    target.push_back(items[order[i]]);
  }
  return split;
}

std::string model_input_text(const std::string& title, const std::string& body, int max_tokens) {
  std::string text = title + "\n" + body;
  int tokens = 0;
  bool in_token = false;
  std::size_t token_end = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_token) {
      if (tokens == max_tokens) return text.substr(0, token_end);
      ++tokens;
    }
    if (!space) token_end = i + 1;
    in_token = !space;
  }
  return text;
}

ScorerModel::ScorerModel(std::shared_ptr<const TextEncoder> encoder, Eigen::MatrixXd weights,
                         Eigen::VectorXd bias, std::vector<std::string> statement_ids,
                         std::string catalog_hash, std::string catalog_version,
                         TrainingMetadata metadata)
    : encoder_(std::move(encoder)),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      statement_ids_(std::move(statement_ids)),
      catalog_hash_(std::move(catalog_hash)),
      catalog_version_(std::move(catalog_version)),
      metadata_(std::move(metadata)) {
  if (!encoder_) throw Error(ErrorCode::kInvalidParameter, "model needs an encoder");
  const auto k = static_cast<Eigen::Index>(statement_ids_.size());
  if (weights_.rows() != k || bias_.size() != k ||
      weights_.cols() != static_cast<Eigen::Index>(encoder_->width())) {
    throw Error(ErrorCode::kFormat, "head shape does not match statements and encoder width");
  }
}

Eigen::VectorXd ScorerModel::raw_outputs(const std::string& input_text) const {
  return weights_ * encoder_->encode(input_text) + bias_;
}

std::string ScorerModel::weights_blob() const {
  const std::uint64_t rows = static_cast<std::uint64_t>(weights_.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(weights_.cols());
  std::string blob(sizeof(kWeightsMagic) + 16 + sizeof(double) * rows * (cols + 1), '\0');
  char* out = blob.data();
  std::memcpy(out, kWeightsMagic, sizeof(kWeightsMagic));
  out += sizeof(kWeightsMagic);
  std::memcpy(out, &rows, 8);
  std::memcpy(out + 8, &cols, 8);
  out += 16;
  std::memcpy(out, bias_.data(), sizeof(double) * rows);
  out += sizeof(double) * rows;
  for (Eigen::Index r = 0; r < weights_.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights_.cols(); ++c) {
      const double v = weights_(r, c);
      std::memcpy(out, &v, sizeof(double));
      out += sizeof(double);
    }
  }
  return blob;
}

std::string ScorerModel::weights_sha256() const { return sha256_hex(weights_blob()); }

std::string ScorerModel::version() const { return weights_sha256().substr(0, 12); }

Prediction predict(const ScorerModel& model, const NewsDocument& doc,
                   const StatementCatalog& catalog) {
  if (model.catalog_hash() != catalog.hash()) {
    throw Error(ErrorCode::kCatalogMismatch, "model was trained against a different catalog");
  }
  if (trim(doc.title).empty() && trim(doc.body).empty()) {
    throw Error(ErrorCode::kEmptyText, "document " + doc.doc_id + " has no text");
  }
  const Eigen::VectorXd raw = model.raw_outputs(
      model_input_text(doc.title, doc.body, model.metadata().config.max_input_length));
  Prediction out;
  out.statements.doc_id = doc.doc_id;
  const auto& ids = model.statement_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.statements.scores[ids[i]] = std::clamp(raw[static_cast<Eigen::Index>(i)], 1.0, 5.0);
  }
  out.profile = profile_from_statement_values(doc.doc_id, out.statements.scores, catalog, true);
  return out;
}

ScorerModel train(const std::vector<LabeledDocument>& train_set,
                  const std::vector<LabeledDocument>& validation_set, const TrainConfig& config,
                  std::shared_ptr<const TextEncoder> encoder, const StatementCatalog& catalog,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty() || validation_set.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "train and validation splits must be non-empty");
  }
  if (!encoder) throw Error(ErrorCode::kInvalidParameter, "no encoder");
  const auto k = static_cast<Eigen::Index>(catalog.size());
  const auto n = static_cast<Eigen::Index>(train_set.size());
  const auto width = static_cast<Eigen::Index>(encoder->width());

  const Eigen::MatrixXd features = encode_all(*encoder, train_set, config.max_input_length);
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(k, n);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(k, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& labels = train_set[static_cast<std::size_t>(j)].labels;
    if (labels.values.size() != static_cast<std::size_t>(k) ||
        labels.mask.size() != static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kInvalidParameter, "label vector length does not match catalog");
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      if (labels.mask[static_cast<std::size_t>(i)]) {
        targets(i, j) = labels.values[static_cast<std::size_t>(i)];
        mask(i, j) = 1.0;
      }
    }
  }

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(k, width);
  Eigen::VectorXd bias = Eigen::VectorXd::Constant(k, 3.0);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double count = mask.row(i).sum();
    if (count > 0) bias[i] = targets.row(i).sum() / count;
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Eigen::MatrixXd m_w = Eigen::MatrixXd::Zero(k, width);
  Eigen::MatrixXd v_w = Eigen::MatrixXd::Zero(k, width);
  Eigen::VectorXd m_b = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd v_b = Eigen::VectorXd::Zero(k);
  long step = 0;

  TrainingMetadata meta;
  meta.config = config;
  meta.n_train = train_set.size();
  meta.n_validation = validation_set.size();
  const auto ids = catalog.statement_ids();
  const std::string catalog_hash = catalog.hash();

  std::optional<ScorerModel> best;
  std::optional<double> best_metric;
  Rng rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double sse = 0.0;
    double observed = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd x(width, b);
      Eigen::MatrixXd y(k, b);
      Eigen::MatrixXd msk(k, b);
      for (Eigen::Index c = 0; c < b; ++c) {
        const Eigen::Index src = order[start + static_cast<std::size_t>(c)];
        x.col(c) = features.col(src);
        y.col(c) = targets.col(src);
        msk.col(c) = mask.col(src);
      }
      const double count = msk.sum();
      if (count == 0.0) continue;
      const Eigen::MatrixXd residual =
          (((weights * x).colwise() + bias) - y).cwiseProduct(msk);
      const double batch_sse = residual.squaredNorm();
      if (!std::isfinite(batch_sse)) {
        throw Error(ErrorCode::kDivergence,
                    "training loss became non-finite in epoch " + std::to_string(epoch));
      }
      sse += batch_sse;
      observed += count;

      const Eigen::MatrixXd grad_w = (2.0 / count) * residual * x.transpose();
      const Eigen::VectorXd grad_b = (2.0 / count) * residual.rowwise().sum();
      ++step;
      m_w = kBeta1 * m_w + (1 - kBeta1) * grad_w;
      v_w = kBeta2 * v_w + (1 - kBeta2) * grad_w.cwiseProduct(grad_w);
      m_b = kBeta1 * m_b + (1 - kBeta1) * grad_b;
      v_b = kBeta2 * v_b + (1 - kBeta2) * grad_b.cwiseProduct(grad_b);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      weights.array() -= config.learning_rate * (m_w.array() / c1) /
                         ((v_w.array() / c2).sqrt() + kEps);
      bias.array() -= config.learning_rate * (m_b.array() / c1) /
                      ((v_b.array() / c2).sqrt() + kEps);
    }
    const double loss = observed > 0 ? sse / observed : 0.0;
    if (!std::isfinite(loss) || !weights.allFinite() || !bias.allFinite()) {
      throw Error(ErrorCode::kDivergence,
                  "training loss became non-finite in epoch " + std::to_string(epoch));
    }

    ScorerModel snapshot(encoder, weights, bias, ids, catalog_hash, catalog.version(), meta);
    const auto metric = validation_metric(snapshot, validation_set, catalog);
    meta.history.push_back({epoch, loss, metric});
    if (on_epoch) on_epoch(epoch, snapshot, metric);

    const bool improved =
        !best || (metric && (!best_metric || *metric > *best_metric));
    if (improved) {
      best.emplace(std::move(snapshot));
      best_metric = metric;
      meta.best_epoch = epoch;
    }
  }
  meta.best_validation_metric = best_metric;
  return ScorerModel(encoder, best->weights(), best->bias(), ids, catalog_hash, catalog.version(),
                     meta);
}

PerceptionProfile label_profile(const std::string& doc_id, const LabelVector& labels,
                                const StatementCatalog& catalog) {
  std::map<std::string, double> values;
  const auto& statements = catalog.statements();
  for (std::size_t i = 0; i < statements.size() && i < labels.values.size(); ++i) {
    if (labels.mask[i]) values[statements[i].id] = labels.values[i];
  }
  return profile_from_statement_values(doc_id, values, catalog, true);
}

EvaluationReport evaluate_profiles(const std::vector<PerceptionProfile>& predicted,
                                   const std::vector<PerceptionProfile>& reference) {
  std::map<std::string, const PerceptionProfile*> by_doc;
  for (const auto& p : predicted) by_doc[p.doc_id] = &p;
  std::size_t pairs = 0;
  DimensionMap<std::vector<double>> xs;
  DimensionMap<std::vector<double>> ys;
  for (const auto& ref : reference) {
    auto it = by_doc.find(ref.doc_id);
    if (it == by_doc.end()) continue;
    ++pairs;
    for (const auto& [dim, score] : ref.scores) {
      auto pit = it->second->scores.find(dim);
      if (pit == it->second->scores.end()) continue;
      xs[dim].push_back(pit->second);
      ys[dim].push_back(score);
    }
  }
  if (pairs < 3) {
    throw Error(ErrorCode::kTooFewDocuments,
                "evaluation needs at least 3 documents, got " + std::to_string(pairs));
  }
  EvaluationReport report;
  double sum = 0.0;
  int defined = 0;
  for (DimensionId dim : all_dimensions()) {
    const auto& x = xs[dim];
    report.n[dim] = x.size();
    const auto r = pearson(x, ys[dim]);
    report.pearson[dim] = r;
    if (r) {
      sum += *r;
      ++defined;
    }
  }
  if (defined > 0) report.overall = sum / defined;
  return report;
}

EvaluationReport evaluate(const ScorerModel& model, const std::vector<LabeledDocument>& test_set,
                          const StatementCatalog& catalog) {
  std::vector<PerceptionProfile> predicted;
  std::vector<PerceptionProfile> reference;
  predicted.reserve(test_set.size());
  reference.reserve(test_set.size());
  for (const auto& item : test_set) {
    predicted.push_back(predict(model, item.doc, catalog).profile);
    reference.push_back(label_profile(item.doc.doc_id, item.labels, catalog));
  }
  return evaluate_profiles(predicted, reference);
}

std::string evaluation_csv(const EvaluationReport& report) {
  std::string out = "dimension,pearson_r,n\n";
  for (DimensionId dim : all_dimensions()) {
    const auto r = report.pearson.count(dim) ? report.pearson.at(dim) : std::nullopt;
    const std::size_t n = report.n.count(dim) ? report.n.at(dim) : 0;
    out += std::string(dimension_name(dim)) + "," +
           (r ? format_double(*r) : std::string("NA")) + "," + std::to_string(n) + "\n";
  }
  out += "overall," + (report.overall ? format_double(*report.overall) : std::string("NA")) +
         ",\n";
  return out;
}

nlohmann::json evaluation_json(const EvaluationReport& report) {
  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [dim, r] : report.pearson) {
    dims[std::string(dimension_name(dim))] = {{"pearson_r", optional_json(r)},
                                              {"n", report.n.at(dim)}};
  }
  return {{"dimensions", dims}, {"overall", optional_json(report.overall)}};
}

nlohmann::json model_metadata_json(const ScorerModel& model) {
  const auto& meta = model.metadata();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : meta.history) {
    history.push_back({{"epoch", h.epoch},
                       {"train_loss", h.train_loss},
                       {"validation_metric", optional_json(h.validation_metric)}});
  }
  return {{"format_version", kFormatVersion},
          {"backend", model.encoder().config()},
          {"catalog_hash", model.catalog_hash()},
          {"catalog_version", model.catalog_version()},
          {"statement_ids", model.statement_ids()},
          {"config", meta.config},
          {"best_epoch", meta.best_epoch},
          {"best_validation_metric", optional_json(meta.best_validation_metric)},
          {"history", history},
          {"n_train", meta.n_train},
          {"n_validation", meta.n_validation},
          {"weights_sha256", model.weights_sha256()},
          {"model_version", model.version()}};
}

void save_model(const ScorerModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / kWeightsFile, model.weights_blob());
  write_text_file(dir / kMetadataFile, model_metadata_json(model).dump(2) + "\n");
}

ScorerModel load_model(const std::filesystem::path& dir, const StatementCatalog& catalog) {
  nlohmann::json meta_json;
  std::string blob;
  try {
    meta_json = nlohmann::json::parse(read_text_file(dir / kMetadataFile));
    blob = read_text_file(dir / kWeightsFile);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("unreadable model metadata: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("incomplete model artifact: ") + e.what());
  }

  try {
    if (meta_json.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kFormat, "unsupported model format version " +
                                          meta_json.at("format_version").dump());
    }
    if (meta_json.at("catalog_hash").get<std::string>() != catalog.hash()) {
      throw Error(ErrorCode::kCatalogMismatch,
                  "model catalog hash " + meta_json.at("catalog_hash").get<std::string>() +
                      " does not match catalog " + catalog.hash());
    }
    if (sha256_hex(blob) != meta_json.at("weights_sha256").get<std::string>()) {
      throw Error(ErrorCode::kFormat, "weights checksum mismatch");
    }
    const auto ids = meta_json.at("statement_ids").get<std::vector<std::string>>();
    if (ids != catalog.statement_ids()) {
      throw Error(ErrorCode::kCatalogMismatch, "model statement order differs from catalog");
    }
    auto encoder = make_encoder(meta_json.at("backend"));

    const std::size_t header = sizeof(kWeightsMagic) + 16;
    if (blob.size() < header || std::memcmp(blob.data(), kWeightsMagic, 8) != 0) {
      throw Error(ErrorCode::kFormat, "weights file has a bad header");
    }
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::memcpy(&rows, blob.data() + 8, 8);
    std::memcpy(&cols, blob.data() + 16, 8);
    if (rows != ids.size() || cols != encoder->width() ||
        blob.size() != header + sizeof(double) * rows * (cols + 1)) {
      throw Error(ErrorCode::kFormat, "weights file has unexpected dimensions");
    }
    const char* in = blob.data() + header;
    Eigen::VectorXd bias(static_cast<Eigen::Index>(rows));
    std::memcpy(bias.data(), in, sizeof(double) * rows);
    in += sizeof(double) * rows;
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) {
        std::memcpy(&weights(r, c), in, sizeof(double));
        in += sizeof(double);
      }
    }

    TrainingMetadata meta;
    meta.config = meta_json.at("config").get<TrainConfig>();
    meta.best_epoch = meta_json.at("best_epoch").get<int>();
    meta.best_validation_metric = optional_from(meta_json.at("best_validation_metric"));
    meta.n_train = meta_json.at("n_train").get<std::size_t>();
    meta.n_validation = meta_json.at("n_validation").get<std::size_t>();
    for (const auto& h : meta_json.at("history")) {
      meta.history.push_back({h.at("epoch").get<int>(), h.at("train_loss").get<double>(),
                              optional_from(h.at("validation_metric"))});
    }
    return ScorerModel(std::move(encoder), std::move(weights), std::move(bias), ids,
                       catalog.hash(), meta_json.value("catalog_version", catalog.version()),
                       std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed model metadata: ") + e.what());
  }
}

}  // namespace percept
