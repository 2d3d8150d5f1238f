#include "percept/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include "percept/aggregate.hpp"
#include "percept/error.hpp"
#include "percept/jsonl.hpp"
#include "percept/reliability.hpp"
#include "percept/util.hpp"

namespace percept {

namespace fs = std::filesystem;

nlohmann::json run_config_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"paths", c.paths},
          {"sample", c.sample},
          {"train", c.train},
          {"backend", c.backend},
          {"light_encoder", c.light_encoder},
          {"heavy_encoder", c.heavy_encoder},
          {"simulate",
           {{"participants", c.simulate.participants},
            {"labels_per_doc", c.simulate.labels_per_doc},
            {"noise_sd", c.simulate.noise_sd},
            {"annotator_bias_sd", c.simulate.annotator_bias_sd},
            {"frequency_effect", c.simulate.frequency_effect},
            {"trust_effect", c.simulate.trust_effect}}},
          {"study", {{"vif_threshold", c.vif_threshold}}},
          {"pool",
           {{"papers_per_setting", c.pool.papers_per_setting},
            {"other_papers", c.pool.other_papers},
            {"popular_fraction", c.pool.popular_fraction},
            {"latent_sd", c.pool.latent_sd},
            {"article_sd", c.pool.article_sd}}},
          {"engagement",
           {{"urls", c.engagement.urls},
            {"posts_per_url", c.engagement.posts_per_url},
            {"framing_sd", c.engagement.framing_sd},
            {"noise_sd", c.engagement.noise_sd}}},
          {"service",
           {{"host", c.service.host},
            {"port", c.service.port},
            {"max_text_bytes", c.service.max_text_bytes},
            {"max_batch", c.service.max_batch}}}};
}

RunConfig run_config_from_json(const nlohmann::json& input) {
  if (!input.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  const nlohmann::json& j =
      input.contains("subcommand") && input.contains("config") ? input.at("config") : input;
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.paths = j.value("paths", c.paths);
    if (j.contains("sample")) c.sample = j.at("sample").get<SampleConfig>();
    if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
    c.backend = j.value("backend", c.backend);
    c.light_encoder = j.value("light_encoder", c.light_encoder);
    c.heavy_encoder = j.value("heavy_encoder", c.heavy_encoder);
    const auto sim = j.value("simulate", nlohmann::json::object());
    c.simulate.participants = sim.value("participants", c.simulate.participants);
    c.simulate.labels_per_doc = sim.value("labels_per_doc", c.simulate.labels_per_doc);
    c.simulate.noise_sd = sim.value("noise_sd", c.simulate.noise_sd);
    c.simulate.annotator_bias_sd = sim.value("annotator_bias_sd", c.simulate.annotator_bias_sd);
    c.simulate.frequency_effect = sim.value("frequency_effect", c.simulate.frequency_effect);
    c.simulate.trust_effect = sim.value("trust_effect", c.simulate.trust_effect);
    c.vif_threshold = j.value("study", nlohmann::json::object()).value("vif_threshold", c.vif_threshold);
    const auto pool = j.value("pool", nlohmann::json::object());
    c.pool.papers_per_setting = pool.value("papers_per_setting", c.pool.papers_per_setting);
    c.pool.other_papers = pool.value("other_papers", c.pool.other_papers);
    c.pool.popular_fraction = pool.value("popular_fraction", c.pool.popular_fraction);
    c.pool.latent_sd = pool.value("latent_sd", c.pool.latent_sd);
    c.pool.article_sd = pool.value("article_sd", c.pool.article_sd);
    const auto eng = j.value("engagement", nlohmann::json::object());
    c.engagement.urls = eng.value("urls", c.engagement.urls);
    c.engagement.posts_per_url = eng.value("posts_per_url", c.engagement.posts_per_url);
    c.engagement.framing_sd = eng.value("framing_sd", c.engagement.framing_sd);
    c.engagement.noise_sd = eng.value("noise_sd", c.engagement.noise_sd);
    const auto svc = j.value("service", nlohmann::json::object());
    c.service.host = svc.value("host", c.service.host);
    c.service.port = svc.value("port", c.service.port);
    c.service.max_text_bytes = svc.value("max_text_bytes", c.service.max_text_bytes);
    c.service.max_batch = svc.value("max_batch", c.service.max_batch);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad config: ") + e.what());
  }
  return c;
}

namespace {

// Collects hashed inputs and outputs of one subcommand and writes the manifest.
class Run {
 public:
  Run(std::string subcommand, fs::path dir) : subcommand_(std::move(subcommand)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }

  void write(const std::string& rel, std::string_view content) {
    write_text_file(dir_ / rel, content);
    outputs_[rel] = sha256_hex(content);
  }

  void record(const std::string& rel) { outputs_[rel] = sha256_file(dir_ / rel); }

  void finish(const RunConfig& config) const {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& [path, digest] : outputs_) outputs.push_back({{"path", path}, {"sha256", digest}});
    const nlohmann::json manifest = {{"subcommand", subcommand_},
                                     {"version", kPerceptVersion},
                                     {"seed", config.seed},
                                     {"config", run_config_json(config)},
                                     {"inputs", inputs_},
                                     {"outputs", outputs}};
    write_text_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  fs::path dir_;
  nlohmann::json inputs_ = nlohmann::json::array();
  std::map<std::string, std::string> outputs_;
};

fs::path fresh_run_dir(const std::string& subcommand) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
  fs::path dir = fs::path("runs") / (subcommand + "-" + stamp);
  for (int k = 2; fs::exists(dir); ++k) {
    dir = fs::path("runs") / (subcommand + "-" + stamp + "-" + std::to_string(k));
  }
  return dir;
}

std::string require_path(const RunConfig& config, const std::string& key) {
  auto it = config.paths.find(key);
  if (it == config.paths.end() || it->second.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "missing --" + key + " (or paths." + key + " in the config file)");
  }
  if (!fs::exists(it->second)) throw Error(ErrorCode::kIo, key + " path does not exist: " + it->second);
  return it->second;
}

template <typename T>
std::vector<T> load_input(Run& run, const RunConfig& config, const std::string& key) {
  const std::string path = require_path(config, key);
  run.input(key, path);
  return load_jsonl<T>(path);
}

std::shared_ptr<const TextEncoder> encoder_for(const RunConfig& config) {
  if (config.backend == "light") return make_encoder(config.light_encoder);
  if (config.backend == "heavy") return make_encoder(config.heavy_encoder);
  throw Error(ErrorCode::kInvalidConfig, "unknown backend '" + config.backend + "'");
}

ScorerModel load_model_input(Run& run, const RunConfig& config) {
  const std::string dir = require_path(config, "model");
  run.input("model", (fs::path(dir) / "metadata.json").string());
  run.input("model", (fs::path(dir) / "weights.bin").string());
  return load_model(dir, default_catalog());
}

std::string prefixed(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "/" + name;
}

// Stage bodies shared by the single subcommands and the pipeline.

std::vector<NewsDocument> stage_clean(Run& run, const std::string& prefix,
                                      const std::vector<RawArticle>& raw) {
  std::vector<NewsDocument> docs;
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& article : raw) {
    try {
      docs.push_back(clean_document(article));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyContent) throw;
      dropped.push_back({{"doc_id", article.doc_id}, {"reason", e.what()}});
    }
  }
  run.write(prefixed(prefix, "cleaned.jsonl"), dump_jsonl(docs));
  run.write(prefixed(prefix, "clean_report.json"),
            nlohmann::json{{"kept", docs.size()}, {"dropped", dropped}}.dump(2) + "\n");
  return docs;
}

std::vector<NewsDocument> stage_sample(Run& run, const std::string& prefix,
                                       const std::vector<NewsDocument>& pool, SampleConfig sample,
                                       std::uint64_t seed) {
  sample.seed = seed;
  const SampleResult result = sample_batch(pool, sample);
  for (const auto& w : result.warnings) std::cerr << "percept: warning: " << w << "\n";
  run.write(prefixed(prefix, "sampled.jsonl"), dump_jsonl(result.docs));
  run.write(prefixed(prefix, "sample_report.json"),
            nlohmann::json{{"n_documents", result.docs.size()},
                           {"step_counts", result.step_counts},
                           {"warnings", result.warnings}}
                    .dump(2) +
                "\n");
  return result.docs;
}

SimulatedAnnotations stage_simulate(Run& run, const std::string& prefix,
                                    const std::vector<NewsDocument>& docs, const RunConfig& config,
                                    std::uint64_t seed) {
  GeneratorParams params;
  params.latent_means = latent_means_from(docs);
  params.noise_sd = config.simulate.noise_sd;
  params.annotator_bias_sd = config.simulate.annotator_bias_sd;
  params.frequency_effect = config.simulate.frequency_effect;
  params.trust_effect = config.simulate.trust_effect;
  auto sim = simulate_annotations(docs, config.simulate.participants,
                                  config.simulate.labels_per_doc, params, seed);
  run.write(prefixed(prefix, "annotations.jsonl"), dump_jsonl(sim.records));
  run.write(prefixed(prefix, "participants.jsonl"), dump_jsonl(sim.participants));
  return sim;
}

void stage_aggregate(Run& run, const std::string& prefix,
                     const std::vector<AnnotationRecord>& records) {
  const auto& catalog = default_catalog();
  const auto profiles = article_profiles(records, catalog);
  run.write(prefixed(prefix, "profiles.jsonl"), dump_jsonl(profiles));
  nlohmann::json agreement = nlohmann::json::object();
  for (DimensionId dim : all_dimensions()) {
    const std::string name(dimension_name(dim));
    const RankScoreTable table = rank_scores(records, catalog, dim);
    run.write(prefixed(prefix, "ranks/" + name + ".csv"), rank_table_csv(table));
    try {
      agreement[name] = rating_rank_agreement(profiles, {table}).at(dim);
    } catch (const Error& e) {
      agreement[name] = nullptr;
      std::cerr << "percept: warning: " << e.what() << "\n";
    }
  }
  run.write(prefixed(prefix, "rating_rank_agreement.json"), agreement.dump(2) + "\n");
}

void stage_reliability(Run& run, const std::string& prefix,
                       const std::vector<AnnotationRecord>& records) {
  const auto report = reliability_report(records, default_catalog());
  run.write(prefixed(prefix, "reliability.csv"), reliability_csv(report));
  run.write(prefixed(prefix, "reliability.json"), reliability_json(report).dump(2) + "\n");
}

DatasetSplit stage_split(Run& run, const std::string& prefix, const std::vector<NewsDocument>& docs,
                         const std::vector<AnnotationRecord>& records, const RunConfig& config,
                         std::uint64_t seed) {
  std::vector<std::string> warnings;
  const auto labels = build_labels(records, default_catalog(), &warnings);
  for (const auto& w : warnings) std::cerr << "percept: warning: " << w << "\n";
  const auto split = split_dataset(join_labels(docs, labels), config.train.split_ratios, seed);
  auto docs_of = [](const std::vector<LabeledDocument>& items) {
    std::vector<NewsDocument> out;
    for (const auto& item : items) out.push_back(item.doc);
    return out;
  };
  run.write(prefixed(prefix, "train.jsonl"), dump_jsonl(docs_of(split.train)));
  run.write(prefixed(prefix, "validation.jsonl"), dump_jsonl(docs_of(split.validation)));
  run.write(prefixed(prefix, "test.jsonl"), dump_jsonl(docs_of(split.test)));
  run.write(prefixed(prefix, "split_report.json"),
            nlohmann::json{{"train", split.train.size()},
                           {"validation", split.validation.size()},
                           {"test", split.test.size()},
                           {"warnings", warnings}}
                    .dump(2) +
                "\n");
  return split;
}

ScorerModel stage_train(Run& run, const std::string& prefix, const DatasetSplit& split,
                        const RunConfig& config, std::uint64_t seed) {
  TrainConfig train_config = config.train;
  train_config.seed = seed;
  ScorerModel model = train(split.train, split.validation, train_config, encoder_for(config),
                            default_catalog());
  const std::string dir = prefixed(prefix, "model");
  save_model(model, run.dir() / dir);
  run.record(dir + "/metadata.json");
  run.record(dir + "/weights.bin");
  return model;
}

void stage_evaluate(Run& run, const std::string& prefix, const ScorerModel& model,
                    const std::vector<LabeledDocument>& test) {
  const auto report = evaluate(model, test, default_catalog());
  run.write(prefixed(prefix, "evaluation.csv"), evaluation_csv(report));
  run.write(prefixed(prefix, "evaluation.json"), evaluation_json(report).dump(2) + "\n");
}

void stage_perception_study(Run& run, const std::string& prefix,
                            const std::vector<AnnotationRecord>& records,
                            const std::vector<ParticipantProfile>& participants,
                            const std::vector<NewsDocument>& docs) {
  nlohmann::json all = nlohmann::json::array();
  for (DimensionId dim : all_dimensions()) {
    const auto study = perception_outcome_study(records, participants, docs, dim);
    run.write(prefixed(prefix, "perception/" + std::string(dimension_name(dim)) + ".csv"),
              regression_csv(study.model));
    all.push_back(perception_study_json(study));
  }
  run.write(prefixed(prefix, "perception_study.json"), all.dump(2) + "\n");
}

std::vector<EngagementPredictor> stage_engagement_study(Run& run, const std::string& prefix,
                                                        const EngagementDataset& dataset,
                                                        const RunConfig& config) {
  const auto study = engagement_study(dataset, config.vif_threshold);
  std::vector<EngagementPredictor> predictors;
  for (const auto& [outcome, fit] : study.outcomes) {
    run.write(prefixed(prefix, "engagement/" + outcome + ".csv"), regression_csv(fit.model));
    predictors.push_back(fit_engagement_predictor(study, outcome));
  }
  nlohmann::json summary = engagement_study_json(study);
  summary["dataset"] = dataset.metadata;
  run.write(prefixed(prefix, "engagement_study.json"), summary.dump(2) + "\n");
  run.write(prefixed(prefix, "engagement.json"), nlohmann::json(predictors).dump(2) + "\n");
  return predictors;
}

std::vector<LabeledDocument> labeled(const std::vector<NewsDocument>& docs,
                                     const std::vector<AnnotationRecord>& records) {
  return join_labels(docs, build_labels(records, default_catalog()));
}

nlohmann::json score_line(const Prediction& p) {
  nlohmann::json profile = nlohmann::json::object();
  for (const auto& [dim, score] : p.profile.scores) profile[std::string(dimension_name(dim))] = score;
  return {{"doc_id", p.statements.doc_id},
          {"statement_scores", p.statements.scores},
          {"profile", profile}};
}

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::optional<std::string> backend;
  std::optional<int> port;
  std::optional<int> epochs;
  std::optional<double> vif_threshold;
  std::map<std::string, std::string> paths;
  std::string text;
  bool synthetic = false;
};

RunConfig effective_config(const Flags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) {
    try {
      config = run_config_from_json(nlohmann::json::parse(read_text_file(flags.config_path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, "cannot parse " + flags.config_path + ": " + e.what());
    }
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.backend) config.backend = *flags.backend;
  if (flags.port) config.service.port = *flags.port;
  if (flags.epochs) config.train.epochs = *flags.epochs;
  if (flags.vif_threshold) config.vif_threshold = *flags.vif_threshold;
  for (const auto& [key, value] : flags.paths) {
    if (!value.empty()) config.paths[key] = value;
  }
  config.sample.validate();
  config.train.validate();
  return config;
}

// Per-stage seeds derived from the run seed.
std::uint64_t stage_seed(const RunConfig& config, std::uint64_t stage) {
  return config.seed * 1000003ULL + stage;
}

enum Stage : std::uint64_t { kSampleSeed = 1, kSimulateSeed, kSplitSeed, kTrainSeed, kPoolSeed, kPostsSeed };

void run_pipeline(Run& run, const RunConfig& config, bool synthetic) {
  if (!synthetic) {
    throw Error(ErrorCode::kInvalidConfig, "pipeline runs on generated data; pass --synthetic");
  }
  const SyntheticPool pool = synthetic_pool(config.pool, stage_seed(config, kPoolSeed));
  run.write("corpus/raw.jsonl", dump_jsonl(pool.articles));
  const auto cleaned = stage_clean(run, "corpus", pool.articles);
  const auto sampled = stage_sample(run, "sample", cleaned, config.sample, stage_seed(config, kSampleSeed));
  const auto sim = stage_simulate(run, "annotations", sampled, config, stage_seed(config, kSimulateSeed));
  stage_aggregate(run, "aggregate", sim.records);
  stage_reliability(run, "reliability", sim.records);
  const auto split = stage_split(run, "split", sampled, sim.records, config, stage_seed(config, kSplitSeed));
  const ScorerModel model = stage_train(run, "", split, config, stage_seed(config, kTrainSeed));
  stage_evaluate(run, "evaluation", model, split.test);
  stage_perception_study(run, "study-perception", sim.records, sim.participants, sampled);

  EngagementDataset dataset = simulate_engagement_dataset(config.engagement, stage_seed(config, kPostsSeed));
  std::vector<SocialPost> posts;
  for (const auto& row : dataset.rows) posts.push_back(row.post);
  run.write("posts/posts.jsonl", dump_jsonl(posts));
  attach_perceptions(dataset, model, default_catalog());
  const auto predictors = stage_engagement_study(run, "study-engagement", dataset, config);
  run.write("model/engagement.json", nlohmann::json(predictors).dump(2) + "\n");
}

void dispatch(const std::string& sub, const Flags& flags) {
  const RunConfig config = effective_config(flags);

  if (sub == "serve") {
    ScoringService service(config.service);
    std::string model_dir = config.paths.count("model") ? config.paths.at("model") : "";
    if (model_dir.empty()) {
      if (const char* env = std::getenv("PERCEPT_MODEL_DIR")) model_dir = env;
    }
    auto engagement = config.paths.find("engagement");
    if (!model_dir.empty() && engagement != config.paths.end()) {
      auto model = std::make_shared<const ScorerModel>(load_model(model_dir, default_catalog()));
      service.set_model(model, nlohmann::json::parse(read_text_file(engagement->second))
                                   .get<std::vector<EngagementPredictor>>());
    } else if (!model_dir.empty()) {
      service.load_model_dir(model_dir);
    }
    std::cerr << "percept: serving on " << config.service.host << ":" << config.service.port
              << (service.model_loaded() ? "" : " (no model loaded)") << "\n";
    service.listen();
    return;
  }

  Run run(sub, flags.output.empty() ? fresh_run_dir(sub) : fs::path(flags.output));
  const auto& catalog = default_catalog();
  if (sub == "clean") {
    stage_clean(run, "", load_input<RawArticle>(run, config, "corpus"));
  } else if (sub == "sample") {
    stage_sample(run, "", load_input<NewsDocument>(run, config, "corpus"), config.sample,
                 stage_seed(config, kSampleSeed));
  } else if (sub == "simulate") {
    stage_simulate(run, "", load_input<NewsDocument>(run, config, "docs"), config,
                   stage_seed(config, kSimulateSeed));
  } else if (sub == "aggregate") {
    stage_aggregate(run, "", load_input<AnnotationRecord>(run, config, "annotations"));
  } else if (sub == "reliability") {
    stage_reliability(run, "", load_input<AnnotationRecord>(run, config, "annotations"));
  } else if (sub == "split") {
    const auto docs = load_input<NewsDocument>(run, config, "docs");
    stage_split(run, "", docs, load_input<AnnotationRecord>(run, config, "annotations"), config,
                stage_seed(config, kSplitSeed));
  } else if (sub == "train") {
    const auto records = load_input<AnnotationRecord>(run, config, "annotations");
    DatasetSplit split;
    split.train = labeled(load_input<NewsDocument>(run, config, "train"), records);
    split.validation = labeled(load_input<NewsDocument>(run, config, "validation"), records);
    stage_train(run, "", split, config, stage_seed(config, kTrainSeed));
  } else if (sub == "evaluate") {
    const ScorerModel model = load_model_input(run, config);
    const auto records = load_input<AnnotationRecord>(run, config, "annotations");
    stage_evaluate(run, "", model, labeled(load_input<NewsDocument>(run, config, "test"), records));
  } else if (sub == "score") {
    const ScorerModel model = load_model_input(run, config);
    std::vector<NewsDocument> docs;
    if (!flags.text.empty()) {
      NewsDocument doc;
      doc.doc_id = "text";
      doc.body = flags.text;
      docs.push_back(doc);
    } else {
      docs = load_input<NewsDocument>(run, config, "docs");
    }
    std::string out;
    for (const auto& doc : docs) out += score_line(predict(model, doc, catalog)).dump() + "\n";
    run.write("scores.jsonl", out);
  } else if (sub == "study-perception") {
    const auto records = load_input<AnnotationRecord>(run, config, "annotations");
    const auto participants = load_input<ParticipantProfile>(run, config, "participants");
    stage_perception_study(run, "", records, participants,
                           load_input<NewsDocument>(run, config, "docs"));
  } else if (sub == "study-engagement") {
    EngagementDataset dataset;
    if (flags.synthetic) {
      dataset = simulate_engagement_dataset(config.engagement, stage_seed(config, kPostsSeed));
    } else {
      dataset = build_url_groups(load_input<SocialPost>(run, config, "posts"));
      attach_perceptions(dataset, load_model_input(run, config), catalog);
    }
    stage_engagement_study(run, "", dataset, config);
  } else if (sub == "pipeline") {
    run_pipeline(run, config, flags.synthetic);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown subcommand '" + sub + "'");
  }
  run.finish(config);
  std::cout << run.dir().string() << "\n";
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Perception scoring toolkit for science news"};
  app.name("percept");
  app.require_subcommand(1);
  app.set_version_flag("--version", kPerceptVersion);

  Flags flags;
  const std::map<std::string, std::pair<std::string, std::vector<std::string>>> commands = {
      {"clean", {"Strip outlet, author, date, city and URLs from raw articles", {"corpus"}}},
      {"sample", {"Draw the annotation batch from a cleaned pool", {"corpus"}}},
      {"simulate", {"Generate synthetic annotations and participants", {"docs"}}},
      {"aggregate", {"Perception profiles and rank scores", {"annotations"}}},
      {"reliability", {"Krippendorff and Cronbach reliability report", {"annotations"}}},
      {"split", {"Train/validation/test split of labeled documents", {"docs", "annotations"}}},
      {"train", {"Train the statement scorer", {"train", "validation", "annotations"}}},
      {"evaluate", {"Per-dimension Pearson r on a test split", {"model", "test", "annotations"}}},
      {"score", {"Score documents or a single text", {"model", "docs"}}},
      {"study-perception",
       {"Background factors vs perception ratings", {"annotations", "participants", "docs"}}},
      {"study-engagement", {"Perceptions vs post engagement", {"posts", "model"}}},
      {"serve", {"Run the HTTP scoring service", {"model", "engagement"}}},
      {"pipeline", {"End-to-end run on generated data", {}}},
  };
  for (const auto& [name, spec] : commands) {
    CLI::App* sub = app.add_subcommand(name, spec.first);
    sub->add_option("--config", flags.config_path, "JSON config file or a previous run manifest")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Random seed");
    if (name != "serve") sub->add_option("--output", flags.output, "Output directory");
    for (const auto& key : spec.second) {
      sub->add_option("--" + key, flags.paths[key], key + " path");
    }
    if (name == "train" || name == "pipeline") {
      sub->add_option("--backend", flags.backend, "Encoder backend")
          ->check(CLI::IsMember({"light", "heavy"}));
      sub->add_option("--epochs", flags.epochs, "Training epochs");
    }
    if (name == "study-engagement" || name == "pipeline") {
      sub->add_option("--vif-threshold", flags.vif_threshold, "Stepwise VIF threshold");
      sub->add_flag("--synthetic", flags.synthetic, "Use generated data");
    }
    if (name == "score") sub->add_option("--text", flags.text, "Score this text instead of --docs");
    if (name == "serve") sub->add_option("--port", flags.port, "Listen port");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    dispatch(sub, flags);
  } catch (const Error& e) {
    std::cerr << "percept " << sub << ": " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "percept " << sub << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace percept
