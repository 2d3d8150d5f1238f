#include "percept/service.hpp"

#include <httplib.h>

#include <set>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {

namespace {

struct BadRequest {
  HttpReply reply;
};

nlohmann::json parse_body(const std::string& body) {
  try {
    auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw BadRequest{error_reply(400, "invalid_request", "body must be a JSON object")};
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw BadRequest{error_reply(400, "invalid_json", e.what())};
  }
}

std::string string_field(const nlohmann::json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw BadRequest{error_reply(400, "invalid_request", std::string("missing '") + key + "'")};
    return "";
  }
  if (!j.at(key).is_string()) {
    throw BadRequest{error_reply(400, "invalid_request", std::string("'") + key + "' must be a string")};
  }
  return j.at(key).get<std::string>();
}

nlohmann::json profile_json(const PerceptionProfile& profile) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [dim, score] : profile.scores) out[std::string(dimension_name(dim))] = score;
  return out;
}

}  // namespace

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

std::filesystem::path engagement_file(const std::filesystem::path& model_dir) {
  return model_dir / "engagement.json";
}

ScoringService::ScoringService(ServiceConfig config, StatementCatalog catalog)
    : config_(std::move(config)), catalog_(std::move(catalog)) {}

ScoringService::~ScoringService() { stop(); }

void ScoringService::set_model(std::shared_ptr<const ScorerModel> model,
                               std::vector<EngagementPredictor> predictors) {
  auto next = std::make_shared<const Snapshot>(Snapshot{std::move(model), std::move(predictors)});
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(next);
}

void ScoringService::load_model_dir(const std::filesystem::path& dir) {
  auto model = std::make_shared<const ScorerModel>(load_model(dir, catalog_));
  std::vector<EngagementPredictor> predictors;
  const auto path = engagement_file(dir);
  if (std::filesystem::exists(path)) {
    try {
      predictors = nlohmann::json::parse(read_text_file(path)).get<std::vector<EngagementPredictor>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, "bad engagement predictor file: " + std::string(e.what()));
    }
  }
  set_model(std::move(model), std::move(predictors));
}

std::shared_ptr<const ScoringService::Snapshot> ScoringService::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

bool ScoringService::model_loaded() const {
  auto snap = snapshot();
  return snap && snap->model;
}

HttpReply ScoringService::handle(const std::string& method, const std::string& path,
                                 const std::string& body) const {
  try {
    if (method == "GET" && path == "/v1/health") return health();
    if (method == "GET" && path == "/v1/model") return model_info();
    if (method == "POST" && path == "/v1/score") return score(body);
    if (method == "POST" && path == "/v1/score/batch") return score_batch(body);
    if (method == "POST" && path == "/v1/compare") return compare(body);
    return error_reply(404, "not_found", method + " " + path);
  } catch (const BadRequest& bad) {
    return bad.reply;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyText) return error_reply(400, "empty_text", e.what());
    return error_reply(500, std::string(error_code_name(e.code())), e.what());
  }
}

HttpReply ScoringService::health() const {
  auto snap = snapshot();
  const bool loaded = snap && snap->model;
  return {200,
          {{"status", "ok"},
           {"model_loaded", loaded},
           {"engagement_loaded", loaded && !snap->predictors.empty()}}};
}

HttpReply ScoringService::model_info() const {
  auto snap = snapshot();
  if (!snap || !snap->model) return error_reply(503, "model_not_loaded", "no model is loaded");
  nlohmann::json body = model_metadata_json(*snap->model);
  body["engagement_predictors"] = snap->predictors;
  return {200, body};
}

namespace {

struct ScoreInput {
  std::string title;
  std::string text;
};

void check_text(const ScoreInput& input, std::size_t max_bytes) {
  if (trim(input.text).empty()) throw BadRequest{error_reply(400, "empty_text", "text is empty")};
  if (input.text.size() + input.title.size() > max_bytes) {
    throw BadRequest{error_reply(413, "payload_too_large",
                                 "text exceeds " + std::to_string(max_bytes) + " bytes")};
  }
}

Prediction run_predict(const ScorerModel& model, const StatementCatalog& catalog,
                       const ScoreInput& input) {
  NewsDocument doc;
  doc.title = input.title;
  doc.body = input.text;
  return predict(model, doc, catalog);
}

nlohmann::json score_json(const Prediction& p, const ScorerModel& model,
                          const StatementCatalog& catalog) {
  return {{"statement_scores", p.statements.scores},
          {"profile", profile_json(p.profile)},
          {"model_version", model.version()},
          {"catalog_version", catalog.version()}};
}

}  // namespace

HttpReply ScoringService::score(const std::string& body) const {
  auto snap = snapshot();
  const auto request = parse_body(body);
  ScoreInput input{string_field(request, "title", false), string_field(request, "text", true)};
  check_text(input, config_.max_text_bytes);
  if (!snap || !snap->model) return error_reply(503, "model_not_loaded", "no model is loaded");
  return {200, score_json(run_predict(*snap->model, catalog_, input), *snap->model, catalog_)};
}

HttpReply ScoringService::score_batch(const std::string& body) const {
  auto snap = snapshot();
  const auto request = parse_body(body);
  if (!request.contains("texts") || !request.at("texts").is_array()) {
    return error_reply(400, "invalid_request", "'texts' must be an array of strings");
  }
  const auto& texts = request.at("texts");
  if (texts.empty()) return error_reply(400, "invalid_request", "'texts' is empty");
  if (texts.size() > config_.max_batch) {
    return error_reply(413, "payload_too_large",
                       "batch exceeds " + std::to_string(config_.max_batch) + " texts");
  }
  std::vector<ScoreInput> inputs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (!texts[i].is_string()) {
      return error_reply(400, "invalid_request", "texts[" + std::to_string(i) + "] is not a string");
    }
    inputs.push_back({"", texts[i].get<std::string>()});
    try {
      check_text(inputs.back(), config_.max_text_bytes);
    } catch (BadRequest& bad) {
      bad.reply.body["error"]["message"] =
          "texts[" + std::to_string(i) + "]: " + bad.reply.body["error"]["message"].get<std::string>();
      throw;
    }
  }
  if (!snap || !snap->model) return error_reply(503, "model_not_loaded", "no model is loaded");
  nlohmann::json results = nlohmann::json::array();
  for (const auto& input : inputs) {
    results.push_back(score_json(run_predict(*snap->model, catalog_, input), *snap->model, catalog_));
  }
  return {200, {{"results", results}}};
}

HttpReply ScoringService::compare(const std::string& body) const {
  auto snap = snapshot();
  const auto request = parse_body(body);
  if (!request.contains("variants") || !request.at("variants").is_array()) {
    return error_reply(400, "invalid_request", "'variants' must be an array");
  }
  const auto& variants = request.at("variants");
  if (variants.size() < 2) return error_reply(400, "too_few_variants", "compare needs at least 2 variants");
  std::vector<std::string> labels;
  std::vector<ScoreInput> inputs;
  std::set<std::string> seen;
  for (const auto& v : variants) {
    if (!v.is_object()) return error_reply(400, "invalid_request", "variant is not an object");
    labels.push_back(string_field(v, "label", true));
    if (!seen.insert(labels.back()).second) {
      return error_reply(400, "duplicate_label", "duplicate variant label '" + labels.back() + "'");
    }
    inputs.push_back({string_field(v, "title", false), string_field(v, "text", true)});
    check_text(inputs.back(), config_.max_text_bytes);
  }
  if (!snap || !snap->model) return error_reply(503, "model_not_loaded", "no model is loaded");
  if (snap->predictors.empty()) {
    return error_reply(503, "predictor_not_loaded", "no engagement predictor is loaded");
  }

  std::vector<Prediction> predictions;
  std::vector<std::vector<EngagementPrediction>> engagement;
  nlohmann::json out_variants = nlohmann::json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    predictions.push_back(run_predict(*snap->model, catalog_, inputs[i]));
    auto& eng = engagement.emplace_back();
    nlohmann::json eng_json = nlohmann::json::object();
    for (const auto& predictor : snap->predictors) {
      eng.push_back(predict_engagement(predictor, predictions.back().profile));
      eng_json[predictor.outcome] = {{"estimate", eng.back().estimate},
                                     {"lower", eng.back().lower},
                                     {"upper", eng.back().upper}};
    }
    out_variants.push_back({{"label", labels[i]},
                            {"profile", profile_json(predictions.back().profile)},
                            {"statement_scores", predictions.back().statements.scores},
                            {"engagement", eng_json}});
  }

  nlohmann::json deltas = nlohmann::json::array();
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [dim, score] : predictions[i].profile.scores) {
      dims[std::string(dimension_name(dim))] = score - predictions[0].profile.scores.at(dim);
    }
    nlohmann::json eng = nlohmann::json::object();
    for (std::size_t k = 0; k < engagement[i].size(); ++k) {
      const double delta = engagement[i][k].estimate - engagement[0][k].estimate;
      eng[engagement[i][k].outcome] = {{"delta", delta}, {"percent_change", percent_change(delta)}};
    }
    deltas.push_back({{"label", labels[i]},
                      {"baseline", labels[0]},
                      {"profile", dims},
                      {"engagement", eng}});
  }
  return {200,
          {{"variants", out_variants},
           {"deltas", deltas},
           {"model_version", snap->model->version()},
           {"catalog_version", catalog_.version()}}};
}

void ScoringService::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(config_.max_body_bytes);
  auto bind = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle(method, req.path, req.body);
      res.status = reply.status;
      res.set_content(reply.body.dump(), "application/json");
    };
  };
  for (const char* path : {"/v1/health", "/v1/model"}) server_->Get(path, bind("GET"));
  for (const char* path : {"/v1/score", "/v1/score/batch", "/v1/compare"}) {
    server_->Post(path, bind("POST"));
  }
  server_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 413 ? "payload_too_large"
                             : res.status == 404 ? "not_found"
                                                 : "http_" + std::to_string(res.status);
    res.set_content(error_reply(res.status, code, req.method + " " + req.path).body.dump(),
                    "application/json");
  });
}

int ScoringService::start() {
  install_routes();
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ScoringService::listen() {
  install_routes();
  if (!server_->listen(config_.host, config_.port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

void ScoringService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace percept
