#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "percept/analysis.hpp"
#include "percept/catalog.hpp"
#include "percept/perceiver.hpp"

namespace httplib {
class Server;
}

namespace percept {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_text_bytes = 64 * 1024;
  std::size_t max_body_bytes = 8 * 1024 * 1024;
  std::size_t max_batch = 256;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

// HTTP front end over a loaded ScorerModel and optional engagement
// predictors. The model and predictors form one immutable snapshot that is
// replaced as a whole, so a request never sees a mix of two deployments.
class ScoringService {
 public:
  explicit ScoringService(ServiceConfig config = {},
                          StatementCatalog catalog = default_catalog());
  ~ScoringService();

  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  void set_model(std::shared_ptr<const ScorerModel> model,
                 std::vector<EngagementPredictor> predictors = {});
  // Loads <dir>/metadata.json + weights.bin and, when present,
  // <dir>/engagement.json (a JSON array of predictors).
  void load_model_dir(const std::filesystem::path& dir);
  bool model_loaded() const;

  // Routes a request without going through a socket.
  HttpReply handle(const std::string& method, const std::string& path,
                   const std::string& body) const;

  // Binds and serves in a background thread; returns the bound port (an
  // ephemeral one when config.port is 0).
  int start();
  // Binds and serves on the calling thread until stop().
  void listen();
  void stop();

 private:
  struct Snapshot {
    std::shared_ptr<const ScorerModel> model;
    std::vector<EngagementPredictor> predictors;
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  void install_routes();

  HttpReply health() const;
  HttpReply model_info() const;
  HttpReply score(const std::string& body) const;
  HttpReply score_batch(const std::string& body) const;
  HttpReply compare(const std::string& body) const;

  ServiceConfig config_;
  StatementCatalog catalog_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// {"error": {"code": ..., "message": ...}}
HttpReply error_reply(int status, const std::string& code, const std::string& message);

std::filesystem::path engagement_file(const std::filesystem::path& model_dir);

}  // namespace percept
