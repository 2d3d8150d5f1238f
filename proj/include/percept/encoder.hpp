#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

namespace percept {

// Text -> fixed-width real vector.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t width() const = 0;
  virtual Eigen::VectorXd encode(std::string_view text) const = 0;
  // Enough to rebuild an equivalent encoder with make_encoder().
  virtual nlohmann::json config() const = 0;
};

// Light path: signed feature hashing of lowercased word n-grams with
// log-scaled counts, L2-normalized. Fully deterministic.
class HashedNgramEncoder final : public TextEncoder {
 public:
  static constexpr const char* kName = "hashed-ngram";

  explicit HashedNgramEncoder(std::size_t width = 4096, int max_ngram = 2);

  std::string name() const override { return kName; }
  std::size_t width() const override { return width_; }
  Eigen::VectorXd encode(std::string_view text) const override;
  nlohmann::json config() const override;

 private:
  std::size_t width_;
  int max_ngram_;
};

// Heavy path: a pretrained contextual encoder served over HTTP. POSTs
// {"texts": [...]} to `url` and expects {"embeddings": [[...]]} back
// (see tools/embed_server.py).
class RemoteEncoder final : public TextEncoder {
 public:
  static constexpr const char* kName = "remote";

  RemoteEncoder(std::string url, std::size_t width, std::string model_name = "",
                int timeout_seconds = 60);

  std::string name() const override { return kName; }
  std::size_t width() const override { return width_; }
  Eigen::VectorXd encode(std::string_view text) const override;
  nlohmann::json config() const override;

 private:
  std::string url_;
  std::size_t width_;
  std::string model_name_;
  int timeout_seconds_;
};

// Throws kFormat for an unknown encoder name.
std::shared_ptr<const TextEncoder> make_encoder(const nlohmann::json& config);

// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace percept
