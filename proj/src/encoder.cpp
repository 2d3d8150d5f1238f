#include "percept/encoder.hpp"

#include <httplib.h>

#include <cctype>
#include <cmath>
#include <unordered_map>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

HashedNgramEncoder::HashedNgramEncoder(std::size_t width, int max_ngram)
    : width_(width), max_ngram_(max_ngram) {
  if (width_ == 0 || max_ngram_ < 1) {
    throw Error(ErrorCode::kInvalidParameter, "hashed encoder needs width > 0 and max_ngram >= 1");
  }
}

Eigen::VectorXd HashedNgramEncoder::encode(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::unordered_map<std::size_t, double> counts;
  for (int n = 1; n <= max_ngram_; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
      std::string gram = std::to_string(n) + ":";
      for (std::size_t k = 0; k < un; ++k) {
        if (k) gram.push_back(' ');
        gram += tokens[i + k];
      }
      const std::uint64_t h = fnv1a64(gram);
      const double sign = (h >> 63) ? -1.0 : 1.0;
      counts[static_cast<std::size_t>(h % width_)] += sign;
    }
  }
  Eigen::VectorXd features = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width_));
  for (const auto& [bucket, count] : counts) {
    features[static_cast<Eigen::Index>(bucket)] = std::copysign(std::log1p(std::abs(count)), count);
  }
  const double norm = features.norm();
  if (norm > 0.0) features /= norm;
  return features;
}

nlohmann::json HashedNgramEncoder::config() const {
  return {{"name", kName}, {"width", width_}, {"max_ngram", max_ngram_}};
}

RemoteEncoder::RemoteEncoder(std::string url, std::size_t width, std::string model_name,
                             int timeout_seconds)
    : url_(std::move(url)),
      width_(width),
      model_name_(std::move(model_name)),
      timeout_seconds_(timeout_seconds) {
  if (width_ == 0) throw Error(ErrorCode::kInvalidParameter, "remote encoder width must be > 0");
}

Eigen::VectorXd RemoteEncoder::encode(std::string_view text) const {
  // Split "scheme://host:port/path" into client base and request path.
  const auto scheme_end = url_.find("://");
  const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/embed" : url_.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  nlohmann::json request = {{"texts", {std::string(text)}}};
  if (!model_name_.empty()) request["model"] = model_name_;
  auto response = client.Post(path, request.dump(), "application/json");
  if (!response) {
    throw Error(ErrorCode::kIo, "encoder service unreachable at " + url_ + ": " +
                                    httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorCode::kIo,
                "encoder service returned HTTP " + std::to_string(response->status));
  }
  try {
    const auto body = nlohmann::json::parse(response->body);
    const auto& row = body.at("embeddings").at(0);
    if (row.size() != width_) {
      throw Error(ErrorCode::kFormat, "encoder returned width " + std::to_string(row.size()) +
                                          ", expected " + std::to_string(width_));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(width_));
    for (std::size_t i = 0; i < width_; ++i) out[static_cast<Eigen::Index>(i)] = row[i].get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed encoder response: ") + e.what());
  }
}

nlohmann::json RemoteEncoder::config() const {
  return {{"name", kName},
          {"url", url_},
          {"width", width_},
          {"model", model_name_},
          {"timeout_seconds", timeout_seconds_}};
}

std::shared_ptr<const TextEncoder> make_encoder(const nlohmann::json& config) {
  const std::string name = config.value("name", "");
  if (name == HashedNgramEncoder::kName) {
    return std::make_shared<HashedNgramEncoder>(config.value("width", std::size_t{4096}),
                                                config.value("max_ngram", 2));
  }
  if (name == RemoteEncoder::kName) {
    return std::make_shared<RemoteEncoder>(config.value("url", std::string()),
                                           config.value("width", std::size_t{0}),
                                           config.value("model", std::string()),
                                           config.value("timeout_seconds", 60));
  }
  throw Error(ErrorCode::kFormat, "unknown encoder backend '" + name + "'");
}

}  // namespace percept
