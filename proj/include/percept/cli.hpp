#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "percept/analysis.hpp"
#include "percept/corpus.hpp"
#include "percept/perceiver.hpp"
#include "percept/service.hpp"
#include "percept/synthetic.hpp"

namespace percept {

inline constexpr const char* kPerceptVersion = "0.1.0";

struct SimulateSettings {
  int participants = 400;
  int labels_per_doc = 2;  // per country
  double noise_sd = 0.8;
  double annotator_bias_sd = 0.3;
  double frequency_effect = 0.47;
  double trust_effect = 0.1;
};

// Everything a subcommand reads besides its flags. The top-level seed feeds
// every stage (sampling, simulation, splitting, training, synthetic data).
struct RunConfig {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> paths;
  SampleConfig sample;
  TrainConfig train;
  std::string backend = "light";
  nlohmann::json light_encoder = {{"name", "hashed-ngram"}, {"width", 4096}, {"max_ngram", 2}};
  nlohmann::json heavy_encoder = {
      {"name", "remote"}, {"url", "http://127.0.0.1:8765/embed"}, {"width", 1024}};
  SimulateSettings simulate;
  double vif_threshold = 5.0;
  SyntheticPoolConfig pool;
  EngagementSimConfig engagement;
  ServiceConfig service;
};

nlohmann::json run_config_json(const RunConfig& config);
// Keys absent from `j` keep their defaults. A run manifest is accepted too:
// its "config" member is used.
RunConfig run_config_from_json(const nlohmann::json& j);

// Entry point of the `percept` executable. Returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace percept
