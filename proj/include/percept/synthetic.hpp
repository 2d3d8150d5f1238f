#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "percept/catalog.hpp"
#include "percept/corpus.hpp"
#include "percept/rng.hpp"

namespace percept {

using LatentProfile = std::array<double, kDimensionCount>;

// Generator for synthetic annotation corpora. A rating for statement s of
// dimension d is latent[d] + annotator bias + background effect + noise,
// inverted for reverse-coded statements, rounded and clamped to 1..5.
struct GeneratorParams {
  std::map<std::string, LatentProfile> latent_means;  // doc_id -> per-dimension mean
  double default_latent_mean = 3.0;                    // docs absent from latent_means
  double noise_sd = 0.8;
  double annotator_bias_sd = 0.3;
  // Added for a participant with frequency index f in 0..4: effect * f / 4.
  double frequency_effect = 0.0;
  // Added per trust point above 3.
  double trust_effect = 0.0;
  // Statements whose ratings are drawn uniformly from 1..5.
  std::set<std::string> uniform_noise_statements;

  // Throws kInvalidParameter for negative scales.
  void validate() const;
};

struct SimulatedAnnotations {
  std::vector<AnnotationRecord> records;
  std::vector<ParticipantProfile> participants;
};

// Every document receives `labels_per_doc` records from each country group.
// `participants` is split evenly between US and UK.
SimulatedAnnotations simulate_annotations(const std::vector<NewsDocument>& docs,
                                          int participants, int labels_per_doc,
                                          const GeneratorParams& params, std::uint64_t seed,
                                          const StatementCatalog& catalog = default_catalog());

// Writes a short text whose cue words track the latent profile.
std::string synthesize_text(const LatentProfile& latent, Rng& rng, int filler_words);

struct SyntheticPoolConfig {
  int papers_per_setting = 150;  // for each of the three step-1 coverage settings
  int other_papers = 600;        // papers covered by a single outlet type or General+SciTech
  double popular_fraction = 0.12;
  double latent_sd = 0.75;
  double article_sd = 0.3;
};

struct SyntheticPool {
  std::vector<RawArticle> articles;
  std::map<std::string, LatentProfile> latent_means;  // doc_id -> latent profile
};

// Articles carry their latent profile under extra[kLatentField], which
// survives cleaning and sampling.
SyntheticPool synthetic_pool(const SyntheticPoolConfig& config, std::uint64_t seed);

inline constexpr const char* kLatentField = "synthetic_latent";

// Latent profiles recorded on generated documents; others are skipped.
std::map<std::string, LatentProfile> latent_means_from(const std::vector<NewsDocument>& docs);

}  // namespace percept
