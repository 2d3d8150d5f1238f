#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/aggregate.hpp"
#include "percept/catalog.hpp"
#include "percept/corpus.hpp"
#include "percept/perceiver.hpp"
#include "percept/stats.hpp"

namespace percept {

struct SocialPost {
  std::string post_id;
  std::string url;
  std::string subreddit;
  std::int64_t created_at = 0;  // unix seconds
  std::int64_t score = 0;       // upvotes minus downvotes, may be negative
  std::int64_t num_comments = 0;
  std::string title_text;
  bool first_share_of_url_in_subreddit = false;  // derived by build_url_groups
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const SocialPost&) const = default;
};

void to_json(nlohmann::json& j, const SocialPost& p);
void from_json(const nlohmann::json& j, SocialPost& p);

// Lowercases the host and drops the scheme, fragment, trailing slash and
// tracking query parameters (utm_*, fbclid, gclid, ref).
std::string normalize_url(const std::string& url);
// Host of a normalized url without a leading "www.".
std::string url_domain(const std::string& normalized_url);

struct EngagementOutcomes {
  double log_score = 0.0;     // ln(1 + max(score, 0))
  double log_comments = 0.0;  // ln(1 + num_comments)
};

EngagementOutcomes engagement_outcomes(const SocialPost& post);

inline constexpr const char* kLogScore = "log_score";
inline constexpr const char* kLogComments = "log_comments";

struct EngagementRow {
  SocialPost post;
  std::string url_domain;
  PerceptionProfile profile;  // empty until perceptions are attached
  EngagementOutcomes outcomes;
};

struct EngagementDataset {
  std::vector<EngagementRow> rows;  // ordered by post_id
  nlohmann::json metadata = nlohmann::json::object();
};

// Normalizes urls, drops repeated post_ids and urls with fewer than two
// posts, and flags the earliest post of each (url, subreddit) pair
// (created_at, then post_id).
EngagementDataset build_url_groups(const std::vector<SocialPost>& posts);

// Scores every post title with the model; the profile becomes the post's
// perception covariates.
void attach_perceptions(EngagementDataset& dataset, const ScorerModel& model,
                        const StatementCatalog& catalog);

struct PerceptionStudyResult {
  DimensionId dimension = DimensionId::kNewsworthiness;
  MixedModelResult model;
  std::map<std::string, std::string> reference_levels;  // categorical -> reference
};

// Annotator-level dimension rating regressed on background factors with
// science domain and outlet type as fixed effects and the document as a
// random intercept. Frequency enters as index/4 (never = 0, daily = 1), so
// its coefficient is the daily-vs-never contrast.
// Throws kMissingProfile listing annotators without a participant profile.
PerceptionStudyResult perception_outcome_study(const std::vector<AnnotationRecord>& records,
                                               const std::vector<ParticipantProfile>& participants,
                                               const std::vector<NewsDocument>& docs,
                                               DimensionId dimension,
                                               const StatementCatalog& catalog = default_catalog());

struct OutcomeFit {
  MixedModelResult model;
  double fitted_mean = 0.0;  // mean of X * beta over the training rows
};

struct EngagementStudyResult {
  VifPruneResult pruning;
  std::vector<DimensionId> retained;
  std::map<std::string, OutcomeFit> outcomes;  // kLogScore, kLogComments
  // Training means of every non-intercept design column.
  std::map<std::string, double> column_means;
  std::map<std::string, std::string> reference_levels;
  nlohmann::json metadata = nlohmann::json::object();
};

// VIF-prunes the twelve perception columns, then fits each outcome with a
// url random intercept and subreddit, url domain and first-share fixed
// effects. Throws kDegenerateGroups for fewer than two urls,
// kMissingDimension when a row lacks a perception score and
// kInvalidParameter when rows < 10 x predictors.
EngagementStudyResult engagement_study(const EngagementDataset& dataset,
                                       double prune_threshold = 5.0);

struct EngagementPredictor {
  std::string outcome;
  // Fitted intercept plus the fixed-effect covariates at their training means.
  double intercept = 0.0;
  std::map<DimensionId, double> coefficients;
  // Unexplained scale for a new post: sqrt(residual + random-intercept variance).
  double residual_scale = 0.0;
  std::string fit_id;

  bool operator==(const EngagementPredictor&) const = default;
};

void to_json(nlohmann::json& j, const EngagementPredictor& p);
void from_json(const nlohmann::json& j, EngagementPredictor& p);

EngagementPredictor fit_engagement_predictor(const EngagementStudyResult& study,
                                             const std::string& outcome);

struct EngagementPrediction {
  std::string outcome;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Throws kMissingDimension when the profile lacks a retained dimension.
EngagementPrediction predict_engagement(const EngagementPredictor& predictor,
                                        const PerceptionProfile& profile);

struct EngagementSimConfig {
  int urls = 400;
  int posts_per_url = 5;
  double content_sd = 0.5;  // per-url perception spread
  double framing_sd = 0.8;  // per-post perception spread around its url
  double url_effect_sd = 0.5;
  double noise_sd = 0.5;
  double score_intercept = 4.0;
  double comments_intercept = 2.5;
  // Planted coefficients on centered perception scores, by outcome.
  std::map<std::string, std::map<DimensionId, double>> coefficients = {
      {kLogScore,
       {{DimensionId::kImportance, 0.519},
        {DimensionId::kSurprisingness, 0.2},
        {DimensionId::kFun, 0.15},
        {DimensionId::kExpertise, -0.25}}},
      {kLogComments,
       {{DimensionId::kImportance, 0.4},
        {DimensionId::kSurprisingness, 0.15},
        {DimensionId::kFun, 0.1},
        {DimensionId::kControversy, 0.2},
        {DimensionId::kExpertise, -0.2}}}};
};

// Posts grouped by url whose true perception profiles are attached and whose
// outcomes follow the planted linear model on the log scale. Interestingness,
// Sharing and Reading share a common component, so they are collinear.
EngagementDataset simulate_engagement_dataset(const EngagementSimConfig& config,
                                              std::uint64_t seed);

// Regression tables and pruning log as one JSON document.
nlohmann::json engagement_study_json(const EngagementStudyResult& study);
nlohmann::json perception_study_json(const PerceptionStudyResult& study);

}  // namespace percept
