#include "percept/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "percept/design.hpp"
#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/synthetic.hpp"
#include "percept/util.hpp"

namespace percept {

namespace {

constexpr const char* kScoreTransform = "log1p(max(score, 0))";
constexpr const char* kCommentsTransform = "log1p(num_comments)";

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kSchema, std::string("missing or non-string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

std::int64_t require_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(ErrorCode::kSchema, std::string("missing or non-integer field '") + key + "'");
  }
  return j.at(key).get<std::int64_t>();
}

bool is_tracking_param(const std::string& key) {
  const std::string k = to_lower(key);
  return k.rfind("utm_", 0) == 0 || k == "fbclid" || k == "gclid" || k == "ref";
}

nlohmann::json mixed_model_json(const MixedModelResult& m) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    terms.push_back({{"term", m.names[i]},
                     {"estimate", m.coefficients[k]},
                     {"std_error", m.std_errors[k]},
                     {"statistic", m.statistics[k]},
                     {"p_value", m.p_values[k]}});
  }
  return {{"terms", terms},
          {"n", m.n},
          {"group_variable", m.group_variable},
          {"n_groups", m.n_groups},
          {"residual_variance", m.residual_variance},
          {"random_intercept_variance", m.random_intercept_variance},
          {"variance_ratio", m.variance_ratio},
          {"log_likelihood", m.log_likelihood},
          {"converged", m.converged},
          {"boundary", m.boundary},
          {"warnings", m.warnings}};
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const SocialPost& p) {
  j = p.extra.is_object() ? p.extra : nlohmann::json::object();
  j["post_id"] = p.post_id;
  j["url"] = p.url;
  j["subreddit"] = p.subreddit;
  j["created_at"] = p.created_at;
  j["score"] = p.score;
  j["num_comments"] = p.num_comments;
  j["title_text"] = p.title_text;
  j["first_share_of_url_in_subreddit"] = p.first_share_of_url_in_subreddit;
}

void from_json(const nlohmann::json& j, SocialPost& p) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "post is not a JSON object");
  p.extra = j;
  for (const char* key : {"post_id", "url", "subreddit", "created_at", "score", "num_comments",
                          "title_text", "first_share_of_url_in_subreddit"}) {
    p.extra.erase(key);
  }
  p.post_id = require_string(j, "post_id");
  p.url = require_string(j, "url");
  if (trim(p.url).empty()) throw Error(ErrorCode::kSchema, "empty url for post " + p.post_id);
  p.subreddit = require_string(j, "subreddit");
  p.created_at = require_int(j, "created_at");
  p.score = require_int(j, "score");
  p.num_comments = require_int(j, "num_comments");
  if (p.num_comments < 0) {
    throw Error(ErrorCode::kSchema, "negative num_comments for post " + p.post_id);
  }
  p.title_text = require_string(j, "title_text");
  p.first_share_of_url_in_subreddit = j.value("first_share_of_url_in_subreddit", false);
}

std::string normalize_url(const std::string& url) {
  std::string s = trim(url);
  if (const auto scheme = s.find("://"); scheme != std::string::npos) s.erase(0, scheme + 3);
  if (const auto hash = s.find('#'); hash != std::string::npos) s.resize(hash);
  std::string query;
  if (const auto q = s.find('?'); q != std::string::npos) {
    query = s.substr(q + 1);
    s.resize(q);
  }
  const auto slash = s.find('/');
  std::string host = to_lower(s.substr(0, slash));
  std::string path = slash == std::string::npos ? "" : s.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();

  std::vector<std::string> kept;
  std::istringstream params(query);
  std::string param;
  while (std::getline(params, param, '&')) {
    if (param.empty()) continue;
    if (!is_tracking_param(param.substr(0, param.find('=')))) kept.push_back(param);
  }
  std::string out = host + path;
  if (!kept.empty()) out += "?" + join(kept, "&");
  return out;
}

std::string url_domain(const std::string& normalized_url) {
  std::string host = normalized_url.substr(0, normalized_url.find_first_of("/?"));
  if (host.rfind("www.", 0) == 0) host.erase(0, 4);
  return host;
}

EngagementOutcomes engagement_outcomes(const SocialPost& post) {
  return {std::log1p(static_cast<double>(std::max<std::int64_t>(post.score, 0))),
          std::log1p(static_cast<double>(std::max<std::int64_t>(post.num_comments, 0)))};
}

EngagementDataset build_url_groups(const std::vector<SocialPost>& posts) {
  std::vector<std::pair<std::string, SocialPost>> keyed;
  keyed.reserve(posts.size());
  for (const auto& post : posts) {
    SocialPost p = post;
    p.url = normalize_url(p.url);
    if (p.url.empty()) throw Error(ErrorCode::kSchema, "empty url for post " + p.post_id);
    keyed.emplace_back(nlohmann::json(p).dump(), std::move(p));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.post_id != b.second.post_id) return a.second.post_id < b.second.post_id;
    return a.first < b.first;
  });

  std::vector<SocialPost> unique;
  std::size_t duplicates = 0;
  for (auto& [key, post] : keyed) {
    if (!unique.empty() && unique.back().post_id == post.post_id) {
      ++duplicates;
      continue;
    }
    unique.push_back(std::move(post));
  }

  std::map<std::string, std::size_t> per_url;
  for (const auto& p : unique) ++per_url[p.url];

  using ShareKey = std::pair<std::string, std::string>;
  std::map<ShareKey, std::size_t> first;
  EngagementDataset dataset;
  std::size_t singleton_urls = 0;
  for (const auto& [url, count] : per_url) singleton_urls += count < 2 ? 1 : 0;
  for (auto& p : unique) {
    if (per_url[p.url] < 2) continue;
    EngagementRow row;
    row.post = std::move(p);
    row.post.first_share_of_url_in_subreddit = false;
    row.url_domain = url_domain(row.post.url);
    row.outcomes = engagement_outcomes(row.post);
    const std::size_t idx = dataset.rows.size();
    const ShareKey key{row.post.url, row.post.subreddit};
    auto it = first.find(key);
    if (it == first.end()) {
      first.emplace(key, idx);
    } else {
      const auto& current = dataset.rows[it->second].post;
      // Rows arrive in post_id order, so only an earlier timestamp displaces.
      if (row.post.created_at < current.created_at) it->second = idx;
    }
    dataset.rows.push_back(std::move(row));
  }
  for (const auto& [key, idx] : first) dataset.rows[idx].post.first_share_of_url_in_subreddit = true;

  dataset.metadata = {{"score_transform", kScoreTransform},
                      {"comments_transform", kCommentsTransform},
                      {"duplicate_posts_dropped", duplicates},
                      {"singleton_urls_dropped", singleton_urls},
                      {"n_posts", dataset.rows.size()},
                      {"n_urls", per_url.size() - singleton_urls}};
  return dataset;
}

void attach_perceptions(EngagementDataset& dataset, const ScorerModel& model,
                        const StatementCatalog& catalog) {
  for (auto& row : dataset.rows) {
    NewsDocument doc;
    doc.doc_id = row.post.post_id;
    doc.title = row.post.title_text;
    row.profile = predict(model, doc, catalog).profile;
  }
  dataset.metadata["perception_source"] = "model:" + model.version();
}

PerceptionStudyResult perception_outcome_study(const std::vector<AnnotationRecord>& records,
                                               const std::vector<ParticipantProfile>& participants,
                                               const std::vector<NewsDocument>& docs,
                                               DimensionId dimension,
                                               const StatementCatalog& catalog) {
  std::map<std::string, const ParticipantProfile*> people;
  for (const auto& p : participants) people[p.annotator_id] = &p;
  std::map<std::string, const NewsDocument*> doc_index;
  for (const auto& d : docs) doc_index[d.doc_id] = &d;

  std::set<std::string> missing;
  for (const auto& r : records) {
    if (!people.count(r.annotator_id)) missing.insert(r.annotator_id);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingProfile,
                "no participant profile for annotators: " +
                    join(std::vector<std::string>(missing.begin(), missing.end()), ", "));
  }

  std::vector<double> y;
  std::vector<std::string> groups;
  std::vector<std::string> gender, age, education, domain, outlet;
  std::vector<double> frequency, trust;
  std::vector<std::vector<double>> political(political_items().size());
  for (const auto& r : records) {
    auto doc_it = doc_index.find(r.doc_id);
    if (doc_it == doc_index.end()) {
      throw Error(ErrorCode::kInvalidParameter, "record references unknown document " + r.doc_id);
    }
    if (r.ratings.empty()) continue;
    const auto profile = annotator_profile(r, catalog, true);
    auto score = profile.scores.find(dimension);
    if (score == profile.scores.end()) continue;
    const ParticipantProfile& person = *people.at(r.annotator_id);
    y.push_back(score->second);
    groups.push_back(r.doc_id);
    gender.push_back(person.gender);
    age.push_back(person.age_bracket);
    education.push_back(person.education_level);
    frequency.push_back(static_cast<double>(person.science_news_frequency) / 4.0);
    trust.push_back(person.trust_in_science);
    for (std::size_t i = 0; i < political_items().size(); ++i) {
      const auto& item = political_items()[i];
      auto it = person.political_attitudes.find(item);
      if (it == person.political_attitudes.end()) {
        throw Error(ErrorCode::kMissingProfile,
                    "participant " + person.annotator_id + " lacks political item " + item);
      }
      political[i].push_back(it->second);
    }
    domain.push_back(doc_it->second->science_domain);
    outlet.push_back(std::string(outlet_type_name(doc_it->second->outlet_type)));
  }
  if (y.empty()) {
    throw Error(ErrorCode::kInvalidParameter,
                "no ratings for dimension " + std::string(dimension_name(dimension)));
  }

  DesignBuilder builder(y.size());
  builder.categorical("gender", gender)
      .categorical("age_bracket", age)
      .categorical("education_level", education)
      .numeric("science_news_frequency", frequency)
      .numeric("trust_in_science", trust);
  for (std::size_t i = 0; i < political_items().size(); ++i) {
    builder.numeric(political_items()[i], political[i]);
  }
  builder.categorical("science_domain", domain).categorical("outlet_type", outlet);

  PerceptionStudyResult result;
  result.dimension = dimension;
  for (const char* name :
       {"gender", "age_bracket", "education_level", "science_domain", "outlet_type"}) {
    result.reference_levels[name] = builder.reference_level(name);
  }
  const Eigen::VectorXd outcome = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  result.model = fit_random_intercept_lmm(builder.build(), outcome, groups, "doc_id");
  return result;
}

EngagementStudyResult engagement_study(const EngagementDataset& dataset, double prune_threshold) {
  const auto& rows = dataset.rows;
  std::set<std::string> urls;
  for (const auto& row : rows) urls.insert(row.post.url);
  if (urls.size() < 2) {
    throw Error(ErrorCode::kDegenerateGroups,
                "engagement study needs at least 2 urls, got " + std::to_string(urls.size()));
  }

  const std::size_t n = rows.size();
  std::map<DimensionId, std::vector<double>> perception;
  for (DimensionId dim : all_dimensions()) {
    auto& column = perception[dim];
    column.reserve(n);
    for (const auto& row : rows) {
      auto it = row.profile.scores.find(dim);
      if (it == row.profile.scores.end()) {
        throw Error(ErrorCode::kMissingDimension, "post " + row.post.post_id + " has no " +
                                                      std::string(dimension_name(dim)) + " score");
      }
      column.push_back(it->second);
    }
  }

  DesignBuilder perception_builder(n);
  for (DimensionId dim : all_dimensions()) {
    perception_builder.numeric(std::string(dimension_name(dim)), perception[dim]);
  }
  EngagementStudyResult study;
  study.pruning = stepwise_vif_prune(perception_builder.build(), prune_threshold);
  for (const auto& name : study.pruning.retained) study.retained.push_back(dimension_from_name(name));

  std::vector<std::string> subreddit, domain;
  std::vector<double> first_share;
  for (const auto& row : rows) {
    subreddit.push_back(row.post.subreddit);
    domain.push_back(row.url_domain);
    first_share.push_back(row.post.first_share_of_url_in_subreddit ? 1.0 : 0.0);
  }
  DesignBuilder builder(n);
  for (DimensionId dim : study.retained) {
    builder.numeric(std::string(dimension_name(dim)), perception[dim]);
  }
  builder.categorical("subreddit", subreddit)
      .categorical("url_domain", domain)
      .numeric("first_share", first_share);
  study.reference_levels["subreddit"] = builder.reference_level("subreddit");
  study.reference_levels["url_domain"] = builder.reference_level("url_domain");
  const DesignMatrix design = builder.build();

  const auto predictors = static_cast<std::size_t>(design.cols() - 1);
  if (n < 10 * predictors) {
    throw Error(ErrorCode::kInvalidParameter,
                "engagement study has " + std::to_string(n) + " rows for " +
                    std::to_string(predictors) + " predictors; need at least 10 per predictor");
  }
  for (Eigen::Index c = 1; c < design.cols(); ++c) {
    study.column_means[design.names[static_cast<std::size_t>(c)]] = design.values.col(c).mean();
  }

  std::vector<std::string> groups;
  groups.reserve(n);
  for (const auto& row : rows) groups.push_back(row.post.url);
  for (const char* outcome : {kLogScore, kLogComments}) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      y[static_cast<Eigen::Index>(i)] = outcome == std::string(kLogScore)
                                            ? rows[i].outcomes.log_score
                                            : rows[i].outcomes.log_comments;
    }
    OutcomeFit fit;
    fit.model = fit_random_intercept_lmm(design, y, groups, "url");
    fit.fitted_mean = (design.values * fit.model.coefficients).mean();
    study.outcomes.emplace(outcome, std::move(fit));
  }

  study.metadata = {{"prune_threshold", prune_threshold},
                    {"n_rows", n},
                    {"n_urls", urls.size()},
                    {"score_transform", dataset.metadata.value("score_transform", kScoreTransform)},
                    {"comments_transform",
                     dataset.metadata.value("comments_transform", kCommentsTransform)}};
  return study;
}

void to_json(nlohmann::json& j, const EngagementPredictor& p) {
  nlohmann::json coefficients = nlohmann::json::object();
  for (const auto& [dim, beta] : p.coefficients) coefficients[std::string(dimension_name(dim))] = beta;
  j = {{"outcome", p.outcome},
       {"intercept", p.intercept},
       {"coefficients", coefficients},
       {"residual_scale", p.residual_scale},
       {"fit_id", p.fit_id}};
}

void from_json(const nlohmann::json& j, EngagementPredictor& p) {
  p.outcome = require_string(j, "outcome");
  p.intercept = j.at("intercept").get<double>();
  p.residual_scale = j.at("residual_scale").get<double>();
  p.fit_id = j.value("fit_id", std::string());
  p.coefficients.clear();
  for (const auto& [name, beta] : j.at("coefficients").items()) {
    p.coefficients[dimension_from_name(name)] = beta.get<double>();
  }
}

EngagementPredictor fit_engagement_predictor(const EngagementStudyResult& study,
                                             const std::string& outcome) {
  auto it = study.outcomes.find(outcome);
  if (it == study.outcomes.end()) {
    throw Error(ErrorCode::kInvalidParameter, "study has no outcome '" + outcome + "'");
  }
  const MixedModelResult& m = it->second.model;
  std::set<std::string> retained;
  for (DimensionId dim : study.retained) retained.insert(std::string(dimension_name(dim)));

  EngagementPredictor predictor;
  predictor.outcome = outcome;
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    const double beta = m.coefficients[static_cast<Eigen::Index>(i)];
    const std::string& name = m.names[i];
    if (name == kInterceptName) {
      predictor.intercept += beta;
    } else if (retained.count(name)) {
      predictor.coefficients[dimension_from_name(name)] = beta;
    } else {
      predictor.intercept += beta * study.column_means.at(name);
    }
  }
  predictor.residual_scale = std::sqrt(m.residual_variance + m.random_intercept_variance);
  predictor.fit_id = sha256_hex(nlohmann::json(predictor).dump()).substr(0, 12);
  return predictor;
}

EngagementPrediction predict_engagement(const EngagementPredictor& predictor,
                                        const PerceptionProfile& profile) {
  EngagementPrediction out;
  out.outcome = predictor.outcome;
  out.estimate = predictor.intercept;
  for (const auto& [dim, beta] : predictor.coefficients) {
    auto it = profile.scores.find(dim);
    if (it == profile.scores.end()) {
      throw Error(ErrorCode::kMissingDimension,
                  "profile lacks " + std::string(dimension_name(dim)));
    }
    out.estimate += beta * it->second;
  }
  out.lower = out.estimate - 1.96 * predictor.residual_scale;
  out.upper = out.estimate + 1.96 * predictor.residual_scale;
  return out;
}

EngagementDataset simulate_engagement_dataset(const EngagementSimConfig& config,
                                              std::uint64_t seed) {
  if (config.urls < 2 || config.posts_per_url < 2) {
    throw Error(ErrorCode::kInvalidParameter, "need at least 2 urls with 2 posts each");
  }
  static const std::vector<std::pair<std::string, double>> kSubreddits = {
      {"science", 0.2}, {"EverythingScience", 0.0}, {"technology", -0.1},
      {"health", 0.1},  {"space", 0.15}};
  static const std::vector<std::string> kDomains = {"sciencedaily.com", "phys.org",
                                                    "nature.com",       "eurekalert.org",
                                                    "theguardian.com",  "nytimes.com"};
  constexpr double kFirstShareEffect = 0.25;
  auto clustered = [](DimensionId d) {
    return d == DimensionId::kInterestingness || d == DimensionId::kSharing ||
           d == DimensionId::kReading;
  };

  Rng rng(seed);
  std::vector<SocialPost> posts;
  std::map<std::string, LatentProfile> profiles;
  std::map<std::string, std::pair<double, double>> url_effects;
  std::map<std::string, double> subreddit_effect(kSubreddits.begin(), kSubreddits.end());
  int counter = 0;
  for (int u = 0; u < config.urls; ++u) {
    char url_id[16];
    std::snprintf(url_id, sizeof(url_id), "%05d", u);
    const std::string& host = kDomains[rng.below(kDomains.size())];
    const std::string url = "https://www." + host + "/news/" + url_id;
    LatentProfile content{};
    for (auto& c : content) c = 3.0 + config.content_sd * rng.normal();
    const double shared_content = config.content_sd * rng.normal();
    url_effects[normalize_url(url)] = {config.url_effect_sd * rng.normal(),
                                       config.url_effect_sd * rng.normal()};
    const std::int64_t base_time = 1600000000 + static_cast<std::int64_t>(u) * 86400;
    for (int k = 0; k < config.posts_per_url; ++k) {
      char post_id[16];
      std::snprintf(post_id, sizeof(post_id), "t%07d", counter++);
      SocialPost post;
      post.post_id = post_id;
      post.url = url;
      post.subreddit = kSubreddits[rng.below(kSubreddits.size())].first;
      post.created_at = base_time + static_cast<std::int64_t>(rng.below(7 * 86400));
      const double shared_framing = config.framing_sd * rng.normal();
      LatentProfile latent{};
      for (DimensionId dim : all_dimensions()) {
        const auto d = static_cast<std::size_t>(dim);
        const double v = clustered(dim)
                             ? 3.0 + shared_content + shared_framing + 0.15 * rng.normal()
                             : content[d] + config.framing_sd * rng.normal();
        latent[d] = std::clamp(v, 1.0, 5.0);
      }
      post.title_text = synthesize_text(latent, rng, 12);
      profiles[post.post_id] = latent;
      posts.push_back(std::move(post));
    }
  }

  EngagementDataset dataset = build_url_groups(posts);
  const auto& score_beta = config.coefficients.at(kLogScore);
  const auto& comment_beta = config.coefficients.at(kLogComments);
  for (auto& row : dataset.rows) {
    const LatentProfile& latent = profiles.at(row.post.post_id);
    row.profile = PerceptionProfile{};
    row.profile.doc_id = row.post.post_id;
    for (DimensionId dim : all_dimensions()) {
      row.profile.scores[dim] = latent[static_cast<std::size_t>(dim)];
      row.profile.per_dimension_counts[dim] = 1;
    }
    const double shared = subreddit_effect.at(row.post.subreddit) +
                          (row.post.first_share_of_url_in_subreddit ? kFirstShareEffect : 0.0);
    double y_score = config.score_intercept + shared + url_effects.at(row.post.url).first;
    double y_comments = config.comments_intercept + shared + url_effects.at(row.post.url).second;
    for (const auto& [dim, beta] : score_beta) {
      y_score += beta * (latent[static_cast<std::size_t>(dim)] - 3.0);
    }
    for (const auto& [dim, beta] : comment_beta) {
      y_comments += beta * (latent[static_cast<std::size_t>(dim)] - 3.0);
    }
    y_score += config.noise_sd * rng.normal();
    y_comments += config.noise_sd * rng.normal();
    row.post.score = std::llround(std::expm1(y_score));
    row.post.num_comments = std::max<std::int64_t>(0, std::llround(std::expm1(y_comments)));
    row.outcomes = engagement_outcomes(row.post);
  }
  dataset.metadata["generator"] = {{"urls", config.urls},
                                   {"posts_per_url", config.posts_per_url},
                                   {"seed", seed}};
  return dataset;
}

nlohmann::json engagement_study_json(const EngagementStudyResult& study) {
  nlohmann::json removals = nlohmann::json::array();
  for (const auto& r : study.pruning.removals) removals.push_back({{"column", r.column}, {"vif", r.vif}});
  nlohmann::json retained = nlohmann::json::array();
  for (DimensionId dim : study.retained) retained.push_back(std::string(dimension_name(dim)));
  nlohmann::json outcomes = nlohmann::json::object();
  for (const auto& [name, fit] : study.outcomes) {
    auto entry = mixed_model_json(fit.model);
    entry["fitted_mean"] = fit.fitted_mean;
    outcomes[name] = std::move(entry);
  }
  return {{"retained_dimensions", retained},
          {"vif_removals", removals},
          {"reference_levels", study.reference_levels},
          {"outcomes", outcomes},
          {"metadata", study.metadata}};
}

nlohmann::json perception_study_json(const PerceptionStudyResult& study) {
  return {{"dimension", std::string(dimension_name(study.dimension))},
          {"reference_levels", study.reference_levels},
          {"model", mixed_model_json(study.model)}};
}

}  // namespace percept
