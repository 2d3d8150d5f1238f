#include "percept/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {
namespace {

struct CueWords {
  std::array<const char*, 6> high;
  std::array<const char*, 6> low;
};

// Indexed by DimensionId.
constexpr std::array<CueWords, kDimensionCount> kCues = {{
    {{"breaking", "headline", "announced", "landmark", "major", "newsworthy"},
     {"minor", "routine", "incremental", "footnote", "obscure", "niche"}},
    {{"simple", "clear", "everyday", "plain", "familiar", "explained"},
     {"convoluted", "dense", "opaque", "cryptic", "tangled", "murky"}},
    {{"spectroscopy", "stochastic", "genomic", "isotopic", "eigenvalue", "proteomic"},
     {"kitchen", "garden", "walking", "family", "pets", "weekend"}},
    {{"crisis", "health", "climate", "lives", "urgent", "critical"},
     {"trivial", "quirky", "cosmetic", "hobby", "marginal", "curio"}},
    {{"playful", "delightful", "quirky", "amusing", "charming", "whimsical"},
     {"tedious", "dry", "somber", "grim", "technical", "dull"}},
    {{"unexpected", "astonishing", "shocking", "overturns", "paradox", "stunning"},
     {"confirms", "expected", "predictable", "consistent", "known", "typical"}},
    {{"debate", "contested", "divisive", "backlash", "dispute", "controversial"},
     {"consensus", "agreed", "uncontested", "settled", "accepted", "undisputed"}},
    {{"miracle", "revolutionary", "cure", "unprecedented", "guaranteed", "ultimate"},
     {"modest", "preliminary", "cautious", "tentative", "limited", "measured"}},
    {{"fascinating", "intriguing", "curious", "captivating", "remarkable", "mysterious"},
     {"mundane", "ordinary", "bland", "unremarkable", "plain", "forgettable"}},
    {{"benefit", "helps", "improve", "patients", "communities", "policy"},
     {"useless", "irrelevant", "abstract", "theoretical", "impractical", "detached"}},
    {{"share", "viral", "friends", "talk", "spread", "buzz"},
     {"private", "quiet", "ignore", "skip", "forget", "silent"}},
    {{"read", "story", "feature", "popular", "magazine", "broadcast"},
     {"journal", "appendix", "dataset", "supplement", "technical", "archive"}},
}};

constexpr std::array<const char*, 40> kFiller = {
    "the",     "researchers", "study",   "team",     "found",    "university", "results",
    "data",    "analysis",    "new",     "paper",    "scientists", "report",   "published",
    "show",    "suggests",    "evidence", "according", "participants", "effect", "measured",
    "sample",  "years",       "group",   "model",    "observed", "method",     "samples",
    "people",  "work",        "findings", "question", "field",    "experiment", "trial",
    "project", "approach",    "levels",  "changes",  "authors",
};

constexpr std::array<const char*, 3> kGenders = {"female", "male", "nonbinary"};
constexpr std::array<const char*, 4> kAges = {"18-29", "30-44", "45-59", "60+"};
constexpr std::array<const char*, 3> kEducation = {"high_school", "college", "graduate"};

template <std::size_t N>
std::size_t weighted(Rng& rng, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return N - 1;
}

double clamp_likert(double x) { return std::clamp(x, 1.0, 5.0); }

std::string padded(const char* prefix, std::size_t value, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%0*zu", prefix, width, value);
  return buffer;
}

}  // namespace

void GeneratorParams::validate() const {
  if (!(noise_sd >= 0.0) || !(annotator_bias_sd >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "noise and bias scales must be non-negative");
  }
}

SimulatedAnnotations simulate_annotations(const std::vector<NewsDocument>& docs,
                                          int participants, int labels_per_doc,
                                          const GeneratorParams& params, std::uint64_t seed,
                                          const StatementCatalog& catalog) {
  params.validate();
  if (labels_per_doc < 1) {
    throw Error(ErrorCode::kInvalidParameter, "labels_per_doc must be >= 1");
  }
  const int per_country_us = (participants + 1) / 2;
  const int per_country_uk = participants / 2;
  if (per_country_uk < labels_per_doc) {
    throw Error(ErrorCode::kInvalidParameter,
                "need at least labels_per_doc participants in each country");
  }

  Rng rng(seed);
  SimulatedAnnotations out;
  std::vector<double> bias;
  std::vector<double> background;
  std::array<std::vector<std::size_t>, 2> by_country;
  for (int i = 0; i < participants; ++i) {
    ParticipantProfile p;
    p.annotator_id = padded("P", static_cast<std::size_t>(i + 1), 5);
    p.country = i < per_country_us ? Country::kUS : Country::kUK;
    p.gender = kGenders[weighted(rng, std::array<double, 3>{0.49, 0.49, 0.02})];
    p.age_bracket = kAges[weighted(rng, std::array<double, 4>{0.22, 0.27, 0.26, 0.25})];
    p.education_level = kEducation[weighted(rng, std::array<double, 3>{0.35, 0.45, 0.20})];
    p.science_news_frequency = static_cast<NewsFrequency>(
        weighted(rng, std::array<double, 5>{0.10, 0.25, 0.25, 0.25, 0.15}));
    p.trust_in_science =
        1 + static_cast<int>(weighted(rng, std::array<double, 5>{0.05, 0.10, 0.25, 0.35, 0.25}));
    for (const auto& item : political_items()) {
      p.political_attitudes[item] = 1 + static_cast<int>(rng.below(5));
    }
    bias.push_back(rng.normal(0.0, params.annotator_bias_sd));
    background.push_back(
        params.frequency_effect * static_cast<double>(p.science_news_frequency) / 4.0 +
        params.trust_effect * (p.trust_in_science - 3));
    by_country[static_cast<std::size_t>(p.country)].push_back(out.participants.size());
    out.participants.push_back(std::move(p));
  }

  const auto& statements = catalog.statements();
  for (const auto& doc : docs) {
    LatentProfile latent;
    latent.fill(params.default_latent_mean);
    if (auto it = params.latent_means.find(doc.doc_id); it != params.latent_means.end()) {
      latent = it->second;
    }
    for (const auto& members : by_country) {
      for (std::size_t pick : rng.choose(members.size(), static_cast<std::size_t>(labels_per_doc))) {
        const std::size_t who = members[pick];
        AnnotationRecord record;
        record.annotator_id = out.participants[who].annotator_id;
        record.doc_id = doc.doc_id;
        record.country = out.participants[who].country;
        for (const auto& s : statements) {
          const double noise = rng.normal(0.0, params.noise_sd);
          if (params.uniform_noise_statements.count(s.id) != 0) {
            record.ratings[s.id] = 1 + static_cast<int>(rng.below(5));
            continue;
          }
          double value = latent[static_cast<std::size_t>(s.dimension)] + bias[who] +
                         background[who] + noise;
          if (s.reverse_coded) value = 6.0 - value;
          record.ratings[s.id] = static_cast<int>(std::lround(clamp_likert(value)));
        }
        out.records.push_back(std::move(record));
      }
    }
  }
  return out;
}

std::string synthesize_text(const LatentProfile& latent, Rng& rng, int filler_words) {
  std::vector<std::string> words;
  for (int i = 0; i < filler_words; ++i) words.emplace_back(kFiller[rng.below(kFiller.size())]);
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    const double deviation = latent[d] - 3.0;
    const double expected = 2.0 * std::abs(deviation);
    int count = static_cast<int>(std::floor(expected));
    if (rng.uniform() < expected - count) ++count;
    const auto& pool = deviation >= 0 ? kCues[d].high : kCues[d].low;
    for (int k = 0; k < count; ++k) words.emplace_back(pool[rng.below(pool.size())]);
  }
  rng.shuffle(words);
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  }
  return text;
}

SyntheticPool synthetic_pool(const SyntheticPoolConfig& config, std::uint64_t seed) {
  using T = OutletType;
  static const std::array<const char*, 6> kDomains = {"Medicine",    "Biology",     "Social Science",
                                                      "Humanities",  "Engineering", "Physics"};
  static const std::array<double, 6> kDomainWeights = {0.28, 0.18, 0.15, 0.12, 0.19, 0.08};
  // Mean shifts per domain on a few dimensions, so domain is informative.
  static const std::array<std::array<double, kDimensionCount>, 6> kDomainShift = {{
      {0.3, 0.0, 0.1, 0.5, -0.1, 0.0, 0.1, 0.1, 0.1, 0.4, 0.1, 0.1},
      {0.0, -0.1, 0.3, 0.1, 0.0, 0.2, 0.0, 0.0, 0.1, 0.1, 0.0, 0.0},
      {0.0, 0.3, -0.3, 0.1, 0.2, 0.1, 0.4, 0.1, 0.2, 0.1, 0.2, 0.2},
      {-0.4, 0.4, -0.4, -0.4, 0.4, 0.0, 0.1, 0.0, 0.1, -0.3, 0.1, 0.1},
      {0.0, -0.3, 0.5, 0.1, -0.1, 0.1, -0.2, 0.0, 0.0, 0.2, -0.1, -0.2},
      {0.0, -0.4, 0.6, -0.1, 0.1, 0.3, -0.1, 0.0, 0.2, -0.2, 0.0, -0.1},
  }};
  static const std::array<std::array<const char*, 3>, 3> kOutlets = {{
      {"Daily Chronicle", "Metro Times", "Evening Herald"},
      {"University Newsroom", "Institute Press Office", "Research Wire"},
      {"Science Pulse", "Tech Frontier", "Lab Notes"},
  }};
  static const std::array<const char*, 6> kAuthors = {"A. Smith",  "J. Okafor", "M. Rossi",
                                                      "L. Chen",   "R. Patel",  "S. Novak"};
  static const std::array<const char*, 5> kCities = {"London", "Boston", "Sydney", "Toronto",
                                                     "Berlin"};

  const std::vector<std::vector<T>> setting_types = {
      {T::kGeneral, T::kPressRelease, T::kSciTech},
      {T::kPressRelease, T::kSciTech},
      {T::kGeneral, T::kPressRelease},
  };
  const std::vector<std::vector<T>> other_types = {
      {T::kGeneral}, {T::kPressRelease}, {T::kSciTech}, {T::kGeneral, T::kSciTech}};

  Rng rng(seed);
  SyntheticPool pool;
  std::size_t paper_no = 0;
  std::size_t doc_no = 0;

  auto emit_paper = [&](const std::vector<T>& types) {
    const std::string paper_id = padded("p", ++paper_no, 5);
    const std::size_t domain = weighted(rng, kDomainWeights);
    LatentProfile paper_latent;
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
      paper_latent[d] =
          clamp_likert(3.0 + kDomainShift[domain][d] + rng.normal(0.0, config.latent_sd));
    }
    std::vector<std::pair<T, int>> plan;
    std::int64_t n_articles = 0;
    for (T t : types) {
      const int copies = 1 + (rng.bernoulli(0.25) ? 1 : 0);
      plan.emplace_back(t, copies);
      n_articles += copies;
    }
    const bool popular = rng.bernoulli(config.popular_fraction);
    const std::int64_t coverage =
        popular ? 31 + static_cast<std::int64_t>(rng.below(90))
                : std::max<std::int64_t>(n_articles, 1 + static_cast<std::int64_t>(rng.below(25)));
    for (const auto& [type, copies] : plan) {
      for (int c = 0; c < copies; ++c) {
        RawArticle a;
        a.doc_id = padded("d", ++doc_no, 6);
        a.paper_id = paper_id;
        a.outlet_type = type;
        a.science_domain = kDomains[domain];
        a.coverage_count = coverage;
        const auto& outlets = kOutlets[static_cast<std::size_t>(type)];
        a.outlet_name = outlets[rng.below(outlets.size())];
        a.author = kAuthors[rng.below(kAuthors.size())];
        a.city = kCities[rng.below(kCities.size())];
        a.publish_date = "2019-" + std::to_string(10 + rng.below(3)) + "-" +
                         std::to_string(10 + rng.below(18));
        std::string slug = to_lower(a.outlet_name);
        std::replace(slug.begin(), slug.end(), ' ', '-');
        const std::string url = "https://www." + slug + ".com/news/" + a.doc_id;
        a.urls = {url};

        LatentProfile latent;
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
          latent[d] = clamp_likert(paper_latent[d] + rng.normal(0.0, config.article_sd));
        }
        a.title = synthesize_text(latent, rng, 4);
        a.body = "By " + a.author + " | " + a.city + " | " + a.publish_date + "\n" +
                 a.outlet_name + " reports: " + synthesize_text(latent, rng, 40) +
                 "\nRead more at " + url;
        a.extra[kLatentField] = latent;
        pool.latent_means.emplace(a.doc_id, latent);
        pool.articles.push_back(std::move(a));
      }
    }
  };

  for (const auto& types : setting_types) {
    for (int i = 0; i < config.papers_per_setting; ++i) emit_paper(types);
  }
  for (int i = 0; i < config.other_papers; ++i) {
    emit_paper(other_types[static_cast<std::size_t>(i) % other_types.size()]);
  }
  return pool;
}

std::map<std::string, LatentProfile> latent_means_from(const std::vector<NewsDocument>& docs) {
  std::map<std::string, LatentProfile> out;
  for (const auto& doc : docs) {
    auto it = doc.extra.find(kLatentField);
    if (it == doc.extra.end()) continue;
    if (!it->is_array() || it->size() != kDimensionCount) {
      throw Error(ErrorCode::kSchema, "malformed " + std::string(kLatentField) + " for " + doc.doc_id);
    }
    out.emplace(doc.doc_id, it->get<LatentProfile>());
  }
  return out;
}

}  // namespace percept
