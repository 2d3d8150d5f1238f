#include "percept/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/util.hpp"

namespace percept {
namespace {

constexpr std::array<std::string_view, 3> kOutletNames = {"General", "PressRelease", "SciTech"};
constexpr std::array<std::string_view, 2> kCountryNames = {"US", "UK"};
constexpr std::array<std::string_view, 5> kFrequencyNames = {"never", "rarely", "monthly",
                                                             "weekly", "daily"};

nlohmann::json extra_fields(const nlohmann::json& j, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "record is not a JSON object");
  nlohmann::json extra = j;
  for (const char* key : known) extra.erase(key);
  return extra;
}

nlohmann::json with_extra(const nlohmann::json& extra) {
  return extra.is_object() ? extra : nlohmann::json::object();
}

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kSchema, std::string("missing or non-string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

int likert(const nlohmann::json& value, const std::string& what) {
  if (!value.is_number_integer()) {
    throw Error(ErrorCode::kSchema, "non-integer value for " + what);
  }
  const auto v = value.get<std::int64_t>();
  if (v < 1 || v > 5) {
    throw Error(ErrorCode::kSchema,
                "value " + std::to_string(v) + " out of range 1-5 for " + what);
  }
  return static_cast<int>(v);
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Erases occurrences of `needle` that are not glued to neighbouring word characters.
std::string erase_literal(const std::string& text, const std::string& needle) {
  if (needle.empty()) return text;
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t hit = text.find(needle, pos);
    if (hit == std::string::npos) break;
    const std::size_t end = hit + needle.size();
    const bool left_ok = hit == 0 || !is_word_char(text[hit - 1]) || !is_word_char(needle.front());
    const bool right_ok =
        end >= text.size() || !is_word_char(text[end]) || !is_word_char(needle.back());
    if (left_ok && right_ok) {
      out.append(text, pos, hit - pos);
    } else {
      out.append(text, pos, end - pos);
    }
    pos = end;
  }
  out.append(text, std::min(pos, text.size()), std::string::npos);
  return out;
}

std::string normalize_whitespace(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  std::string out;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::string word;
    std::string joined;
    while (words >> word) {
      if (!joined.empty()) joined.push_back(' ');
      joined += word;
    }
    if (joined.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += joined;
  }
  return out;
}

std::string clean_text(std::string text, const std::vector<std::string>& literals) {
  static const std::regex kUrl(R"((https?://|www\.)[^\s]+)", std::regex::icase);
  while (true) {
    std::string next = std::regex_replace(text, kUrl, "");
    for (const auto& literal : literals) next = erase_literal(next, literal);
    next = normalize_whitespace(next);
    if (next == text) return next;
    text = std::move(next);
  }
}

}  // namespace

std::string_view outlet_type_name(OutletType type) {
  return kOutletNames[static_cast<std::size_t>(type)];
}

OutletType outlet_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOutletNames.size(); ++i) {
    if (kOutletNames[i] == name) return static_cast<OutletType>(i);
  }
  throw Error(ErrorCode::kSchema, "unknown outlet_type '" + std::string(name) + "'");
}

std::string_view country_name(Country country) {
  return kCountryNames[static_cast<std::size_t>(country)];
}

Country country_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCountryNames.size(); ++i) {
    if (kCountryNames[i] == name) return static_cast<Country>(i);
  }
  throw Error(ErrorCode::kSchema, "unknown country '" + std::string(name) + "'");
}

std::string_view frequency_name(NewsFrequency freq) {
  return kFrequencyNames[static_cast<std::size_t>(freq)];
}

NewsFrequency frequency_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFrequencyNames.size(); ++i) {
    if (kFrequencyNames[i] == name) return static_cast<NewsFrequency>(i);
  }
  throw Error(ErrorCode::kSchema, "unknown science_news_frequency '" + std::string(name) + "'");
}

const std::array<std::string, 6>& political_items() {
  static const std::array<std::string, 6> kItems = {
      "reproductive_health_rights", "legalizing_drugs",  "public_services_investment",
      "gender_identity_rights",     "taxing_the_rich",   "market_intervention",
  };
  return kItems;
}

void to_json(nlohmann::json& j, const NewsDocument& d) {
  j = with_extra(d.extra);
  j["doc_id"] = d.doc_id;
  j["title"] = d.title;
  j["body"] = d.body;
  j["outlet_type"] = outlet_type_name(d.outlet_type);
  j["science_domain"] = d.science_domain;
  j["paper_id"] = d.paper_id;
  j["coverage_count"] = d.coverage_count;
}

void from_json(const nlohmann::json& j, NewsDocument& d) {
  d.extra = extra_fields(j, {"doc_id", "title", "body", "outlet_type", "science_domain",
                             "paper_id", "coverage_count"});
  d.doc_id = require_string(j, "doc_id");
  if (d.doc_id.empty()) throw Error(ErrorCode::kSchema, "empty doc_id");
  d.title = j.value("title", "");
  d.body = j.value("body", "");
  d.outlet_type = outlet_type_from_name(require_string(j, "outlet_type"));
  d.science_domain = j.value("science_domain", "");
  d.paper_id = j.value("paper_id", "");
  d.coverage_count = j.value("coverage_count", std::int64_t{1});
  if (d.coverage_count < 0) throw Error(ErrorCode::kSchema, "negative coverage_count");
}

void to_json(nlohmann::json& j, const RawArticle& a) {
  j = with_extra(a.extra);
  j["doc_id"] = a.doc_id;
  j["title"] = a.title;
  j["body"] = a.body;
  j["outlet_name"] = a.outlet_name;
  j["author"] = a.author;
  j["publish_date"] = a.publish_date;
  j["city"] = a.city;
  j["urls"] = a.urls;
  j["outlet_type"] = outlet_type_name(a.outlet_type);
  j["science_domain"] = a.science_domain;
  j["paper_id"] = a.paper_id;
  j["coverage_count"] = a.coverage_count;
}

void from_json(const nlohmann::json& j, RawArticle& a) {
  a.extra = extra_fields(j, {"doc_id", "title", "body", "outlet_name", "author", "publish_date",
                             "city", "urls", "outlet_type", "science_domain", "paper_id",
                             "coverage_count"});
  a.doc_id = require_string(j, "doc_id");
  if (a.doc_id.empty()) throw Error(ErrorCode::kSchema, "empty doc_id");
  a.title = j.value("title", "");
  a.body = j.value("body", "");
  a.outlet_name = j.value("outlet_name", "");
  a.author = j.value("author", "");
  a.publish_date = j.value("publish_date", "");
  a.city = j.value("city", "");
  a.urls = j.value("urls", std::vector<std::string>{});
  a.outlet_type = outlet_type_from_name(j.value("outlet_type", "General"));
  a.science_domain = j.value("science_domain", "");
  a.paper_id = j.value("paper_id", "");
  a.coverage_count = j.value("coverage_count", std::int64_t{1});
}

void to_json(nlohmann::json& j, const AnnotationRecord& r) {
  j = with_extra(r.extra);
  j["annotator_id"] = r.annotator_id;
  j["doc_id"] = r.doc_id;
  j["ratings"] = r.ratings;
  j["country"] = country_name(r.country);
}

void from_json(const nlohmann::json& j, AnnotationRecord& r) {
  r.extra = extra_fields(j, {"annotator_id", "doc_id", "ratings", "country"});
  r.annotator_id = require_string(j, "annotator_id");
  r.doc_id = require_string(j, "doc_id");
  r.country = country_from_name(require_string(j, "country"));
  r.ratings.clear();
  if (!j.contains("ratings") || !j.at("ratings").is_object()) {
    throw Error(ErrorCode::kSchema, "missing ratings object");
  }
  for (const auto& [key, value] : j.at("ratings").items()) {
    if (value.is_null()) continue;
    r.ratings[key] = likert(value, "rating '" + key + "'");
  }
}

void to_json(nlohmann::json& j, const ParticipantProfile& p) {
  j = with_extra(p.extra);
  j["annotator_id"] = p.annotator_id;
  j["gender"] = p.gender;
  j["age_bracket"] = p.age_bracket;
  j["education_level"] = p.education_level;
  j["science_news_frequency"] = frequency_name(p.science_news_frequency);
  j["trust_in_science"] = p.trust_in_science;
  j["political_attitudes"] = p.political_attitudes;
  j["country"] = country_name(p.country);
}

void from_json(const nlohmann::json& j, ParticipantProfile& p) {
  p.extra = extra_fields(j, {"annotator_id", "gender", "age_bracket", "education_level",
                             "science_news_frequency", "trust_in_science",
                             "political_attitudes", "country"});
  p.annotator_id = require_string(j, "annotator_id");
  p.gender = require_string(j, "gender");
  p.age_bracket = require_string(j, "age_bracket");
  p.education_level = require_string(j, "education_level");
  p.science_news_frequency = frequency_from_name(require_string(j, "science_news_frequency"));
  p.trust_in_science = likert(j.at("trust_in_science"), "trust_in_science");
  p.country = country_from_name(require_string(j, "country"));
  p.political_attitudes.clear();
  for (const auto& [key, value] : j.at("political_attitudes").items()) {
    p.political_attitudes[key] = likert(value, "political attitude '" + key + "'");
  }
}

void check_record_statements(const AnnotationRecord& record, const StatementCatalog& catalog) {
  for (const auto& [id, rating] : record.ratings) {
    (void)rating;
    if (!catalog.index_of(id)) {
      throw Error(ErrorCode::kUnknownStatement,
                  "record " + record.annotator_id + "/" + record.doc_id +
                      " rates unknown statement '" + id + "'");
    }
  }
}

NewsDocument clean_document(const RawArticle& raw) {
  if (trim(raw.title).empty() && trim(raw.body).empty()) {
    throw Error(ErrorCode::kEmptyContent, "article " + raw.doc_id + " has no title or body");
  }
  std::vector<std::string> literals;
  for (const std::string* field : {&raw.outlet_name, &raw.author, &raw.publish_date, &raw.city}) {
    std::string value = trim(*field);
    if (!value.empty()) literals.push_back(std::move(value));
  }
  for (const auto& url : raw.urls) {
    std::string value = trim(url);
    if (!value.empty()) literals.push_back(std::move(value));
  }
  // Longer literals first so a field contained in another is not split.
  std::sort(literals.begin(), literals.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });

  NewsDocument doc;
  doc.doc_id = raw.doc_id;
  doc.title = clean_text(raw.title, literals);
  doc.body = clean_text(raw.body, literals);
  if (doc.title.empty() && doc.body.empty()) {
    throw Error(ErrorCode::kEmptyContent,
                "article " + raw.doc_id + " is empty after removing metadata");
  }
  doc.outlet_type = raw.outlet_type;
  doc.science_domain = raw.science_domain;
  doc.paper_id = raw.paper_id;
  doc.coverage_count = raw.coverage_count;
  doc.extra = with_extra(raw.extra);
  return doc;
}

void SampleConfig::validate() const {
  if (papers_per_coverage_setting < 0 || extra_per_outlet_type < 0 || popularity_upsample < 0) {
    throw Error(ErrorCode::kInvalidConfig, "sample counts must be non-negative");
  }
  for (const auto& [domain, count] : domain_upsample) {
    if (count < 0) {
      throw Error(ErrorCode::kInvalidConfig, "negative upsample count for domain " + domain);
    }
  }
  if (popularity_threshold < 1) {
    throw Error(ErrorCode::kInvalidConfig, "popularity_threshold must be >= 1");
  }
}

void to_json(nlohmann::json& j, const SampleConfig& c) {
  j = nlohmann::json{{"papers_per_coverage_setting", c.papers_per_coverage_setting},
                     {"extra_per_outlet_type", c.extra_per_outlet_type},
                     {"domain_upsample", c.domain_upsample},
                     {"popularity_threshold", c.popularity_threshold},
                     {"popularity_upsample", c.popularity_upsample},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SampleConfig& c) {
  SampleConfig defaults;
  c.papers_per_coverage_setting =
      j.value("papers_per_coverage_setting", defaults.papers_per_coverage_setting);
  c.extra_per_outlet_type = j.value("extra_per_outlet_type", defaults.extra_per_outlet_type);
  c.domain_upsample = j.value("domain_upsample", defaults.domain_upsample);
  c.popularity_threshold = j.value("popularity_threshold", defaults.popularity_threshold);
  c.popularity_upsample = j.value("popularity_upsample", defaults.popularity_upsample);
  c.seed = j.value("seed", defaults.seed);
}

SampleResult sample_batch(const std::vector<NewsDocument>& pool, const SampleConfig& config) {
  config.validate();

  // First occurrence of each doc_id only.
  std::vector<const NewsDocument*> docs;
  {
    std::unordered_set<std::string> seen;
    for (const auto& d : pool) {
      if (seen.insert(d.doc_id).second) docs.push_back(&d);
    }
  }

  for (const auto& [domain, count] : config.domain_upsample) {
    if (count == 0) continue;
    const bool present = std::any_of(docs.begin(), docs.end(), [&](const NewsDocument* d) {
      return d->science_domain == domain;
    });
    if (!present) {
      throw Error(ErrorCode::kInvalidConfig, "domain '" + domain + "' is absent from the pool");
    }
  }

  // paper -> outlet type -> doc indices (pool order)
  std::map<std::string, std::array<std::vector<std::size_t>, 3>> by_paper;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i]->paper_id.empty()) continue;
    by_paper[docs[i]->paper_id][static_cast<std::size_t>(docs[i]->outlet_type)].push_back(i);
  }

  Rng rng(config.seed);
  SampleResult result;
  std::vector<bool> taken(docs.size(), false);
  auto take = [&](std::size_t idx, std::size_t step) {
    taken[idx] = true;
    result.docs.push_back(*docs[idx]);
    ++result.step_counts[step];
  };
  auto draw_from = [&](const std::vector<std::size_t>& candidates, std::size_t quota,
                       std::size_t step, const std::string& label) {
    std::vector<std::size_t> open;
    for (std::size_t idx : candidates) {
      if (!taken[idx]) open.push_back(idx);
    }
    if (open.size() < quota) {
      result.warnings.push_back("step " + std::to_string(step + 1) + " " + label + ": requested " +
                                std::to_string(quota) + ", available " +
                                std::to_string(open.size()));
    }
    for (std::size_t pick : rng.choose(open.size(), quota)) take(open[pick], step);
  };

  // Step 1: coverage settings, exact membership of outlet types per paper.
  using T = OutletType;
  const std::array<std::pair<std::string, std::vector<T>>, 3> settings = {{
      {"all three outlet types", {T::kGeneral, T::kPressRelease, T::kSciTech}},
      {"PressRelease+SciTech", {T::kPressRelease, T::kSciTech}},
      {"PressRelease+General", {T::kGeneral, T::kPressRelease}},
  }};
  for (const auto& [label, types] : settings) {
    std::vector<const std::string*> papers;
    for (const auto& [paper, per_type] : by_paper) {
      std::set<T> present;
      for (T t : kOutletTypes) {
        if (!per_type[static_cast<std::size_t>(t)].empty()) present.insert(t);
      }
      if (present == std::set<T>(types.begin(), types.end())) papers.push_back(&paper);
    }
    const auto quota = static_cast<std::size_t>(config.papers_per_coverage_setting);
    if (papers.size() < quota) {
      result.warnings.push_back("step 1 " + label + ": requested " + std::to_string(quota) +
                                " papers, available " + std::to_string(papers.size()));
    }
    for (std::size_t pick : rng.choose(papers.size(), quota)) {
      const auto& per_type = by_paper.at(*papers[pick]);
      for (T t : types) {
        std::vector<std::size_t> open;
        for (std::size_t idx : per_type[static_cast<std::size_t>(t)]) {
          if (!taken[idx]) open.push_back(idx);
        }
        if (open.empty()) continue;
        take(open[rng.below(open.size())], 0);
      }
    }
  }

  // Step 2: extra articles per outlet type.
  for (T t : kOutletTypes) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i]->outlet_type == t) candidates.push_back(i);
    }
    draw_from(candidates, static_cast<std::size_t>(config.extra_per_outlet_type), 1,
              std::string(outlet_type_name(t)));
  }

  // Step 3: domain upsampling.
  for (const auto& [domain, count] : config.domain_upsample) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i]->science_domain == domain) candidates.push_back(i);
    }
    draw_from(candidates, static_cast<std::size_t>(count), 2, domain);
  }

  // Step 4: popular papers.
  {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i]->coverage_count > config.popularity_threshold) candidates.push_back(i);
    }
    draw_from(candidates, static_cast<std::size_t>(config.popularity_upsample), 3,
              "coverage_count > " + std::to_string(config.popularity_threshold));
  }
  return result;
}

}  // namespace percept
