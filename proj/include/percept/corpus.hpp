#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "percept/catalog.hpp"

namespace percept {

enum class OutletType { kGeneral, kPressRelease, kSciTech };
enum class Country { kUS, kUK };
// Ordinal: never < rarely < monthly < weekly < daily.
enum class NewsFrequency { kNever, kRarely, kMonthly, kWeekly, kDaily };

inline constexpr std::array<OutletType, 3> kOutletTypes = {
    OutletType::kGeneral, OutletType::kPressRelease, OutletType::kSciTech};

std::string_view outlet_type_name(OutletType type);
OutletType outlet_type_from_name(std::string_view name);
std::string_view country_name(Country country);
Country country_from_name(std::string_view name);
std::string_view frequency_name(NewsFrequency freq);
NewsFrequency frequency_from_name(std::string_view name);

// The six political-attitude items collected from every participant.
const std::array<std::string, 6>& political_items();

struct NewsDocument {
  std::string doc_id;
  std::string title;
  std::string body;
  OutletType outlet_type = OutletType::kGeneral;
  std::string science_domain;
  std::string paper_id;
  std::int64_t coverage_count = 1;
  // Fields present in the source record that this type does not model.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const NewsDocument&) const = default;
};

struct RawArticle {
  std::string doc_id;
  std::string title;
  std::string body;
  std::string outlet_name;
  std::string author;
  std::string publish_date;
  std::string city;
  std::vector<std::string> urls;
  OutletType outlet_type = OutletType::kGeneral;
  std::string science_domain;
  std::string paper_id;
  std::int64_t coverage_count = 1;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const RawArticle&) const = default;
};

struct AnnotationRecord {
  std::string annotator_id;
  std::string doc_id;
  std::map<std::string, int> ratings;  // statement id -> 1..5
  Country country = Country::kUS;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const AnnotationRecord&) const = default;
};

struct ParticipantProfile {
  std::string annotator_id;
  std::string gender;
  std::string age_bracket;
  std::string education_level;
  NewsFrequency science_news_frequency = NewsFrequency::kNever;
  int trust_in_science = 3;                       // 1..5
  std::map<std::string, int> political_attitudes;  // item -> 1..5
  Country country = Country::kUS;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const ParticipantProfile&) const = default;
};

void to_json(nlohmann::json& j, const NewsDocument& d);
void from_json(const nlohmann::json& j, NewsDocument& d);
void to_json(nlohmann::json& j, const RawArticle& a);
void from_json(const nlohmann::json& j, RawArticle& a);
void to_json(nlohmann::json& j, const AnnotationRecord& r);
void from_json(const nlohmann::json& j, AnnotationRecord& r);
void to_json(nlohmann::json& j, const ParticipantProfile& p);
void from_json(const nlohmann::json& j, ParticipantProfile& p);

// Throws kUnknownStatement on the first rating whose id is not in the catalog.
void check_record_statements(const AnnotationRecord& record, const StatementCatalog& catalog);

// Removes URLs (scheme or "www." prefixed) and literal occurrences of the
// outlet, author, date, city and listed URL fields from title and body.
// Throws kEmptyContent when nothing remains.
NewsDocument clean_document(const RawArticle& raw);

struct SampleConfig {
  int papers_per_coverage_setting = 80;
  int extra_per_outlet_type = 50;
  std::map<std::string, int> domain_upsample = {
      {"Social Science", 50}, {"Humanities", 50}, {"Engineering", 100}};
  std::int64_t popularity_threshold = 30;
  int popularity_upsample = 30;
  std::uint64_t seed = 0;

  // Throws kInvalidConfig when a count is negative or the threshold < 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const SampleConfig& c);
void from_json(const nlohmann::json& j, SampleConfig& c);

// The three step-1 coverage settings.
enum class CoverageSetting { kAllThree, kPressReleaseSciTech, kPressReleaseGeneral };

struct SampleResult {
  std::vector<NewsDocument> docs;
  // Documents contributed by each of the four steps.
  std::array<std::size_t, 4> step_counts{};
  // One entry per quota the pool could not fill.
  std::vector<std::string> warnings;
};

SampleResult sample_batch(const std::vector<NewsDocument>& pool, const SampleConfig& config);

}  // namespace percept
