#include "percept/catalog.hpp"

#include <json.hpp>

#include <set>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {
namespace {

constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "Newsworthiness", "Understandability", "Expertise",       "Importance",
    "Fun",            "Surprisingness",    "Controversy",     "Exaggeration",
    "Interestingness", "Benefit",          "Sharing",         "Reading",
};

// Expected statements per dimension for the canonical framework.
constexpr std::array<std::size_t, kDimensionCount> kExpectedCounts = {1, 1, 1, 1, 1, 1,
                                                                      1, 1, 2, 6, 3, 6};
constexpr std::size_t kExpectedReverseCoded = 2;

}  // namespace

const std::array<DimensionId, kDimensionCount>& all_dimensions() {
  static const std::array<DimensionId, kDimensionCount> kAll = {
      DimensionId::kNewsworthiness, DimensionId::kUnderstandability,
      DimensionId::kExpertise,      DimensionId::kImportance,
      DimensionId::kFun,            DimensionId::kSurprisingness,
      DimensionId::kControversy,    DimensionId::kExaggeration,
      DimensionId::kInterestingness, DimensionId::kBenefit,
      DimensionId::kSharing,        DimensionId::kReading,
  };
  return kAll;
}

std::string_view dimension_name(DimensionId dim) {
  return kDimensionNames[static_cast<std::size_t>(dim)];
}

std::optional<DimensionId> parse_dimension(std::string_view name) {
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    if (kDimensionNames[i] == name) return static_cast<DimensionId>(i);
  }
  return std::nullopt;
}

DimensionId dimension_from_name(std::string_view name) {
  if (auto dim = parse_dimension(name)) return *dim;
  throw Error(ErrorCode::kSchema, "unknown dimension '" + std::string(name) + "'");
}

StatementCatalog::StatementCatalog(std::vector<Statement> statements, std::string version)
    : statements_(std::move(statements)), version_(std::move(version)) {
  // First occurrence wins; duplicates are surfaced by validate_catalog.
  for (std::size_t i = 0; i < statements_.size(); ++i) {
    index_.emplace(statements_[i].id, i);
  }
}

std::optional<std::size_t> StatementCatalog::index_of(std::string_view statement_id) const {
  auto it = index_.find(statement_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Statement& StatementCatalog::at(std::string_view statement_id) const {
  auto idx = index_of(statement_id);
  if (!idx) {
    throw Error(ErrorCode::kUnknownStatement,
                "unknown statement '" + std::string(statement_id) + "'");
  }
  return statements_[*idx];
}

std::vector<std::string> StatementCatalog::statement_ids() const {
  std::vector<std::string> ids;
  ids.reserve(statements_.size());
  for (const auto& s : statements_) ids.push_back(s.id);
  return ids;
}

std::vector<const Statement*> StatementCatalog::statements_of(DimensionId dim) const {
  std::vector<const Statement*> out;
  for (const auto& s : statements_) {
    if (s.dimension == dim) out.push_back(&s);
  }
  return out;
}

std::string StatementCatalog::serialize() const {
  nlohmann::json j = *this;
  return j.dump();
}

std::string StatementCatalog::hash() const { return sha256_hex(serialize()); }

StatementCatalog default_catalog() {
  using D = DimensionId;
  const std::string kReadStem = "If I'm browsing news articles from ";
  const std::string kReadTail = ", I would be likely to open and read the science news story above";
  std::vector<Statement> statements = {
      {"newsworthy_publish", "The science news story should be published in the news",
       D::kNewsworthiness, false},
      {"understand_story", "I can understand the science news story", D::kUnderstandability,
       false},
      {"expertise_required",
       "Understanding the science news story requires specialized knowledge", D::kExpertise,
       false},
      {"important_issue", "The science news story tackles an important issue", D::kImportance,
       false},
      {"fun_to_read", "The science news story is fun to read", D::kFun, false},
      {"finding_surprising", "The scientific finding seems surprising to me",
       D::kSurprisingness, false},
      {"finding_controversial", "The scientific finding could be controversial",
       D::kControversy, false},
      {"story_exaggerated", "This science news story is overstated or exaggerated",
       D::kExaggeration, false},
      {"interesting_to_me", "The science news story sounds interesting to me",
       D::kInterestingness, false},
      {"interesting_to_public", "The science news story could be interesting to the general public",
       D::kInterestingness, false},
      {"benefit_general_public", "Could benefit the general public", D::kBenefit, false},
      {"benefit_public_segment", "Could benefit a segment of the public", D::kBenefit, false},
      {"benefit_policy_makers", "Could benefit policy makers", D::kBenefit, false},
      {"benefit_industry", "Could benefit companies in the related industries", D::kBenefit,
       false},
      {"learned_useful", "I learned something useful from the science news story", D::kBenefit,
       false},
      {"benefit_many_people", "Knowing about this science could benefit a lot of people",
       D::kBenefit, false},
      {"share_direct", "I would share this science news story with someone I know directly",
       D::kSharing, false},
      {"share_forum",
       "I would share this science news story with a wider forum like a mailing list, Twitter, "
       "Reddit",
       D::kSharing, false},
      {"share_unlikely", "I would be unlikely to share this science news story with anyone",
       D::kSharing, true},
      {"read_general_news",
       kReadStem + "general news outlets (e.g. BBC, New York Times, Fox News)" + kReadTail,
       D::kReading, false},
      {"read_scitech_media",
       kReadStem + "science and technology media (e.g. Scientific American, National Geographic)" +
           kReadTail,
       D::kReading, false},
      {"read_print_media", kReadStem + "other popular printing media (e.g. Vogue, GQ, Elle)" +
                               kReadTail,
       D::kReading, false},
      {"read_popular_media", kReadStem + "other popular media (e.g. TV and radio)" + kReadTail,
       D::kReading, false},
      {"read_social_feed", kReadStem + "my social-media feed" + kReadTail, D::kReading, false},
      {"not_outside_science",
       "It should not be published in public media outside the science community", D::kReading,
       true},
  };
  return StatementCatalog(std::move(statements), "1.0");
}

DimensionId dimension_of(const StatementCatalog& catalog, std::string_view statement_id) {
  return catalog.at(statement_id).dimension;
}

CatalogValidationReport validate_catalog(const StatementCatalog& catalog) {
  CatalogValidationReport report;
  const auto& statements = catalog.statements();
  if (statements.size() != kDefaultStatementCount) {
    report.violations.push_back("statement count " + std::to_string(statements.size()) +
                                " != " + std::to_string(kDefaultStatementCount));
  }
  std::set<std::string> seen;
  std::array<std::size_t, kDimensionCount> counts{};
  std::size_t reversed = 0;
  for (const auto& s : statements) {
    if (!seen.insert(s.id).second) report.violations.push_back("duplicate id '" + s.id + "'");
    if (s.id.empty()) report.violations.push_back("empty id");
    if (trim(s.text).empty()) report.violations.push_back("empty text for '" + s.id + "'");
    ++counts[static_cast<std::size_t>(s.dimension)];
    if (s.reverse_coded) ++reversed;
  }
  for (DimensionId dim : all_dimensions()) {
    const auto i = static_cast<std::size_t>(dim);
    if (counts[i] != kExpectedCounts[i]) {
      report.violations.push_back("dimension " + std::string(dimension_name(dim)) + " has " +
                                  std::to_string(counts[i]) + " statements, expected " +
                                  std::to_string(kExpectedCounts[i]));
    }
  }
  if (reversed != kExpectedReverseCoded) {
    report.violations.push_back("reverse-coded count " + std::to_string(reversed) +
                                " != " + std::to_string(kExpectedReverseCoded));
  }
  return report;
}

void to_json(nlohmann::json& j, const Statement& s) {
  j = nlohmann::json{{"id", s.id},
                     {"text", s.text},
                     {"dimension", dimension_name(s.dimension)},
                     {"reverse_coded", s.reverse_coded}};
}

void from_json(const nlohmann::json& j, Statement& s) {
  s.id = j.at("id").get<std::string>();
  s.text = j.at("text").get<std::string>();
  s.dimension = dimension_from_name(j.at("dimension").get<std::string>());
  s.reverse_coded = j.value("reverse_coded", false);
}

void to_json(nlohmann::json& j, const StatementCatalog& catalog) {
  j = nlohmann::json{{"version", catalog.version()}, {"statements", catalog.statements()}};
}

void from_json(const nlohmann::json& j, StatementCatalog& catalog) {
  catalog = StatementCatalog(j.at("statements").get<std::vector<Statement>>(),
                             j.at("version").get<std::string>());
}

StatementCatalog load_catalog(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path)).get<StatementCatalog>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, "catalog " + path + ": " + e.what());
  }
}

void save_catalog(const std::string& path, const StatementCatalog& catalog) {
  write_text_file(path, nlohmann::json(catalog).dump(2) + "\n");
}

}  // namespace percept
