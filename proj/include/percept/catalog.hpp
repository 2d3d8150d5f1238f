#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace percept {

// The twelve perception dimensions. Order is the canonical serialization order.
enum class DimensionId {
  kNewsworthiness,
  kUnderstandability,
  kExpertise,
  kImportance,
  kFun,
  kSurprisingness,
  kControversy,
  kExaggeration,
  kInterestingness,
  kBenefit,
  kSharing,
  kReading,
};

inline constexpr std::size_t kDimensionCount = 12;
inline constexpr std::size_t kDefaultStatementCount = 25;

const std::array<DimensionId, kDimensionCount>& all_dimensions();
std::string_view dimension_name(DimensionId dim);
std::optional<DimensionId> parse_dimension(std::string_view name);
// Throws kSchema on an unknown name.
DimensionId dimension_from_name(std::string_view name);

template <typename T>
using DimensionMap = std::map<DimensionId, T>;

struct Statement {
  std::string id;
  std::string text;
  DimensionId dimension = DimensionId::kNewsworthiness;
  bool reverse_coded = false;

  bool operator==(const Statement&) const = default;
};

class StatementCatalog {
 public:
  StatementCatalog() = default;
  StatementCatalog(std::vector<Statement> statements, std::string version);

  const std::vector<Statement>& statements() const { return statements_; }
  const std::string& version() const { return version_; }
  std::size_t size() const { return statements_.size(); }

  // Index of a statement id, or nullopt.
  std::optional<std::size_t> index_of(std::string_view statement_id) const;
  const Statement& at(std::string_view statement_id) const;

  std::vector<std::string> statement_ids() const;
  std::vector<const Statement*> statements_of(DimensionId dim) const;

  // Canonical JSON text; identical catalogs give identical bytes.
  std::string serialize() const;
  // SHA-256 of serialize().
  std::string hash() const;

  bool operator==(const StatementCatalog& other) const {
    return statements_ == other.statements_ && version_ == other.version_;
  }

 private:
  std::vector<Statement> statements_;
  std::string version_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

StatementCatalog default_catalog();

// Throws kUnknownStatement for ids not in the catalog.
DimensionId dimension_of(const StatementCatalog& catalog, std::string_view statement_id);

struct CatalogValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

CatalogValidationReport validate_catalog(const StatementCatalog& catalog);

void to_json(nlohmann::json& j, const Statement& s);
void from_json(const nlohmann::json& j, Statement& s);
void to_json(nlohmann::json& j, const StatementCatalog& catalog);
void from_json(const nlohmann::json& j, StatementCatalog& catalog);

StatementCatalog load_catalog(const std::string& path);
void save_catalog(const std::string& path, const StatementCatalog& catalog);

}  // namespace percept
