#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/catalog.hpp"
#include "percept/corpus.hpp"

namespace percept {

// Units (documents) x raters grid of Likert values; nullopt marks a missing cell.
struct ReliabilityMatrix {
  std::vector<std::string> units;
  std::vector<std::string> raters;
  std::vector<std::vector<std::optional<int>>> values;  // [unit][rater]
};

enum class DifferenceMetric { kInterval, kOrdinal };

// Krippendorff's alpha from the coincidence matrix. Returns nullopt when the
// expected disagreement is zero. Throws kNoPairableValues when no unit has at
// least two values, kInvalidParameter on values outside 1..5 or ragged rows.
std::optional<double> krippendorff_alpha(const ReliabilityMatrix& matrix,
                                         DifferenceMetric metric = DifferenceMetric::kInterval);

// Number of values in units with at least two values.
std::size_t pairable_value_count(const ReliabilityMatrix& matrix);

// Cronbach's alpha over a complete respondents x items grid.
double cronbach_alpha(const std::vector<std::vector<double>>& item_matrix);

struct StatementReliability {
  std::string statement_id;
  DimensionId group = DimensionId::kNewsworthiness;
  std::optional<double> k_alpha;
  std::size_t n_units = 0;     // documents with at least two ratings
  std::size_t n_pairable = 0;  // ratings inside those documents
};

struct GroupReliability {
  DimensionId group = DimensionId::kNewsworthiness;
  std::optional<double> c_alpha;  // nullopt when the scale is degenerate
  std::size_t n_responses = 0;
};

struct ReliabilityReport {
  std::vector<StatementReliability> statements;  // catalog order
  std::vector<GroupReliability> groups;          // multi-statement dimensions only
  std::size_t n_units = 0;
  std::size_t n_raters = 0;
  std::size_t n_pairable = 0;
  DifferenceMetric metric = DifferenceMetric::kInterval;
};

ReliabilityMatrix statement_matrix(const std::vector<AnnotationRecord>& records,
                                   const std::string& statement_id);

ReliabilityReport reliability_report(const std::vector<AnnotationRecord>& records,
                                     const StatementCatalog& catalog,
                                     DifferenceMetric metric = DifferenceMetric::kInterval);

// statement_id,group,k_alpha,c_alpha,n_units,n_pairable
std::string reliability_csv(const ReliabilityReport& report);
nlohmann::json reliability_json(const ReliabilityReport& report);

}  // namespace percept
