#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/catalog.hpp"
#include "percept/corpus.hpp"

namespace percept {

// Twelve (or fewer) dimension scores in [1,5] for one document, either from a
// single annotator or averaged over annotators.
struct PerceptionProfile {
  std::string doc_id;
  DimensionMap<double> scores;
  int n_annotators = 1;
  DimensionMap<int> per_dimension_counts;
  // Whether negatively phrased statements were mapped r -> 6 - r.
  bool reverse_coded = true;

  bool operator==(const PerceptionProfile&) const = default;
};

void to_json(nlohmann::json& j, const PerceptionProfile& p);
void from_json(const nlohmann::json& j, PerceptionProfile& p);

// Shared rule for turning statement-level values into dimension scores:
// mean over the dimension's present statements, reverse-coded statements
// mapped v -> 6 - v when `reverse_code` is set. Used for annotator ratings,
// label vectors and model predictions alike.
PerceptionProfile profile_from_statement_values(const std::string& doc_id,
                                                const std::map<std::string, double>& values,
                                                const StatementCatalog& catalog,
                                                bool reverse_code = true);

// Throws kEmptyRecord when the record has no ratings.
PerceptionProfile annotator_profile(const AnnotationRecord& record,
                                    const StatementCatalog& catalog, bool reverse_code = true);

// Per-dimension mean over the annotators that scored that dimension.
// Throws kMixedDoc when doc ids differ, kEmptyRecord for an empty list.
PerceptionProfile article_profile(std::span<const PerceptionProfile> profiles);

// annotator_profile + article_profile for every document, ordered by doc_id.
std::vector<PerceptionProfile> article_profiles(const std::vector<AnnotationRecord>& records,
                                                const StatementCatalog& catalog,
                                                bool reverse_code = true);

struct RankScoreOptions {
  int max_iterations = 1000;
  double tolerance = 1e-8;  // on the max absolute log-worth change
  // Every document plays virtual tied comparisons against a fixed reference
  // of worth 1, amounting to this fraction of its real comparison count.
  // Keeps worths finite for undefeated/winless documents and scales with
  // the data, so duplicating all comparisons leaves the fit unchanged.
  double prior_weight = 0.05;
};

struct RankScoreTable {
  DimensionId dimension = DimensionId::kNewsworthiness;
  std::map<std::string, double> worths;  // normalized: mean log-worth is 0
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> excluded_docs;  // outside the largest comparison component

  double log_worth(const std::string& doc_id) const;
};

struct PairedComparison {
  std::string first;
  std::string second;
  double first_wins = 0.0;  // 1, 0.5 (tie) or 0
};

// One comparison per annotator per pair of documents both scored on `dimension`.
std::vector<PairedComparison> paired_comparisons(const std::vector<AnnotationRecord>& records,
                                                 const StatementCatalog& catalog,
                                                 DimensionId dimension);

// Paired-comparison worths fitted by minorization-maximization.
RankScoreTable fit_paired_comparisons(const std::vector<PairedComparison>& comparisons,
                                      DimensionId dimension,
                                      const RankScoreOptions& options = {});

RankScoreTable rank_scores(const std::vector<AnnotationRecord>& records,
                           const StatementCatalog& catalog, DimensionId dimension,
                           const RankScoreOptions& options = {});

// CSV with header doc_id,worth,log_worth.
std::string rank_table_csv(const RankScoreTable& table);

// Pearson r between mean rating and log-worth per dimension.
DimensionMap<double> rating_rank_agreement(const std::vector<PerceptionProfile>& article_profiles,
                                           const std::vector<RankScoreTable>& rank_tables);

}  // namespace percept
