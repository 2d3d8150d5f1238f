#include "percept/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {

void to_json(nlohmann::json& j, const PerceptionProfile& p) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [dim, value] : p.scores) scores[std::string(dimension_name(dim))] = value;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [dim, value] : p.per_dimension_counts) {
    counts[std::string(dimension_name(dim))] = value;
  }
  j = nlohmann::json{{"doc_id", p.doc_id},
                     {"scores", scores},
                     {"n_annotators", p.n_annotators},
                     {"per_dimension_counts", counts},
                     {"reverse_coded", p.reverse_coded}};
}

void from_json(const nlohmann::json& j, PerceptionProfile& p) {
  p.doc_id = j.at("doc_id").get<std::string>();
  p.scores.clear();
  for (const auto& [name, value] : j.at("scores").items()) {
    const double v = value.get<double>();
    if (!(v >= 1.0 && v <= 5.0)) {
      throw Error(ErrorCode::kSchema, "score for " + name + " outside [1,5]");
    }
    p.scores[dimension_from_name(name)] = v;
  }
  p.n_annotators = j.value("n_annotators", 1);
  p.per_dimension_counts.clear();
  if (j.contains("per_dimension_counts")) {
    for (const auto& [name, value] : j.at("per_dimension_counts").items()) {
      p.per_dimension_counts[dimension_from_name(name)] = value.get<int>();
    }
  }
  p.reverse_coded = j.value("reverse_coded", true);
}

PerceptionProfile profile_from_statement_values(const std::string& doc_id,
                                                const std::map<std::string, double>& values,
                                                const StatementCatalog& catalog,
                                                bool reverse_code) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyRecord, "no statement values for document " + doc_id);
  }
  DimensionMap<double> sums;
  DimensionMap<int> counts;
  for (const auto& [id, value] : values) {
    const Statement& s = catalog.at(id);
    const double v = (reverse_code && s.reverse_coded) ? 6.0 - value : value;
    sums[s.dimension] += v;
    counts[s.dimension] += 1;
  }
  PerceptionProfile profile;
  profile.doc_id = doc_id;
  profile.reverse_coded = reverse_code;
  for (const auto& [dim, sum] : sums) {
    profile.scores[dim] = sum / counts[dim];
    profile.per_dimension_counts[dim] = 1;
  }
  return profile;
}

PerceptionProfile annotator_profile(const AnnotationRecord& record,
                                    const StatementCatalog& catalog, bool reverse_code) {
  if (record.ratings.empty()) {
    throw Error(ErrorCode::kEmptyRecord,
                "record " + record.annotator_id + "/" + record.doc_id + " has no ratings");
  }
  std::map<std::string, double> values;
  for (const auto& [id, rating] : record.ratings) values.emplace(id, rating);
  return profile_from_statement_values(record.doc_id, values, catalog, reverse_code);
}

PerceptionProfile article_profile(std::span<const PerceptionProfile> profiles) {
  if (profiles.empty()) throw Error(ErrorCode::kEmptyRecord, "no annotator profiles");
  PerceptionProfile out;
  out.doc_id = profiles.front().doc_id;
  out.reverse_coded = profiles.front().reverse_coded;
  out.n_annotators = static_cast<int>(profiles.size());
  DimensionMap<double> sums;
  for (const auto& p : profiles) {
    if (p.doc_id != out.doc_id) {
      throw Error(ErrorCode::kMixedDoc,
                  "profiles mix documents " + out.doc_id + " and " + p.doc_id);
    }
    for (const auto& [dim, score] : p.scores) {
      sums[dim] += score;
      out.per_dimension_counts[dim] += 1;
    }
  }
  for (const auto& [dim, sum] : sums) {
    // Clamp guards the last ulp of rounding; means of values in [1,5] stay in [1,5].
    out.scores[dim] = std::clamp(sum / out.per_dimension_counts[dim], 1.0, 5.0);
  }
  return out;
}

std::vector<PerceptionProfile> article_profiles(const std::vector<AnnotationRecord>& records,
                                                const StatementCatalog& catalog,
                                                bool reverse_code) {
  std::map<std::string, std::vector<PerceptionProfile>> by_doc;
  for (const auto& record : records) {
    if (record.ratings.empty()) continue;
    by_doc[record.doc_id].push_back(annotator_profile(record, catalog, reverse_code));
  }
  std::vector<PerceptionProfile> out;
  out.reserve(by_doc.size());
  for (const auto& [doc, profiles] : by_doc) out.push_back(article_profile(profiles));
  return out;
}

double RankScoreTable::log_worth(const std::string& doc_id) const {
  return std::log(worths.at(doc_id));
}

std::vector<PairedComparison> paired_comparisons(const std::vector<AnnotationRecord>& records,
                                                 const StatementCatalog& catalog,
                                                 DimensionId dimension) {
  // annotator -> (doc, score), in first-seen order
  std::map<std::string, std::vector<std::pair<std::string, double>>> by_annotator;
  for (const auto& record : records) {
    if (record.ratings.empty()) continue;
    const auto profile = annotator_profile(record, catalog, true);
    auto it = profile.scores.find(dimension);
    if (it == profile.scores.end()) continue;
    by_annotator[record.annotator_id].emplace_back(record.doc_id, it->second);
  }
  std::vector<PairedComparison> out;
  for (const auto& [annotator, scored] : by_annotator) {
    for (std::size_t a = 0; a < scored.size(); ++a) {
      for (std::size_t b = a + 1; b < scored.size(); ++b) {
        if (scored[a].first == scored[b].first) continue;
        const double diff = scored[a].second - scored[b].second;
        out.push_back({scored[a].first, scored[b].first,
                       diff > 0 ? 1.0 : (diff < 0 ? 0.0 : 0.5)});
      }
    }
  }
  return out;
}

RankScoreTable fit_paired_comparisons(const std::vector<PairedComparison>& comparisons,
                                      DimensionId dimension, const RankScoreOptions& options) {
  if (comparisons.empty()) {
    throw Error(ErrorCode::kInsufficientComparisons,
                "no paired comparisons for " + std::string(dimension_name(dimension)));
  }

  std::map<std::string, std::size_t> index;
  for (const auto& c : comparisons) {
    index.emplace(c.first, 0);
    index.emplace(c.second, 0);
  }
  std::vector<std::string> names;
  for (auto& [name, idx] : index) {
    idx = names.size();
    names.push_back(name);
  }
  const std::size_t n_all = names.size();

  // Largest connected component; ties go to the component holding the
  // lexicographically smallest document.
  std::vector<std::size_t> parent(n_all);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& c : comparisons) {
    const std::size_t a = find(index.at(c.first));
    const std::size_t b = find(index.at(c.second));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> component_size(n_all, 0);
  for (std::size_t i = 0; i < n_all; ++i) ++component_size[find(i)];
  std::size_t best_root = 0;
  for (std::size_t i = 0; i < n_all; ++i) {
    if (component_size[i] > component_size[best_root]) best_root = i;
  }

  RankScoreTable table;
  table.dimension = dimension;
  std::vector<std::size_t> local(n_all, static_cast<std::size_t>(-1));
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < n_all; ++i) {
    if (find(i) == best_root) {
      local[i] = kept.size();
      kept.push_back(names[i]);
    } else {
      table.excluded_docs.push_back(names[i]);
    }
  }
  const std::size_t n = kept.size();

  // Aggregate into sparse pair counts.
  std::map<std::pair<std::size_t, std::size_t>, double> pair_counts;
  std::vector<double> wins(n, 0.0);
  std::vector<double> played(n, 0.0);
  for (const auto& c : comparisons) {
    const std::size_t a = local[index.at(c.first)];
    const std::size_t b = local[index.at(c.second)];
    if (a == static_cast<std::size_t>(-1)) continue;
    pair_counts[{std::min(a, b), std::max(a, b)}] += 1.0;
    wins[a] += c.first_wins;
    wins[b] += 1.0 - c.first_wins;
    played[a] += 1.0;
    played[b] += 1.0;
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbours(n);
  for (const auto& [pair, count] : pair_counts) {
    neighbours[pair.first].emplace_back(pair.second, count);
    neighbours[pair.second].emplace_back(pair.first, count);
  }
  std::vector<double> virtual_games(n);
  for (std::size_t i = 0; i < n; ++i) virtual_games[i] = options.prior_weight * played[i];

  std::vector<double> worth(n, 1.0);
  std::vector<double> next(n);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double denom = virtual_games[i] / (worth[i] + 1.0);
      for (const auto& [j, count] : neighbours[i]) denom += count / (worth[i] + worth[j]);
      next[i] = (wins[i] + 0.5 * virtual_games[i]) / denom;
      max_change = std::max(max_change, std::abs(std::log(next[i]) - std::log(worth[i])));
    }
    worth.swap(next);
    table.iterations = iter;
    if (max_change < options.tolerance) {
      table.converged = true;
      break;
    }
  }

  double mean_log = 0.0;
  for (double w : worth) mean_log += std::log(w);
  mean_log /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    table.worths[kept[i]] = std::exp(std::log(worth[i]) - mean_log);
  }
  return table;
}

RankScoreTable rank_scores(const std::vector<AnnotationRecord>& records,
                           const StatementCatalog& catalog, DimensionId dimension,
                           const RankScoreOptions& options) {
  return fit_paired_comparisons(paired_comparisons(records, catalog, dimension), dimension,
                                options);
}

std::string rank_table_csv(const RankScoreTable& table) {
  std::ostringstream out;
  out << "doc_id,worth,log_worth\n";
  for (const auto& [doc, worth] : table.worths) {
    out << doc << ',' << format_double(worth) << ',' << format_double(std::log(worth)) << '\n';
  }
  return out.str();
}

DimensionMap<double> rating_rank_agreement(const std::vector<PerceptionProfile>& article_profiles,
                                           const std::vector<RankScoreTable>& rank_tables) {
  std::unordered_map<std::string, const PerceptionProfile*> by_doc;
  for (const auto& p : article_profiles) by_doc.emplace(p.doc_id, &p);
  DimensionMap<double> out;
  for (const auto& table : rank_tables) {
    std::vector<double> ratings;
    std::vector<double> log_worths;
    for (const auto& [doc, worth] : table.worths) {
      auto it = by_doc.find(doc);
      if (it == by_doc.end()) continue;
      auto score = it->second->scores.find(table.dimension);
      if (score == it->second->scores.end()) continue;
      ratings.push_back(score->second);
      log_worths.push_back(std::log(worth));
    }
    const std::string name(dimension_name(table.dimension));
    if (ratings.size() < 3) {
      throw Error(ErrorCode::kInsufficientOverlap,
                  name + ": fewer than 3 documents have both a rating and a rank score");
    }
    auto r = pearson(ratings, log_worths);
    if (!r) throw Error(ErrorCode::kUndefinedCorrelation, name + ": zero variance");
    out[table.dimension] = *r;
  }
  return out;
}

}  // namespace percept
