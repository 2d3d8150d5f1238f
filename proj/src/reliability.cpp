#include "percept/reliability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {
namespace {

constexpr int kLevels = 5;

// Squared difference between Likert levels c and k (1-based) given the
// pooled marginal frequencies.
double delta(int c, int k, DifferenceMetric metric, const std::array<double, kLevels>& marginals) {
  if (metric == DifferenceMetric::kInterval) return static_cast<double>((c - k) * (c - k));
  const int lo = std::min(c, k);
  const int hi = std::max(c, k);
  double span = 0.0;
  for (int g = lo; g <= hi; ++g) span += marginals[g - 1];
  span -= 0.5 * (marginals[lo - 1] + marginals[hi - 1]);
  return span * span;
}

}  // namespace

std::size_t pairable_value_count(const ReliabilityMatrix& matrix) {
  std::size_t total = 0;
  for (const auto& row : matrix.values) {
    const auto m = static_cast<std::size_t>(
        std::count_if(row.begin(), row.end(), [](const auto& v) { return v.has_value(); }));
    if (m >= 2) total += m;
  }
  return total;
}

std::optional<double> krippendorff_alpha(const ReliabilityMatrix& matrix,
                                         DifferenceMetric metric) {
  std::array<std::array<double, kLevels>, kLevels> coincidence{};
  for (const auto& row : matrix.values) {
    if (row.size() != matrix.raters.size()) {
      throw Error(ErrorCode::kInvalidParameter, "ragged reliability matrix row");
    }
    std::array<double, kLevels> counts{};
    double m = 0.0;
    for (const auto& v : row) {
      if (!v) continue;
      if (*v < 1 || *v > kLevels) {
        throw Error(ErrorCode::kInvalidParameter,
                    "value " + std::to_string(*v) + " outside 1..5");
      }
      counts[*v - 1] += 1.0;
      m += 1.0;
    }
    if (m < 2.0) continue;
    for (int c = 0; c < kLevels; ++c) {
      for (int k = 0; k < kLevels; ++k) {
        const double pairs = c == k ? counts[c] * (counts[c] - 1.0) : counts[c] * counts[k];
        coincidence[c][k] += pairs / (m - 1.0);
      }
    }
  }

  std::array<double, kLevels> marginals{};
  double n = 0.0;
  for (int c = 0; c < kLevels; ++c) {
    marginals[c] = std::accumulate(coincidence[c].begin(), coincidence[c].end(), 0.0);
    n += marginals[c];
  }
  if (n == 0.0) {
    throw Error(ErrorCode::kNoPairableValues, "no unit has two or more values");
  }

  double observed = 0.0;
  double expected = 0.0;
  for (int c = 0; c < kLevels; ++c) {
    for (int k = 0; k < kLevels; ++k) {
      const double d = delta(c + 1, k + 1, metric, marginals);
      observed += coincidence[c][k] * d;
      expected += marginals[c] * marginals[k] * d;
    }
  }
  if (expected == 0.0) return std::nullopt;
  return 1.0 - (n - 1.0) * observed / expected;
}

double cronbach_alpha(const std::vector<std::vector<double>>& item_matrix) {
  const std::size_t n = item_matrix.size();
  if (n < 2) throw Error(ErrorCode::kInvalidParameter, "cronbach alpha needs >= 2 respondents");
  const std::size_t k = item_matrix.front().size();
  if (k < 2) throw Error(ErrorCode::kInvalidParameter, "cronbach alpha needs >= 2 items");
  for (const auto& row : item_matrix) {
    if (row.size() != k) throw Error(ErrorCode::kInvalidParameter, "incomplete item grid");
  }
  auto sample_variance = [n](const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(n - 1);
  };
  double item_variance_sum = 0.0;
  std::vector<double> column(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = item_matrix[i][j];
    item_variance_sum += sample_variance(column);
  }
  std::vector<double> totals(n);
  for (std::size_t i = 0; i < n; ++i) {
    totals[i] = std::accumulate(item_matrix[i].begin(), item_matrix[i].end(), 0.0);
  }
  const double total_variance = sample_variance(totals);
  if (total_variance <= 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "total score variance is zero");
  }
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - item_variance_sum / total_variance);
}

ReliabilityMatrix statement_matrix(const std::vector<AnnotationRecord>& records,
                                   const std::string& statement_id) {
  std::map<std::string, std::size_t> units;
  std::map<std::string, std::size_t> raters;
  for (const auto& r : records) {
    if (r.ratings.count(statement_id) == 0) continue;
    units.emplace(r.doc_id, 0);
    raters.emplace(r.annotator_id, 0);
  }
  ReliabilityMatrix matrix;
  for (auto& [id, idx] : units) {
    idx = matrix.units.size();
    matrix.units.push_back(id);
  }
  for (auto& [id, idx] : raters) {
    idx = matrix.raters.size();
    matrix.raters.push_back(id);
  }
  matrix.values.assign(matrix.units.size(),
                       std::vector<std::optional<int>>(matrix.raters.size()));
  for (const auto& r : records) {
    auto it = r.ratings.find(statement_id);
    if (it == r.ratings.end()) continue;
    matrix.values[units.at(r.doc_id)][raters.at(r.annotator_id)] = it->second;
  }
  return matrix;
}

ReliabilityReport reliability_report(const std::vector<AnnotationRecord>& records,
                                     const StatementCatalog& catalog, DifferenceMetric metric) {
  for (const auto& r : records) check_record_statements(r, catalog);

  ReliabilityReport report;
  report.metric = metric;
  std::set<std::string> all_units;
  std::set<std::string> all_raters;
  for (const auto& r : records) {
    all_units.insert(r.doc_id);
    all_raters.insert(r.annotator_id);
  }
  report.n_units = all_units.size();
  report.n_raters = all_raters.size();

  for (const auto& s : catalog.statements()) {
    StatementReliability row;
    row.statement_id = s.id;
    row.group = s.dimension;
    const auto matrix = statement_matrix(records, s.id);
    row.n_pairable = pairable_value_count(matrix);
    for (const auto& unit : matrix.values) {
      const auto m = std::count_if(unit.begin(), unit.end(), [](const auto& v) { return v.has_value(); });
      if (m >= 2) ++row.n_units;
    }
    if (row.n_pairable > 0) row.k_alpha = krippendorff_alpha(matrix, metric);
    report.n_pairable += row.n_pairable;
    report.statements.push_back(std::move(row));
  }

  for (DimensionId dim : all_dimensions()) {
    const auto members = catalog.statements_of(dim);
    if (members.size() < 2) continue;
    GroupReliability group;
    group.group = dim;
    std::vector<std::vector<double>> grid;
    for (const auto& r : records) {
      std::vector<double> row;
      for (const Statement* s : members) {
        auto it = r.ratings.find(s->id);
        if (it == r.ratings.end()) break;
        row.push_back(s->reverse_coded ? 6.0 - it->second : it->second);
      }
      if (row.size() == members.size()) grid.push_back(std::move(row));
    }
    group.n_responses = grid.size();
    if (grid.size() >= 2) {
      try {
        group.c_alpha = cronbach_alpha(grid);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateVariance) throw;
      }
    }
    report.groups.push_back(group);
  }
  return report;
}

std::string reliability_csv(const ReliabilityReport& report) {
  std::map<DimensionId, std::optional<double>> group_alpha;
  for (const auto& g : report.groups) group_alpha[g.group] = g.c_alpha;
  std::ostringstream out;
  out << "statement_id,group,k_alpha,c_alpha,n_units,n_pairable\n";
  for (const auto& s : report.statements) {
    out << s.statement_id << ',' << dimension_name(s.group) << ','
        << (s.k_alpha ? format_double(*s.k_alpha) : "NA") << ',';
    auto it = group_alpha.find(s.group);
    out << (it != group_alpha.end() && it->second ? format_double(*it->second) : "NA");
    out << ',' << s.n_units << ',' << s.n_pairable << '\n';
  }
  return out.str();
}

nlohmann::json reliability_json(const ReliabilityReport& report) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json statements = nlohmann::json::array();
  for (const auto& s : report.statements) {
    statements.push_back({{"statement_id", s.statement_id},
                          {"group", dimension_name(s.group)},
                          {"k_alpha", opt(s.k_alpha)},
                          {"n_units", s.n_units},
                          {"n_pairable", s.n_pairable}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"group", dimension_name(g.group)},
                      {"c_alpha", opt(g.c_alpha)},
                      {"n_responses", g.n_responses}});
  }
  return {{"metric", report.metric == DifferenceMetric::kInterval ? "interval" : "ordinal"},
          {"n_units", report.n_units},
          {"n_raters", report.n_raters},
          {"n_pairable", report.n_pairable},
          {"statements", statements},
          {"groups", groups}};
}

}  // namespace percept
