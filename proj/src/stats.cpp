#include "percept/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "percept/error.hpp"
#include "percept/util.hpp"

namespace percept {
namespace {

constexpr double kCollinearTolerance = 1e-10;

void check_finite(const DesignMatrix& design, const Eigen::VectorXd& y) {
  if (design.values.rows() != y.size()) {
    throw Error(ErrorCode::kInvalidParameter, "design and response lengths differ");
  }
  if (static_cast<Eigen::Index>(design.names.size()) != design.values.cols()) {
    throw Error(ErrorCode::kInvalidParameter, "design column names do not match columns");
  }
  if (!design.values.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::kInvalidParameter, "non-finite entries in design or response");
  }
  if (design.values.rows() <= design.values.cols()) {
    throw Error(ErrorCode::kInvalidParameter, "need more rows than columns");
  }
}

// Columns that are (numerically) linear combinations of earlier columns,
// found by Gram-Schmidt on the normalized Gram matrix.
std::vector<std::string> collinear_columns(const DesignMatrix& design) {
  const Eigen::Index p = design.values.cols();
  Eigen::VectorXd norms = design.values.colwise().norm().transpose();
  std::vector<std::string> bad;
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd scaled(design.values.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    scaled.col(j) = norms[j] > 0 ? Eigen::VectorXd(design.values.col(j) / norms[j])
                                 : Eigen::VectorXd(design.values.col(j));
  }
  const Eigen::MatrixXd gram = scaled.transpose() * scaled;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (norms[j] == 0.0) {
      bad.push_back(design.names[j]);
      continue;
    }
    double residual = gram(j, j);
    if (!kept.empty()) {
      const auto k = static_cast<Eigen::Index>(kept.size());
      Eigen::MatrixXd sub(k, k);
      Eigen::VectorXd cross(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        cross[a] = gram(kept[a], j);
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = gram(kept[a], kept[b]);
      }
      residual -= cross.dot(sub.ldlt().solve(cross));
    }
    if (residual < kCollinearTolerance) {
      bad.push_back(design.names[j]);
    } else {
      kept.push_back(j);
    }
  }
  return bad;
}

void require_full_rank(const DesignMatrix& design) {
  const auto bad = collinear_columns(design);
  if (bad.empty()) return;
  std::string joined;
  for (const auto& name : bad) joined += (joined.empty() ? "" : ", ") + name;
  throw Error(ErrorCode::kRankDeficient, "design is rank deficient; collinear columns: " + joined);
}

// Sufficient statistics for the profiled random-intercept likelihood.
struct GroupedSums {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;
  std::vector<double> sizes;
  std::vector<Eigen::VectorXd> x_sums;
  std::vector<double> y_sums;
  Eigen::Index n = 0;
};

GroupedSums grouped_sums(const DesignMatrix& design, const Eigen::VectorXd& y,
                         const std::vector<std::string>& groups) {
  if (static_cast<Eigen::Index>(groups.size()) != y.size()) {
    throw Error(ErrorCode::kInvalidParameter, "group labels and response lengths differ");
  }
  std::map<std::string, std::size_t> index;
  for (const auto& g : groups) index.emplace(g, 0);
  std::size_t next = 0;
  for (auto& [name, idx] : index) idx = next++;

  const Eigen::Index p = design.values.cols();
  GroupedSums sums;
  sums.n = y.size();
  sums.xtx = design.values.transpose() * design.values;
  sums.xty = design.values.transpose() * y;
  sums.yty = y.squaredNorm();
  sums.sizes.assign(index.size(), 0.0);
  sums.x_sums.assign(index.size(), Eigen::VectorXd::Zero(p));
  sums.y_sums.assign(index.size(), 0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const std::size_t g = index.at(groups[static_cast<std::size_t>(i)]);
    sums.sizes[g] += 1.0;
    sums.x_sums[g] += design.values.row(i).transpose();
    sums.y_sums[g] += y[i];
  }
  return sums;
}

struct ProfiledFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd xtvx;  // X' V^-1 X with V = I + ratio * Z Z'
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
};

ProfiledFit profile_at(const GroupedSums& sums, double ratio) {
  Eigen::MatrixXd xtvx = sums.xtx;
  Eigen::VectorXd xtvy = sums.xty;
  double ytvy = sums.yty;
  double log_det = 0.0;
  for (std::size_t g = 0; g < sums.sizes.size(); ++g) {
    const double shrink = ratio / (1.0 + ratio * sums.sizes[g]);
    xtvx.noalias() -= shrink * sums.x_sums[g] * sums.x_sums[g].transpose();
    xtvy -= shrink * sums.y_sums[g] * sums.x_sums[g];
    ytvy -= shrink * sums.y_sums[g] * sums.y_sums[g];
    log_det += std::log1p(ratio * sums.sizes[g]);
  }
  ProfiledFit fit;
  fit.beta = xtvx.ldlt().solve(xtvy);
  const double n = static_cast<double>(sums.n);
  const double rss = std::max(ytvy - fit.beta.dot(xtvy), 0.0);
  fit.sigma2 = rss / n;
  fit.xtvx = std::move(xtvx);
  if (fit.sigma2 <= 0.0) {
    fit.log_likelihood = std::numeric_limits<double>::infinity();
  } else {
    fit.log_likelihood = -0.5 * n * (std::log(2.0 * M_PI * fit.sigma2) + 1.0) - 0.5 * log_det;
  }
  return fit;
}

void fill_inference(RegressionResult& result, const Eigen::MatrixXd& covariance, bool use_t,
                    double dof) {
  const Eigen::Index p = result.coefficients.size();
  result.std_errors.resize(p);
  result.statistics.resize(p);
  result.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(std::max(covariance(j, j), 0.0));
    result.std_errors[j] = se;
    const double stat = se > 0.0 ? result.coefficients[j] / se
                                 : (result.coefficients[j] == 0.0
                                        ? 0.0
                                        : std::copysign(std::numeric_limits<double>::infinity(),
                                                        result.coefficients[j]));
    result.statistics[j] = stat;
    if (std::isinf(stat)) {
      result.p_values[j] = 0.0;
    } else if (use_t) {
      boost::math::students_t dist(dof);
      result.p_values[j] = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(stat)));
    } else {
      result.p_values[j] = normal_two_sided_p(stat);
    }
  }
}

}  // namespace

std::optional<Eigen::Index> DesignMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

DesignMatrix DesignMatrix::select(const std::vector<std::string>& keep) const {
  DesignMatrix out;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    auto idx = column_index(keep[k]);
    if (!idx) throw Error(ErrorCode::kInvalidParameter, "no design column '" + keep[k] + "'");
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(*idx);
    out.names.push_back(keep[k]);
  }
  out.has_intercept = !keep.empty() && keep.front() == kInterceptName && has_intercept;
  return out;
}

double RegressionResult::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return coefficients[static_cast<Eigen::Index>(i)];
  }
  throw Error(ErrorCode::kInvalidParameter, "no coefficient '" + name + "'");
}

double RegressionResult::std_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std_errors[static_cast<Eigen::Index>(i)];
  }
  throw Error(ErrorCode::kInvalidParameter, "no coefficient '" + name + "'");
}

double RegressionResult::statistic(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return statistics[static_cast<Eigen::Index>(i)];
  }
  throw Error(ErrorCode::kInvalidParameter, "no coefficient '" + name + "'");
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

RegressionResult fit_ols(const DesignMatrix& design, const Eigen::VectorXd& y) {
  check_finite(design, y);
  require_full_rank(design);
  const Eigen::Index n = design.values.rows();
  const Eigen::Index p = design.values.cols();

  RegressionResult result;
  result.names = design.names;
  result.n = n;
  result.coefficients = design.values.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd residuals = y - design.values * result.coefficients;
  result.residual_variance = residuals.squaredNorm() / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx = design.values.transpose() * design.values;
  const Eigen::MatrixXd covariance =
      result.residual_variance * xtx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fill_inference(result, covariance, true, static_cast<double>(n - p));
  result.log.push_back("ols: n=" + std::to_string(n) + " p=" + std::to_string(p));
  return result;
}

double lmm_profiled_log_likelihood(const DesignMatrix& design, const Eigen::VectorXd& y,
                                   const std::vector<std::string>& groups, double variance_ratio) {
  return profile_at(grouped_sums(design, y, groups), variance_ratio).log_likelihood;
}

MixedModelResult fit_random_intercept_lmm(const DesignMatrix& design, const Eigen::VectorXd& y,
                                          const std::vector<std::string>& groups,
                                          const std::string& group_variable,
                                          const LmmOptions& options) {
  check_finite(design, y);
  require_full_rank(design);
  const GroupedSums sums = grouped_sums(design, y, groups);
  if (sums.sizes.size() < 2) {
    throw Error(ErrorCode::kDegenerateGroups,
                "random intercept needs at least 2 groups of " + group_variable);
  }

  MixedModelResult result;
  result.names = design.names;
  result.n = y.size();
  result.group_variable = group_variable;
  result.n_groups = sums.sizes.size();

  const bool all_singletons =
      std::all_of(sums.sizes.begin(), sums.sizes.end(), [](double s) { return s == 1.0; });
  double best_log_ratio = options.log_ratio_min;
  if (all_singletons) {
    result.warnings.push_back(
        "every " + group_variable +
        " has a single observation; random-intercept and residual variances are not separately "
        "identifiable");
    result.converged = true;
  } else {
    auto objective = [&](double log_ratio) {
      return -profile_at(sums, std::exp(log_ratio)).log_likelihood;
    };
    const int points = std::max(options.grid_points, 3);
    const double step = (options.log_ratio_max - options.log_ratio_min) / (points - 1);
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
      const double value = objective(options.log_ratio_min + step * i);
      if (value < best_value) {
        best_value = value;
        best = i;
      }
    }
    const double lo = options.log_ratio_min + step * std::max(best - 1, 0);
    const double hi = options.log_ratio_min + step * std::min(best + 1, points - 1);
    boost::uintmax_t iterations = static_cast<boost::uintmax_t>(options.max_iterations);
    const auto [x, fx] = boost::math::tools::brent_find_minima(
        objective, lo, hi, std::numeric_limits<double>::digits / 2, iterations);
    best_log_ratio = fx <= best_value ? x : options.log_ratio_min + step * best;
    result.converged = iterations < static_cast<boost::uintmax_t>(options.max_iterations);
    result.log.push_back("lmm: brent iterations=" + std::to_string(iterations));
    if (!result.converged) {
      result.warnings.push_back("variance-ratio search hit the iteration limit");
    }
  }
  if (best_log_ratio <= options.log_ratio_min + 1e-6) {
    result.boundary = true;
    result.warnings.push_back("variance ratio at the lower search bound (boundary solution)");
  }

  const double ratio = std::exp(best_log_ratio);
  const ProfiledFit fit = profile_at(sums, ratio);
  const Eigen::Index p = design.values.cols();
  result.coefficients = fit.beta;
  result.residual_variance = fit.sigma2;
  result.variance_ratio = ratio;
  result.random_intercept_variance = ratio * fit.sigma2;
  result.log_likelihood = fit.log_likelihood;
  const Eigen::MatrixXd covariance =
      fit.sigma2 * fit.xtvx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fill_inference(result, covariance, false, 0.0);
  return result;
}

std::vector<VifEntry> vif(const DesignMatrix& design) {
  std::vector<Eigen::Index> columns;
  for (Eigen::Index j = 0; j < design.values.cols(); ++j) {
    if (design.has_intercept && design.names[static_cast<std::size_t>(j)] == kInterceptName) {
      continue;
    }
    columns.push_back(j);
  }
  if (columns.size() < 2) {
    throw Error(ErrorCode::kInvalidParameter, "vif needs at least 2 non-intercept columns");
  }
  const Eigen::Index n = design.values.rows();
  std::vector<VifEntry> out;
  for (Eigen::Index target : columns) {
    Eigen::MatrixXd others(n, static_cast<Eigen::Index>(columns.size()));
    others.col(0).setOnes();
    Eigen::Index k = 1;
    for (Eigen::Index j : columns) {
      if (j != target) others.col(k++) = design.values.col(j);
    }
    const Eigen::VectorXd x = design.values.col(target);
    const Eigen::VectorXd fitted = others * others.colPivHouseholderQr().solve(x);
    const double tss = (x.array() - x.mean()).square().sum();
    const double rss = (x - fitted).squaredNorm();
    double value = std::numeric_limits<double>::infinity();
    if (tss > 0.0) {
      const double r2 = 1.0 - rss / tss;
      if (r2 < 1.0 - 1e-12) value = 1.0 / (1.0 - r2);
    }
    out.push_back({design.names[static_cast<std::size_t>(target)], value});
  }
  return out;
}

VifPruneResult stepwise_vif_prune(const DesignMatrix& design, double threshold) {
  VifPruneResult result;
  for (std::size_t j = 0; j < design.names.size(); ++j) {
    if (design.has_intercept && design.names[j] == kInterceptName) continue;
    result.retained.push_back(design.names[j]);
  }
  while (result.retained.size() >= 2) {
    const auto entries = vif(design.select(result.retained));
    std::size_t worst = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].vif > entries[worst].vif) worst = i;
    }
    if (!(entries[worst].vif > threshold)) break;
    result.removals.push_back({entries[worst].column, entries[worst].vif});
    result.retained.erase(result.retained.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return result;
}

double percent_change(double beta) { return std::expm1(beta); }

std::string regression_csv(const RegressionResult& result) {
  std::ostringstream out;
  out << "term,estimate,std_error,statistic,p_value\n";
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    std::string term = result.names[i];
    if (term.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : term) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      term = quoted + "\"";
    }
    out << term << ',' << format_double(result.coefficients[j]) << ','
        << format_double(result.std_errors[j]) << ',' << format_double(result.statistics[j])
        << ',' << format_double(result.p_values[j]) << '\n';
  }
  return out.str();
}

}  // namespace percept
