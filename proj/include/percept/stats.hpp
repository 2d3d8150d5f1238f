#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace percept {

inline constexpr const char* kInterceptName = "(Intercept)";

// Named n x p design. When has_intercept is set, column 0 is the all-ones
// intercept column named kInterceptName.
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  bool has_intercept = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::optional<Eigen::Index> column_index(const std::string& name) const;
  // Copy keeping only the named columns (in the given order).
  DesignMatrix select(const std::vector<std::string>& keep) const;
};

struct RegressionResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd statistics;  // t for OLS, z for mixed models
  Eigen::VectorXd p_values;
  double residual_variance = 0.0;
  Eigen::Index n = 0;
  std::vector<std::string> log;

  double coefficient(const std::string& name) const;
  double std_error(const std::string& name) const;
  double statistic(const std::string& name) const;
};

struct MixedModelResult : RegressionResult {
  std::string group_variable;
  std::size_t n_groups = 0;
  double random_intercept_variance = 0.0;
  double variance_ratio = 0.0;  // random-intercept variance / residual variance
  double log_likelihood = 0.0;  // profiled maximum-likelihood value
  bool converged = false;
  bool boundary = false;  // variance ratio pinned at the lower search bound
  std::vector<std::string> warnings;
};

// Throws kRankDeficient naming the columns that are linear combinations of
// earlier ones; kInvalidParameter on non-finite entries or n <= p.
RegressionResult fit_ols(const DesignMatrix& design, const Eigen::VectorXd& y);

struct LmmOptions {
  double log_ratio_min = -18.420680743952367;  // log(1e-8)
  double log_ratio_max = 6.907755278982137;    // log(1e3)
  int grid_points = 64;
  int max_iterations = 200;
};

// Random-intercept linear mixed model y = X b + u[group] + e fitted by
// maximum likelihood, profiled down to the variance ratio and optimized on
// its logarithm by grid bracketing plus Brent refinement.
MixedModelResult fit_random_intercept_lmm(const DesignMatrix& design, const Eigen::VectorXd& y,
                                          const std::vector<std::string>& groups,
                                          const std::string& group_variable = "group",
                                          const LmmOptions& options = {});

// Profiled log-likelihood at a given variance ratio (exposed for diagnostics
// and tests).
double lmm_profiled_log_likelihood(const DesignMatrix& design, const Eigen::VectorXd& y,
                                   const std::vector<std::string>& groups, double variance_ratio);

struct VifEntry {
  std::string column;
  double vif = 1.0;  // +infinity for perfect collinearity
};

// VIF for each non-intercept column, regressing it on the others plus an intercept.
std::vector<VifEntry> vif(const DesignMatrix& design);

struct VifRemoval {
  std::string column;
  double vif = 0.0;
};

struct VifPruneResult {
  std::vector<std::string> retained;  // non-intercept columns, original order
  std::vector<VifRemoval> removals;
};

VifPruneResult stepwise_vif_prune(const DesignMatrix& design, double threshold = 5.0);

// exp(beta) - 1: relative change implied by a coefficient on a log outcome.
double percent_change(double beta);

// term,estimate,std_error,statistic,p_value
std::string regression_csv(const RegressionResult& result);

// Two-sided normal p-value.
double normal_two_sided_p(double z);

}  // namespace percept
