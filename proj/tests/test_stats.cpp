#include <doctest.h>

#include <cmath>
#include <limits>

#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/stats.hpp"

using namespace percept;

namespace {

DesignMatrix with_intercept(const std::vector<std::string>& names, const Eigen::MatrixXd& x) {
  DesignMatrix d;
  d.has_intercept = true;
  d.names.push_back(kInterceptName);
  d.names.insert(d.names.end(), names.begin(), names.end());
  d.values.resize(x.rows(), x.cols() + 1);
  d.values.col(0).setOnes();
  d.values.rightCols(x.cols()) = x;
  return d;
}

struct GroupedData {
  DesignMatrix design;
  Eigen::VectorXd y;
  std::vector<std::string> groups;
};

// y = 0.5 x1 - 0.3 x2 + u[group] + e. With center_noise, e sums to zero
// inside each group.
GroupedData grouped_data(std::uint64_t seed, int n_groups, int per_group, double sigma_u,
                         double sigma, bool center_noise = false) {
  Rng rng(seed);
  const int n = n_groups * per_group;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd noise(n);
  GroupedData out;
  for (int g = 0; g < n_groups; ++g) {
    double mean = 0.0;
    for (int r = 0; r < per_group; ++r) {
      const int i = g * per_group + r;
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      noise[i] = rng.normal(0.0, sigma);
      mean += noise[i] / per_group;
      out.groups.push_back("g" + std::to_string(g));
    }
    if (center_noise) {
      for (int r = 0; r < per_group; ++r) noise[g * per_group + r] -= mean;
    }
  }
  std::vector<double> u(static_cast<std::size_t>(n_groups));
  Rng urng(seed + 7919);
  for (auto& v : u) v = urng.normal(0.0, sigma_u);
  out.design = with_intercept({"x1", "x2"}, x);
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    out.y[i] = 0.5 * x(i, 0) - 0.3 * x(i, 1) + u[static_cast<std::size_t>(i / per_group)] + noise[i];
  }
  return out;
}

}  // namespace

TEST_CASE("ols recovers an exact linear relation") {
  Rng rng(1);
  Eigen::MatrixXd x(20, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto d = with_intercept({"a", "b"}, x);
  const Eigen::VectorXd y = (1.5 + 2.0 * x.col(0).array() - 0.25 * x.col(1).array()).matrix();
  const auto fit = fit_ols(d, y);
  CHECK(fit.coefficient(kInterceptName) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(fit.coefficient("a") == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.coefficient("b") == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(fit.residual_variance <= 1e-20);
  CHECK(fit.n == 20);
}

TEST_CASE("intercept-only ols gives the mean") {
  DesignMatrix d;
  d.has_intercept = true;
  d.names = {kInterceptName};
  d.values = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 10;
  const auto fit = fit_ols(d, y);
  CHECK(fit.coefficient(kInterceptName) == doctest::Approx(4.0));
  CHECK(fit.residual_variance == doctest::Approx(12.5));
  CHECK(fit.std_error(kInterceptName) == doctest::Approx(std::sqrt(12.5 / 5.0)));
}

TEST_CASE("ols names collinear columns") {
  Rng rng(2);
  Eigen::MatrixXd x(10, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  x.col(2) = x.col(0);
  const auto d = with_intercept({"a", "b", "a_copy"}, x);
  try {
    fit_ols(d, Eigen::VectorXd::Ones(10));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRankDeficient);
    CHECK(std::string(e.what()).find("a_copy") != std::string::npos);
  }
  const auto small = with_intercept({"a", "b"}, x.topLeftCorner(3, 2));
  CHECK_THROWS_AS(fit_ols(small, Eigen::VectorXd::Ones(3)), Error);
}

TEST_CASE("ols is invariant to row order and column scaling") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x(30, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Eigen::VectorXd y(30);
    for (Eigen::Index i = 0; i < 30; ++i) y[i] = x.row(i).sum() + rng.normal();
    const auto base = fit_ols(with_intercept({"a", "b", "c"}, x), y);

    std::vector<std::size_t> perm = rng.choose(30, 30);
    Eigen::MatrixXd xp(30, 3);
    Eigen::VectorXd yp(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
      xp.row(i) = x.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
      yp[i] = y[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
    }
    const auto permuted = fit_ols(with_intercept({"a", "b", "c"}, xp), yp);
    CHECK((permuted.coefficients - base.coefficients).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::MatrixXd xs = x;
    xs.col(1) *= 7.0;
    const auto scaled = fit_ols(with_intercept({"a", "b", "c"}, xs), y);
    CHECK(scaled.coefficient("b") * 7.0 == doctest::Approx(base.coefficient("b")).epsilon(1e-9));
    const auto ds = with_intercept({"a", "b", "c"}, xs);
    const auto db = with_intercept({"a", "b", "c"}, x);
    const Eigen::VectorXd pred_s = ds.values * scaled.coefficients;
    const Eigen::VectorXd pred_b = db.values * base.coefficients;
    CHECK((pred_s - pred_b).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("lmm matches ols when groups carry no variance") {
  const auto data = grouped_data(5, 100, 5, 0.0, 1.0, true);
  const auto ols = fit_ols(data.design, data.y);
  const auto lmm = fit_random_intercept_lmm(data.design, data.y, data.groups);
  CHECK((lmm.coefficients - ols.coefficients).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(lmm.random_intercept_variance <= 1e-6);
  CHECK(lmm.boundary);
}

TEST_CASE("lmm with singleton groups reports a boundary solution") {
  const auto data = grouped_data(6, 60, 1, 0.5, 1.0);
  const auto lmm = fit_random_intercept_lmm(data.design, data.y, data.groups);
  CHECK(lmm.boundary);
  CHECK_FALSE(lmm.warnings.empty());
  const auto ols = fit_ols(data.design, data.y);
  CHECK((lmm.coefficients - ols.coefficients).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("lmm recovers planted coefficients") {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  double u_var = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = grouped_data(100 + seed, 400, 5, 0.5, 1.0);
    const auto fit = fit_random_intercept_lmm(data.design, data.y, data.groups);
    CHECK(fit.converged);
    mean[0] += fit.coefficient("x1") / 20.0;
    mean[1] += fit.coefficient("x2") / 20.0;
    u_var += fit.random_intercept_variance / 20.0;
  }
  MESSAGE("mean beta = " << mean.transpose() << ", mean sigma_u^2 = " << u_var);
  CHECK(std::abs(mean[0] - 0.5) <= 0.05);
  CHECK(std::abs(mean[1] + 0.3) <= 0.05);
  CHECK(u_var == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("lmm optimum dominates random variance-ratio probes") {
  Rng rng(99);
  const LmmOptions options;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = grouped_data(200 + seed, 50, 4, 0.3 * static_cast<double>(seed), 1.0);
    const auto fit = fit_random_intercept_lmm(data.design, data.y, data.groups);
    CHECK(fit.log_likelihood ==
          doctest::Approx(lmm_profiled_log_likelihood(data.design, data.y, data.groups, fit.variance_ratio)));
    for (int probe = 0; probe < 100; ++probe) {
      const double log_ratio = rng.uniform(options.log_ratio_min, options.log_ratio_max);
      const double ll = lmm_profiled_log_likelihood(data.design, data.y, data.groups, std::exp(log_ratio));
      CHECK(fit.log_likelihood >= ll - 1e-9);
    }
  }
}

TEST_CASE("lmm approaches ols as the group variance vanishes") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<double> gaps;
    for (double sigma_u : {0.0, 0.01, 0.1}) {
      const auto data = grouped_data(300 + seed, 200, 5, sigma_u, 1.0, true);
      const auto ols = fit_ols(data.design, data.y);
      const auto lmm = fit_random_intercept_lmm(data.design, data.y, data.groups);
      gaps.push_back((lmm.coefficients - ols.coefficients).cwiseAbs().maxCoeff());
    }
    CHECK(gaps[0] <= gaps[1] + 1e-9);
    CHECK(gaps[1] <= gaps[2] + 1e-9);
  }
}

TEST_CASE("lmm rejects a single group") {
  auto data = grouped_data(1, 1, 10, 0.0, 1.0);
  try {
    fit_random_intercept_lmm(data.design, data.y, data.groups);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateGroups);
  }
}

TEST_CASE("vif fixture with correlation 0.8") {
  // Zero-mean orthonormal basis over eight rows.
  Eigen::MatrixXd basis(8, 3);
  basis << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1, 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  basis /= std::sqrt(8.0);
  Eigen::MatrixXd x(8, 3);
  x.col(0) = basis.col(0);
  x.col(1) = 0.8 * basis.col(0) + 0.6 * basis.col(1);
  x.col(2) = basis.col(2);
  const auto entries = vif(with_intercept({"x1", "x2", "x3"}, x));
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].column == "x1");
  CHECK(entries[0].vif == doctest::Approx(1.0 / 0.36).epsilon(1e-10));
  CHECK(entries[1].vif == doctest::Approx(1.0 / 0.36).epsilon(1e-10));
  CHECK(entries[2].vif == doctest::Approx(1.0).epsilon(1e-10));

  const auto ortho = vif(with_intercept({"a", "b", "c"}, basis));
  for (const auto& e : ortho) CHECK(e.vif == doctest::Approx(1.0).epsilon(1e-10));

  Eigen::MatrixXd dup(8, 3);
  dup.col(0) = basis.col(0);
  dup.col(1) = basis.col(1);
  dup.col(2) = basis.col(0);
  const auto d = vif(with_intercept({"a", "b", "a2"}, dup));
  CHECK(std::isinf(d[0].vif));
  CHECK(std::isinf(d[2].vif));
  CHECK(d[1].vif == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("stepwise vif pruning") {
  Rng rng(4);
  Eigen::MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto none = stepwise_vif_prune(with_intercept({"a", "b", "c"}, x));
  CHECK(none.removals.empty());
  CHECK(none.retained == std::vector<std::string>{"a", "b", "c"});

  Eigen::MatrixXd dup(200, 4);
  dup.leftCols(3) = x;
  dup.col(3) = x.col(1);
  const auto pruned = stepwise_vif_prune(with_intercept({"a", "b", "c", "b2"}, dup));
  REQUIRE(pruned.removals.size() == 1);
  CHECK(pruned.removals[0].column == "b");
  CHECK(std::isinf(pruned.removals[0].vif));
  CHECK(pruned.retained == std::vector<std::string>{"a", "c", "b2"});
}

TEST_CASE("stepwise vif pruning terminates and meets the threshold") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(6));
    Eigen::MatrixXd x(120, p);
    const Eigen::VectorXd common = Eigen::VectorXd::NullaryExpr(120, [&] { return rng.normal(); });
    for (Eigen::Index j = 0; j < p; ++j) {
      const double load = rng.uniform(0.0, 3.0);
      for (Eigen::Index i = 0; i < 120; ++i) x(i, j) = load * common[i] + rng.normal();
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("c" + std::to_string(j));
    const auto design = with_intercept(names, x);
    const double threshold = rng.uniform(1.5, 6.0);
    const auto result = stepwise_vif_prune(design, threshold);
    CHECK(result.removals.size() <= static_cast<std::size_t>(p));
    CHECK(result.retained.size() + result.removals.size() == static_cast<std::size_t>(p));
    if (result.retained.size() >= 2) {
      for (const auto& e : vif(design.select(result.retained))) CHECK(e.vif <= threshold);
    }
    CHECK(stepwise_vif_prune(design, threshold).retained == result.retained);
  }
}

TEST_CASE("percent change of a log-scale coefficient") {
  CHECK(percent_change(0.0) == 0.0);
  CHECK(std::abs(percent_change(0.519) - 0.680) <= 0.001);
  CHECK(percent_change(-0.693) == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(percent_change(std::log(0.5)) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("normal p-values and csv output") {
  CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0));
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
  DesignMatrix d;
  d.has_intercept = true;
  d.names = {kInterceptName};
  d.values = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  const auto csv = regression_csv(fit_ols(d, y));
  CHECK(csv.rfind("term,estimate,std_error,statistic,p_value\n(Intercept),2.5,", 0) == 0);
}
