#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "loopi/estimators.hpp"
#include "loopi/rng.hpp"

using namespace loopi;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, RngStream& rng) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::VectorXd random_vector(int n, RngStream& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Independent oracle: minimum-norm least squares straight from the SVD.
Eigen::VectorXd svd_min_norm_solution(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = std::numeric_limits<double>::epsilon() *
                        std::max(x.rows(), x.cols()) * sv(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * y;
}

const Eigen::MatrixXd kTinyX = (Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished();
const Eigen::VectorXd kTinyY = (Eigen::VectorXd(2) << 0.0, 2.0).finished();

}  // namespace

TEST_CASE("ols on two points fits their mean") {
  CHECK(fit_ols(kTinyX, kTinyY).beta(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ols interpolates exact data") {
  RngStream rng(1, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(12, 4, rng);
  const Eigen::VectorXd beta = random_vector(4, rng);
  const Eigen::VectorXd beta_hat = fit_ols(x, x * beta).beta;
  CHECK((beta_hat - beta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ols returns the minimum-norm solution on wide designs") {
  RngStream rng(2, 0, StreamPurpose::generic);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd x = random_matrix(5, 8, rng);
    const Eigen::VectorXd y = random_vector(5, rng);
    const Eigen::VectorXd beta_hat = fit_ols(x, y).beta;
    CHECK((beta_hat - svd_min_norm_solution(x, y)).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("ols handles rank-deficient designs with pseudo-inverse semantics") {
  RngStream rng(3, 0, StreamPurpose::generic);
  Eigen::MatrixXd x = random_matrix(10, 3, rng);
  x.conservativeResize(Eigen::NoChange, 4);
  x.col(3) = x.col(0) + x.col(1);  // exact collinearity
  const Eigen::VectorXd y = random_vector(10, rng);
  const Eigen::VectorXd beta_hat = fit_ols(x, y).beta;
  CHECK((beta_hat - svd_min_norm_solution(x, y)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge shrinks monotonically and meets OLS at lambda -> 0") {
  RngStream rng(4, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(30, 5, rng);
  const Eigen::VectorXd y = random_vector(30, rng);
  double previous_norm = fit_ridge(x, y, 1e-6).beta.norm();
  for (double lambda : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const double norm = fit_ridge(x, y, lambda).beta.norm();
    CHECK(norm < previous_norm);
    previous_norm = norm;
  }
  const double tiny = 1e-10 * (x.transpose() * x).trace() / 5.0;
  CHECK((fit_ridge(x, y, tiny).beta - fit_ols(x, y).beta).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("ridge hand example") {
  // X'X = 2, X'Y = 2, lambda = 2 -> beta = 2 / 4
  CHECK(fit_ridge(kTinyX, kTinyY, 2.0).beta(0) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("lasso keeps beta at zero above the KKT threshold") {
  RngStream rng(5, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(40, 6, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  const double lambda_max =
      (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
  const EstimatorSpec controls = EstimatorSpec::lasso(lambda_max * 1.0001);
  const FitResult res = fit_lasso(x, y, lambda_max * 1.0001, controls);
  CHECK(res.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(res.converged);
  // just below the threshold something activates
  const FitResult res2 = fit_lasso(x, y, lambda_max * 0.999, controls);
  CHECK(res2.beta.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("lasso matches soft thresholding on an orthonormal design") {
  // Scaled identity block: X'X / n = I.
  const int n = 8;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  x.diagonal().setConstant(std::sqrt(static_cast<double>(n)));
  RngStream rng(6, 0, StreamPurpose::generic);
  const Eigen::VectorXd y = random_vector(n, rng);
  const double lambda = 0.2;
  const EstimatorSpec controls = EstimatorSpec::lasso(lambda);
  const Eigen::VectorXd beta_hat = fit_lasso(x, y, lambda, controls).beta;
  for (int j = 0; j < n; ++j) {
    const double z = x.col(j).dot(y) / n;
    const double expected =
        std::copysign(std::max(std::abs(z) - lambda, 0.0), z);
    CHECK(beta_hat(j) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("lasso approaches OLS as lambda -> 0 on a tall design") {
  RngStream rng(7, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(60, 5, rng);
  const Eigen::VectorXd y = random_vector(60, rng);
  const EstimatorSpec controls = EstimatorSpec::lasso(1e-8);
  const FitResult res = fit_lasso(x, y, 1e-8, controls);
  CHECK((res.beta - fit_ols(x, y).beta).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("lasso reports a small KKT residual at convergence") {
  RngStream rng(8, 0, StreamPurpose::generic);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 30 + 5 * rep;
    const Eigen::MatrixXd x = random_matrix(n, 10, rng);
    const Eigen::VectorXd y = random_vector(n, rng);
    const double lambda = 0.05 * (1 + rep % 3);
    const FitResult res =
        fit_lasso(x, y, lambda, EstimatorSpec::lasso(lambda));
    REQUIRE(res.converged);
    CHECK(*res.kkt_residual <= 1e-6);
  }
}

TEST_CASE("huber equals ols when no residual leaves the quadratic regime") {
  RngStream rng(9, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(25, 3, rng);
  const Eigen::VectorXd y = random_vector(25, rng);
  const double worst = (y - x * fit_ols(x, y).beta).cwiseAbs().maxCoeff();
  const EstimatorSpec spec = EstimatorSpec::huber(worst * 2.0);
  const FitResult res = fit_huber(x, y, spec.huber_k, spec);
  CHECK(res.converged);
  CHECK((res.beta - fit_ols(x, y).beta).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("huber location fit approaches the sample median as k -> 0") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(9, 1);
  Eigen::VectorXd y(9);
  y << -3.1, -1.2, -0.4, 0.3, 0.9, 1.7, 2.6, 4.2, 8.5;  // median 0.9
  EstimatorSpec spec = EstimatorSpec::huber(1e-4);
  spec.max_iterations = 200000;
  const FitResult res = fit_huber(ones, y, spec.huber_k, spec);
  CHECK(res.converged);
  CHECK(res.beta(0) == doctest::Approx(0.9).epsilon(1e-4));
}

TEST_CASE("huber minimizer beats nearby points and the ols start") {
  RngStream rng(10, 0, StreamPurpose::generic);
  Eigen::MatrixXd x = random_matrix(40, 4, rng);
  Eigen::VectorXd y = random_vector(40, rng);
  y(0) += 25.0;  // outlier so huber != ols
  const double k = 1.345;
  const EstimatorSpec spec = EstimatorSpec::huber(k);
  const FitResult res = fit_huber(x, y, k, spec);
  REQUIRE(res.converged);
  const double at_optimum = huber_objective(x, y, res.beta, k);
  CHECK(at_optimum <= huber_objective(x, y, fit_ols(x, y).beta, k));
  for (int probe = 0; probe < 20; ++probe) {
    Eigen::VectorXd direction = random_vector(4, rng);
    direction *= 1e-3 / direction.norm();
    CHECK(at_optimum <=
          huber_objective(x, y, res.beta + direction, k) + 1e-12);
  }
}

TEST_CASE("huber IRLS objective path never increases") {
  RngStream rng(11, 0, StreamPurpose::generic);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd x = random_matrix(30, 5, rng);
    Eigen::VectorXd y = random_vector(30, rng) * 3.0;
    const EstimatorSpec spec = EstimatorSpec::huber(0.8);
    const FitResult res = fit_huber(x, y, spec.huber_k, spec);
    for (std::size_t i = 1; i < res.objective_path.size(); ++i)
      CHECK(res.objective_path[i] <=
            res.objective_path[i - 1] + 1e-10 * (1 + res.objective_path[i - 1]));
  }
}

TEST_CASE("james-stein shrinkage limits") {
  RngStream rng(12, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(20, 4, rng);
  const Eigen::VectorXd y = random_vector(20, rng);
  const Eigen::VectorXd ols = fit_ols(x, y).beta;

  SUBCASE("c -> 0 recovers ols") {
    CHECK((fit_james_stein(x, y, 1e-300).beta - ols).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("c p = beta' X'X beta gives the zero vector") {
    const double denom = (x * ols).squaredNorm();
    const FitResult res = fit_james_stein(x, y, denom / 4.0);
    CHECK(res.beta.cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(res.degenerate_shrinkage);
  }
  SUBCASE("hand example") {
    // beta_ls = 1, X'X = 2, c = 1, p = 1 -> factor 1 - 1/2
    const FitResult res = fit_james_stein(kTinyX, kTinyY, 1.0);
    CHECK(res.beta(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("degenerate denominator returns zero with a flag") {
    const Eigen::VectorXd orthogonal =
        (Eigen::VectorXd(2) << 1.0, -1.0).finished();
    const FitResult res = fit_james_stein(kTinyX, orthogonal, 1.0);
    CHECK(res.degenerate_shrinkage);
    CHECK(res.beta.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("fit_on_subset semantics") {
  RngStream rng(13, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(12, 3, rng);
  const Eigen::VectorXd y = random_vector(12, rng);
  const EstimatorSpec spec = EstimatorSpec::ols();

  SUBCASE("empty exclusion equals the plain fit") {
    CHECK((fit_on_subset(spec, x, y, {}).beta - fit(spec, x, y).beta)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  SUBCASE("exclusion order and duplicates do not matter") {
    const Eigen::VectorXd a = fit_on_subset(spec, x, y, {2, 7}).beta;
    const Eigen::VectorXd b = fit_on_subset(spec, x, y, {7, 2, 7}).beta;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hand example: dropping the first point leaves the other") {
    CHECK(fit_on_subset(spec, kTinyX, kTinyY, {0}).beta(0) ==
          doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("excluding everything fails") {
    std::vector<Eigen::Index> all(12);
    std::iota(all.begin(), all.end(), 0);
    CHECK_THROWS_AS(fit_on_subset(spec, x, y, all), std::invalid_argument);
  }
}

TEST_CASE("every estimator is symmetric in the observations") {
  RngStream rng(14, 0, StreamPurpose::generic);
  const int n = 24, p = 6;
  const Eigen::MatrixXd x = random_matrix(n, p, rng);
  Eigen::VectorXd beta_true = random_vector(p, rng);
  const Eigen::VectorXd y = x * beta_true + random_vector(n, rng);

  const EstimatorSpec specs[] = {
      EstimatorSpec::ols(), EstimatorSpec::ridge(0.5),
      EstimatorSpec::lasso(0.05), EstimatorSpec::huber(1.0),
      EstimatorSpec::james_stein(0.3)};

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // deterministic shuffle
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(rng.next_u64() %
                                             static_cast<std::uint64_t>(i + 1))]);
  Eigen::MatrixXd xp(n, p);
  Eigen::VectorXd yp(n);
  for (int i = 0; i < n; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp(i) = y(perm[i]);
  }

  for (const EstimatorSpec& spec : specs) {
    CAPTURE(spec.name());
    const Eigen::VectorXd original = fit(spec, x, y).beta;
    const Eigen::VectorXd permuted = fit(spec, xp, yp).beta;
    CHECK((original - permuted).cwiseAbs().maxCoeff() <= 10 * spec.tolerance);
  }
}

TEST_CASE("ols is equivariant under coefficient shifts") {
  RngStream rng(15, 0, StreamPurpose::generic);
  const Eigen::MatrixXd x = random_matrix(20, 4, rng);
  const Eigen::VectorXd y = random_vector(20, rng);
  const Eigen::VectorXd delta = random_vector(4, rng);
  const Eigen::VectorXd base = fit_ols(x, y).beta;
  const Eigen::VectorXd shifted = fit_ols(x, y + x * delta).beta;
  CHECK((shifted - base - delta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimator spec validation") {
  CHECK_THROWS_AS(EstimatorSpec::ridge(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EstimatorSpec::lasso(-1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EstimatorSpec::huber(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EstimatorSpec::james_stein(0.0).validate(),
                  std::invalid_argument);
  EstimatorSpec bad = EstimatorSpec::ols();
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
