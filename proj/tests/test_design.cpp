#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "loopi/design.hpp"

using namespace loopi;

namespace {

double sample_skewness(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  double m2 = 0.0, m3 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double d = v(i) - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(v.size());
  m3 /= static_cast<double>(v.size());
  return m3 / std::pow(m2, 1.5);
}

}  // namespace

TEST_CASE("sigma_sqrt on the identity is the identity") {
  const Eigen::MatrixXd s = sigma_sqrt(CovarianceSpec::identity(), 3);
  CHECK((s - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sigma_sqrt of a diagonal matrix takes elementwise roots") {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
  sigma(0, 0) = 4.0;
  sigma(1, 1) = 9.0;
  const Eigen::MatrixXd s =
      sigma_sqrt(CovarianceSpec::explicit_matrix(sigma), 2);
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("sigma_sqrt squares back to a toeplitz covariance") {
  const CovarianceSpec spec = CovarianceSpec::toeplitz(0.5);
  const Eigen::MatrixXd s = sigma_sqrt(spec, 4);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s * s - spec.realize(4)).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("sigma_sqrt rejects a non positive definite matrix") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_WITH_AS(sigma_sqrt(CovarianceSpec::explicit_matrix(sigma), 2),
                       doctest::Contains("-1"), std::invalid_argument);
}

TEST_CASE("spec validation rejects broken laws") {
  CHECK_THROWS_AS(VDist::student_t(4.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(UDist::student_t(2.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LDist::two_point(1.0, 2.0, 0.5).validate(),
                  std::invalid_argument);  // E[l^2] = 2.5
  CHECK_THROWS_AS(LDist::scaled_uniform(0.0, 1.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(LDist::two_point(0.0, std::sqrt(2.0), 0.5).validate(),
                  std::invalid_argument);  // |l| not bounded away from 0
  DesignSpec bad;
  bad.n = 0;
  bad.p = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("l laws hit E[l^2] = 1 and min |l| = c") {
  const LDist laws[] = {
      LDist::constant_one(),
      LDist::two_point(std::sqrt(0.5), std::sqrt(1.5), 0.5),
      LDist::scaled_uniform(0.5, 1.5),
  };
  for (const LDist& law : laws) {
    CAPTURE(law.name());
    law.validate();
    RngStream rng(11, 0, StreamPurpose::generic);
    const int draws = 1000000;
    double sum_sq = 0.0;
    double min_abs = 1e300;
    for (int i = 0; i < draws; ++i) {
      const double l = law.sample(rng);
      sum_sq += l * l;
      min_abs = std::min(min_abs, std::abs(l));
    }
    CHECK(std::abs(sum_sq / draws - 1.0) < 0.01);
    CHECK(min_abs >= law.min_abs() - 1e-12);
  }
}

TEST_CASE("v laws are standardized") {
  const VDist laws[] = {VDist::normal(), VDist::rademacher(), VDist::uniform(),
                        VDist::student_t(6.0)};
  for (const VDist& law : laws) {
    CAPTURE(law.name());
    RngStream rng(13, 0, StreamPurpose::generic);
    const int draws = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double v = law.sample(rng);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / draws;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sum_sq / draws - mean * mean - 1.0) < 0.01);
  }
}

TEST_CASE("sample covariance of an identity design converges to I") {
  DesignSpec spec;
  spec.n = 10000;
  spec.p = 2;
  RngStream rng(17, 0, StreamPurpose::design);
  const Eigen::MatrixXd x = sample_design(spec, rng);
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(spec.n);
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("two-point l splits row norms into two clusters") {
  DesignSpec spec;
  spec.n = 400;
  spec.p = 1600;
  spec.l = LDist::two_point(std::sqrt(0.5), std::sqrt(1.5), 0.5);
  RngStream rng(19, 0, StreamPurpose::design);
  const Eigen::MatrixXd x = sample_design(spec, rng);
  int near_low = 0, near_high = 0;
  for (int i = 0; i < spec.n; ++i) {
    const double scaled = x.row(i).squaredNorm() / spec.p;
    if (std::abs(scaled - 0.5) < 0.15)
      ++near_low;
    else if (std::abs(scaled - 1.5) < 0.25)
      ++near_high;
  }
  CHECK(near_low + near_high == spec.n);
  CHECK(near_low > spec.n / 4);
  CHECK(near_high > spec.n / 4);
}

TEST_CASE("responses obey Y = X beta + sigma u") {
  DesignSpec spec;
  spec.n = 20;
  spec.p = 3;
  RngStream design_rng(23, 0, StreamPurpose::design);
  const Eigen::MatrixXd x = sample_design(spec, design_rng);

  SUBCASE("beta = 0, sigma = 1 gives Y = u") {
    RngStream rng(23, 0, StreamPurpose::response);
    const auto [y, u] =
        sample_responses(x, Eigen::VectorXd::Zero(3), 1.0, spec.u, rng);
    CHECK((y - u).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("sigma scales the stored draw exactly") {
    Eigen::VectorXd beta(3);
    beta << 1.0, -2.0, 0.5;
    RngStream rng(23, 1, StreamPurpose::response);
    const auto [y, u] = sample_responses(x, beta, 2.0, spec.u, rng);
    CHECK((y - x * beta - 2.0 * u).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("dimension mismatch is rejected") {
    RngStream rng(23, 2, StreamPurpose::response);
    CHECK_THROWS_AS(
        sample_responses(x, Eigen::VectorXd::Zero(5), 1.0, spec.u, rng),
        std::invalid_argument);
  }
}

TEST_CASE("centered exponential errors show the analytic skewness") {
  // Exp(1) - 1 has skewness 2.
  RngStream rng(29, 0, StreamPurpose::response);
  const UDist law = UDist::centered_exponential();
  Eigen::VectorXd u(200000);
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = law.sample(rng);
  CHECK(sample_skewness(u) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("identical seeds reproduce draws bit for bit") {
  DesignSpec spec;
  spec.n = 30;
  spec.p = 4;
  spec.covariance = CovarianceSpec::toeplitz(0.3);
  spec.l = LDist::scaled_uniform(0.5, 1.5);
  const DesignSampler sampler(spec);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(4, 0.7);
  const ModelInstance a = sampler.sample_model(beta, 2.0, {42, 3});
  const ModelInstance b = sampler.sample_model(beta, 2.0, {42, 3});
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  const ModelInstance c = sampler.sample_model(beta, 2.0, {42, 4});
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
  CHECK((a.y - a.x * beta - 2.0 * a.u).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((a.sqrt_sigma * a.sqrt_sigma - spec.covariance.realize(4))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("standardized design rows have the law l * v") {
  DesignSpec spec;
  spec.n = 20000;
  spec.p = 3;
  spec.covariance = CovarianceSpec::toeplitz(0.5);
  spec.l = LDist::two_point(std::sqrt(0.5), std::sqrt(1.5), 0.5);
  const DesignSampler sampler(spec);
  RngStream rng(31, 0, StreamPurpose::design);
  const Eigen::MatrixXd x = sampler.sample_design(rng);
  const Eigen::MatrixXd z =
      x * sampler.sqrt_sigma().inverse();  // rows Sigma^{-1/2} x_i
  const Eigen::VectorXd mean = z.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
  // E[(l v)(l v)'] = E[l^2] I = I
  const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(spec.n);
  CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("prediction pair matches the training law") {
  DesignSpec spec;
  spec.n = 5;
  spec.p = 4;
  spec.u = UDist::two_point();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);
  const DesignSampler sampler(spec);
  RngStream rng(37, 0, StreamPurpose::prediction);
  double sum_norm_sq = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const auto [x0, y0] = sampler.sample_prediction_pair(beta, 1.0, rng);
    CHECK(std::abs(y0) == 1.0);  // beta = 0 so y0 = u0 = +-1
    sum_norm_sq += x0.squaredNorm();
  }
  // E|x0|^2 = E[l^2] * p = p
  CHECK(std::abs(sum_norm_sq / draws - 4.0) < 0.1);
}
