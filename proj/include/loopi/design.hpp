#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "loopi/distributions.hpp"
#include "loopi/rng.hpp"

namespace loopi {

// Recipe for the design covariance Sigma.
struct CovarianceSpec {
  enum class Kind { identity, toeplitz, explicit_matrix };

  Kind kind = Kind::identity;
  double rho = 0.0;        // toeplitz: Sigma_ij = rho^|i-j|, rho in (-1, 1)
  Eigen::MatrixXd matrix;  // explicit_matrix only

  static CovarianceSpec identity();
  static CovarianceSpec toeplitz(double rho);
  static CovarianceSpec explicit_matrix(Eigen::MatrixXd sigma);

  void validate(int p) const;
  Eigen::MatrixXd realize(int p) const;
  bool is_identity() const { return kind == Kind::identity; }
  std::string name() const;
};

// The unique symmetric positive definite square root of Sigma, computed by
// eigendecomposition. Rejects matrices whose smallest eigenvalue falls below
// 1e-12 times the largest (reported in the error message).
Eigen::MatrixXd sigma_sqrt(const CovarianceSpec& spec, int p);

// Distributional recipe for one training draw: rows x_i = Sigma^{1/2} l_i v_i.
struct DesignSpec {
  int n = 0;
  int p = 0;
  CovarianceSpec covariance;
  LDist l;
  VDist v;
  UDist u;

  void validate() const;
};

struct SeedInfo {
  std::uint64_t master = 0;
  std::uint64_t replication = 0;
};

// One realized training draw. Y = X beta + sigma * u holds for the stored u.
struct ModelInstance {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  Eigen::VectorXd beta;
  double sigma = 1.0;
  Eigen::MatrixXd sqrt_sigma;
  SeedInfo seed;
};

// Binds a spec to its realized covariance root so repeated sampling skips the
// p^3 eigendecomposition. All sampling is pure given the stream argument.
class DesignSampler {
 public:
  explicit DesignSampler(DesignSpec spec);

  const DesignSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& sqrt_sigma() const { return sqrt_sigma_; }

  Eigen::MatrixXd sample_design(RngStream& rng) const;
  std::pair<Eigen::VectorXd, double> sample_prediction_pair(
      const Eigen::VectorXd& beta, double sigma, RngStream& rng) const;

  // Design and responses drawn from the (seed, replication) substreams.
  ModelInstance sample_model(const Eigen::VectorXd& beta, double sigma,
                             SeedInfo seed) const;

 private:
  DesignSpec spec_;
  Eigen::MatrixXd sqrt_sigma_;
};

Eigen::MatrixXd sample_design(const DesignSpec& spec, RngStream& rng);

// (Y, u) with Y = X beta + sigma u.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_responses(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double sigma,
    const UDist& u_dist, RngStream& rng);

std::pair<Eigen::VectorXd, double> sample_prediction_pair(
    const DesignSpec& spec, const Eigen::VectorXd& beta, double sigma,
    RngStream& rng);

}  // namespace loopi
