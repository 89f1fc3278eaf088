#include "loopi/design.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace loopi {

CovarianceSpec CovarianceSpec::identity() { return CovarianceSpec{}; }

CovarianceSpec CovarianceSpec::toeplitz(double rho) {
  CovarianceSpec s;
  s.kind = Kind::toeplitz;
  s.rho = rho;
  return s;
}

CovarianceSpec CovarianceSpec::explicit_matrix(Eigen::MatrixXd sigma) {
  CovarianceSpec s;
  s.kind = Kind::explicit_matrix;
  s.matrix = std::move(sigma);
  return s;
}

void CovarianceSpec::validate(int p) const {
  switch (kind) {
    case Kind::identity:
      return;
    case Kind::toeplitz:
      if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("covariance toeplitz: rho must be in (-1,1)");
      return;
    case Kind::explicit_matrix: {
      if (matrix.rows() != p || matrix.cols() != p)
        throw std::invalid_argument("covariance explicit: matrix must be p x p");
      const double scale = matrix.cwiseAbs().maxCoeff();
      if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("covariance explicit: matrix must be symmetric");
      return;
    }
  }
  throw std::invalid_argument("covariance: unknown kind");
}

Eigen::MatrixXd CovarianceSpec::realize(int p) const {
  validate(p);
  switch (kind) {
    case Kind::identity:
      return Eigen::MatrixXd::Identity(p, p);
    case Kind::toeplitz: {
      Eigen::MatrixXd sigma(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
      return sigma;
    }
    case Kind::explicit_matrix:
      return 0.5 * (matrix + matrix.transpose());
  }
  return Eigen::MatrixXd::Identity(p, p);
}

std::string CovarianceSpec::name() const {
  switch (kind) {
    case Kind::identity:
      return "identity";
    case Kind::toeplitz:
      return "toeplitz";
    case Kind::explicit_matrix:
      return "explicit";
  }
  return "?";
}

Eigen::MatrixXd sigma_sqrt(const CovarianceSpec& spec, int p) {
  if (p < 1) throw std::invalid_argument("sigma_sqrt: p must be positive");
  if (spec.is_identity()) return Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd sigma = spec.realize(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sigma_sqrt: eigendecomposition failed");
  const Eigen::VectorXd& eval = solver.eigenvalues();
  const double lambda_max = eval(p - 1);
  const double lambda_min = eval(0);
  if (!(lambda_min > 1e-12 * lambda_max)) {
    std::ostringstream msg;
    msg << "sigma_sqrt: covariance is not positive definite "
        << "(smallest eigenvalue " << lambda_min << ", largest " << lambda_max
        << ")";
    throw std::invalid_argument(msg.str());
  }
  return solver.eigenvectors() * eval.cwiseSqrt().asDiagonal() *
         solver.eigenvectors().transpose();
}

void DesignSpec::validate() const {
  if (n < 1) throw std::invalid_argument("design.n: must be a positive integer");
  if (p < 1) throw std::invalid_argument("design.p: must be a positive integer");
  covariance.validate(p);
  l.validate();
  v.validate();
  u.validate();
}

DesignSampler::DesignSampler(DesignSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  sqrt_sigma_ = loopi::sigma_sqrt(spec_.covariance, spec_.p);
}

Eigen::MatrixXd DesignSampler::sample_design(RngStream& rng) const {
  const int n = spec_.n;
  const int p = spec_.p;
  // Row i is l_i * v_i, drawn row by row: l_i first, then v_i1..v_ip.
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    const double li = spec_.l.sample(rng);
    for (int j = 0; j < p; ++j) x(i, j) = li * spec_.v.sample(rng);
  }
  if (!spec_.covariance.is_identity()) x = x * sqrt_sigma_;
  return x;
}

std::pair<Eigen::VectorXd, double> DesignSampler::sample_prediction_pair(
    const Eigen::VectorXd& beta, double sigma, RngStream& rng) const {
  if (beta.size() != spec_.p)
    throw std::invalid_argument("sample_prediction_pair: beta size mismatch");
  if (!(sigma > 0.0))
    throw std::invalid_argument("sample_prediction_pair: sigma must be positive");
  const int p = spec_.p;
  Eigen::VectorXd x0(p);
  const double l0 = spec_.l.sample(rng);
  for (int j = 0; j < p; ++j) x0(j) = l0 * spec_.v.sample(rng);
  if (!spec_.covariance.is_identity()) x0 = sqrt_sigma_ * x0;
  const double u0 = spec_.u.sample(rng);
  return {x0, beta.dot(x0) + sigma * u0};
}

ModelInstance DesignSampler::sample_model(const Eigen::VectorXd& beta,
                                          double sigma, SeedInfo seed) const {
  if (!(sigma > 0.0))
    throw std::invalid_argument("sample_model: sigma must be positive");
  ModelInstance m;
  m.beta = beta;
  m.sigma = sigma;
  m.sqrt_sigma = sqrt_sigma_;
  m.seed = seed;
  RngStream design_stream(seed.master, seed.replication, StreamPurpose::design);
  m.x = sample_design(design_stream);
  RngStream response_stream(seed.master, seed.replication,
                            StreamPurpose::response);
  auto [y, u] = sample_responses(m.x, beta, sigma, spec_.u, response_stream);
  m.y = std::move(y);
  m.u = std::move(u);
  return m;
}

Eigen::MatrixXd sample_design(const DesignSpec& spec, RngStream& rng) {
  return DesignSampler(spec).sample_design(rng);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_responses(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double sigma,
    const UDist& u_dist, RngStream& rng) {
  if (x.cols() != beta.size())
    throw std::invalid_argument("sample_responses: beta size mismatch");
  if (!(sigma > 0.0))
    throw std::invalid_argument("sample_responses: sigma must be positive");
  const Eigen::Index n = x.rows();
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = u_dist.sample(rng);
  Eigen::VectorXd y = x * beta + sigma * u;
  return {std::move(y), std::move(u)};
}

std::pair<Eigen::VectorXd, double> sample_prediction_pair(
    const DesignSpec& spec, const Eigen::VectorXd& beta, double sigma,
    RngStream& rng) {
  return DesignSampler(spec).sample_prediction_pair(beta, sigma, rng);
}

}  // namespace loopi
