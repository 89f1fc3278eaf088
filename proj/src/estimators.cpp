#include "loopi/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace loopi {

EstimatorSpec EstimatorSpec::ols() { return EstimatorSpec{}; }

EstimatorSpec EstimatorSpec::ridge(double lambda) {
  EstimatorSpec s;
  s.kind = Kind::ridge;
  s.lambda = lambda;
  return s;
}

EstimatorSpec EstimatorSpec::lasso(double lambda) {
  EstimatorSpec s;
  s.kind = Kind::lasso;
  s.lambda = lambda;
  return s;
}

EstimatorSpec EstimatorSpec::huber(double k) {
  EstimatorSpec s;
  s.kind = Kind::huber;
  s.huber_k = k;
  return s;
}

EstimatorSpec EstimatorSpec::james_stein(double c) {
  EstimatorSpec s;
  s.kind = Kind::james_stein;
  s.js_c = c;
  return s;
}

void EstimatorSpec::validate() const {
  if (max_iterations < 1)
    throw std::invalid_argument("estimator: max_iterations must be positive");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("estimator: tolerance must be positive");
  switch (kind) {
    case Kind::ols:
      return;
    case Kind::ridge:
      if (!(lambda > 0.0))
        throw std::invalid_argument("estimator ridge: lambda must be > 0");
      return;
    case Kind::lasso:
      if (!(lambda > 0.0))
        throw std::invalid_argument("estimator lasso: lambda must be > 0");
      return;
    case Kind::huber:
      if (!(huber_k > 0.0))
        throw std::invalid_argument("estimator huber: k must be > 0");
      return;
    case Kind::james_stein:
      if (!(js_c > 0.0))
        throw std::invalid_argument("estimator james_stein: c must be > 0");
      return;
  }
  throw std::invalid_argument("estimator: unknown kind");
}

std::string EstimatorSpec::name() const {
  switch (kind) {
    case Kind::ols:
      return "ols";
    case Kind::ridge:
      return "ridge";
    case Kind::lasso:
      return "lasso";
    case Kind::huber:
      return "huber";
    case Kind::james_stein:
      return "james_stein";
  }
  return "?";
}

namespace {

void check_dims(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || x.cols() < 1)
    throw std::invalid_argument("fit: design matrix must be nonempty");
  if (x.rows() != y.size())
    throw std::invalid_argument("fit: X and Y row counts differ");
}

}  // namespace

FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_dims(x, y);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x.rows(), x.cols());
  // Pivots below eps * max(n, p) relative to the largest are treated as zero,
  // which gives the minimum-norm solution on rank-deficient designs.
  cod.setThreshold(std::numeric_limits<double>::epsilon() *
                   static_cast<double>(std::max(x.rows(), x.cols())));
  cod.compute(x);
  FitResult out;
  out.beta = cod.solve(y);
  return out;
}

FitResult fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double lambda) {
  check_dims(x, y);
  if (!(lambda > 0.0))
    throw std::invalid_argument("fit_ridge: lambda must be > 0");
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  FitResult out;
  out.beta = gram.ldlt().solve(x.transpose() * y);
  return out;
}

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * n) +
         lambda * beta.lpNorm<1>();
}

namespace {
double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}
}  // namespace

FitResult fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double lambda, const EstimatorSpec& controls,
                    const Eigen::VectorXd* warm_start) {
  check_dims(x, y);
  if (!(lambda > 0.0))
    throw std::invalid_argument("fit_lasso: lambda must be > 0");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p)
      throw std::invalid_argument("fit_lasso: warm start size mismatch");
    beta = *warm_start;
  }
  const Eigen::VectorXd col_scale = x.colwise().squaredNorm() * inv_n;
  Eigen::VectorXd residual = y - x * beta;

  FitResult out;
  int sweep = 0;
  bool converged = false;
  for (; sweep < controls.max_iterations; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_scale(j) <= 0.0) continue;  // zero column stays at zero
      const double old = beta(j);
      const double rho = x.col(j).dot(residual) * inv_n + col_scale(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_scale(j);
      if (updated != old) {
        residual += x.col(j) * (old - updated);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    out.objective_path.push_back(lasso_objective(x, y, beta, lambda));
    if (max_change <= controls.tolerance) {
      converged = true;
      ++sweep;
      break;
    }
  }
  out.beta = std::move(beta);
  out.iterations = sweep;
  out.converged = converged;
  out.objective = lasso_objective(x, y, out.beta, lambda);

  // KKT residual: gradient matches lambda * sign on the active set and stays
  // within [-lambda, lambda] elsewhere.
  double kkt = 0.0;
  const Eigen::VectorXd grad = x.transpose() * (y - x * out.beta) * inv_n;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (out.beta(j) != 0.0)
      kkt = std::max(kkt, std::abs(grad(j) - lambda * (out.beta(j) > 0 ? 1.0 : -1.0)));
    else
      kkt = std::max(kkt, std::max(0.0, std::abs(grad(j)) - lambda));
  }
  out.kkt_residual = kkt;
  return out;
}

double huber_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double k) {
  const Eigen::VectorXd r = y - x * beta;
  double obj = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r(i));
    obj += a <= k ? 0.5 * a * a : k * a - 0.5 * k * k;
  }
  return obj;
}

FitResult fit_huber(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double k, const EstimatorSpec& controls,
                    const Eigen::VectorXd* warm_start) {
  check_dims(x, y);
  if (!(k > 0.0)) throw std::invalid_argument("fit_huber: k must be > 0");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  Eigen::VectorXd beta;
  if (warm_start) {
    if (warm_start->size() != p)
      throw std::invalid_argument("fit_huber: warm start size mismatch");
    beta = *warm_start;
  } else {
    beta = fit_ols(x, y).beta;
  }

  FitResult out;
  double prev_obj = huber_objective(x, y, beta, k);
  out.objective_path.push_back(prev_obj);

  Eigen::VectorXd weights(n);
  int iter = 0;
  bool converged = false;
  for (; iter < controls.max_iterations; ++iter) {
    const Eigen::VectorXd r = y - x * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::abs(r(i));
      weights(i) = a <= k ? 1.0 : k / a;
    }
    Eigen::MatrixXd gram = x.transpose() * weights.asDiagonal() * x;
    const Eigen::VectorXd rhs = x.transpose() * (weights.asDiagonal() * y);
    Eigen::VectorXd next = gram.ldlt().solve(rhs);
    if (!next.allFinite() ||
        (gram * next - rhs).norm() >
            1e-8 * (rhs.norm() + gram.norm() * next.norm() +
                    std::numeric_limits<double>::min())) {
      // Singular weighted system: ridge jitter, recorded in the result.
      gram.diagonal().array() += 1e-10 * gram.trace();
      next = gram.ldlt().solve(rhs);
      out.jitter_applied = true;
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    const double obj = huber_objective(x, y, beta, k);
    out.objective_path.push_back(obj);
    // IRLS majorizes the loss, so the objective cannot increase.
    if (obj > prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)))
      throw std::runtime_error("fit_huber: objective increased across an IRLS step");
    prev_obj = obj;
    if (change <= controls.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  out.beta = std::move(beta);
  out.iterations = iter;
  out.converged = converged;
  out.objective = prev_obj;
  return out;
}

FitResult fit_james_stein(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          double c) {
  check_dims(x, y);
  if (!(c > 0.0)) throw std::invalid_argument("fit_james_stein: c must be > 0");
  FitResult out = fit_ols(x, y);
  const Eigen::VectorXd fitted = x * out.beta;
  const double denom = fitted.squaredNorm();
  const double scale = std::numeric_limits<double>::epsilon() *
                       x.squaredNorm() * out.beta.squaredNorm();
  if (denom <= scale) {
    out.beta.setZero();
    out.degenerate_shrinkage = true;
    return out;
  }
  out.beta *= 1.0 - c * static_cast<double>(x.cols()) / denom;
  return out;
}

FitResult fit(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
              const Eigen::VectorXd& y, const Eigen::VectorXd* warm_start) {
  spec.validate();
  switch (spec.kind) {
    case EstimatorSpec::Kind::ols:
      return fit_ols(x, y);
    case EstimatorSpec::Kind::ridge:
      return fit_ridge(x, y, spec.lambda);
    case EstimatorSpec::Kind::lasso:
      return fit_lasso(x, y, spec.lambda, spec, warm_start);
    case EstimatorSpec::Kind::huber:
      return fit_huber(x, y, spec.huber_k, spec, warm_start);
    case EstimatorSpec::Kind::james_stein:
      return fit_james_stein(x, y, spec.js_c);
  }
  throw std::invalid_argument("fit: unknown estimator kind");
}

FitResult fit_on_subset(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y,
                        const std::vector<Eigen::Index>& excluded,
                        const Eigen::VectorXd* warm_start) {
  check_dims(x, y);
  const Eigen::Index n = x.rows();
  std::vector<bool> drop(static_cast<std::size_t>(n), false);
  Eigen::Index dropped = 0;
  for (Eigen::Index idx : excluded) {
    if (idx < 0 || idx >= n)
      throw std::invalid_argument("fit_on_subset: excluded index out of range");
    if (!drop[static_cast<std::size_t>(idx)]) {
      drop[static_cast<std::size_t>(idx)] = true;
      ++dropped;
    }
  }
  if (dropped == n)
    throw std::invalid_argument("fit_on_subset: no rows left after exclusion");
  if (dropped == 0) return fit(spec, x, y, warm_start);

  Eigen::MatrixXd xr(n - dropped, x.cols());
  Eigen::VectorXd yr(n - dropped);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (drop[static_cast<std::size_t>(i)]) continue;
    xr.row(k) = x.row(i);
    yr(k) = y(i);
    ++k;
  }
  return fit(spec, xr, yr, warm_start);
}

}  // namespace loopi
