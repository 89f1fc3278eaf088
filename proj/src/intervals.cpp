#include "loopi/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "loopi/parallel.hpp"

namespace loopi {

double empirical_quantile(const Eigen::VectorXd& sample, double t) {
  const Eigen::Index m = sample.size();
  if (m < 1) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("empirical_quantile: t must be in (0,1)");
  Eigen::Index k = static_cast<Eigen::Index>(
      std::ceil(t * static_cast<double>(m)));
  k = std::clamp<Eigen::Index>(k, 1, m);
  std::vector<double> work(sample.data(), sample.data() + m);
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end());
  return work[static_cast<std::size_t>(k - 1)];
}

LooResiduals loo_residuals_generic(const EstimatorSpec& spec,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y, int jobs) {
  if (x.rows() < 2)
    throw std::invalid_argument("loo_residuals_generic: needs n >= 2");
  if (x.rows() != y.size())
    throw std::invalid_argument("loo_residuals_generic: X and Y row counts differ");
  spec.validate();
  const Eigen::Index n = x.rows();

  // Warm start iterative refits from the full-data fit; the held-out
  // perturbation is small, so this speeds refits without changing optima.
  Eigen::VectorXd warm;
  const Eigen::VectorXd* warm_ptr = nullptr;
  if (spec.iterative()) {
    warm = fit(spec, x, y).beta;
    warm_ptr = &warm;
  }

  LooResiduals out;
  out.method = LooResiduals::Method::brute_force;
  out.estimator = spec;
  out.values.resize(n);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t idx) {
    const Eigen::Index i = static_cast<Eigen::Index>(idx);
    try {
      FitResult refit = fit_on_subset(spec, x, y, {i}, warm_ptr);
      if (spec.iterative() && !refit.converged) {
        std::ostringstream msg;
        msg << spec.name() << " did not converge within "
            << spec.max_iterations << " iterations";
        throw std::runtime_error(msg.str());
      }
      out.values(i) = y(i) - x.row(i).dot(refit.beta);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "leave-one-out refit failed at observation " << i << ": "
          << e.what();
      throw std::runtime_error(msg.str());
    }
  });
  return out;
}

LooResiduals loo_residuals_hat_shortcut(const EstimatorSpec& spec,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y) {
  if (x.rows() < 2)
    throw std::invalid_argument("loo_residuals_hat_shortcut: needs n >= 2");
  if (x.rows() != y.size())
    throw std::invalid_argument(
        "loo_residuals_hat_shortcut: X and Y row counts differ");
  spec.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  Eigen::VectorXd beta_hat;
  Eigen::VectorXd hat(n);
  if (spec.kind == EstimatorSpec::Kind::ols) {
    // h_i is the squared row norm of the thin-QR Q factor; requires a regular
    // design, otherwise the caller must take the generic path.
    if (n < p)
      throw std::invalid_argument(
          "loo_residuals_hat_shortcut: OLS shortcut needs n >= p");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p)
      throw std::invalid_argument(
          "loo_residuals_hat_shortcut: X'X is singular, use the generic path");
    beta_hat = qr.solve(y);
    const Eigen::MatrixXd q_thin =
        qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    hat = q_thin.rowwise().squaredNorm();
  } else if (spec.kind == EstimatorSpec::Kind::ridge) {
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += spec.lambda;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    beta_hat = ldlt.solve(x.transpose() * y);
    const Eigen::MatrixXd solved = ldlt.solve(x.transpose());  // p x n
    hat = x.cwiseProduct(solved.transpose()).rowwise().sum();
  } else {
    throw std::invalid_argument(
        "loo_residuals_hat_shortcut: only ols and ridge obey the hat relation");
  }

  const Eigen::VectorXd fitted_residual = y - x * beta_hat;
  LooResiduals out;
  out.method = LooResiduals::Method::hat_shortcut;
  out.estimator = spec;
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double one_minus_h = 1.0 - hat(i);
    if (one_minus_h <= 1e-12) {
      std::ostringstream msg;
      msg << "loo_residuals_hat_shortcut: degenerate leverage at observation "
          << i << " (h = " << hat(i) << ")";
      throw std::runtime_error(msg.str());
    }
    out.values(i) = fitted_residual(i) / one_minus_h;
  }
  return out;
}

LooResiduals loo_residuals(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, int jobs) {
  if (spec.kind == EstimatorSpec::Kind::ridge)
    return loo_residuals_hat_shortcut(spec, x, y);
  if (spec.kind == EstimatorSpec::Kind::ols && x.rows() > x.cols()) {
    try {
      return loo_residuals_hat_shortcut(spec, x, y);
    } catch (const std::invalid_argument&) {
      // singular design, fall through
    }
  }
  return loo_residuals_generic(spec, x, y, jobs);
}

std::string interval_side_name(IntervalSide side) {
  switch (side) {
    case IntervalSide::two_sided:
      return "two_sided";
    case IntervalSide::lower_only:
      return "lower_only";
    case IntervalSide::upper_only:
      return "upper_only";
  }
  return "?";
}

IntervalBuilder IntervalBuilder::from_residuals(const Eigen::VectorXd& beta_hat,
                                                const Eigen::VectorXd& residuals,
                                                double alpha,
                                                IntervalSide side) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("build_interval: alpha must be in (0,1)");
  if (residuals.size() < 1)
    throw std::invalid_argument("build_interval: empty residual sample");
  constexpr double inf = std::numeric_limits<double>::infinity();
  IntervalBuilder b;
  b.beta_hat = beta_hat;
  b.alpha = alpha;
  b.side = side;
  switch (side) {
    case IntervalSide::two_sided:
      b.band_lower = empirical_quantile(residuals, alpha / 2.0);
      b.band_upper = empirical_quantile(residuals, 1.0 - alpha / 2.0);
      break;
    case IntervalSide::lower_only:
      b.band_lower = empirical_quantile(residuals, alpha);
      b.band_upper = inf;
      break;
    case IntervalSide::upper_only:
      b.band_lower = -inf;
      b.band_upper = empirical_quantile(residuals, 1.0 - alpha);
      break;
  }
  b.small_sample_warning =
      static_cast<double>(residuals.size()) < std::ceil(2.0 / alpha);
  return b;
}

PredictionInterval IntervalBuilder::build(const Eigen::VectorXd& x0) const {
  if (x0.size() != beta_hat.size())
    throw std::invalid_argument("build: x0 size mismatch");
  PredictionInterval pi;
  pi.point = beta_hat.dot(x0);
  pi.lower = pi.point + band_lower;
  pi.upper = pi.point + band_upper;
  pi.alpha = alpha;
  pi.side = side;
  pi.small_sample_warning = small_sample_warning;
  return pi;
}

bool IntervalBuilder::covers_error(double prediction_error) const {
  return prediction_error >= band_lower && prediction_error <= band_upper;
}

double IntervalBuilder::band_width() const { return band_upper - band_lower; }

PredictionInterval build_interval(const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& beta_hat,
                                  const LooResiduals& loo, double alpha,
                                  IntervalSide side) {
  return IntervalBuilder::from_residuals(beta_hat, loo.values, alpha, side)
      .build(x0);
}

PredictionInterval build_split_interval(const EstimatorSpec& spec,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& x0, double nu,
                                        double alpha, IntervalSide side,
                                        FitResult* split_fit) {
  if (!(nu > 0.0 && nu < 1.0))
    throw std::invalid_argument("build_split_interval: nu must be in (0,1)");
  if (x.rows() != y.size())
    throw std::invalid_argument("build_split_interval: X and Y row counts differ");
  const Eigen::Index n = x.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(
      std::ceil(nu * static_cast<double>(n)));
  if (m < 1 || m >= n)
    throw std::invalid_argument(
        "build_split_interval: split leaves an empty part (ceil(nu*n) = " +
        std::to_string(m) + " of " + std::to_string(n) + ")");

  FitResult fitted = fit(spec, x.topRows(m), y.head(m));
  const Eigen::VectorXd holdout_residuals =
      y.tail(n - m) - x.bottomRows(n - m) * fitted.beta;
  IntervalBuilder builder = IntervalBuilder::from_residuals(
      fitted.beta, holdout_residuals, alpha, side);
  if (split_fit) *split_fit = std::move(fitted);
  return builder.build(x0);
}

}  // namespace loopi
