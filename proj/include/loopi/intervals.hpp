#pragma once

#include <Eigen/Dense>
#include <string>

#include "loopi/estimators.hpp"

namespace loopi {

// Empirical quantile as the generalized inverse of the empirical cdf:
// the ceil(m*t)-th order statistic, no interpolation. Ties and discreteness
// are preserved on purpose.
double empirical_quantile(const Eigen::VectorXd& sample, double t);

struct LooResiduals {
  enum class Method { brute_force, hat_shortcut };

  Eigen::VectorXd values;  // u_tilde_i = y_i - x_i' beta_(i)
  Method method = Method::brute_force;
  EstimatorSpec estimator;
};

// n refits, one per held-out row. Iterative estimators are warm-started from
// the full-data fit; a refit failure carries the offending row index.
LooResiduals loo_residuals_generic(const EstimatorSpec& spec,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y, int jobs = 1);

// u_tilde_i = u_hat_i / (1 - h_i) from a single decomposition. Valid for OLS
// on regular designs (det X'X != 0) and for ridge always.
LooResiduals loo_residuals_hat_shortcut(const EstimatorSpec& spec,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y);

// Shortcut for ols/ridge when the design allows it, generic path otherwise.
LooResiduals loo_residuals(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, int jobs = 1);

enum class IntervalSide { two_sided, lower_only, upper_only };

std::string interval_side_name(IntervalSide side);

struct PredictionInterval {
  double lower = 0.0;  // -inf for upper_only
  double upper = 0.0;  // +inf for lower_only
  double alpha = 0.0;
  double point = 0.0;  // x0' beta_hat
  IntervalSide side = IntervalSide::two_sided;
  bool small_sample_warning = false;  // residual count below ceil(2/alpha)
};

// Residual band around the point forecast, bound to one training set so many
// x0 can be evaluated cheaply.
struct IntervalBuilder {
  Eigen::VectorXd beta_hat;
  double band_lower = 0.0;
  double band_upper = 0.0;
  double alpha = 0.0;
  IntervalSide side = IntervalSide::two_sided;
  bool small_sample_warning = false;

  static IntervalBuilder from_residuals(const Eigen::VectorXd& beta_hat,
                                        const Eigen::VectorXd& residuals,
                                        double alpha, IntervalSide side);

  PredictionInterval build(const Eigen::VectorXd& x0) const;
  bool covers_error(double prediction_error) const;
  double band_width() const;
};

PredictionInterval build_interval(const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& beta_hat,
                                  const LooResiduals& loo, double alpha,
                                  IntervalSide side = IntervalSide::two_sided);

// Sample-splitting variant: fit on the first ceil(nu*n) rows, holdout
// residuals u_check_i = y_i - x_i' beta^(nu) on the remainder.
PredictionInterval build_split_interval(const EstimatorSpec& spec,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& x0, double nu,
                                        double alpha,
                                        IntervalSide side = IntervalSide::two_sided,
                                        FitResult* split_fit = nullptr);

}  // namespace loopi
