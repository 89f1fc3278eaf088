#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace loopi {

// Tagged choice of fitting procedure. Fitting never includes an intercept:
// the data model is centered by construction.
struct EstimatorSpec {
  enum class Kind { ols, ridge, lasso, huber, james_stein };

  Kind kind = Kind::ols;
  double lambda = 0.0;   // ridge / lasso penalty, > 0
  double huber_k = 0.0;  // huber threshold, > 0
  double js_c = 0.0;     // james_stein shrinkage constant, > 0

  int max_iterations = 10000;
  double tolerance = 1e-8;  // convergence on coefficient max-change

  static EstimatorSpec ols();
  static EstimatorSpec ridge(double lambda);
  static EstimatorSpec lasso(double lambda);
  static EstimatorSpec huber(double k);
  static EstimatorSpec james_stein(double c);

  void validate() const;
  bool iterative() const { return kind == Kind::lasso || kind == Kind::huber; }
  std::string name() const;
};

struct FitResult {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = true;
  std::optional<double> objective;      // lasso / huber
  std::optional<double> kkt_residual;   // lasso
  bool degenerate_shrinkage = false;    // james_stein with X beta_hat = 0
  bool jitter_applied = false;          // huber with a singular weighted system
  std::vector<double> objective_path;   // iterative fits, one entry per sweep
};

// Minimum-norm least squares through a complete orthogonal decomposition;
// rank-deficient designs get Moore-Penrose semantics.
FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// beta = (X'X + lambda I)^{-1} X'Y.
FitResult fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double lambda);

// Minimizes (1/2n)|Y - Xb|_2^2 + lambda |b|_1 by cyclic coordinate descent.
FitResult fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double lambda, const EstimatorSpec& controls,
                    const Eigen::VectorXd* warm_start = nullptr);

// Huber M-estimation by iteratively reweighted least squares, initialized at
// the OLS solution unless a warm start is supplied.
FitResult fit_huber(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double k, const EstimatorSpec& controls,
                    const Eigen::VectorXd* warm_start = nullptr);

// beta_js = (1 - c p / (beta_ls' X'X beta_ls)) beta_ls. A vanishing
// denominator returns the zero vector with degenerate_shrinkage set.
FitResult fit_james_stein(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          double c);

double huber_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double k);
double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);

FitResult fit(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
              const Eigen::VectorXd& y,
              const Eigen::VectorXd* warm_start = nullptr);

// Fits on the rows not listed in excluded (order and duplicates in the list
// are irrelevant). Identical to fitting on physically reduced matrices.
FitResult fit_on_subset(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y,
                        const std::vector<Eigen::Index>& excluded,
                        const Eigen::VectorXd* warm_start = nullptr);

}  // namespace loopi
