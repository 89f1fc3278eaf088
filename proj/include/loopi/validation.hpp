#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopi/design.hpp"
#include "loopi/estimators.hpp"
#include "loopi/intervals.hpp"
#include "loopi/stats.hpp"

namespace loopi {

// Deterministic recipe for the coefficient vector, parameterized by the
// target |Sigma^{1/2} beta|_2 so runs are comparable across covariances.
struct BetaSpec {
  enum class Kind { zero, dense, sparse };

  Kind kind = Kind::zero;
  double scaled_norm = 0.0;  // target |Sigma^{1/2} beta|_2
  int nonzeros = 0;          // sparse only

  static BetaSpec zero();
  static BetaSpec dense(double scaled_norm);
  static BetaSpec sparse(int nonzeros, double scaled_norm);

  void validate(int p) const;
  Eigen::VectorXd realize(const Eigen::MatrixXd& sqrt_sigma) const;
  std::string name() const;
};

struct ExperimentConfig {
  DesignSpec design;
  BetaSpec beta;
  double sigma = 1.0;
  std::vector<EstimatorSpec> estimators;
  double alpha = 0.1;
  int replications = 1;        // training replications R
  int prediction_draws = 2000; // conditional-coverage draws M per replication
  std::uint64_t seed = 0;
  double delta = 2.0;          // moment order for the l_{2+delta} diagnostic
  bool diagnostics = true;     // spectral diagnostics per replication
  std::optional<double> split_nu;  // sample-splitting interval when set
  double failure_budget = 0.05;

  void validate() const;
};

struct SpectralDiagnostics {
  double trace_pinv = 0.0;         // trace (X'X)^dagger
  double trace_pinv2 = 0.0;        // trace (X'X)^dagger2
  double lambda_min_scaled = 0.0;  // smallest eigenvalue of X'X/n
};

SpectralDiagnostics spectral_diagnostics(const Eigen::MatrixXd& x);

// |Sigma^{1/2} (beta_hat - beta) / sigma|_q
double scaled_error_norm(const Eigen::MatrixXd& sqrt_sigma,
                         const Eigen::VectorXd& beta_hat,
                         const Eigen::VectorXd& beta, double sigma, double q);

// |Sigma^{1/2} (beta_hat - beta_hat_(1)) / sigma|_2: the influence of the
// first observation on the estimator.
double perturbation_norm(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& sqrt_sigma, double sigma);

struct ReplicationRecord {
  int replication = 0;
  std::string estimator;
  double coverage = 0.0;
  double scaled_length = 0.0;
  double tau_hat = 0.0;
  double perturbation_norm = 0.0;
  double l2_norm = 0.0;
  double lp_norm = 0.0;  // |.|_{2+delta}
  double trace_pinv = 0.0;
  double trace_pinv2 = 0.0;
  double lambda_min_scaled = 0.0;
  bool failed = false;
  std::string flags;
};

struct EstimatorSummary {
  std::string estimator;
  MeanSe honesty_gap;  // mean over r of |coverage_r - (1 - alpha)|
  MeanSe coverage;
  MeanSe scaled_length;
  MeanSe tau_hat;
  MeanSe perturbation_norm;
  MeanSe lp_norm;
  int failures = 0;
};

struct ExperimentReport {
  double alpha = 0.0;
  double delta = 2.0;
  std::vector<ReplicationRecord> records;    // (replication, estimator) order
  std::vector<EstimatorSummary> summaries;   // config estimator order
  MeanSe trace_pinv;
  MeanSe trace_pinv2;
  MeanSe lambda_min_scaled;
};

// Fraction of M fresh (x0, y0) draws falling inside the interval; a
// root-M-consistent estimate of P(y0 in PI | Y, X).
double conditional_coverage(const IntervalBuilder& builder,
                            const DesignSampler& sampler,
                            const Eigen::VectorXd& beta, double sigma,
                            int draws, RngStream& rng);

// Full pipeline over R training replications. Bit-identical for any job
// count: every replication owns pre-assigned substreams and aggregation is an
// ordered reduction.
ExperimentReport run_experiment(const ExperimentConfig& config, int jobs = 1);

// run_experiment viewed through Eq.-style honesty: reports carry
// mean |coverage_r - (1-alpha)| per estimator.
ExperimentReport honesty_gap(const ExperimentConfig& config, int jobs = 1);

struct TauEstimate {
  std::vector<double> per_replication;
  MeanSe summary;
};

TauEstimate estimate_tau(const DesignSpec& design, const EstimatorSpec& spec,
                         const BetaSpec& beta_spec, double sigma,
                         int replications, std::uint64_t seed, int jobs = 1);

struct NormDiagnostic {
  double l2 = 0.0;
  double lp = 0.0;  // |.|_{2+delta}
};

std::vector<NormDiagnostic> lp_norm_diagnostic(
    const DesignSpec& design, const EstimatorSpec& spec,
    const BetaSpec& beta_spec, double sigma, double delta, int replications,
    std::uint64_t seed, int jobs = 1);

// Inter-quantile range of l0 * N * tau + u0 at level alpha. Closed form
// 2 z_{1-alpha/2} sqrt(1 + tau^2) when l == 1 and u0 is standard normal,
// Monte Carlo otherwise.
double asymptotic_length_oracle(double tau, const LDist& l_dist,
                                const UDist& u_dist, double alpha, int draws,
                                RngStream& rng);
double asymptotic_length_oracle(double tau, const LDist& l_dist,
                                const UDist& u_dist, double alpha,
                                int draws = 200000, std::uint64_t seed = 0);

struct LengthComparison {
  std::string estimator;
  MeanSe scaled_length;  // mean over replications of (q_hi - q_lo)/sigma
  MeanSe tau_hat;
  double oracle = 0.0;   // asymptotic_length_oracle at the measured mean tau
  double relative_gap = 0.0;
};

std::vector<LengthComparison> length_convergence(const ExperimentConfig& config,
                                                 int jobs = 1,
                                                 int oracle_draws = 200000);

struct LengthScanRow {
  double tau = 0.0;
  double length = 0.0;
  double std_error = 0.0;  // zero in the closed-form case
  bool decrease_from_previous = false;  // beyond 3 combined standard errors
};

std::vector<LengthScanRow> length_monotonicity_scan(
    const LDist& l_dist, const UDist& u_dist, double alpha,
    const std::vector<double>& tau_grid, int draws_per_batch = 100000,
    int batches = 5, std::uint64_t seed = 0);

// Kolmogorov-Smirnov distance between the law of b'v/|b|_2 and the standard
// normal, estimated from M draws.
double projection_normality_ks(const Eigen::VectorXd& b, const VDist& v_dist,
                               int draws, RngStream& rng);
double projection_normality_ks(const Eigen::VectorXd& b, const VDist& v_dist,
                               int draws, std::uint64_t seed = 0);

}  // namespace loopi
