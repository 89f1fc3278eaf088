#include "loopi/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "loopi/parallel.hpp"

namespace loopi {

BetaSpec BetaSpec::zero() { return BetaSpec{}; }

BetaSpec BetaSpec::dense(double scaled_norm) {
  BetaSpec b;
  b.kind = Kind::dense;
  b.scaled_norm = scaled_norm;
  return b;
}

BetaSpec BetaSpec::sparse(int nonzeros, double scaled_norm) {
  BetaSpec b;
  b.kind = Kind::sparse;
  b.nonzeros = nonzeros;
  b.scaled_norm = scaled_norm;
  return b;
}

void BetaSpec::validate(int p) const {
  switch (kind) {
    case Kind::zero:
      return;
    case Kind::dense:
      if (!(scaled_norm > 0.0))
        throw std::invalid_argument("beta dense: scaled_norm must be > 0");
      return;
    case Kind::sparse:
      if (!(scaled_norm > 0.0))
        throw std::invalid_argument("beta sparse: scaled_norm must be > 0");
      if (nonzeros < 1 || nonzeros > p)
        throw std::invalid_argument("beta sparse: nonzeros must be in [1, p]");
      return;
  }
  throw std::invalid_argument("beta: unknown kind");
}

Eigen::VectorXd BetaSpec::realize(const Eigen::MatrixXd& sqrt_sigma) const {
  const Eigen::Index p = sqrt_sigma.rows();
  validate(static_cast<int>(p));
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(p);
  switch (kind) {
    case Kind::zero:
      return direction;
    case Kind::dense:
      direction.setOnes();
      break;
    case Kind::sparse:
      direction.head(nonzeros).setOnes();
      break;
  }
  const double realized = (sqrt_sigma * direction).norm();
  return direction * (scaled_norm / realized);
}

std::string BetaSpec::name() const {
  switch (kind) {
    case Kind::zero:
      return "zero";
    case Kind::dense:
      return "dense";
    case Kind::sparse:
      return "sparse";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  design.validate();
  beta.validate(design.p);
  if (!(sigma > 0.0))
    throw std::invalid_argument("sigma: must be positive");
  if (estimators.empty())
    throw std::invalid_argument("estimators: at least one is required");
  for (const auto& e : estimators) e.validate();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha: must be in (0,1)");
  if (replications < 1)
    throw std::invalid_argument("replications: must be >= 1");
  if (prediction_draws < 1)
    throw std::invalid_argument("prediction_draws: must be >= 1");
  if (!(delta > 0.0 && delta <= 2.0))
    throw std::invalid_argument("delta: must be in (0,2]");
  if (split_nu && !(*split_nu > 0.0 && *split_nu < 1.0))
    throw std::invalid_argument("split_nu: must be in (0,1)");
  if (!(failure_budget >= 0.0 && failure_budget <= 1.0))
    throw std::invalid_argument("failure_budget: must be in [0,1]");
}

SpectralDiagnostics spectral_diagnostics(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 1 || p < 1)
    throw std::invalid_argument("spectral_diagnostics: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = std::numeric_limits<double>::epsilon() *
                        static_cast<double>(std::max(n, p)) * sv(0);
  SpectralDiagnostics out;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cutoff) continue;
    const double inv = 1.0 / (sv(i) * sv(i));
    out.trace_pinv += inv;
    out.trace_pinv2 += inv * inv;
  }
  // X'X is p x p: it picks up p - n zero eigenvalues when p > n.
  const double smallest = p > n ? 0.0 : sv(sv.size() - 1);
  out.lambda_min_scaled = smallest * smallest / static_cast<double>(n);
  return out;
}

double scaled_error_norm(const Eigen::MatrixXd& sqrt_sigma,
                         const Eigen::VectorXd& beta_hat,
                         const Eigen::VectorXd& beta, double sigma, double q) {
  if (!(q >= 1.0))
    throw std::invalid_argument("scaled_error_norm: q must be >= 1");
  const Eigen::VectorXd w = sqrt_sigma * (beta_hat - beta) / sigma;
  if (q == 2.0) return w.norm();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    acc += std::pow(std::abs(w(i)), q);
  return std::pow(acc, 1.0 / q);
}

double perturbation_norm(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& sqrt_sigma, double sigma) {
  if (x.rows() < 2)
    throw std::invalid_argument("perturbation_norm: needs n >= 2");
  const FitResult full = fit(spec, x, y);
  const FitResult drop_first =
      fit_on_subset(spec, x, y, {0},
                    spec.iterative() ? &full.beta : nullptr);
  return (sqrt_sigma * (full.beta - drop_first.beta)).norm() / sigma;
}

double conditional_coverage(const IntervalBuilder& builder,
                            const DesignSampler& sampler,
                            const Eigen::VectorXd& beta, double sigma,
                            int draws, RngStream& rng) {
  if (draws < 1)
    throw std::invalid_argument("conditional_coverage: draws must be >= 1");
  int covered = 0;
  for (int m = 0; m < draws; ++m) {
    const auto [x0, y0] = sampler.sample_prediction_pair(beta, sigma, rng);
    if (builder.covers_error(y0 - builder.beta_hat.dot(x0))) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(draws);
}

namespace {

void append_flag(std::string& flags, const char* token) {
  if (!flags.empty()) flags += ';';
  flags += token;
}

MeanSe aggregate(const std::vector<double>& values) { return mean_and_se(values); }

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  const DesignSampler sampler(config.design);
  const Eigen::VectorXd beta = config.beta.realize(sampler.sqrt_sigma());
  const int R = config.replications;
  const std::size_t n_estimators = config.estimators.size();

  ExperimentReport report;
  report.alpha = config.alpha;
  report.delta = config.delta;
  report.records.resize(static_cast<std::size_t>(R) * n_estimators);

  const bool discrete_u = !config.design.u.continuous();

  parallel_for(static_cast<std::size_t>(R), jobs, [&](std::size_t r) {
    const ModelInstance model =
        sampler.sample_model(beta, config.sigma, {config.seed, r});
    SpectralDiagnostics spectral;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (config.diagnostics) {
      spectral = spectral_diagnostics(model.x);
    } else {
      spectral = {nan, nan, nan};
    }
    for (std::size_t e = 0; e < n_estimators; ++e) {
      const EstimatorSpec& spec = config.estimators[e];
      ReplicationRecord rec;
      rec.replication = static_cast<int>(r);
      rec.estimator = spec.name();
      rec.trace_pinv = spectral.trace_pinv;
      rec.trace_pinv2 = spectral.trace_pinv2;
      rec.lambda_min_scaled = spectral.lambda_min_scaled;
      if (discrete_u) append_flag(rec.flags, "discrete_u");
      try {
        IntervalBuilder builder;
        FitResult fitted;
        if (config.split_nu) {
          // The deployed estimator is the split fit; metrics refer to it.
          const Eigen::Index m = static_cast<Eigen::Index>(std::ceil(
              *config.split_nu * static_cast<double>(config.design.n)));
          if (m < 1 || m >= model.x.rows())
            throw std::invalid_argument("split_nu leaves an empty part");
          fitted = fit(spec, model.x.topRows(m), model.y.head(m));
          const Eigen::VectorXd holdout =
              model.y.tail(model.x.rows() - m) -
              model.x.bottomRows(model.x.rows() - m) * fitted.beta;
          builder = IntervalBuilder::from_residuals(
              fitted.beta, holdout, config.alpha, IntervalSide::two_sided);
          rec.perturbation_norm =
              perturbation_norm(spec, model.x.topRows(m), model.y.head(m),
                                model.sqrt_sigma, model.sigma);
        } else {
          fitted = fit(spec, model.x, model.y);
          const LooResiduals loo = loo_residuals(spec, model.x, model.y, 1);
          builder = IntervalBuilder::from_residuals(
              fitted.beta, loo.values, config.alpha, IntervalSide::two_sided);
          rec.perturbation_norm = perturbation_norm(
              spec, model.x, model.y, model.sqrt_sigma, model.sigma);
        }
        if (spec.iterative() && !fitted.converged)
          throw std::runtime_error(spec.name() + " did not converge");
        if (fitted.degenerate_shrinkage)
          append_flag(rec.flags, "degenerate_shrinkage");
        if (fitted.jitter_applied) append_flag(rec.flags, "jitter");

        rec.tau_hat = scaled_error_norm(model.sqrt_sigma, fitted.beta, beta,
                                        model.sigma, 2.0);
        rec.l2_norm = rec.tau_hat;
        rec.lp_norm = scaled_error_norm(model.sqrt_sigma, fitted.beta, beta,
                                        model.sigma, 2.0 + config.delta);
        rec.scaled_length = builder.band_width() / model.sigma;
        RngStream prediction_stream(config.seed, r, StreamPurpose::prediction);
        rec.coverage =
            conditional_coverage(builder, sampler, beta, model.sigma,
                                 config.prediction_draws, prediction_stream);
      } catch (const std::exception&) {
        rec.failed = true;
        rec.coverage = nan;
        rec.scaled_length = nan;
        rec.tau_hat = nan;
        rec.l2_norm = nan;
        rec.lp_norm = nan;
        rec.perturbation_norm = nan;
        append_flag(rec.flags, "failed");
      }
      report.records[r * n_estimators + e] = std::move(rec);
    }
  });

  // Ordered reduction: estimator by estimator, replication by replication.
  for (std::size_t e = 0; e < n_estimators; ++e) {
    EstimatorSummary summary;
    summary.estimator = config.estimators[e].name();
    std::vector<double> gaps, coverages, lengths, taus, perturbations, lps;
    for (int r = 0; r < R; ++r) {
      const ReplicationRecord& rec =
          report.records[static_cast<std::size_t>(r) * n_estimators + e];
      if (rec.failed) {
        ++summary.failures;
        continue;
      }
      gaps.push_back(std::abs(rec.coverage - (1.0 - config.alpha)));
      coverages.push_back(rec.coverage);
      lengths.push_back(rec.scaled_length);
      taus.push_back(rec.tau_hat);
      perturbations.push_back(rec.perturbation_norm);
      lps.push_back(rec.lp_norm);
    }
    summary.honesty_gap = aggregate(gaps);
    summary.coverage = aggregate(coverages);
    summary.scaled_length = aggregate(lengths);
    summary.tau_hat = aggregate(taus);
    summary.perturbation_norm = aggregate(perturbations);
    summary.lp_norm = aggregate(lps);
    report.summaries.push_back(std::move(summary));
  }
  if (config.diagnostics) {
    std::vector<double> t1, t2, lmin;
    for (int r = 0; r < R; ++r) {
      const ReplicationRecord& rec =
          report.records[static_cast<std::size_t>(r) * n_estimators];
      t1.push_back(rec.trace_pinv);
      t2.push_back(rec.trace_pinv2);
      lmin.push_back(rec.lambda_min_scaled);
    }
    report.trace_pinv = aggregate(t1);
    report.trace_pinv2 = aggregate(t2);
    report.lambda_min_scaled = aggregate(lmin);
  }
  return report;
}

ExperimentReport honesty_gap(const ExperimentConfig& config, int jobs) {
  return run_experiment(config, jobs);
}

TauEstimate estimate_tau(const DesignSpec& design, const EstimatorSpec& spec,
                         const BetaSpec& beta_spec, double sigma,
                         int replications, std::uint64_t seed, int jobs) {
  design.validate();
  spec.validate();
  if (replications < 1)
    throw std::invalid_argument("estimate_tau: replications must be >= 1");
  const DesignSampler sampler(design);
  const Eigen::VectorXd beta = beta_spec.realize(sampler.sqrt_sigma());
  TauEstimate out;
  out.per_replication.resize(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications), jobs,
               [&](std::size_t r) {
                 const ModelInstance model =
                     sampler.sample_model(beta, sigma, {seed, r});
                 const FitResult fitted = fit(spec, model.x, model.y);
                 out.per_replication[r] = scaled_error_norm(
                     model.sqrt_sigma, fitted.beta, beta, sigma, 2.0);
               });
  out.summary = mean_and_se(out.per_replication);
  return out;
}

std::vector<NormDiagnostic> lp_norm_diagnostic(
    const DesignSpec& design, const EstimatorSpec& spec,
    const BetaSpec& beta_spec, double sigma, double delta, int replications,
    std::uint64_t seed, int jobs) {
  design.validate();
  spec.validate();
  if (!(delta > 0.0 && delta <= 2.0))
    throw std::invalid_argument("lp_norm_diagnostic: delta must be in (0,2]");
  if (replications < 1)
    throw std::invalid_argument("lp_norm_diagnostic: replications must be >= 1");
  const DesignSampler sampler(design);
  const Eigen::VectorXd beta = beta_spec.realize(sampler.sqrt_sigma());
  std::vector<NormDiagnostic> out(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications), jobs,
               [&](std::size_t r) {
                 const ModelInstance model =
                     sampler.sample_model(beta, sigma, {seed, r});
                 const FitResult fitted = fit(spec, model.x, model.y);
                 out[r].l2 = scaled_error_norm(model.sqrt_sigma, fitted.beta,
                                               beta, sigma, 2.0);
                 out[r].lp = scaled_error_norm(model.sqrt_sigma, fitted.beta,
                                               beta, sigma, 2.0 + delta);
               });
  return out;
}

double asymptotic_length_oracle(double tau, const LDist& l_dist,
                                const UDist& u_dist, double alpha, int draws,
                                RngStream& rng) {
  if (!(tau >= 0.0))
    throw std::invalid_argument("asymptotic_length_oracle: tau must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("asymptotic_length_oracle: alpha must be in (0,1)");
  if (l_dist.is_constant_one() && u_dist.kind == UDist::Kind::normal)
    return 2.0 * normal_quantile(1.0 - alpha / 2.0) * std::sqrt(1.0 + tau * tau);
  if (draws < 2)
    throw std::invalid_argument("asymptotic_length_oracle: draws must be >= 2");
  Eigen::VectorXd sample(draws);
  for (int m = 0; m < draws; ++m) {
    const double l0 = l_dist.sample(rng);
    const double gauss = rng.normal();
    const double u0 = u_dist.sample(rng);
    sample(m) = l0 * gauss * tau + u0;
  }
  return empirical_quantile(sample, 1.0 - alpha / 2.0) -
         empirical_quantile(sample, alpha / 2.0);
}

double asymptotic_length_oracle(double tau, const LDist& l_dist,
                                const UDist& u_dist, double alpha, int draws,
                                std::uint64_t seed) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  return asymptotic_length_oracle(tau, l_dist, u_dist, alpha, draws, rng);
}

std::vector<LengthComparison> length_convergence(const ExperimentConfig& config,
                                                 int jobs, int oracle_draws) {
  const ExperimentReport report = run_experiment(config, jobs);
  std::vector<LengthComparison> out;
  out.reserve(report.summaries.size());
  for (std::size_t e = 0; e < report.summaries.size(); ++e) {
    const EstimatorSummary& s = report.summaries[e];
    LengthComparison cmp;
    cmp.estimator = s.estimator;
    cmp.scaled_length = s.scaled_length;
    cmp.tau_hat = s.tau_hat;
    RngStream rng(config.seed, 1000000 + e, StreamPurpose::oracle);
    cmp.oracle = asymptotic_length_oracle(s.tau_hat.mean, config.design.l,
                                          config.design.u, config.alpha,
                                          oracle_draws, rng);
    cmp.relative_gap = cmp.oracle != 0.0
                           ? (s.scaled_length.mean - cmp.oracle) / cmp.oracle
                           : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(cmp));
  }
  return out;
}

std::vector<LengthScanRow> length_monotonicity_scan(
    const LDist& l_dist, const UDist& u_dist, double alpha,
    const std::vector<double>& tau_grid, int draws_per_batch, int batches,
    std::uint64_t seed) {
  if (tau_grid.empty())
    throw std::invalid_argument("length_monotonicity_scan: empty grid");
  if (batches < 1)
    throw std::invalid_argument("length_monotonicity_scan: batches must be >= 1");
  const bool closed_form =
      l_dist.is_constant_one() && u_dist.kind == UDist::Kind::normal;
  std::vector<LengthScanRow> rows;
  rows.reserve(tau_grid.size());
  for (std::size_t g = 0; g < tau_grid.size(); ++g) {
    LengthScanRow row;
    row.tau = tau_grid[g];
    if (closed_form) {
      row.length = asymptotic_length_oracle(row.tau, l_dist, u_dist, alpha, 2,
                                            static_cast<std::uint64_t>(0));
      row.std_error = 0.0;
    } else {
      std::vector<double> estimates;
      estimates.reserve(static_cast<std::size_t>(batches));
      for (int b = 0; b < batches; ++b) {
        RngStream rng(seed, g * 1000 + static_cast<std::uint64_t>(b),
                      StreamPurpose::oracle);
        estimates.push_back(asymptotic_length_oracle(
            row.tau, l_dist, u_dist, alpha, draws_per_batch, rng));
      }
      const MeanSe agg = mean_and_se(estimates);
      row.length = agg.mean;
      row.std_error = agg.std_error;
    }
    rows.push_back(row);
  }
  // Flag decreases that exceed three combined Monte Carlo standard errors;
  // smaller ones are indistinguishable from noise.
  for (std::size_t g = 1; g < rows.size(); ++g) {
    const double drop = rows[g - 1].length - rows[g].length;
    const double se = std::sqrt(rows[g - 1].std_error * rows[g - 1].std_error +
                                rows[g].std_error * rows[g].std_error);
    rows[g].decrease_from_previous = drop > 3.0 * se && drop > 0.0;
  }
  return rows;
}

double projection_normality_ks(const Eigen::VectorXd& b, const VDist& v_dist,
                               int draws, RngStream& rng) {
  const double norm = b.norm();
  if (!(norm > 0.0))
    throw std::invalid_argument("projection_normality_ks: b must be nonzero");
  if (draws < 1)
    throw std::invalid_argument("projection_normality_ks: draws must be >= 1");
  v_dist.validate();
  const Eigen::Index p = b.size();
  std::vector<double> sample(static_cast<std::size_t>(draws));
  for (int m = 0; m < draws; ++m) {
    double dot = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) dot += b(j) * v_dist.sample(rng);
    sample[static_cast<std::size_t>(m)] = dot / norm;
  }
  return ks_distance_to_normal(std::move(sample));
}

double projection_normality_ks(const Eigen::VectorXd& b, const VDist& v_dist,
                               int draws, std::uint64_t seed) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  return projection_normality_ks(b, v_dist, draws, rng);
}

}  // namespace loopi
