#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loopi/design.hpp"
#include "loopi/estimators.hpp"
#include "loopi/intervals.hpp"
#include "loopi/validation.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace loopi;

namespace {

LDist l_dist_from_name(const std::string& name, double a, double b, double pa) {
  if (name == "constant") return LDist::constant_one();
  if (name == "two_point") return LDist::two_point(a, b, pa);
  if (name == "scaled_uniform") return LDist::scaled_uniform(a, b);
  throw std::invalid_argument("unknown l law '" + name + "'");
}

VDist v_dist_from_name(const std::string& name, double df) {
  if (name == "normal") return VDist::normal();
  if (name == "rademacher") return VDist::rademacher();
  if (name == "uniform") return VDist::uniform();
  if (name == "student_t") return VDist::student_t(df);
  throw std::invalid_argument("unknown v law '" + name + "'");
}

UDist u_dist_from_name(const std::string& name, double df) {
  if (name == "normal") return UDist::normal();
  if (name == "student_t") return UDist::student_t(df);
  if (name == "centered_exponential") return UDist::centered_exponential();
  if (name == "two_point") return UDist::two_point();
  throw std::invalid_argument("unknown u law '" + name + "'");
}

IntervalSide side_from_name(const std::string& name) {
  if (name == "two_sided") return IntervalSide::two_sided;
  if (name == "lower") return IntervalSide::lower_only;
  if (name == "upper") return IntervalSide::upper_only;
  throw std::invalid_argument("side must be two_sided, lower or upper");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Leave-one-out prediction intervals for linear regression";

  py::class_<EstimatorSpec>(m, "EstimatorSpec")
      .def_static("ols", &EstimatorSpec::ols)
      .def_static("ridge", &EstimatorSpec::ridge, py::arg("lam"))
      .def_static("lasso", &EstimatorSpec::lasso, py::arg("lam"))
      .def_static("huber", &EstimatorSpec::huber, py::arg("k"))
      .def_static("james_stein", &EstimatorSpec::james_stein, py::arg("c"))
      .def_readwrite("max_iterations", &EstimatorSpec::max_iterations)
      .def_readwrite("tolerance", &EstimatorSpec::tolerance)
      .def_property_readonly("name", &EstimatorSpec::name)
      .def("__repr__",
           [](const EstimatorSpec& s) { return "EstimatorSpec(" + s.name() + ")"; });

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("beta", &FitResult::beta)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("kkt_residual", &FitResult::kkt_residual)
      .def_readonly("degenerate_shrinkage", &FitResult::degenerate_shrinkage)
      .def_readonly("jitter_applied", &FitResult::jitter_applied);

  py::class_<PredictionInterval>(m, "PredictionInterval")
      .def_readonly("lower", &PredictionInterval::lower)
      .def_readonly("upper", &PredictionInterval::upper)
      .def_readonly("alpha", &PredictionInterval::alpha)
      .def_readonly("point", &PredictionInterval::point)
      .def_readonly("small_sample_warning",
                    &PredictionInterval::small_sample_warning)
      .def("__repr__", [](const PredictionInterval& pi) {
        return "PredictionInterval(point=" + std::to_string(pi.point) +
               ", lower=" + std::to_string(pi.lower) +
               ", upper=" + std::to_string(pi.upper) + ")";
      });

  py::class_<SpectralDiagnostics>(m, "SpectralDiagnostics")
      .def_readonly("trace_pinv", &SpectralDiagnostics::trace_pinv)
      .def_readonly("trace_pinv2", &SpectralDiagnostics::trace_pinv2)
      .def_readonly("lambda_min_scaled",
                    &SpectralDiagnostics::lambda_min_scaled);

  m.def(
      "fit",
      [](const EstimatorSpec& spec, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& y) { return fit(spec, x, y); },
      py::arg("spec"), py::arg("x"), py::arg("y"),
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "loo_residuals",
      [](const EstimatorSpec& spec, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& y, int jobs) {
        return loo_residuals(spec, x, y, jobs).values;
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("jobs") = 1,
      "Leave-one-out residuals; hat shortcut for ols/ridge when valid",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "loo_residuals_brute_force",
      [](const EstimatorSpec& spec, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& y, int jobs) {
        return loo_residuals_generic(spec, x, y, jobs).values;
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("jobs") = 1,
      py::call_guard<py::gil_scoped_release>());

  m.def("empirical_quantile", &empirical_quantile, py::arg("sample"),
        py::arg("t"),
        "ceil(m*t)-th order statistic, the generalized inverse of the "
        "empirical cdf");

  m.def(
      "prediction_interval",
      [](const EstimatorSpec& spec, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& y, const Eigen::VectorXd& x0, double alpha,
         const std::string& side, int jobs) {
        const FitResult fitted = fit(spec, x, y);
        const LooResiduals loo = loo_residuals(spec, x, y, jobs);
        return build_interval(x0, fitted.beta, loo, alpha,
                              side_from_name(side));
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("x0"),
      py::arg("alpha") = 0.05, py::arg("side") = "two_sided",
      py::arg("jobs") = 1);

  m.def(
      "split_prediction_interval",
      [](const EstimatorSpec& spec, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& y, const Eigen::VectorXd& x0, double nu,
         double alpha, const std::string& side) {
        return build_split_interval(spec, x, y, x0, nu, alpha,
                                    side_from_name(side));
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("x0"),
      py::arg("nu"), py::arg("alpha") = 0.05, py::arg("side") = "two_sided");

  m.def(
      "sample_design",
      [](int n, int p, const std::string& l, const std::string& v, double v_df,
         std::uint64_t seed) {
        DesignSpec spec;
        spec.n = n;
        spec.p = p;
        spec.l = l_dist_from_name(l, 1.0, 1.0, 0.5);
        spec.v = v_dist_from_name(v, v_df);
        RngStream rng(seed, 0, StreamPurpose::design);
        return sample_design(spec, rng);
      },
      py::arg("n"), py::arg("p"), py::arg("l") = "constant",
      py::arg("v") = "normal", py::arg("v_df") = 6.0, py::arg("seed") = 0,
      "Identity-covariance design draw x_i = l_i * v_i",
      py::call_guard<py::gil_scoped_release>());

  m.def("spectral_diagnostics", &spectral_diagnostics, py::arg("x"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "asymptotic_length_oracle",
      [](double tau, double alpha, const std::string& l, const std::string& u,
         double u_df, int draws, std::uint64_t seed) {
        return asymptotic_length_oracle(tau, l_dist_from_name(l, 1, 1, 0.5),
                                        u_dist_from_name(u, u_df), alpha,
                                        draws, seed);
      },
      py::arg("tau"), py::arg("alpha") = 0.05, py::arg("l") = "constant",
      py::arg("u") = "normal", py::arg("u_df") = 5.0,
      py::arg("draws") = 200000, py::arg("seed") = 0,
      "Inter-quantile range of l0*N*tau + u0",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "projection_normality_ks",
      [](const Eigen::VectorXd& b, const std::string& v, double v_df,
         int draws, std::uint64_t seed) {
        return projection_normality_ks(b, v_dist_from_name(v, v_df), draws,
                                       seed);
      },
      py::arg("b"), py::arg("v") = "normal", py::arg("v_df") = 6.0,
      py::arg("draws") = 100000, py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
