#include "loopi/config_io.hpp"

#include <fstream>
#include <sstream>

namespace loopi {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing required field");
  return *it;
}

double require_number(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string require_string(const json& j, const char* key,
                           const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

double optional_number(const json& j, const char* key, double fallback,
                       const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

json to_json(const CovarianceSpec& spec) {
  json j{{"kind", spec.name()}};
  if (spec.kind == CovarianceSpec::Kind::toeplitz) j["rho"] = spec.rho;
  if (spec.kind == CovarianceSpec::Kind::explicit_matrix) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < spec.matrix.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < spec.matrix.cols(); ++k)
        row.push_back(spec.matrix(i, k));
      rows.push_back(std::move(row));
    }
    j["values"] = std::move(rows);
  }
  return j;
}

json to_json(const LDist& dist) {
  json j{{"kind", dist.name()}};
  if (dist.kind == LDist::Kind::two_point) {
    j["values"] = {dist.value_a, dist.value_b};
    j["prob_a"] = dist.prob_a;
  }
  if (dist.kind == LDist::Kind::scaled_uniform) {
    j["low"] = dist.low;
    j["high"] = dist.high;
  }
  return j;
}

json to_json(const VDist& dist) {
  json j{{"kind", dist.name()}};
  if (dist.kind == VDist::Kind::student_t) j["df"] = dist.df;
  return j;
}

json to_json(const UDist& dist) {
  json j{{"kind", dist.name()}};
  if (dist.kind == UDist::Kind::student_t) j["df"] = dist.df;
  return j;
}

json to_json(const DesignSpec& spec) {
  return json{{"n", spec.n},
              {"p", spec.p},
              {"covariance", to_json(spec.covariance)},
              {"l", to_json(spec.l)},
              {"v", to_json(spec.v)},
              {"u", to_json(spec.u)}};
}

json to_json(const BetaSpec& spec) {
  json j{{"kind", spec.name()}};
  if (spec.kind != BetaSpec::Kind::zero) j["scaled_norm"] = spec.scaled_norm;
  if (spec.kind == BetaSpec::Kind::sparse) j["nonzeros"] = spec.nonzeros;
  return j;
}

json to_json(const EstimatorSpec& spec) {
  json j{{"kind", spec.name()}};
  switch (spec.kind) {
    case EstimatorSpec::Kind::ridge:
    case EstimatorSpec::Kind::lasso:
      j["lambda"] = spec.lambda;
      break;
    case EstimatorSpec::Kind::huber:
      j["k"] = spec.huber_k;
      break;
    case EstimatorSpec::Kind::james_stein:
      j["c"] = spec.js_c;
      break;
    case EstimatorSpec::Kind::ols:
      break;
  }
  if (spec.max_iterations != 10000) j["max_iterations"] = spec.max_iterations;
  if (spec.tolerance != 1e-8) j["tolerance"] = spec.tolerance;
  return j;
}

json to_json(const ExperimentConfig& config) {
  json estimators = json::array();
  for (const auto& e : config.estimators) estimators.push_back(to_json(e));
  json j{{"design", to_json(config.design)},
         {"beta", to_json(config.beta)},
         {"sigma", config.sigma},
         {"estimators", std::move(estimators)},
         {"alpha", config.alpha},
         {"replications", config.replications},
         {"prediction_draws", config.prediction_draws},
         {"seed", config.seed},
         {"delta", config.delta},
         {"diagnostics", config.diagnostics},
         {"failure_budget", config.failure_budget}};
  if (config.split_nu) j["split_nu"] = *config.split_nu;
  return j;
}

namespace {

CovarianceSpec covariance_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  if (kind == "identity") return CovarianceSpec::identity();
  if (kind == "toeplitz")
    return CovarianceSpec::toeplitz(require_number(j, "rho", where));
  if (kind == "explicit") {
    const json& rows = require(j, "values", where);
    if (!rows.is_array() || rows.empty())
      fail(where + ".values", "expected a nonempty array of rows");
    const std::size_t p = rows.size();
    Eigen::MatrixXd m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      if (!rows[i].is_array() || rows[i].size() != p)
        fail(where + ".values", "matrix must be square");
      for (std::size_t k = 0; k < p; ++k) {
        if (!rows[i][k].is_number())
          fail(where + ".values", "entries must be numbers");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            rows[i][k].get<double>();
      }
    }
    return CovarianceSpec::explicit_matrix(std::move(m));
  }
  fail(where + ".kind", "unknown covariance kind '" + kind +
                            "' (identity | toeplitz | explicit)");
}

LDist l_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  if (kind == "constant") return LDist::constant_one();
  if (kind == "two_point") {
    const json& values = require(j, "values", where);
    if (!values.is_array() || values.size() != 2 || !values[0].is_number() ||
        !values[1].is_number())
      fail(where + ".values", "expected two numeric values");
    return LDist::two_point(values[0].get<double>(), values[1].get<double>(),
                            require_number(j, "prob_a", where));
  }
  if (kind == "scaled_uniform")
    return LDist::scaled_uniform(require_number(j, "low", where),
                                 require_number(j, "high", where));
  fail(where + ".kind", "unknown l kind '" + kind +
                            "' (constant | two_point | scaled_uniform)");
}

VDist v_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  if (kind == "normal") return VDist::normal();
  if (kind == "rademacher") return VDist::rademacher();
  if (kind == "uniform") return VDist::uniform();
  if (kind == "student_t")
    return VDist::student_t(require_number(j, "df", where));
  fail(where + ".kind", "unknown v kind '" + kind +
                            "' (normal | rademacher | uniform | student_t)");
}

UDist u_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  if (kind == "normal") return UDist::normal();
  if (kind == "student_t")
    return UDist::student_t(require_number(j, "df", where));
  if (kind == "centered_exponential") return UDist::centered_exponential();
  if (kind == "two_point") return UDist::two_point();
  fail(where + ".kind",
       "unknown u kind '" + kind +
           "' (normal | student_t | centered_exponential | two_point)");
}

BetaSpec beta_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  if (kind == "zero") return BetaSpec::zero();
  if (kind == "dense")
    return BetaSpec::dense(require_number(j, "scaled_norm", where));
  if (kind == "sparse")
    return BetaSpec::sparse(require_int(j, "nonzeros", where),
                            require_number(j, "scaled_norm", where));
  fail(where + ".kind",
       "unknown beta kind '" + kind + "' (zero | dense | sparse)");
}

}  // namespace

EstimatorSpec estimator_from_json(const json& j, const std::string& where) {
  const std::string kind = require_string(j, "kind", where);
  EstimatorSpec spec;
  if (kind == "ols") {
    spec = EstimatorSpec::ols();
  } else if (kind == "ridge") {
    spec = EstimatorSpec::ridge(require_number(j, "lambda", where));
  } else if (kind == "lasso") {
    spec = EstimatorSpec::lasso(require_number(j, "lambda", where));
  } else if (kind == "huber") {
    spec = EstimatorSpec::huber(require_number(j, "k", where));
  } else if (kind == "james_stein") {
    spec = EstimatorSpec::james_stein(require_number(j, "c", where));
  } else {
    fail(where + ".kind",
         "unknown estimator kind '" + kind +
             "' (ols | ridge | lasso | huber | james_stein)");
  }
  if (j.contains("max_iterations")) {
    if (!j.at("max_iterations").is_number_integer())
      fail(where + ".max_iterations", "expected an integer");
    spec.max_iterations = j.at("max_iterations").get<int>();
  }
  spec.tolerance = optional_number(j, "tolerance", spec.tolerance, where);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return spec;
}

DesignSpec design_from_json(const json& j, const std::string& where) {
  DesignSpec spec;
  spec.n = require_int(j, "n", where);
  spec.p = require_int(j, "p", where);
  spec.covariance =
      covariance_from_json(require(j, "covariance", where), where + ".covariance");
  spec.l = l_from_json(require(j, "l", where), where + ".l");
  spec.v = v_from_json(require(j, "v", where), where + ".v");
  spec.u = u_from_json(require(j, "u", where), where + ".u");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  config.design = design_from_json(require(j, "design", "config"), "config.design");
  config.beta = beta_from_json(require(j, "beta", "config"), "config.beta");
  config.sigma = require_number(j, "sigma", "config");
  const json& estimators = require(j, "estimators", "config");
  if (!estimators.is_array() || estimators.empty())
    fail("config.estimators", "expected a nonempty array");
  for (std::size_t e = 0; e < estimators.size(); ++e)
    config.estimators.push_back(estimator_from_json(
        estimators[e], "config.estimators[" + std::to_string(e) + "]"));
  config.alpha = require_number(j, "alpha", "config");
  config.replications = require_int(j, "replications", "config");
  config.prediction_draws = require_int(j, "prediction_draws", "config");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<double>() < 0)
      fail("config.seed", "expected a non-negative integer");
    config.seed = j.at("seed").get<std::uint64_t>();
  }
  config.delta = optional_number(j, "delta", config.delta, "config");
  if (j.contains("diagnostics")) {
    if (!j.at("diagnostics").is_boolean())
      fail("config.diagnostics", "expected a boolean");
    config.diagnostics = j.at("diagnostics").get<bool>();
  }
  if (j.contains("split_nu") && !j.at("split_nu").is_null())
    config.split_nu = optional_number(j, "split_nu", 0.0, "config");
  config.failure_budget =
      optional_number(j, "failure_budget", config.failure_budget, "config");
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace loopi
