#pragma once

#include <string>

#include "loopi/rng.hpp"

namespace loopi {

// Law of the row-norm scalar l0. Constrained to E[l0^2] = 1 and |l0| >= c > 0;
// min_abs() reports the constant c.
struct LDist {
  enum class Kind { constant_one, two_point, scaled_uniform };

  Kind kind = Kind::constant_one;
  // two_point: P(l = value_a) = prob_a, P(l = value_b) = 1 - prob_a
  double value_a = 1.0;
  double value_b = 1.0;
  double prob_a = 0.5;
  // scaled_uniform: uniform on [low, high] rescaled so that E[l^2] = 1
  double low = 0.5;
  double high = 1.5;

  static LDist constant_one();
  static LDist two_point(double value_a, double value_b, double prob_a);
  static LDist scaled_uniform(double low, double high);

  void validate() const;
  double min_abs() const;
  double scale() const;  // rescaling factor for scaled_uniform, 1 otherwise
  double sample(RngStream& rng) const;
  bool is_constant_one() const { return kind == Kind::constant_one; }
  std::string name() const;
};

// Law of the design entries v_ij: mean 0, variance 1, finite fourth moment.
struct VDist {
  enum class Kind { normal, rademacher, uniform, student_t };

  Kind kind = Kind::normal;
  double df = 6.0;  // student_t only; requires df > 4

  static VDist normal();
  static VDist rademacher();
  static VDist uniform();
  static VDist student_t(double df);

  void validate() const;
  double sample(RngStream& rng) const;
  std::string name() const;
};

// Law of the error u0. All laws here are centered and, when the variance
// exists, scaled to variance 1 so coverage and length comparisons share a
// scale.
struct UDist {
  enum class Kind { normal, student_t, centered_exponential, two_point };

  Kind kind = Kind::normal;
  double df = 5.0;  // student_t only; requires df > 2 for the standardization

  static UDist normal();
  static UDist student_t(double df);
  static UDist centered_exponential();
  static UDist two_point();

  void validate() const;
  double sample(RngStream& rng) const;
  bool continuous() const { return kind != Kind::two_point; }
  std::string name() const;
};

}  // namespace loopi
