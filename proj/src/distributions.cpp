#include "loopi/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace loopi {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

LDist LDist::constant_one() { return LDist{}; }

LDist LDist::two_point(double value_a, double value_b, double prob_a) {
  LDist d;
  d.kind = Kind::two_point;
  d.value_a = value_a;
  d.value_b = value_b;
  d.prob_a = prob_a;
  return d;
}

LDist LDist::scaled_uniform(double low, double high) {
  LDist d;
  d.kind = Kind::scaled_uniform;
  d.low = low;
  d.high = high;
  return d;
}

void LDist::validate() const {
  switch (kind) {
    case Kind::constant_one:
      return;
    case Kind::two_point: {
      if (prob_a <= 0.0 || prob_a >= 1.0)
        throw std::invalid_argument("l two_point: prob_a must be in (0,1)");
      if (value_a == 0.0 || value_b == 0.0)
        throw std::invalid_argument("l two_point: values must be nonzero");
      const double second_moment =
          prob_a * value_a * value_a + (1.0 - prob_a) * value_b * value_b;
      if (std::abs(second_moment - 1.0) > 1e-8)
        throw std::invalid_argument(
            "l two_point: E[l^2] must equal 1 (got " +
            std::to_string(second_moment) + ")");
      return;
    }
    case Kind::scaled_uniform:
      if (!(0.0 < low && low < high))
        throw std::invalid_argument(
            "l scaled_uniform: requires 0 < low < high");
      return;
  }
  throw std::invalid_argument("l: unknown kind");
}

double LDist::scale() const {
  if (kind != Kind::scaled_uniform) return 1.0;
  // E[U^2] for U ~ Uniform[low, high]
  const double m2 = (low * low + low * high + high * high) / 3.0;
  return 1.0 / std::sqrt(m2);
}

double LDist::min_abs() const {
  switch (kind) {
    case Kind::constant_one:
      return 1.0;
    case Kind::two_point:
      return std::min(std::abs(value_a), std::abs(value_b));
    case Kind::scaled_uniform:
      return scale() * low;
  }
  return 0.0;
}

double LDist::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::constant_one:
      return 1.0;
    case Kind::two_point:
      return rng.uniform01() < prob_a ? value_a : value_b;
    case Kind::scaled_uniform:
      return scale() * rng.uniform(low, high);
  }
  return 1.0;
}

std::string LDist::name() const {
  switch (kind) {
    case Kind::constant_one:
      return "constant";
    case Kind::two_point:
      return "two_point";
    case Kind::scaled_uniform:
      return "scaled_uniform";
  }
  return "?";
}

VDist VDist::normal() { return VDist{}; }

VDist VDist::rademacher() {
  VDist d;
  d.kind = Kind::rademacher;
  return d;
}

VDist VDist::uniform() {
  VDist d;
  d.kind = Kind::uniform;
  return d;
}

VDist VDist::student_t(double df) {
  VDist d;
  d.kind = Kind::student_t;
  d.df = df;
  return d;
}

void VDist::validate() const {
  if (kind == Kind::student_t && !(df > 4.0))
    throw std::invalid_argument(
        "v student_t: df must exceed 4 (finite fourth moment)");
}

double VDist::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::normal:
      return rng.normal();
    case Kind::rademacher:
      return rng.rademacher();
    case Kind::uniform:
      return rng.uniform(-kSqrt3, kSqrt3);
    case Kind::student_t:
      return rng.student_t(df) * std::sqrt((df - 2.0) / df);
  }
  return 0.0;
}

std::string VDist::name() const {
  switch (kind) {
    case Kind::normal:
      return "normal";
    case Kind::rademacher:
      return "rademacher";
    case Kind::uniform:
      return "uniform";
    case Kind::student_t:
      return "student_t";
  }
  return "?";
}

UDist UDist::normal() { return UDist{}; }

UDist UDist::student_t(double df) {
  UDist d;
  d.kind = Kind::student_t;
  d.df = df;
  return d;
}

UDist UDist::centered_exponential() {
  UDist d;
  d.kind = Kind::centered_exponential;
  return d;
}

UDist UDist::two_point() {
  UDist d;
  d.kind = Kind::two_point;
  return d;
}

void UDist::validate() const {
  if (kind == Kind::student_t && !(df > 2.0))
    throw std::invalid_argument(
        "u student_t: df must exceed 2 so the law can be standardized");
}

double UDist::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::normal:
      return rng.normal();
    case Kind::student_t:
      return rng.student_t(df) * std::sqrt((df - 2.0) / df);
    case Kind::centered_exponential:
      return rng.exponential() - 1.0;
    case Kind::two_point:
      return rng.rademacher();
  }
  return 0.0;
}

std::string UDist::name() const {
  switch (kind) {
    case Kind::normal:
      return "normal";
    case Kind::student_t:
      return "student_t";
    case Kind::centered_exponential:
      return "centered_exponential";
    case Kind::two_point:
      return "two_point";
  }
  return "?";
}

}  // namespace loopi
