#include "loopi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace loopi {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {
double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}
}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  if (p == 0.5) return 0.0;
  // Bracket, then polish with Newton. The cdf is evaluated through erfc, so
  // the result inherits its accuracy.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    double f = normal_cdf(x) - p;
    double d = normal_pdf(x);
    if (d <= 0.0) break;
    double step = f / d;
    x -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double ks_distance_to_normal(std::vector<double> sample) {
  const std::size_t m = sample.size();
  if (m == 0) throw std::invalid_argument("ks_distance_to_normal: empty sample");
  std::sort(sample.begin(), sample.end());
  const double inv_m = 1.0 / static_cast<double>(m);
  double dist = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && sample[j + 1] == sample[i]) ++j;
    const double cdf = normal_cdf(sample[i]);
    const double below = static_cast<double>(i) * inv_m;      // F_hat just left of the atom
    const double at = static_cast<double>(j + 1) * inv_m;     // F_hat at the atom
    dist = std::max({dist, std::abs(at - cdf), std::abs(cdf - below)});
    i = j + 1;
  }
  return dist;
}

MeanSe mean_and_se(const std::vector<double>& values) {
  MeanSe out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(values.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median_of: empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + mid - 1,
                   values.begin() + mid);
  return 0.5 * (values[mid - 1] + hi);
}

}  // namespace loopi
