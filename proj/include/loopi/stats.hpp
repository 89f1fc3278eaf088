#pragma once

#include <vector>

namespace loopi {

double normal_cdf(double x);

// Inverse of the standard normal cdf, accurate to near machine precision.
double normal_quantile(double p);

// Exact sup-distance between the empirical cdf of the sample and the standard
// normal cdf. Handles ties (point masses) correctly.
double ks_distance_to_normal(std::vector<double> sample);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

MeanSe mean_and_se(const std::vector<double>& values);

double median_of(std::vector<double> values);

}  // namespace loopi
