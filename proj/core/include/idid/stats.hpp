#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idid {

// Compensated (Neumaier) summation. The influence-function sums mix terms of
// very different magnitude once inverse-probability weights get large, and the
// exact-identity checks need means that do not drift with n.
double sum_compensated(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased sample variance (divisor n-1). Requires n >= 2.
double sample_variance(std::span<const double> values);

// Median of an unsorted sequence (copies, then selects).
double median(std::vector<double> values);

// Linearly interpolated quantile (the common "type 7" rule), q in [0,1].
double quantile(std::vector<double> values, double q);

// Q3 - Q1.
double interquartile_range(std::vector<double> values);

// Standard normal CDF and its inverse. The inverse uses a rational
// approximation refined by one Halley step, accurate to ~1e-15.
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace idid
