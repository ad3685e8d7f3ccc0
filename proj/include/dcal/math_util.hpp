#pragma once

#include <cmath>
#include <vector>

namespace dcal {

inline double expit(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double logit(double u) { return std::log(u / (1.0 - u)); }

// log(1 + exp(t)) without overflow.
inline double log1pexp(double t) {
  if (t > 33.0) return t;
  if (t < -33.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

inline double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779399;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step, accurate to ~1e-15 over (0,1).
double norm_quantile(double p);

// Pairwise (cascade) summation: the reduction order is a pure function of the
// vector length, so aggregates match across worker counts.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

inline double pairwise_mean(const std::vector<double>& x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

double median(std::vector<double> x);  // by value: sorts a copy

}  // namespace dcal
