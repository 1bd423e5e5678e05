#pragma once

#include <cmath>

namespace inferlab {

// Standard normal CDF.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / 2.5066282746310005024;
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, good to ~1e-15 over (0,1).
double norm_quantile(double p);

// log Beta(a,b).
inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Running mean/variance accumulator (Welford-free: plain sums are fine at the
// counts used here, and they merge across workers deterministically).
struct MomentSums {
  long long n = 0;
  double sum = 0.0;
  double sumsq = 0.0;
  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void merge(const MomentSums& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    double m = mean();
    double v = (sumsq - static_cast<double>(n) * m * m) /
               static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }
  // Standard error of the mean.
  double se() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

}  // namespace inferlab
