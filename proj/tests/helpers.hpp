#ifndef ENCDI_TEST_HELPERS_HPP
#define ENCDI_TEST_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "encdi/types.hpp"

namespace testutil {

inline encdi::RepresentationSet gaussian_set(std::size_t n, std::size_t d,
                                             std::uint64_t seed,
                                             double mean = 0.0,
                                             double stdev = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean, stdev);
  encdi::RepresentationSet set(n, d);
  for (double& v : set.data) v = g(rng);
  return set;
}

// Adaptive Simpson quadrature; the independent oracle for t-distribution
// tail probabilities.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double eps = 1e-12, int depth = 60) {
  std::function<double(double, double, double, double, double, double, int)>
      rec = [&](double lo, double hi, double flo, double fhi, double fm,
                double whole, int d) -> double {
    double m = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    double flm = f(lm), frm = f(rm);
    double left = (m - lo) / 6.0 * (flo + 4.0 * flm + fm);
    double right = (hi - m) / 6.0 * (fm + 4.0 * frm + fhi);
    if (d <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, m, flo, fm, flm, left, d - 1) +
           rec(m, hi, fm, fhi, frm, right, d - 1);
  };
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fb, fm, whole, depth);
}

inline double t_pdf(double x, double dof) {
  double ln = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
              0.5 * std::log(dof * M_PI) -
              0.5 * (dof + 1.0) * std::log1p(x * x / dof);
  return std::exp(ln);
}

// Oracle survival function: 0.5 minus quadrature of the density over [0, t].
inline double t_sf_oracle(double t, double dof) {
  if (t == 0.0) return 0.5;
  double tail =
      adaptive_simpson([dof](double x) { return t_pdf(x, dof); }, 0.0,
                       std::fabs(t));
  return t > 0.0 ? 0.5 - tail : 0.5 + tail;
}

// One-sample Kolmogorov-Smirnov statistic against Uniform[0,1].
inline double ks_statistic_uniform(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double cdf = samples[i];
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - cdf));
    d = std::max(d, std::fabs(cdf - static_cast<double>(i) / n));
  }
  return d;
}

// Asymptotic critical value of the KS statistic (Stephens correction).
inline double ks_critical(std::size_t n, double alpha) {
  // c(alpha): 1.628 at the 1% level, 1.358 at 5%.
  double c = alpha <= 0.01 ? 1.628 : 1.358;
  double sn = std::sqrt(static_cast<double>(n));
  return c / (sn + 0.12 + 0.11 / sn);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil

#endif  // ENCDI_TEST_HELPERS_HPP
