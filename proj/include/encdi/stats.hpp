#ifndef ENCDI_STATS_HPP
#define ENCDI_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "encdi/types.hpp"

namespace encdi::stats {

namespace detail {

// Continued fraction for the regularized incomplete beta, modified Lentz.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Student-t survival function P(T > t) with dof degrees of freedom.
inline double student_t_sf(double t, double dof) {
  if (!(dof > 0.0))
    throw Error(ErrorCode::InvalidDof, "degrees of freedom must be > 0");
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

struct TTestResult {
  double t_statistic = 0.0;  // reported as the effect size
  double dof = 0.0;          // Welch-Satterthwaite
  double p_value = 1.0;      // one-sided, alternative mean_a > mean_b
  std::size_t n_a = 0, n_b = 0;
  double mean_a = 0.0, mean_b = 0.0;
  bool zero_variance = false;  // both sample variances were zero
};

namespace detail {

inline void mean_var(std::span<const double> x, double& mean, double& var) {
  const double n = static_cast<double>(x.size());
  mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
}

}  // namespace detail

// One-sided Welch two-sample t-test, H0: mean(a) <= mean(b).
inline TTestResult welch_one_sided(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::TooFewSamples, "each sample needs >= 2 entries");
  for (double v : a)
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteValue, "non-finite entry in sample a");
  for (double v : b)
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteValue, "non-finite entry in sample b");

  TTestResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  double var_a, var_b;
  detail::mean_var(a, r.mean_a, var_a);
  detail::mean_var(b, r.mean_b, var_b);

  const double na = static_cast<double>(r.n_a);
  const double nb = static_cast<double>(r.n_b);
  const double se2 = var_a / na + var_b / nb;

  if (se2 == 0.0) {
    // Degenerate: both variances zero. Flag it and decide by sign alone.
    r.zero_variance = true;
    r.dof = na + nb - 2.0;
    if (r.mean_a > r.mean_b) {
      r.t_statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    } else if (r.mean_a < r.mean_b) {
      r.t_statistic = -std::numeric_limits<double>::infinity();
      r.p_value = 1.0;
    } else {
      r.t_statistic = 0.0;
      r.p_value = 0.5;
    }
    return r;
  }

  r.t_statistic = (r.mean_a - r.mean_b) / std::sqrt(se2);
  const double ta = var_a / na;
  const double tb = var_b / nb;
  r.dof = se2 * se2 /
          (ta * ta / (na - 1.0) + tb * tb / (nb - 1.0));
  r.p_value = student_t_sf(r.t_statistic, r.dof);
  return r;
}

inline TTestResult welch_one_sided(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  return welch_one_sided(std::span<const double>(a), std::span<const double>(b));
}

}  // namespace encdi::stats

#endif  // ENCDI_STATS_HPP
