#ifndef ENCDI_ENTROPY_HPP
#define ENCDI_ENTROPY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <thread>
#include <vector>

#include "encdi/types.hpp"

namespace encdi::entropy {

constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kZeroDistanceEps = 1e-12;

// Global cap on worker threads for the all-pairs scans. Results are
// identical for any value: per-row nearest distances are independent.
inline int& max_threads() {
  static int n = 1;
  return n;
}

struct EntropyEstimate {
  double value = 0.0;  // nats
  std::size_t n_points = 0;
  std::size_t dim = 0;
  std::size_t n_clamped = 0;  // zero-distance neighbors clamped to eps
};

namespace detail {

// Nearest distinct-index neighbor squared distances, exact all-pairs.
inline std::vector<double> nn_sq_distances(const double* data, std::size_t n,
                                           std::size_t d) {
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  const int nthreads = std::max(1, max_threads());
  auto scan_rows = [&](std::size_t lo, std::size_t hi, std::vector<double>& out) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* xi = data + i * d;
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* xj = data + j * d;
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          double diff = xi[c] - xj[c];
          s += diff * diff;
        }
        if (s < m) m = s;
      }
      out[i] = m;
    }
  };
  if (nthreads == 1 || n < 256) {
    // Symmetric half-matrix walk; min-updates commute so order is free.
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = data + i * d;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double* xj = data + j * d;
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          double diff = xi[c] - xj[c];
          s += diff * diff;
        }
        if (s < best[i]) best[i] = s;
        if (s < best[j]) best[j] = s;
      }
    }
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      std::size_t lo = t * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      workers.emplace_back(scan_rows, lo, hi, std::ref(best));
    }
    for (auto& w : workers) w.join();
  }
  return best;
}

inline double log_unit_ball_volume(double dim) {
  return 0.5 * dim * std::log(M_PI) - std::lgamma(1.0 + 0.5 * dim);
}

inline EntropyEstimate kl_entropy_raw(const double* data, std::size_t n,
                                      std::size_t d) {
  if (n < 2)
    throw Error(ErrorCode::TooFewRows, "entropy estimation needs >= 2 rows");
  auto sq = nn_sq_distances(data, n, d);
  EntropyEstimate est;
  est.n_points = n;
  est.dim = d;
  double sum_log_r = 0.0;
  const double dd = static_cast<double>(d);
  for (double s : sq) {
    double r = std::sqrt(s);
    if (r < kZeroDistanceEps) {
      r = kZeroDistanceEps;
      ++est.n_clamped;
    }
    sum_log_r += std::log(r);
  }
  // H = mean log((N-1) R^d) + log B_d + gamma
  est.value = dd * sum_log_r / static_cast<double>(n) +
              std::log(static_cast<double>(n - 1)) +
              log_unit_ball_volume(dd) + kEulerGamma;
  return est;
}

}  // namespace detail

inline EntropyEstimate kl_entropy(const RepresentationSet& reps) {
  reps.validate();
  return detail::kl_entropy_raw(reps.data.data(), reps.n_rows, reps.dim);
}

inline EntropyEstimate kl_joint_entropy(const RepresentationSet& a,
                                        const RepresentationSet& b) {
  a.validate();
  b.validate();
  if (a.n_rows != b.n_rows)
    throw Error(ErrorCode::RowCountMismatch,
                "joint entropy needs index-aligned sets of equal size");
  const std::size_t n = a.n_rows;
  const std::size_t d = a.dim + b.dim;
  std::vector<double> joint(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data.data() + i * a.dim, a.dim, joint.data() + i * d);
    std::copy_n(b.data.data() + i * b.dim, b.dim,
                joint.data() + i * d + a.dim);
  }
  return detail::kl_entropy_raw(joint.data(), n, d);
}

inline double mutual_information(const RepresentationSet& a,
                                 const RepresentationSet& b) {
  return kl_entropy(a).value + kl_entropy(b).value -
         kl_joint_entropy(a, b).value;
}

struct MutualInfoScore {
  double i_raw = 0.0;  // I(victim, suspect), nats
  double i_min = 0.0;  // I(victim, random baseline)
  double i_max = 0.0;  // I(victim, victim)
  double s = 0.0;      // normalized, clamped to [0,1]
};

inline MutualInfoScore mi_score(const RepresentationSet& victim,
                                const RepresentationSet& suspect,
                                const RepresentationSet& baseline) {
  MutualInfoScore score;
  const double h_v = kl_entropy(victim).value;
  score.i_raw = h_v + kl_entropy(suspect).value -
                kl_joint_entropy(victim, suspect).value;
  score.i_min = h_v + kl_entropy(baseline).value -
                kl_joint_entropy(victim, baseline).value;
  score.i_max = 2.0 * h_v - kl_joint_entropy(victim, victim).value;
  if (!(score.i_max > score.i_min))
    throw Error(ErrorCode::DegenerateBounds,
                "mi_score bounds are degenerate (i_max <= i_min)");
  score.s = std::clamp((score.i_raw - score.i_min) / (score.i_max - score.i_min),
                       0.0, 1.0);
  return score;
}

}  // namespace encdi::entropy

#endif  // ENCDI_ENTROPY_HPP
