#ifndef ENCDI_PREPROCESS_HPP
#define ENCDI_PREPROCESS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "encdi/types.hpp"

namespace encdi::preprocess {

// Per-dimension mean and population standard deviation.
struct StandardizationStats {
  std::vector<double> means;
  std::vector<double> stdevs;
};

// Subtract each row's own mean from its elements.
inline RepresentationSet center_rows(const RepresentationSet& set) {
  RepresentationSet out = set;
  for (std::size_t i = 0; i < out.n_rows; ++i) {
    auto r = out.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(out.dim);
    for (double& v : r) v -= mean;
  }
  return out;
}

// Scale each row to unit l2 norm. Rows with norm below 1e-12 are an error.
inline RepresentationSet l2_normalize_rows(const RepresentationSet& set) {
  RepresentationSet out = set;
  for (std::size_t i = 0; i < out.n_rows; ++i) {
    auto r = out.row(i);
    double sq = 0.0;
    for (double v : r) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm < 1e-12)
      throw Error(ErrorCode::ZeroNormRow,
                  "row " + std::to_string(i) + " has near-zero l2 norm");
    for (double& v : r) v /= norm;
  }
  return out;
}

inline StandardizationStats fit_standardization(const RepresentationSet& set) {
  if (set.n_rows < 2)
    throw Error(ErrorCode::TooFewRows,
                "standardization needs at least 2 rows");
  StandardizationStats stats;
  stats.means.assign(set.dim, 0.0);
  stats.stdevs.assign(set.dim, 0.0);
  const double n = static_cast<double>(set.n_rows);
  for (std::size_t i = 0; i < set.n_rows; ++i)
    for (std::size_t j = 0; j < set.dim; ++j) stats.means[j] += set.at(i, j);
  for (std::size_t j = 0; j < set.dim; ++j) stats.means[j] /= n;
  for (std::size_t i = 0; i < set.n_rows; ++i)
    for (std::size_t j = 0; j < set.dim; ++j) {
      double d = set.at(i, j) - stats.means[j];
      stats.stdevs[j] += d * d;
    }
  for (std::size_t j = 0; j < set.dim; ++j)
    stats.stdevs[j] = std::sqrt(stats.stdevs[j] / n);
  return stats;
}

inline RepresentationSet apply_standardization(const RepresentationSet& set,
                                               const StandardizationStats& stats,
                                               double floor = 1e-8) {
  if (stats.means.size() != set.dim || stats.stdevs.size() != set.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "standardization stats dimension does not match set");
  RepresentationSet out = set;
  for (std::size_t i = 0; i < out.n_rows; ++i)
    for (std::size_t j = 0; j < out.dim; ++j)
      out.at(i, j) =
          (set.at(i, j) - stats.means[j]) / std::max(stats.stdevs[j], floor);
  return out;
}

// The default metric pipeline: per-row centering then unit normalization.
inline RepresentationSet center_and_normalize(const RepresentationSet& set) {
  return l2_normalize_rows(center_rows(set));
}

}  // namespace encdi::preprocess

#endif  // ENCDI_PREPROCESS_HPP
