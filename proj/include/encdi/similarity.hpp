#ifndef ENCDI_SIMILARITY_HPP
#define ENCDI_SIMILARITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "encdi/preprocess.hpp"
#include "encdi/types.hpp"

namespace encdi::similarity {

enum class LpNorm { L1, L2, Linf };

struct SimilarityReport {
  double cosine_score = 0.0;  // mean |sim| over pairs, in [0,1]
  double l2_score = 0.0;      // mean (1 - ||a-b||/2) over pairs
  double l1_mean = 0.0, l2_mean = 0.0, linf_mean = 0.0;
  double l1_stderr = 0.0, l2_stderr = 0.0, linf_stderr = 0.0;
  std::vector<double> per_pair_cosine;   // |sim| per pair
  std::vector<double> per_pair_l2score;  // 1 - ||a-b||/2 per pair
  std::size_t n_pairs = 0;
};

namespace detail {

inline void check_aligned(const RepresentationSet& a,
                          const RepresentationSet& b) {
  a.validate();
  b.validate();
  if (a.n_rows != b.n_rows)
    throw Error(ErrorCode::RowCountMismatch,
                "similarity needs equally many rows in both sets");
  if (a.dim != b.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "similarity needs equal dimensions; align them explicitly");
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

}  // namespace detail

// Full per-pair report: center rows, unit-normalize, then |cosine|,
// l2 score, and lp distance summaries between aligned pairs. Raw mode
// skips the centering/normalization pipeline.
inline SimilarityReport similarity_report(const RepresentationSet& reps_a,
                                          const RepresentationSet& reps_b,
                                          bool raw = false) {
  detail::check_aligned(reps_a, reps_b);
  RepresentationSet a = raw ? reps_a : preprocess::center_and_normalize(reps_a);
  RepresentationSet b = raw ? reps_b : preprocess::center_and_normalize(reps_b);

  const std::size_t n = a.n_rows;
  const std::size_t d = a.dim;
  SimilarityReport rep;
  rep.n_pairs = n;
  rep.per_pair_cosine.resize(n);
  rep.per_pair_l2score.resize(n);
  std::vector<double> l1(n), l2(n), linf(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto ra = a.row(i);
    auto rb = b.row(i);
    double dot = 0.0, na = 0.0, nb = 0.0;
    double s1 = 0.0, s2 = 0.0, sinf = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dot += ra[c] * rb[c];
      na += ra[c] * ra[c];
      nb += rb[c] * rb[c];
      double diff = std::fabs(ra[c] - rb[c]);
      s1 += diff;
      s2 += diff * diff;
      sinf = std::max(sinf, diff);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12)
      throw Error(ErrorCode::ZeroNormRow,
                  "pair " + std::to_string(i) + " has a zero-norm row");
    rep.per_pair_cosine[i] = std::fabs(dot / (na * nb));
    l1[i] = s1;
    l2[i] = std::sqrt(s2);
    linf[i] = sinf;
    rep.per_pair_l2score[i] = 1.0 - 0.5 * l2[i];
  }

  rep.cosine_score = detail::mean_of(rep.per_pair_cosine);
  rep.l2_score = detail::mean_of(rep.per_pair_l2score);
  rep.l1_mean = detail::mean_of(l1);
  rep.l2_mean = detail::mean_of(l2);
  rep.linf_mean = detail::mean_of(linf);
  rep.l1_stderr = detail::stderr_of(l1, rep.l1_mean);
  rep.l2_stderr = detail::stderr_of(l2, rep.l2_mean);
  rep.linf_stderr = detail::stderr_of(linf, rep.linf_mean);
  return rep;
}

inline double cosine_score(const RepresentationSet& a,
                           const RepresentationSet& b, bool raw = false) {
  return similarity_report(a, b, raw).cosine_score;
}

inline double l2_score(const RepresentationSet& a, const RepresentationSet& b,
                       bool raw = false) {
  return similarity_report(a, b, raw).l2_score;
}

inline std::pair<double, double> lp_distances(const RepresentationSet& a,
                                              const RepresentationSet& b,
                                              LpNorm p, bool raw = false) {
  SimilarityReport rep = similarity_report(a, b, raw);
  switch (p) {
    case LpNorm::L1: return {rep.l1_mean, rep.l1_stderr};
    case LpNorm::L2: return {rep.l2_mean, rep.l2_stderr};
    default: return {rep.linf_mean, rep.linf_stderr};
  }
}

struct Histogram {
  std::vector<double> edges;   // n_bins + 1 edges
  std::vector<std::size_t> counts;
};

// Equal-width histogram over [lo, hi]; values at hi land in the last bin.
inline Histogram pair_histogram(const std::vector<double>& scores,
                                std::size_t n_bins, double lo, double hi) {
  if (scores.empty())
    throw Error(ErrorCode::EmptyInput, "cannot histogram an empty vector");
  if (n_bins < 1 || !(hi > lo))
    throw Error(ErrorCode::BadSpec, "invalid histogram bins or range");
  Histogram h;
  h.edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.edges[i] = lo + width * static_cast<double>(i);
  h.counts.assign(n_bins, 0);
  for (double s : scores) {
    double pos = (s - lo) / width;
    auto bin = static_cast<std::ptrdiff_t>(std::floor(pos));
    bin = std::clamp<std::ptrdiff_t>(bin, 0,
                                     static_cast<std::ptrdiff_t>(n_bins) - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

// Range defaults to [min, max] of the data.
inline Histogram pair_histogram(const std::vector<double>& scores,
                                std::size_t n_bins) {
  if (scores.empty())
    throw Error(ErrorCode::EmptyInput, "cannot histogram an empty vector");
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) hi = lo + 1.0;  // all values equal: single populated bin
  return pair_histogram(scores, n_bins, lo, hi);
}

}  // namespace encdi::similarity

#endif  // ENCDI_SIMILARITY_HPP
