#ifndef ENCDI_INFERENCE_HPP
#define ENCDI_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "encdi/gmm.hpp"
#include "encdi/preprocess.hpp"
#include "encdi/rng.hpp"
#include "encdi/stats.hpp"
#include "encdi/types.hpp"

namespace encdi::inference {

// Disjoint partition of the private set into the estimator-training part
// (P2) and the evaluation part (P1).
struct SplitPlan {
  std::vector<std::size_t> p1_indices;
  std::vector<std::size_t> p2_indices;
  double fraction_p2 = 0.5;
  std::uint64_t seed = 0;
};

inline SplitPlan make_split(std::size_t n_private, double fraction_p2,
                            std::uint64_t seed) {
  if (!(fraction_p2 > 0.0) || !(fraction_p2 < 1.0))
    throw Error(ErrorCode::BadFraction, "fraction_p2 must lie in (0, 1)");
  if (n_private < 4)
    throw Error(ErrorCode::TooFewRows, "need at least 4 private rows to split");
  auto n_p2 = static_cast<std::size_t>(
      std::lround(fraction_p2 * static_cast<double>(n_private)));
  n_p2 = std::clamp<std::size_t>(n_p2, 2, n_private - 2);

  std::vector<std::size_t> idx(n_private);
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, "split");
  std::shuffle(idx.begin(), idx.end(), rng);

  SplitPlan plan;
  plan.fraction_p2 = fraction_p2;
  plan.seed = seed;
  plan.p2_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_p2));
  plan.p1_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_p2), idx.end());
  std::sort(plan.p1_indices.begin(), plan.p1_indices.end());
  std::sort(plan.p2_indices.begin(), plan.p2_indices.end());
  return plan;
}

inline RepresentationSet take_rows(const RepresentationSet& set,
                                   const std::vector<std::size_t>& indices) {
  RepresentationSet out(indices.size(), set.dim);
  out.encoder_label = set.encoder_label;
  out.split_label = set.split_label;
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy_n(set.data.data() + indices[i] * set.dim, set.dim,
                out.data.data() + i * set.dim);
  return out;
}

enum class Decision { Stolen, Inconclusive };

inline const char* to_string(Decision d) {
  return d == Decision::Stolen ? "stolen" : "inconclusive";
}

struct OwnershipVerdict {
  double u_p = 0.0;  // mean log-likelihood of D_P1 under the estimator
  double u_n = 0.0;  // mean log-likelihood of D_N under the estimator
  stats::TTestResult t_result;
  double alpha = 0.05;
  Decision decision = Decision::Inconclusive;
  std::size_t k = 0;
  gmm::CovarianceKind covariance_kind = gmm::CovarianceKind::Full;
  double train_mean_ll = 0.0;  // final fit_log entry
  std::size_t n_p1 = 0, n_n = 0;
  std::uint64_t seed = 0;
  std::string label;
  // Audit payload: the per-point vectors the test consumed.
  std::vector<double> p1_log_likelihoods;
  std::vector<double> n_log_likelihoods;
};

struct InferenceOptions {
  double alpha = 0.05;
  bool standardize = false;  // fit on P2, applied to all splits
  double stdev_floor = 1e-8;
};

// The full ownership-resolution pipeline: preprocess, fit the density
// estimator on P2, score P1 and N, then the one-sided Welch test of
// H0: u_P <= u_N.
inline OwnershipVerdict run_dataset_inference(const RepresentationSet& reps_p1,
                                              const RepresentationSet& reps_p2,
                                              const RepresentationSet& reps_n,
                                              const gmm::GmmFitConfig& config,
                                              const InferenceOptions& opts = {}) {
  reps_p1.validate();
  reps_p2.validate();
  reps_n.validate();
  if (reps_p1.dim != reps_p2.dim || reps_n.dim != reps_p2.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "P1, P2 and N sets must share one dimension");

  RepresentationSet p1 = reps_p1;
  RepresentationSet p2 = reps_p2;
  RepresentationSet n = reps_n;

  // Evaluation uses equally many test and train points; subsample N when
  // it is larger than P1.
  if (n.n_rows > p1.n_rows) {
    std::vector<std::size_t> idx(n.n_rows);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(config.seed, "subsample_n");
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(p1.n_rows);
    std::sort(idx.begin(), idx.end());
    n = take_rows(n, idx);
  }

  gmm::PreprocessRecord record;
  if (opts.standardize) {
    auto stats = preprocess::fit_standardization(p2);
    p2 = preprocess::apply_standardization(p2, stats, opts.stdev_floor);
    p1 = preprocess::apply_standardization(p1, stats, opts.stdev_floor);
    n = preprocess::apply_standardization(n, stats, opts.stdev_floor);
    record.standardized = true;
    record.stdev_floor = opts.stdev_floor;
  }
  p2 = preprocess::l2_normalize_rows(p2);
  p1 = preprocess::l2_normalize_rows(p1);
  n = preprocess::l2_normalize_rows(n);
  record.l2_normalized = true;

  gmm::GmmModel model = gmm::fit_gmm(p2, config);
  model.preprocessing = record;

  OwnershipVerdict verdict;
  verdict.p1_log_likelihoods = gmm::per_point_log_likelihoods(model, p1);
  verdict.n_log_likelihoods = gmm::per_point_log_likelihoods(model, n);
  verdict.t_result =
      stats::welch_one_sided(verdict.p1_log_likelihoods, verdict.n_log_likelihoods);
  verdict.u_p = verdict.t_result.mean_a;
  verdict.u_n = verdict.t_result.mean_b;
  verdict.alpha = opts.alpha;
  verdict.decision = verdict.t_result.p_value < opts.alpha
                         ? Decision::Stolen
                         : Decision::Inconclusive;
  verdict.k = model.k;
  verdict.covariance_kind = model.covariance_kind;
  verdict.train_mean_ll = model.fit_log.empty() ? 0.0 : model.fit_log.back();
  verdict.n_p1 = p1.n_rows;
  verdict.n_n = n.n_rows;
  verdict.seed = config.seed;
  return verdict;
}

struct SuspectInput {
  std::string label;
  RepresentationSet reps_p1;
  RepresentationSet reps_p2;
  RepresentationSet reps_n;
};

struct SuspectOutcome {
  std::string label;
  std::optional<OwnershipVerdict> verdict;
  std::string error;  // empty on success
};

// Independent run per suspect; failures are collected, not fatal. Each
// suspect gets its own estimator fit on its own P2 representations.
inline std::vector<SuspectOutcome> run_suite(
    const std::vector<SuspectInput>& suspects, const gmm::GmmFitConfig& config,
    const InferenceOptions& opts = {}) {
  std::vector<SuspectOutcome> outcomes;
  outcomes.reserve(suspects.size());
  for (const auto& s : suspects) {
    SuspectOutcome out;
    out.label = s.label;
    try {
      out.verdict =
          run_dataset_inference(s.reps_p1, s.reps_p2, s.reps_n, config, opts);
      out.verdict->label = s.label;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace encdi::inference

#endif  // ENCDI_INFERENCE_HPP
