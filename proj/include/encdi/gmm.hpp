#ifndef ENCDI_GMM_HPP
#define ENCDI_GMM_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "encdi/rng.hpp"
#include "encdi/types.hpp"

namespace encdi::gmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

enum class CovarianceKind { Diagonal, Full };

inline const char* to_string(CovarianceKind k) {
  return k == CovarianceKind::Diagonal ? "diagonal" : "full";
}

// Record of the preprocessing the training data went through before the
// fit. The fit itself does not apply it; scoring callers must match it.
struct PreprocessRecord {
  bool standardized = false;
  bool l2_normalized = false;
  double stdev_floor = 1e-8;
};

struct GmmFitConfig {
  std::size_t k = 10;
  CovarianceKind covariance_kind = CovarianceKind::Full;
  std::size_t max_iters = 200;
  double rel_tol = 1e-5;
  double reg_floor = 1e-6;
  std::size_t n_init = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1 || max_iters < 1 || !(rel_tol > 0.0) || !(reg_floor > 0.0) ||
        n_init < 1)
      throw Error(ErrorCode::BadConfig, "invalid GMM fit configuration");
  }
};

// Defaults matching the estimator setup: full covariance with 10
// components up to d=512, diagonal with 50 beyond that.
inline GmmFitConfig default_config_for_dim(std::size_t dim,
                                           std::uint64_t seed = 0) {
  GmmFitConfig cfg;
  cfg.seed = seed;
  if (dim > 512) {
    cfg.k = 50;
    cfg.covariance_kind = CovarianceKind::Diagonal;
  } else {
    cfg.k = 10;
    cfg.covariance_kind = CovarianceKind::Full;
  }
  return cfg;
}

struct GmmModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  Vector weights;                  // length k, on the simplex
  Matrix means;                    // k x d
  Matrix diag_covs;                // k x d when diagonal, else empty
  std::vector<Matrix> full_covs;   // k of d x d when full, else empty
  CovarianceKind covariance_kind = CovarianceKind::Full;
  PreprocessRecord preprocessing;
  std::vector<double> fit_log;     // per-iteration mean log-likelihood

  // Cached per-component terms for density evaluation.
  struct Cached {
    std::vector<Eigen::LLT<Matrix>> llts;  // full only
    Vector log_norm;                       // log w_j - 0.5(d ln 2pi + logdet)
    Matrix inv_diag;                       // 1/var, diagonal only
  };
  mutable Cached cache_;
  mutable bool cache_valid_ = false;

  void refresh_cache() const {
    cache_.log_norm.resize(static_cast<Eigen::Index>(k));
    const double d_ln2pi = static_cast<double>(dim) * std::log(2.0 * M_PI);
    if (covariance_kind == CovarianceKind::Full) {
      cache_.llts.clear();
      cache_.llts.reserve(k);
      for (std::size_t j = 0; j < k; ++j) {
        cache_.llts.emplace_back(full_covs[j]);
        double logdet =
            2.0 * cache_.llts.back().matrixLLT().diagonal().array().log().sum();
        cache_.log_norm[static_cast<Eigen::Index>(j)] =
            std::log(weights[static_cast<Eigen::Index>(j)]) -
            0.5 * (d_ln2pi + logdet);
      }
    } else {
      cache_.inv_diag = diag_covs.array().inverse();
      for (std::size_t j = 0; j < k; ++j) {
        double logdet =
            diag_covs.row(static_cast<Eigen::Index>(j)).array().log().sum();
        cache_.log_norm[static_cast<Eigen::Index>(j)] =
            std::log(weights[static_cast<Eigen::Index>(j)]) -
            0.5 * (d_ln2pi + logdet);
      }
    }
    cache_valid_ = true;
  }
};

namespace detail {

inline double logsumexp_row(const Eigen::RowVectorXd& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Per-point log joint densities log(w_j N(x; mu_j, Sigma_j)), n x k.
inline Matrix component_log_densities(const GmmModel& model,
                                      const Eigen::Ref<const Matrix>& x) {
  if (!model.cache_valid_) model.refresh_cache();
  const Eigen::Index n = x.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(model.k);
  Matrix out(n, k);
  if (model.covariance_kind == CovarianceKind::Full) {
    for (Eigen::Index j = 0; j < k; ++j) {
      Matrix centered = x.rowwise() - model.means.row(j);
      // Solve L y = (x - mu)^T; squared column norms are Mahalanobis terms.
      Matrix y = model.cache_.llts[static_cast<std::size_t>(j)]
                     .matrixL()
                     .solve(centered.transpose());
      out.col(j) = (-0.5 * y.colwise().squaredNorm().array() +
                    model.cache_.log_norm[j])
                       .transpose();
    }
  } else {
    for (Eigen::Index j = 0; j < k; ++j) {
      Matrix centered = x.rowwise() - model.means.row(j);
      out.col(j) =
          -0.5 * (centered.array().square().rowwise() *
                  model.cache_.inv_diag.row(j).array())
                     .rowwise()
                     .sum() +
          model.cache_.log_norm[j];
    }
  }
  return out;
}

inline RowMajorMap as_matrix(const RepresentationSet& set) {
  return RowMajorMap(set.data.data(), static_cast<Eigen::Index>(set.n_rows),
                     static_cast<Eigen::Index>(set.dim));
}

// k-means++ seeding over the given points.
inline std::vector<Eigen::Index> kmeanspp_seeds(
    const Eigen::Ref<const Matrix>& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> seeds;
  seeds.reserve(k);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  seeds.push_back(first(rng));
  Vector d2 = (x.rowwise() - x.row(seeds[0])).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (seeds.size() < k) {
    double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total <= 0.0) {
      chosen = first(rng);  // all points coincide with a seed
    } else {
      double target = unif(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    seeds.push_back(chosen);
    d2 = d2.cwiseMin(
        (x.rowwise() - x.row(chosen)).rowwise().squaredNorm());
  }
  return seeds;
}

struct EmRun {
  GmmModel model;
  double final_ll = -std::numeric_limits<double>::infinity();
};

inline GmmModel initialize(const Eigen::Ref<const Matrix>& x,
                           const GmmFitConfig& config, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const std::size_t k = config.k;

  // Seed on a subsample of at most 10*k*d points.
  const Eigen::Index cap =
      static_cast<Eigen::Index>(10 * k * static_cast<std::size_t>(d));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::Index m = n;
  if (n > cap) {
    std::shuffle(idx.begin(), idx.end(), rng);
    m = cap;
  }
  Matrix sub(m, d);
  for (Eigen::Index i = 0; i < m; ++i) sub.row(i) = x.row(idx[static_cast<std::size_t>(i)]);

  auto seeds = kmeanspp_seeds(sub, k, rng);

  // One assignment pass to set means, covariances, weights.
  Matrix centers(static_cast<Eigen::Index>(k), d);
  for (std::size_t j = 0; j < k; ++j) centers.row(static_cast<Eigen::Index>(j)) = sub.row(seeds[j]);

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
      double dd = (sub.row(i) - centers.row(j)).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = j;
      }
    }
    assign[static_cast<std::size_t>(i)] = best;
  }

  GmmModel model;
  model.k = k;
  model.dim = static_cast<std::size_t>(d);
  model.covariance_kind = config.covariance_kind;
  model.weights.resize(static_cast<Eigen::Index>(k));
  model.means.resize(static_cast<Eigen::Index>(k), d);
  Matrix vars = Matrix::Zero(static_cast<Eigen::Index>(k), d);
  Vector counts = Vector::Zero(static_cast<Eigen::Index>(k));

  for (Eigen::Index i = 0; i < m; ++i) counts[assign[static_cast<std::size_t>(i)]] += 1.0;
  model.means.setZero();
  for (Eigen::Index i = 0; i < m; ++i)
    model.means.row(assign[static_cast<std::size_t>(i)]) += sub.row(i);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j)
    if (counts[j] > 0.0) model.means.row(j) /= counts[j];
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index j = assign[static_cast<std::size_t>(i)];
    vars.row(j) += (sub.row(i) - model.means.row(j)).array().square().matrix();
  }
  const double global_var =
      (sub.rowwise() - sub.colwise().mean()).array().square().mean() + config.reg_floor;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
    if (counts[j] > 1.0)
      vars.row(j) = (vars.row(j) / counts[j]).array() + config.reg_floor;
    else
      vars.row(j).setConstant(global_var);
    model.weights[j] = std::max(counts[j], 1.0);
  }
  model.weights /= model.weights.sum();

  if (config.covariance_kind == CovarianceKind::Diagonal) {
    model.diag_covs = vars;
  } else {
    model.full_covs.assign(k, Matrix::Zero(d, d));
    for (std::size_t j = 0; j < k; ++j)
      model.full_covs[j].diagonal() = vars.row(static_cast<Eigen::Index>(j));
  }
  return model;
}

inline EmRun run_em(const Eigen::Ref<const Matrix>& x,
                    const GmmFitConfig& config, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k = static_cast<Eigen::Index>(config.k);

  EmRun run;
  run.model = initialize(x, config, rng);
  GmmModel& model = run.model;

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    model.cache_valid_ = false;
    Matrix logp = component_log_densities(model, x);  // n x k
    Vector row_ll(n);
    for (Eigen::Index i = 0; i < n; ++i) row_ll[i] = logsumexp_row(logp.row(i));
    const double mean_ll = row_ll.mean();
    model.fit_log.push_back(mean_ll);
    run.final_ll = mean_ll;

    if (std::isfinite(prev_ll) &&
        std::fabs(mean_ll - prev_ll) / std::max(1.0, std::fabs(mean_ll)) <
            config.rel_tol)
      break;
    prev_ll = mean_ll;

    // Responsibilities in place.
    Matrix resp = (logp.colwise() - row_ll).array().exp();
    Vector nk = resp.colwise().sum();

    // Rescue empty components at the lowest-density point.
    for (Eigen::Index j = 0; j < k; ++j) {
      if (nk[j] < 1e-10 * static_cast<double>(n)) {
        Eigen::Index worst;
        row_ll.minCoeff(&worst);
        resp.row(worst).setZero();
        resp(worst, j) = 1.0;
        nk = resp.colwise().sum();
      }
    }

    model.weights = nk / static_cast<double>(n);
    for (Eigen::Index j = 0; j < k; ++j) {
      double denom = nk[j];
      if (denom < 1e-12)
        throw Error(ErrorCode::DegenerateComponent,
                    "component " + std::to_string(j) +
                        " captured no points even after re-seeding");
      model.means.row(j) = (resp.col(j).transpose() * x) / denom;
      Matrix centered = x.rowwise() - model.means.row(j);
      if (config.covariance_kind == CovarianceKind::Diagonal) {
        model.diag_covs.row(j) =
            ((centered.array().square().colwise() * resp.col(j).array())
                 .colwise()
                 .sum() /
             denom) +
            config.reg_floor;
      } else {
        Matrix weighted = centered.array().colwise() * resp.col(j).array();
        model.full_covs[static_cast<std::size_t>(j)] =
            (weighted.transpose() * centered) / denom;
        model.full_covs[static_cast<std::size_t>(j)].diagonal().array() +=
            config.reg_floor;
      }
    }
    model.cache_valid_ = false;
  }
  model.cache_valid_ = false;
  (void)d;
  return run;
}

}  // namespace detail

inline GmmModel fit_gmm(const RepresentationSet& data,
                        const GmmFitConfig& config) {
  config.validate();
  data.validate();
  if (data.n_rows < config.k)
    throw Error(ErrorCode::TooFewRows,
                "need at least k rows to fit a k-component mixture");
  auto x = detail::as_matrix(data);

  detail::EmRun best;
  std::size_t best_init = 0;
  for (std::size_t init = 0; init < config.n_init; ++init) {
    auto rng = make_rng(config.seed, "gmm_init", init);
    detail::EmRun run = detail::run_em(x, config, rng);
    // Strict improvement only: ties go to the lowest restart index.
    if (run.final_ll > best.final_ll) {
      best = std::move(run);
      best_init = init;
    }
  }
  (void)best_init;
  return std::move(best.model);
}

inline double log_density(const GmmModel& model, std::span<const double> point) {
  if (point.size() != model.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "point dimension does not match model");
  Eigen::Map<const Eigen::RowVectorXd> p(point.data(),
                                         static_cast<Eigen::Index>(point.size()));
  Matrix logp = detail::component_log_densities(model, p);
  return detail::logsumexp_row(logp.row(0));
}

inline std::vector<double> per_point_log_likelihoods(
    const GmmModel& model, const RepresentationSet& set) {
  if (set.dim != model.dim)
    throw Error(ErrorCode::DimensionMismatch,
                "set dimension does not match model");
  auto x = detail::as_matrix(set);
  Matrix logp = detail::component_log_densities(model, x);
  std::vector<double> out(set.n_rows);
  for (Eigen::Index i = 0; i < logp.rows(); ++i)
    out[static_cast<std::size_t>(i)] = detail::logsumexp_row(logp.row(i));
  return out;
}

inline double mean_log_likelihood(const GmmModel& model,
                                  const RepresentationSet& set) {
  auto lls = per_point_log_likelihoods(model, set);
  double sum = 0.0;
  for (double v : lls) sum += v;
  return sum / static_cast<double>(lls.size());
}

// --- model serialization ------------------------------------------------
// "GMMB" | u8 version | u8 kind | u32 k | u32 dim | f64 weights | f64 means
// | f64 covariances | u8 flags | f64 stdev_floor | u32 n_log | f64 fit_log.
// All little-endian float64, so a reloaded model is bit-exact.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw Error(ErrorCode::MalformedHeader, "truncated GMM blob");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw Error(ErrorCode::MalformedHeader, "truncated GMM blob");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void save_gmm(const GmmModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, path + ": cannot open for writing");
  os.write("GMMB", 4);
  os.put(1);
  os.put(model.covariance_kind == CovarianceKind::Diagonal ? 0 : 1);
  detail::put_u32(os, static_cast<std::uint32_t>(model.k));
  detail::put_u32(os, static_cast<std::uint32_t>(model.dim));
  for (Eigen::Index j = 0; j < model.weights.size(); ++j)
    detail::put_f64(os, model.weights[j]);
  for (Eigen::Index j = 0; j < model.means.rows(); ++j)
    for (Eigen::Index c = 0; c < model.means.cols(); ++c)
      detail::put_f64(os, model.means(j, c));
  if (model.covariance_kind == CovarianceKind::Diagonal) {
    for (Eigen::Index j = 0; j < model.diag_covs.rows(); ++j)
      for (Eigen::Index c = 0; c < model.diag_covs.cols(); ++c)
        detail::put_f64(os, model.diag_covs(j, c));
  } else {
    for (const auto& cov : model.full_covs)
      for (Eigen::Index r = 0; r < cov.rows(); ++r)
        for (Eigen::Index c = 0; c < cov.cols(); ++c)
          detail::put_f64(os, cov(r, c));
  }
  os.put(static_cast<char>((model.preprocessing.standardized ? 1 : 0) |
                           (model.preprocessing.l2_normalized ? 2 : 0)));
  detail::put_f64(os, model.preprocessing.stdev_floor);
  detail::put_u32(os, static_cast<std::uint32_t>(model.fit_log.size()));
  for (double v : model.fit_log) detail::put_f64(os, v);
  if (!os) throw Error(ErrorCode::IoFailure, path + ": write failed");
}

inline GmmModel load_gmm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, path + ": cannot open for reading");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GMMB", 4) != 0)
    throw Error(ErrorCode::MalformedHeader, path + ": bad GMM magic");
  char version, kind;
  if (!is.get(version) || version != 1 || !is.get(kind))
    throw Error(ErrorCode::MalformedHeader, path + ": bad GMM header");
  GmmModel model;
  model.covariance_kind =
      kind == 0 ? CovarianceKind::Diagonal : CovarianceKind::Full;
  model.k = detail::get_u32(is);
  model.dim = detail::get_u32(is);
  const Eigen::Index k = static_cast<Eigen::Index>(model.k);
  const Eigen::Index d = static_cast<Eigen::Index>(model.dim);
  model.weights.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) model.weights[j] = detail::get_f64(is);
  model.means.resize(k, d);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index c = 0; c < d; ++c) model.means(j, c) = detail::get_f64(is);
  if (model.covariance_kind == CovarianceKind::Diagonal) {
    model.diag_covs.resize(k, d);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index c = 0; c < d; ++c)
        model.diag_covs(j, c) = detail::get_f64(is);
  } else {
    model.full_covs.assign(model.k, Matrix(d, d));
    for (auto& cov : model.full_covs)
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) cov(r, c) = detail::get_f64(is);
  }
  char flags;
  if (!is.get(flags))
    throw Error(ErrorCode::MalformedHeader, path + ": truncated GMM blob");
  model.preprocessing.standardized = flags & 1;
  model.preprocessing.l2_normalized = flags & 2;
  model.preprocessing.stdev_floor = detail::get_f64(is);
  std::uint32_t n_log = detail::get_u32(is);
  model.fit_log.resize(n_log);
  for (auto& v : model.fit_log) v = detail::get_f64(is);
  return model;
}

}  // namespace encdi::gmm

#endif  // ENCDI_GMM_HPP
