#ifndef ENCDI_SYNTH_HPP
#define ENCDI_SYNTH_HPP

#include <Eigen/Dense>
#include <Eigen/QR>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "encdi/rng.hpp"
#include "encdi/types.hpp"

namespace encdi::synth {

enum class StealMap { Orthogonal, RandomLinear };

enum class Role { Victim, Stolen, Independent };
enum class Split { P1, P2, N };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Victim: return "victim";
    case Role::Stolen: return "stolen";
    default: return "independent";
  }
}
inline const char* to_string(Split s) {
  switch (s) {
    case Split::P1: return "p1";
    case Split::P2: return "p2";
    default: return "n";
  }
}

// Parameters of the emulated victim/stolen/independent encoder universe.
// gap_rho shrinks the within-cluster spread of the victim's private-data
// representations; 1 means no train/test gap at all.
struct SyntheticWorldConfig {
  std::size_t dim = 64;
  std::size_t n_clusters = 8;
  std::size_t n_p1 = 2000;
  std::size_t n_p2 = 2000;
  std::size_t n_n = 2000;
  double gap_rho = 0.9;
  double steal_noise = 0.1;
  StealMap steal_map = StealMap::Orthogonal;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim < 1 || n_clusters < 1 || n_p1 < 2 || n_p2 < 2 || n_n < 2 ||
        !(gap_rho > 0.0) || gap_rho > 1.0 || steal_noise < 0.0)
      throw Error(ErrorCode::BadConfig, "invalid synthetic world config");
  }
};

struct GroundTruth {
  Eigen::MatrixXd victim_centers;       // n_clusters x dim
  Eigen::MatrixXd independent_centers;  // n_clusters x dim
  Eigen::MatrixXd steal_matrix;         // dim x dim
  std::vector<std::size_t> victim_assignments[3];       // per split
  std::vector<std::size_t> independent_assignments[3];  // per split
  double gap_rho = 1.0;
};

struct SyntheticWorld {
  // sets[role][split]
  std::array<std::array<RepresentationSet, 3>, 3> sets;
  GroundTruth truth;
  SyntheticWorldConfig config;

  const RepresentationSet& get(Role r, Split s) const {
    return sets[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
  }
  RepresentationSet& get(Role r, Split s) {
    return sets[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
  }
};

namespace detail {

// Cluster centers drawn uniformly on the sphere of radius sqrt(dim),
// keeping separation scale-free across dimensions.
inline Eigen::MatrixXd draw_centers(std::size_t n_clusters, std::size_t dim,
                                    Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(n_clusters),
                          static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(i, j) = g(rng);
    double norm = centers.row(i).norm();
    if (norm > 0.0)
      centers.row(i) *= std::sqrt(static_cast<double>(dim)) / norm;
  }
  return centers;
}

inline RepresentationSet draw_split(const Eigen::MatrixXd& centers,
                                    std::size_t n, double sigma, Rng& rng,
                                    std::vector<std::size_t>& assignments_out) {
  const auto dim = static_cast<std::size_t>(centers.cols());
  std::uniform_int_distribution<std::size_t> pick(
      0, static_cast<std::size_t>(centers.rows()) - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  RepresentationSet set(n, dim);
  assignments_out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = pick(rng);
    assignments_out[i] = c;
    for (std::size_t j = 0; j < dim; ++j)
      set.at(i, j) = centers(static_cast<Eigen::Index>(c),
                             static_cast<Eigen::Index>(j)) +
                     sigma * g(rng);
  }
  return set;
}

inline Eigen::MatrixXd draw_map(std::size_t dim, StealMap kind, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(dim),
                    static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
  if (kind == StealMap::RandomLinear)
    return a / std::sqrt(static_cast<double>(dim));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix column signs from R's diagonal so the map is unique per draw.
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace detail

inline RepresentationSet emulate_stealing_with_map(
    const RepresentationSet& victim_reps, const Eigen::MatrixXd& m,
    double noise, std::uint64_t seed) {
  auto noise_rng = make_rng(seed, "steal_noise");
  std::normal_distribution<double> g(0.0, 1.0);
  RepresentationSet out(victim_reps.n_rows, victim_reps.dim);
  out.encoder_label = "stolen";
  out.split_label = victim_reps.split_label;
  const auto dim = static_cast<Eigen::Index>(victim_reps.dim);
  Eigen::VectorXd row(dim);
  for (std::size_t i = 0; i < victim_reps.n_rows; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j)
      row[j] = victim_reps.at(i, static_cast<std::size_t>(j));
    Eigen::VectorXd mapped = m * row;
    for (Eigen::Index j = 0; j < dim; ++j)
      out.at(i, static_cast<std::size_t>(j)) =
          mapped[j] + (noise > 0.0 ? noise * g(noise_rng) : 0.0);
  }
  return out;
}

// Apply the emulated stealing map M x + eps to every row, row-aligned.
inline RepresentationSet emulate_stealing(const RepresentationSet& victim_reps,
                                          StealMap map_kind, double noise,
                                          std::uint64_t seed) {
  victim_reps.validate();
  if (noise < 0.0)
    throw Error(ErrorCode::BadConfig, "steal noise must be >= 0");
  auto map_rng = make_rng(seed, "steal_map");
  Eigen::MatrixXd m = detail::draw_map(victim_reps.dim, map_kind, map_rng);
  return emulate_stealing_with_map(victim_reps, m, noise, seed);
}

inline SyntheticWorld generate_world(const SyntheticWorldConfig& config) {
  config.validate();
  SyntheticWorld world;
  world.config = config;
  world.truth.gap_rho = config.gap_rho;

  auto centers_rng = make_rng(config.seed, "victim_centers");
  world.truth.victim_centers =
      detail::draw_centers(config.n_clusters, config.dim, centers_rng);
  auto indep_rng = make_rng(config.seed, "independent_centers");
  world.truth.independent_centers =
      detail::draw_centers(config.n_clusters, config.dim, indep_rng);
  auto map_rng = make_rng(config.seed, "steal_map");
  world.truth.steal_matrix =
      detail::draw_map(config.dim, config.steal_map, map_rng);

  const Split splits[3] = {Split::P1, Split::P2, Split::N};
  const std::size_t counts[3] = {config.n_p1, config.n_p2, config.n_n};
  const SplitLabel labels[3] = {SplitLabel::P1, SplitLabel::P2, SplitLabel::N};

  for (int s = 0; s < 3; ++s) {
    // Private-split victim rows concentrate by gap_rho; test rows do not.
    const double sigma = (splits[s] == Split::N) ? 1.0 : config.gap_rho;
    auto rng = make_rng(config.seed,
                        std::string("victim_") + to_string(splits[s]));
    auto& set = world.get(Role::Victim, splits[s]);
    set = detail::draw_split(world.truth.victim_centers, counts[s], sigma, rng,
                             world.truth.victim_assignments[s]);
    set.encoder_label = "victim";
    set.split_label = labels[s];

    // Stolen rows are row-aligned images of the victim rows.
    auto& stolen = world.get(Role::Stolen, splits[s]);
    stolen = emulate_stealing_with_map(
        set, world.truth.steal_matrix, config.steal_noise,
        derive_seed(config.seed, std::string("stolen_") + to_string(splits[s])));
    stolen.split_label = labels[s];

    // Independent rows share only the input index space: fresh basis,
    // no membership gap on any split.
    auto irng = make_rng(config.seed,
                         std::string("independent_") + to_string(splits[s]));
    auto& indep = world.get(Role::Independent, splits[s]);
    indep = detail::draw_split(world.truth.independent_centers, counts[s], 1.0,
                               irng, world.truth.independent_assignments[s]);
    indep.encoder_label = "independent";
    indep.split_label = labels[s];
  }
  return world;
}

// Row-aligned draws from a randomly initialized encoder: isotropic noise
// with no cluster structure. Used as the mi_score lower-bound baseline.
inline RepresentationSet random_baseline(std::size_t n_rows, std::size_t dim,
                                         std::uint64_t seed) {
  auto rng = make_rng(seed, "random_baseline");
  std::normal_distribution<double> g(0.0, 1.0);
  RepresentationSet set(n_rows, dim);
  for (double& v : set.data) v = g(rng);
  set.encoder_label = "random";
  return set;
}

}  // namespace encdi::synth

#endif  // ENCDI_SYNTH_HPP
