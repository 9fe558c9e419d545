#ifndef ENCDI_OBFUSCATE_HPP
#define ENCDI_OBFUSCATE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "encdi/rng.hpp"
#include "encdi/types.hpp"

namespace encdi::obfuscate {

enum class Kind { Shuffle, Pad, Transform };

enum class PadMode { Append, RandomPositions };

// Attacker-side output remapping. One spec applies one consistent map to
// every row of a set.
struct ObfuscationSpec {
  Kind kind = Kind::Shuffle;
  std::uint64_t seed = 0;
  std::size_t pad_target_dim = 0;  // pad only; must exceed the input dim
  PadMode pad_mode = PadMode::Append;
  double scale = 1.0;   // transform only; must be nonzero
  double offset = 0.0;  // transform only

  void validate(std::size_t input_dim) const {
    if (kind == Kind::Pad && pad_target_dim <= input_dim)
      throw Error(ErrorCode::BadSpec,
                  "pad_target_dim must exceed the input dimension");
    if (kind == Kind::Transform && scale == 0.0)
      throw Error(ErrorCode::BadSpec, "transform scale must be nonzero");
  }
};

namespace detail {

// Seeded permutation of column indices; out[j] = in[perm[j]].
inline std::vector<std::size_t> column_permutation(std::size_t dim,
                                                   std::uint64_t seed) {
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_rng(seed, "obfuscate_shuffle");
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

// Positions of the original columns inside the padded row, increasing.
inline std::vector<std::size_t> pad_positions(std::size_t dim,
                                              std::size_t target,
                                              PadMode mode,
                                              std::uint64_t seed) {
  std::vector<std::size_t> pos;
  if (mode == PadMode::Append) {
    pos.resize(dim);
    std::iota(pos.begin(), pos.end(), 0);
    return pos;
  }
  std::vector<std::size_t> all(target);
  std::iota(all.begin(), all.end(), 0);
  auto rng = make_rng(seed, "obfuscate_pad");
  std::shuffle(all.begin(), all.end(), rng);
  pos.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(dim));
  std::sort(pos.begin(), pos.end());
  return pos;
}

}  // namespace detail

inline RepresentationSet apply_obfuscation(const RepresentationSet& reps,
                                           const ObfuscationSpec& spec) {
  reps.validate();
  spec.validate(reps.dim);
  switch (spec.kind) {
    case Kind::Shuffle: {
      auto perm = detail::column_permutation(reps.dim, spec.seed);
      RepresentationSet out = reps;
      for (std::size_t i = 0; i < reps.n_rows; ++i)
        for (std::size_t j = 0; j < reps.dim; ++j)
          out.at(i, j) = reps.at(i, perm[j]);
      return out;
    }
    case Kind::Pad: {
      auto pos = detail::pad_positions(reps.dim, spec.pad_target_dim,
                                       spec.pad_mode, spec.seed);
      RepresentationSet out(reps.n_rows, spec.pad_target_dim);
      out.encoder_label = reps.encoder_label;
      out.split_label = reps.split_label;
      for (std::size_t i = 0; i < reps.n_rows; ++i)
        for (std::size_t j = 0; j < reps.dim; ++j)
          out.at(i, pos[j]) = reps.at(i, j);
      return out;
    }
    default: {
      RepresentationSet out = reps;
      for (double& v : out.data) v = spec.scale * v + spec.offset;
      return out;
    }
  }
}

// Exact inverse given the same spec.
inline RepresentationSet invert_obfuscation(const RepresentationSet& reps,
                                            const ObfuscationSpec& spec) {
  reps.validate();
  switch (spec.kind) {
    case Kind::Shuffle: {
      auto perm = detail::column_permutation(reps.dim, spec.seed);
      RepresentationSet out = reps;
      for (std::size_t i = 0; i < reps.n_rows; ++i)
        for (std::size_t j = 0; j < reps.dim; ++j)
          out.at(i, perm[j]) = reps.at(i, j);
      return out;
    }
    case Kind::Pad:
      throw Error(ErrorCode::BadSpec,
                  "pad inversion needs the pre-pad dimension; use invert_pad");
    default: {
      RepresentationSet out = reps;
      for (double& v : out.data) v = (v - spec.offset) / spec.scale;
      return out;
    }
  }
}

// Pad inversion, with the pre-pad dimension stated explicitly.
inline RepresentationSet invert_pad(const RepresentationSet& reps,
                                    const ObfuscationSpec& spec,
                                    std::size_t original_dim) {
  reps.validate();
  if (spec.kind != Kind::Pad || reps.dim != spec.pad_target_dim ||
      original_dim >= spec.pad_target_dim)
    throw Error(ErrorCode::BadSpec, "invalid pad inversion request");
  auto pos = detail::pad_positions(original_dim, spec.pad_target_dim,
                                   spec.pad_mode, spec.seed);
  RepresentationSet out(reps.n_rows, original_dim);
  out.encoder_label = reps.encoder_label;
  out.split_label = reps.split_label;
  for (std::size_t i = 0; i < reps.n_rows; ++i)
    for (std::size_t j = 0; j < original_dim; ++j)
      out.at(i, j) = reps.at(i, pos[j]);
  return out;
}

}  // namespace encdi::obfuscate

#endif  // ENCDI_OBFUSCATE_HPP
