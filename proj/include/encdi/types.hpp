#ifndef ENCDI_TYPES_HPP
#define ENCDI_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace encdi {

// Error taxonomy shared across modules. Every failure carries a stable
// code so the CLI can map it to an exit status without string matching.
enum class ErrorCode {
  MalformedHeader,
  DimensionMismatch,
  RowCountMismatch,
  NonFiniteValue,
  IoFailure,
  ZeroNormRow,
  TooFewRows,
  TooFewSamples,
  BadFraction,
  BadSpec,
  BadConfig,
  InvalidDof,
  DegenerateComponent,
  DegenerateBounds,
  EmptyInput,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class SplitLabel : std::uint8_t { P1, P2, N, S, Other };

inline const char* to_string(SplitLabel s) {
  switch (s) {
    case SplitLabel::P1: return "P1";
    case SplitLabel::P2: return "P2";
    case SplitLabel::N: return "N";
    case SplitLabel::S: return "S";
    default: return "other";
  }
}

inline SplitLabel split_label_from_string(const std::string& s) {
  if (s == "P1") return SplitLabel::P1;
  if (s == "P2") return SplitLabel::P2;
  if (s == "N") return SplitLabel::N;
  if (s == "S") return SplitLabel::S;
  return SplitLabel::Other;
}

// N x d row-major matrix of encoder outputs plus provenance metadata.
// Stored in double precision internally; the on-disk format is float32.
struct RepresentationSet {
  std::vector<double> data;  // row-major, n_rows * dim entries
  std::size_t n_rows = 0;
  std::size_t dim = 0;
  std::string encoder_label;
  SplitLabel split_label = SplitLabel::Other;

  RepresentationSet() = default;
  RepresentationSet(std::size_t rows, std::size_t d)
      : data(rows * d, 0.0), n_rows(rows), dim(d) {}

  double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

  std::span<double> row(std::size_t i) {
    return {data.data() + i * dim, dim};
  }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }

  void validate() const {
    if (n_rows < 1 || dim < 1)
      throw Error(ErrorCode::DimensionMismatch,
                  "representation set must have n_rows >= 1 and dim >= 1");
    if (data.size() != n_rows * dim)
      throw Error(ErrorCode::DimensionMismatch,
                  "data length does not equal n_rows * dim");
  }
};

}  // namespace encdi

#endif  // ENCDI_TYPES_HPP
