#ifndef ENCDI_REPIO_HPP
#define ENCDI_REPIO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "encdi/types.hpp"

// REPR binary format, version 1, little-endian:
//   magic "REPR" | u8 version | u32 n_rows | u32 dim |
//   n_rows*dim float32 row-major | u32 len + bytes (encoder_label) |
//   u32 len + bytes (split_label)
// CSV fallback: one representation per line, '.'-decimal, comma-separated,
// no header.

namespace encdi::repio {

enum class Format { Binary, Csv };

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) |
      (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

inline void put_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(os, bits);
}

inline bool get_f32(std::istream& is, float& f) {
  std::uint32_t bits;
  if (!get_u32(is, bits)) return false;
  std::memcpy(&f, &bits, 4);
  return true;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline bool get_string(std::istream& is, std::string& s) {
  std::uint32_t len;
  if (!get_u32(is, len)) return false;
  s.resize(len);
  return static_cast<bool>(is.read(s.data(), len));
}

inline void check_finite(const RepresentationSet& set, const std::string& path) {
  for (std::size_t i = 0; i < set.n_rows; ++i)
    for (std::size_t j = 0; j < set.dim; ++j)
      if (!std::isfinite(set.at(i, j)))
        throw Error(ErrorCode::NonFiniteValue,
                    path + ": non-finite value at row " + std::to_string(i) +
                        ", col " + std::to_string(j));
}

inline RepresentationSet read_binary(std::istream& is, const std::string& path) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "REPR", 4) != 0)
    throw Error(ErrorCode::MalformedHeader, path + ": bad magic");
  char version;
  if (!is.get(version) || version != 1)
    throw Error(ErrorCode::MalformedHeader, path + ": unsupported version");
  std::uint32_t n_rows, dim;
  if (!get_u32(is, n_rows) || !get_u32(is, dim))
    throw Error(ErrorCode::MalformedHeader, path + ": truncated header");
  if (n_rows < 1 || dim < 1)
    throw Error(ErrorCode::MalformedHeader, path + ": zero rows or dim");

  RepresentationSet set(n_rows, dim);
  for (std::size_t i = 0; i < set.data.size(); ++i) {
    float f;
    if (!get_f32(is, f))
      throw Error(ErrorCode::DimensionMismatch,
                  path + ": payload shorter than n_rows*dim");
    set.data[i] = static_cast<double>(f);
  }
  // Trailing metadata; absent strings fall back to defaults.
  std::string enc, split;
  if (get_string(is, enc) && get_string(is, split)) {
    set.encoder_label = enc;
    set.split_label = split_label_from_string(split);
  }
  // Extra payload beyond the declared shape means the header lied.
  if (is.peek() != std::istream::traits_type::eof() && !is.eof())
    throw Error(ErrorCode::DimensionMismatch,
                path + ": payload longer than n_rows*dim plus metadata");
  check_finite(set, path);
  return set;
}

inline RepresentationSet read_csv(std::istream& is, const std::string& path) {
  std::vector<double> values;
  std::size_t n_rows = 0, dim = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t cols = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedHeader,
                    path + ": unparsable CSV cell '" + cell + "'");
      }
      ++cols;
    }
    if (n_rows == 0)
      dim = cols;
    else if (cols != dim)
      throw Error(ErrorCode::DimensionMismatch,
                  path + ": ragged CSV row " + std::to_string(n_rows));
    ++n_rows;
  }
  if (n_rows == 0)
    throw Error(ErrorCode::MalformedHeader, path + ": empty CSV");
  RepresentationSet set;
  set.data = std::move(values);
  set.n_rows = n_rows;
  set.dim = dim;
  check_finite(set, path);
  return set;
}

}  // namespace detail

inline RepresentationSet read_representations(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, path + ": cannot open for reading");
  char magic[4] = {};
  is.read(magic, 4);
  is.clear();
  is.seekg(0);
  if (std::memcmp(magic, "REPR", 4) == 0) return detail::read_binary(is, path);
  return detail::read_csv(is, path);
}

inline void write_representations(const RepresentationSet& set,
                                  const std::string& path,
                                  Format format = Format::Binary) {
  set.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, path + ": cannot open for writing");
  if (format == Format::Binary) {
    os.write("REPR", 4);
    os.put(1);
    detail::put_u32(os, static_cast<std::uint32_t>(set.n_rows));
    detail::put_u32(os, static_cast<std::uint32_t>(set.dim));
    for (double v : set.data) detail::put_f32(os, static_cast<float>(v));
    detail::put_string(os, set.encoder_label);
    detail::put_string(os, to_string(set.split_label));
  } else {
    char buf[64];
    for (std::size_t i = 0; i < set.n_rows; ++i) {
      for (std::size_t j = 0; j < set.dim; ++j) {
        std::snprintf(buf, sizeof(buf), "%.9g", set.at(i, j));
        os << (j ? "," : "") << buf;
      }
      os << '\n';
    }
  }
  if (!os) throw Error(ErrorCode::IoFailure, path + ": write failed");
}

}  // namespace encdi::repio

#endif  // ENCDI_REPIO_HPP
