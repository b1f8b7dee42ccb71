#pragma once

#include <span>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/simd/kernels.hpp"

namespace mvreg::detail {

inline simd::Points3View view_of(const Points& p) {
  return {p.col(0).data(), p.col(1).data(), p.col(2).data(), static_cast<std::size_t>(p.rows())};
}

// Row-major copy of a rotation block for the kernels.
inline std::array<double, 9> row_major(const Mat3& m) {
  return {m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0), m(2, 1), m(2, 2)};
}

/// Median; the mean of the two middle elements for even sizes. Requires non-empty input.
double median(std::span<const double> values);

/// median(|v − median(v)|).
double median_absolute_deviation(std::span<const double> values);

}  // namespace mvreg::detail

#include <charconv>
#include <string>

namespace mvreg::detail {

// Locale-independent number formatting.
inline std::string format_fixed(double v, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

inline std::string format_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace mvreg::detail

namespace mvreg::detail {

// Shortest representation that round-trips.
inline std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mvreg::detail
