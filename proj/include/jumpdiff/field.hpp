#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "jumpdiff/robust.hpp"

namespace jumpdiff {

// Why a cell-level quantity has no value.
enum class Reason : std::uint8_t {
  ok,
  cell_invalid,     // too few samples in the cell
  k4_non_positive,  // fourth-order coefficient <= threshold
  k6_negative,
  sigma_undefined,  // jump amplitude missing or below threshold
  no_jump,          // jump contribution below threshold (ratio only)
};

std::string_view to_string(Reason reason);

// Annotations on defined (or fallback) values.
enum CellFlag : std::uint8_t {
  kFlagNone = 0,
  kFlagNegativeDiffusion = 1 << 0,  // D2 = K2 - lambda*sigma2 came out negative
  kFlagNoJumpTerm = 1 << 1,         // D2 taken as K2 because jump terms are undefined
  kFlagFlooredDiffusion = 1 << 2,   // ratio used max(D2, 0)
};

struct CellValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  Reason reason = Reason::cell_invalid;
  std::uint8_t flags = kFlagNone;

  bool defined() const noexcept { return reason == Reason::ok; }

  static CellValue of(double v, std::uint8_t flags = kFlagNone) { return {v, Reason::ok, flags}; }
  static CellValue missing(Reason r) { return {std::numeric_limits<double>::quiet_NaN(), r, kFlagNone}; }
};

// Cell-resolved quantity indexed [condition bin][state cell].
using Field = std::vector<std::vector<CellValue>>;

// Median and MAD of the defined cells of each condition bin.
std::vector<RobustSummary> median_over_state(const Field& field);

// Fraction of cells in each condition bin whose value is undefined, counted
// over the cells that `reference` marks as defined.
std::vector<double> undefined_fraction(const Field& field, const Field& reference);

}  // namespace jumpdiff
