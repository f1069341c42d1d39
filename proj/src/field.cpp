#include "jumpdiff/field.hpp"

#include <cmath>

namespace jumpdiff {

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::ok: return "ok";
    case Reason::cell_invalid: return "CellInvalid";
    case Reason::k4_non_positive: return "K4NonPositive";
    case Reason::k6_negative: return "K6Negative";
    case Reason::sigma_undefined: return "SigmaUndefined";
    case Reason::no_jump: return "NoJump";
  }
  return "Unknown";
}

std::vector<RobustSummary> median_over_state(const Field& field) {
  std::vector<RobustSummary> out;
  out.reserve(field.size());
  std::vector<double> values;
  for (const auto& row : field) {
    values.clear();
    for (const auto& c : row) {
      if (c.defined()) values.push_back(c.value);
    }
    out.push_back(summarize(values));
  }
  return out;
}

std::vector<double> undefined_fraction(const Field& field, const Field& reference) {
  std::vector<double> out(field.size(), std::nan(""));
  for (std::size_t b = 0; b < field.size(); ++b) {
    std::size_t base = 0;
    std::size_t missing = 0;
    for (std::size_t s = 0; s < field[b].size(); ++s) {
      if (!reference[b][s].defined()) continue;
      ++base;
      if (!field[b][s].defined()) ++missing;
    }
    if (base > 0) out[b] = static_cast<double>(missing) / static_cast<double>(base);
  }
  return out;
}

}  // namespace jumpdiff
