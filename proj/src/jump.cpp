#include "jumpdiff/jump.hpp"

#include <algorithm>

#include "jumpdiff/error.hpp"

namespace jumpdiff {

namespace {

void require_orders(const KmGrid& grid, std::initializer_list<int> orders) {
  for (int j : orders) {
    if (!grid.has_order(j)) {
      throw Error(ErrorKind::InvalidArgument, "grid lacks a required Kramers-Moyal order",
                  {{"order", std::to_string(j)}});
    }
  }
}

template <typename F>
Field map_cells(const KmGrid& grid, F&& f) {
  Field out(grid.cells.size());
  for (std::size_t b = 0; b < grid.cells.size(); ++b) {
    out[b].reserve(grid.cells[b].size());
    for (std::size_t s = 0; s < grid.cells[b].size(); ++s) out[b].push_back(f(b, s, grid.cells[b][s]));
  }
  return out;
}

}  // namespace

Field drift_from_km(const KmGrid& grid) {
  require_orders(grid, {1});
  return grid.field(1);
}

Field jump_amplitude(const KmGrid& grid, const JumpThresholds& eps) {
  require_orders(grid, {4, 6});
  return map_cells(grid, [&](std::size_t, std::size_t, const KmCell& c) {
    if (!c.valid) return CellValue::missing(Reason::cell_invalid);
    if (!(c.k[4] > eps.k4)) return CellValue::missing(Reason::k4_non_positive);
    if (c.k[6] < 0.0) return CellValue::missing(Reason::k6_negative);
    return CellValue::of(c.k[6] / (5.0 * c.k[4]));
  });
}

Field jump_rate(const KmGrid& grid, const Field& sigma2, const JumpThresholds& eps) {
  require_orders(grid, {4});
  return map_cells(grid, [&](std::size_t b, std::size_t s, const KmCell& c) {
    if (!c.valid) return CellValue::missing(Reason::cell_invalid);
    const auto& sg = sigma2[b][s];
    if (!sg.defined() || !(sg.value > eps.sigma)) return CellValue::missing(Reason::sigma_undefined);
    return CellValue::of(c.k[4] / (3.0 * sg.value * sg.value));
  });
}

Field diffusion_from_km(const KmGrid& grid, const Field& rate, const Field& sigma2) {
  require_orders(grid, {2});
  return map_cells(grid, [&](std::size_t b, std::size_t s, const KmCell& c) {
    if (!c.valid) return CellValue::missing(Reason::cell_invalid);
    const auto& lam = rate[b][s];
    const auto& sg = sigma2[b][s];
    if (!lam.defined() || !sg.defined()) return CellValue::of(c.k[2], kFlagNoJumpTerm);
    const double d2 = c.k[2] - lam.value * sg.value;
    return CellValue::of(d2, d2 < 0.0 ? kFlagNegativeDiffusion : kFlagNone);
  });
}

std::vector<ConditionSummary> jump_diagnostics(const JumpDiffusionProfile& p) {
  const auto drift = median_over_state(p.drift);
  const auto k4 = median_over_state(p.k4);
  const auto diffusion = median_over_state(p.diffusion);
  const auto sigma2 = median_over_state(p.sigma2);
  const auto rate = median_over_state(p.rate);
  const auto contribution = median_over_state(p.contribution);
  const auto ratio = median_over_state(p.ratio);
  const auto sigma_undef = undefined_fraction(p.sigma2, p.drift);
  const auto rate_undef = undefined_fraction(p.rate, p.drift);
  const auto ratio_undef = undefined_fraction(p.ratio, p.drift);

  std::vector<ConditionSummary> out(p.condition_centers.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    auto& s = out[b];
    s.condition_center = p.condition_centers[b];
    s.valid_cells = drift[b].count;
    s.drift = drift[b];
    s.k4 = k4[b];
    s.diffusion = diffusion[b];
    s.sigma2 = sigma2[b];
    s.rate = rate[b];
    s.contribution = contribution[b];
    s.ratio = ratio[b];
    s.sigma2_undefined_fraction = sigma_undef[b];
    s.rate_undefined_fraction = rate_undef[b];
    s.ratio_undefined_fraction = ratio_undef[b];
  }
  return out;
}

JumpDiffusionProfile recover_jump_diffusion(const KmGrid& grid, const JumpThresholds& eps) {
  require_orders(grid, {1, 2, 4, 6});
  JumpDiffusionProfile p;
  p.thresholds = eps;
  p.condition_centers = grid.condition_centers;
  p.state_centers = grid.state_centers;
  p.counts.resize(grid.cells.size());
  for (std::size_t b = 0; b < grid.cells.size(); ++b) {
    for (const auto& c : grid.cells[b]) p.counts[b].push_back(c.count);
  }
  p.k2 = grid.field(2);
  p.k4 = grid.field(4);
  p.drift = drift_from_km(grid);
  p.sigma2 = jump_amplitude(grid, eps);
  p.rate = jump_rate(grid, p.sigma2, eps);
  p.diffusion = diffusion_from_km(grid, p.rate, p.sigma2);

  p.contribution = map_cells(grid, [&](std::size_t b, std::size_t s, const KmCell& c) {
    if (!c.valid) return CellValue::missing(Reason::cell_invalid);
    const auto& lam = p.rate[b][s];
    if (!lam.defined()) return CellValue::missing(p.sigma2[b][s].defined() ? Reason::sigma_undefined
                                                                          : p.sigma2[b][s].reason);
    return CellValue::of(lam.value * p.sigma2[b][s].value);
  });
  p.ratio = map_cells(grid, [&](std::size_t b, std::size_t s, const KmCell& c) {
    if (!c.valid) return CellValue::missing(Reason::cell_invalid);
    const auto& j = p.contribution[b][s];
    if (!j.defined()) return CellValue::missing(j.reason);
    if (!(j.value > eps.jump)) return CellValue::missing(Reason::no_jump);
    const double d2 = p.diffusion[b][s].value;
    return CellValue::of(std::max(d2, 0.0) / j.value, d2 < 0.0 ? kFlagFlooredDiffusion : kFlagNone);
  });
  p.summary = jump_diagnostics(p);
  return p;
}

}  // namespace jumpdiff
