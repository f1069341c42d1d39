#include "jumpdiff/dynamics.hpp"

#include <cmath>
#include <optional>

#include "jumpdiff/error.hpp"
#include "jumpdiff/jump.hpp"

namespace jumpdiff {

std::string_view to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

std::string_view to_string(CurveKind k) {
  return k == CurveKind::power_vs_wind ? "power-vs-wind" : "torque-vs-rpm";
}

std::vector<FixedPoint> find_fixed_points(std::span<const CellValue> drift,
                                          std::span<const double> centers,
                                          std::span<const CellValue> stderr_,
                                          double condition_center) {
  if (drift.size() != centers.size() || (!stderr_.empty() && stderr_.size() != drift.size())) {
    throw Error(ErrorKind::InvalidArgument, "drift, grid and error profiles differ in length");
  }
  auto within_noise = [&](std::size_t i) {
    if (stderr_.empty() || !stderr_[i].defined()) return false;
    return std::abs(drift[i].value) < stderr_[i].value;
  };

  std::vector<FixedPoint> out;
  std::optional<std::size_t> prev;       // last defined non-zero point, contiguous with i
  std::optional<std::size_t> zero_first;  // exact-zero run following prev
  std::size_t zero_last = 0;
  for (std::size_t i = 0; i < drift.size(); ++i) {
    if (!drift[i].defined()) {
      prev.reset();
      zero_first.reset();
      continue;
    }
    const double v = drift[i].value;
    if (v == 0.0) {
      if (!zero_first) zero_first = i;
      zero_last = i;
      continue;
    }
    if (prev && std::signbit(drift[*prev].value) != std::signbit(v)) {
      const double vp = drift[*prev].value;
      const double cp = centers[*prev];
      FixedPoint fp;
      fp.condition_center = condition_center;
      fp.slope = (v - vp) / (centers[i] - cp);
      fp.stability = fp.slope < 0.0 ? Stability::stable : Stability::unstable;
      fp.low_confidence = within_noise(*prev) && within_noise(i);
      if (zero_first) {
        fp.state = 0.5 * (centers[*zero_first] + centers[zero_last]);
        fp.plateau = true;
      } else {
        fp.state = cp - vp * (centers[i] - cp) / (v - vp);
      }
      out.push_back(fp);
    }
    prev = i;
    zero_first.reset();
  }
  return out;
}

std::vector<double> Potential::minima_locations() const {
  std::vector<double> out;
  for (auto k : minima) out.push_back(grid[k]);
  return out;
}

Potential drift_potential(std::span<const CellValue> drift, std::span<const double> centers) {
  if (drift.size() != centers.size()) {
    throw Error(ErrorKind::InvalidArgument, "drift and grid differ in length");
  }
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < drift.size();) {
    if (!drift[i].defined()) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < drift.size() && drift[j].defined()) ++j;
    if (j - i > best_len) {
      best_start = i;
      best_len = j - i;
    }
    i = j;
  }
  if (best_len < 2) {
    throw Error(ErrorKind::NoContiguousSegment, "need at least two adjacent defined drift values");
  }

  Potential p;
  p.grid.assign(centers.begin() + static_cast<std::ptrdiff_t>(best_start),
                centers.begin() + static_cast<std::ptrdiff_t>(best_start + best_len));
  p.phi.assign(best_len, 0.0);
  for (std::size_t k = 1; k < best_len; ++k) {
    const double a = drift[best_start + k - 1].value;
    const double b = drift[best_start + k].value;
    p.phi[k] = p.phi[k - 1] - 0.5 * (a + b) * (p.grid[k] - p.grid[k - 1]);
  }
  // Flat valleys count once, at their middle.
  for (std::size_t k = 1; k + 1 < best_len; ++k) {
    if (!(p.phi[k] < p.phi[k - 1])) continue;
    std::size_t j = k;
    while (j + 1 < best_len && p.phi[j + 1] == p.phi[k]) ++j;
    if (j + 1 < best_len && p.phi[j + 1] > p.phi[k]) p.minima.push_back((k + j) / 2);
    k = j;
  }
  return p;
}

CharacteristicCurve characteristic_curve(const KmGrid& grid, CurveKind kind) {
  const Field drift = drift_from_km(grid);
  const Field se = grid.stderr_field(1);
  CharacteristicCurve curve;
  curve.kind = kind;
  const std::string prefix = kind == CurveKind::power_vs_wind ? "P" : "T";

  std::optional<std::size_t> last_stable;
  std::size_t label = 0;
  for (std::size_t b = 0; b < drift.size(); ++b) {
    CurveBin bin;
    bin.condition_center = grid.condition_centers[b];
    bin.points = find_fixed_points(drift[b], grid.state_centers[b], se[b], bin.condition_center);
    bool any_defined = false;
    for (const auto& c : drift[b]) any_defined = any_defined || c.defined();
    if (any_defined) {
      std::size_t stable = 0;
      for (const auto& fp : bin.points) stable += fp.stability == Stability::stable;
      if (last_stable && *last_stable != stable) {
        curve.annotations.push_back(
            {prefix + std::to_string(++label), bin.condition_center, *last_stable, stable});
      }
      last_stable = stable;
    }
    curve.bins.push_back(std::move(bin));
  }
  return curve;
}

UnconditionedPotential unconditioned_potential(std::span<const double> series, Interval range,
                                               double fs, const UnconditionedOptions& options) {
  if (!(range.hi > range.lo)) throw Error(ErrorKind::InvalidArgument, "range must satisfy lo < hi");
  std::size_t inside = 0;
  for (double x : series) inside += (x >= range.lo && x <= range.hi);
  if (inside < std::max<std::size_t>(options.min_count, 1) || series.size() < 2) {
    throw Error(ErrorKind::EmptyRange, "too few samples inside the requested range",
                {{"samples", std::to_string(inside)}});
  }

  ChannelSet cs;
  cs.time_base = {0.0, fs};
  if (options.segment.empty()) {
    cs.segment.assign(series.size(), 0);
  } else {
    cs.segment.assign(options.segment.begin(), options.segment.end());
  }
  cs.channels["x"] = std::vector<double>(series.begin(), series.end());

  BinningSpec spec;
  spec.state = "x";
  spec.state_bins = options.bins;
  spec.state_range = range;
  spec.min_count = options.min_count;

  BinnedSeries binned;
  try {
    binned = bin_condition(cs, spec, 1);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyBinning) throw;
    throw Error(ErrorKind::EmptyRange, "no usable increments inside the requested range");
  }
  const KmGrid grid = estimate_km(binned, {1});

  UnconditionedPotential out;
  out.centers = grid.state_centers.front();
  out.drift = grid.field(1).front();
  for (const auto& c : grid.cells.front()) out.counts.push_back(c.count);
  out.potential = drift_potential(out.drift, out.centers);
  return out;
}

}  // namespace jumpdiff
