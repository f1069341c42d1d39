#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jumpdiff/field.hpp"
#include "jumpdiff/km.hpp"

namespace jumpdiff {

enum class Stability { stable, unstable };

std::string_view to_string(Stability s);

struct FixedPoint {
  double condition_center = 0.0;
  double state = 0.0;       // linearly interpolated zero of the drift
  Stability stability = Stability::stable;
  double slope = 0.0;       // secant slope of the drift across the crossing, 1/s
  bool low_confidence = false;  // both neighbours within one standard error of zero
  bool plateau = false;         // crossing through exact-zero cells, midpoint reported
};

// Zero crossings of a drift profile between adjacent defined grid points.
// Crossings bracketed by undefined cells are skipped; a run of exact zeros
// between opposite signs yields one point at the run's midpoint, a run that
// touches zero without a sign change yields none. `stderr_` may be empty.
std::vector<FixedPoint> find_fixed_points(std::span<const CellValue> drift,
                                          std::span<const double> centers,
                                          std::span<const CellValue> stderr_ = {},
                                          double condition_center = 0.0);

// Phi = -integral of D1 by the trapezoidal rule over the longest run of
// defined cells; gauge Phi(first grid point) = 0.
struct Potential {
  std::vector<double> grid;
  std::vector<double> phi;
  std::vector<std::size_t> minima;  // indices of interior local minima

  std::vector<double> minima_locations() const;
};

Potential drift_potential(std::span<const CellValue> drift, std::span<const double> centers);

enum class CurveKind { power_vs_wind, torque_vs_rpm };

std::string_view to_string(CurveKind k);

struct CurveBin {
  double condition_center = 0.0;
  std::vector<FixedPoint> points;
};

// Marks condition bins where the number of stable fixed points changes.
// This is a heuristic stand-in for visually identified operating states.
struct StateAnnotation {
  std::string label;
  double condition_center = 0.0;
  std::size_t stable_before = 0;
  std::size_t stable_after = 0;
};

struct CharacteristicCurve {
  CurveKind kind = CurveKind::power_vs_wind;
  std::vector<CurveBin> bins;
  std::vector<StateAnnotation> annotations;
};

CharacteristicCurve characteristic_curve(const KmGrid& grid, CurveKind kind = CurveKind::power_vs_wind);

struct UnconditionedPotential {
  std::vector<double> centers;
  std::vector<CellValue> drift;
  std::vector<std::size_t> counts;
  Potential potential;
};

struct UnconditionedOptions {
  std::size_t bins = 50;
  std::size_t min_count = 100;
  std::span<const std::uint32_t> segment = {};  // empty: one contiguous run
};

// Drift over [range.lo, range.hi] estimated without conditioning on any
// other channel, then integrated into a potential.
UnconditionedPotential unconditioned_potential(std::span<const double> series, Interval range,
                                               double fs, const UnconditionedOptions& options = {});

}  // namespace jumpdiff
