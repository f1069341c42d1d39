#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jumpdiff/field.hpp"
#include "jumpdiff/ingest.hpp"

namespace jumpdiff {

inline constexpr int kMaxOrder = 6;

struct Interval {
  double lo;
  double hi;
};

struct BinningSpec {
  // Empty condition name: one unconditioned bin spanning all samples.
  std::string condition;
  double condition_width = 0.5;
  // Default: edges at integer multiples of the width covering the data.
  std::optional<Interval> condition_range;

  std::string state;
  std::size_t state_bins = 50;
  // Default: observed state range of each condition bin.
  std::optional<Interval> state_range;

  std::size_t min_count = 100;

  void validate() const;
};

struct LagPolicy {
  enum class Mode { single, multi };
  Mode mode = Mode::single;
  std::vector<std::size_t> lags{1};

  // Lags 1..max_lag with a through-origin fit of the moments against dt.
  static LagPolicy multi(std::size_t max_lag);

  std::size_t max_lag() const { return lags.back(); }
  void validate() const;
};

// Equal-width axis with half-open bins [lo + k w, lo + (k+1) w); the topmost
// bin is closed.
struct Axis {
  double lo = 0.0;
  double width = 0.0;
  std::size_t bins = 0;

  double edge(std::size_t k) const { return lo + static_cast<double>(k) * width; }
  double center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * width; }
  double hi() const { return edge(bins); }
  // nullopt when x lies outside [lo, hi].
  std::optional<std::size_t> locate(double x) const;
};

struct ConditionBin {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  Axis state;
  std::vector<std::vector<std::size_t>> cells;  // start-sample indices per state cell
};

// Every usable sample with usable increments up to `max_lag`, assigned to
// exactly one (condition, state) cell.
struct BinnedSeries {
  BinningSpec spec;
  std::vector<double> state;
  double fs = 1.0;
  std::size_t max_lag = 1;
  std::vector<ConditionBin> bins;

  std::size_t assigned() const;
};

BinnedSeries bin_condition(const ChannelSet& cs, const BinningSpec& spec, std::size_t max_lag = 1);

struct KmCell {
  std::size_t count = 0;
  bool valid = false;
  std::array<double, kMaxOrder + 1> k{};       // index = order; k[0] unused
  std::array<double, kMaxOrder + 1> stderr_{};
  std::uint8_t negative_even = 0;              // bit j set when K^(j) < 0, j even
};

struct KmGrid {
  std::string condition_name;
  std::string state_name;
  std::vector<double> condition_centers;
  std::vector<std::vector<double>> state_centers;  // per condition bin
  std::vector<double> state_widths;                // per condition bin
  std::vector<std::vector<KmCell>> cells;
  std::vector<int> orders;
  double dt = 1.0;  // seconds, smallest lag
  LagPolicy lag;
  bool k4_bias_corrected = false;
  std::size_t min_count = 1;

  bool has_order(int j) const;
  // Cell-resolved K^(j); invalid cells are undefined.
  Field field(int order) const;
  Field stderr_field(int order) const;
};

struct EstimateOptions {
  // Subtract the finite-dt diffusion bias 3 (K2)^2 dt from K4.
  bool correct_k4_bias = false;
  std::size_t threads = 1;
};

// Conditional moments of the increments per unit time, without the 1/j!
// factor: K^(j) = <(x(t+dt) - x(t))^j | cell> / dt.
KmGrid estimate_km(const BinnedSeries& binned, std::vector<int> orders, const LagPolicy& lag,
                   const EstimateOptions& options = {});

inline KmGrid estimate_km(const BinnedSeries& binned, std::vector<int> orders = {1, 2, 3, 4, 5, 6}) {
  return estimate_km(binned, std::move(orders), LagPolicy{}, {});
}

std::vector<RobustSummary> median_over_state(const KmGrid& grid, int order);

}  // namespace jumpdiff
