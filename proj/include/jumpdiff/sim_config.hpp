#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jumpdiff/simulate.hpp"

namespace jumpdiff {

// c0 + c1 x + c2 x^2 + ...
struct Polynomial {
  std::vector<double> coefficients;

  double operator()(double x) const;
};

struct RegimeConfig {
  Interval condition{-1e308, 1e308};
  Polynomial drift;
  Polynomial diffusion;
  double jump_rate = 0.0;
  double jump_variance = 0.0;
};

// Simulation config file.
//
//   # comments start with '#'
//   dt = 0.01                 time step, s (required)
//   steps = 500000            number of steps (required)
//   x0 = 0.5
//   seed = 42
//   stream = 0
//   condition = 0.41          constant condition value, or
//   condition_square = 0.2 0.6 5000    low high half-period-in-steps
//   condition_channel = u
//   state_channel = P
//   drift = 0.5 -1            polynomial coefficients c0 c1 c2 ...
//   diffusion = 0.05
//   jump_rate = 0
//   jump_variance = 0
//
//   [regime]                  optional, repeatable; top-level drift,
//   condition_lo = 0          diffusion and jump keys act as defaults
//   condition_hi = 0.5
//   drift = 0.3 -1
//
// Without [regime] sections a single regime covers every condition value.
struct SimConfig {
  double dt = 0.0;
  std::size_t steps = 0;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  enum class ConditionShape { constant, square };
  ConditionShape shape = ConditionShape::constant;
  double condition_value = 0.0;
  double condition_low = 0.0;
  double condition_high = 0.0;
  std::size_t half_period = 1;

  std::string condition_channel = "u";
  std::string state_channel = "P";
  std::vector<RegimeConfig> regimes;

  // steps + 1 condition samples.
  std::vector<double> condition_path() const;
  SyntheticSpec synthetic() const;
  // Canonical key=value rendering; hashing it identifies the spec.
  std::string canonical() const;
};

// Throws Error(ConfigError) with "line" and "field" context.
SimConfig parse_sim_config(std::string_view text);

}  // namespace jumpdiff
