#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jumpdiff/ingest.hpp"
#include "jumpdiff/km.hpp"

namespace jumpdiff {

using ScalarFn = std::function<double(double)>;

// dx = D1(x) dt + sqrt(D2(x)) dW + xi dJ,  xi ~ N(0, jump_variance),
// dJ ~ Bernoulli(jump_rate * dt) per step.
struct SimSpec {
  ScalarFn drift;
  ScalarFn diffusion;
  double jump_rate = 0.0;      // 1/s
  double jump_variance = 0.0;  // state units^2
  double dt = 0.01;            // s
  std::size_t steps = 1;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  void validate() const;
};

// Above this jump probability per step the one-jump-per-step
// approximation is reported as a warning.
inline constexpr double kJumpProbabilityWarning = 0.01;

struct JumpEvent {
  std::size_t step;  // jump applied between sample step and step + 1
  double time;
  double size;
};

struct SimResult {
  std::vector<double> path;  // steps + 1 samples, path[0] = x0
  std::vector<JumpEvent> jumps;
  std::vector<std::string> warnings;
};

std::vector<double> simulate_langevin(const SimSpec& spec);
SimResult simulate_jump_diffusion(const SimSpec& spec);

// Independent paths on streams spec.stream, spec.stream + 1, ...
std::vector<SimResult> simulate_paths(const SimSpec& spec, std::size_t count, std::size_t threads = 1);

struct Regime {
  Interval condition;  // half-open [lo, hi)
  ScalarFn drift;
  ScalarFn diffusion;
  double jump_rate = 0.0;
  double jump_variance = 0.0;
};

struct SyntheticSpec {
  std::vector<Regime> regimes;
  double dt = 1.0;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::string condition_name = "u";
  std::string state_name = "P";
};

struct SyntheticConversion {
  ChannelSet channels;
  std::vector<JumpEvent> jumps;
  std::vector<std::string> warnings;
};

// Simulates the state channel while the condition channel walks through the
// regimes: step k uses the regime containing condition[k].
SyntheticConversion make_synthetic_conversion(const SyntheticSpec& spec, std::span<const double> condition);

}  // namespace jumpdiff
