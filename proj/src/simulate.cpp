#include "jumpdiff/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"
#include "jumpdiff/philox.hpp"

namespace jumpdiff {

namespace {

enum Lane : std::uint32_t { kDiffusionLane = 0, kJumpTriggerLane = 1, kJumpSizeLane = 2 };

struct StepParams {
  const ScalarFn* drift;
  const ScalarFn* diffusion;
  double rate;
  double variance;
};

void check_jump_params(double rate, double variance, double dt, std::vector<std::string>& warnings,
                       const std::string& where) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorKind::InvalidSpec, "jump rate must be non-negative", {{"field", "jump_rate"}});
  }
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorKind::InvalidSpec, "jump variance must be non-negative", {{"field", "jump_variance"}});
  }
  const double p = rate * dt;
  if (!(p < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "jump_rate * dt must be below 1",
                {{"field", "jump_rate"}, {"jump_probability", format_number(p)}});
  }
  if (p >= kJumpProbabilityWarning) {
    warnings.push_back(where + "jump_rate * dt = " + format_number(p) +
                       " is not small; at most one jump per step is simulated");
  }
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::InvalidSpec, "time step must be positive", {{"field", "dt"}});
  }
}

// Euler-Maruyama with a Bernoulli jump channel. The diffusion draw of step k
// never depends on the jump lanes, so a zero jump rate reproduces the pure
// Langevin path bit for bit.
template <typename ParamsAt>
void integrate(SimResult& out, std::size_t steps, double dt, double x0, const Philox4x32& rng,
               std::uint32_t stream, ParamsAt&& params_at) {
  out.path.resize(steps + 1);
  out.path[0] = x0;
  double x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const StepParams p = params_at(k);
    const double d2 = (*p.diffusion)(x);
    if (d2 < 0.0 || std::isnan(d2)) {
      throw Error(ErrorKind::NegativeDiffusionAtState, "diffusion function is negative",
                  {{"step", std::to_string(k)}, {"state", format_number(x)}, {"diffusion", format_number(d2)}});
    }
    const double z = block_normal(rng.block(k, kDiffusionLane, stream));
    double next = x + (*p.drift)(x) * dt + std::sqrt(d2 * dt) * z;
    if (p.rate > 0.0) {
      const auto trig = rng.block(k, kJumpTriggerLane, stream);
      if (open_uniform(trig[0], trig[1]) < p.rate * dt) {
        const double xi = std::sqrt(p.variance) * block_normal(rng.block(k, kJumpSizeLane, stream));
        next += xi;
        out.jumps.push_back({k, static_cast<double>(k) * dt, xi});
      }
    }
    x = next;
    out.path[k + 1] = x;
  }
}

}  // namespace

void SimSpec::validate() const {
  check_dt(dt);
  if (steps < 1) throw Error(ErrorKind::InvalidSpec, "steps must be at least 1", {{"field", "steps"}});
  if (!drift) throw Error(ErrorKind::InvalidSpec, "drift function missing", {{"field", "drift"}});
  if (!diffusion) throw Error(ErrorKind::InvalidSpec, "diffusion function missing", {{"field", "diffusion"}});
  if (!std::isfinite(x0)) throw Error(ErrorKind::InvalidSpec, "x0 must be finite", {{"field", "x0"}});
  std::vector<std::string> unused;
  check_jump_params(jump_rate, jump_variance, dt, unused, "");
}

std::vector<double> simulate_langevin(const SimSpec& spec) {
  if (spec.jump_rate != 0.0) {
    throw Error(ErrorKind::InvalidSpec, "Langevin simulation requires a zero jump rate",
                {{"field", "jump_rate"}});
  }
  return simulate_jump_diffusion(spec).path;
}

SimResult simulate_jump_diffusion(const SimSpec& spec) {
  spec.validate();
  SimResult out;
  check_jump_params(spec.jump_rate, spec.jump_variance, spec.dt, out.warnings, "");
  const StepParams params{&spec.drift, &spec.diffusion, spec.jump_rate, spec.jump_variance};
  integrate(out, spec.steps, spec.dt, spec.x0, Philox4x32(spec.seed), spec.stream,
            [&](std::size_t) { return params; });
  return out;
}

std::vector<SimResult> simulate_paths(const SimSpec& spec, std::size_t count, std::size_t threads) {
  spec.validate();
  std::vector<SimResult> out(count);
  auto run = [&](std::size_t p) {
    SimSpec s = spec;
    s.stream = spec.stream + static_cast<std::uint32_t>(p);
    out[p] = simulate_jump_diffusion(s);
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t p = 0; p < count; ++p) run(p);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t p = t; p < count; p += threads) run(p);
      });
    }
  }
  return out;
}

SyntheticConversion make_synthetic_conversion(const SyntheticSpec& spec, std::span<const double> condition) {
  check_dt(spec.dt);
  if (condition.size() < 2) {
    throw Error(ErrorKind::EmptyInput, "condition path needs at least two samples");
  }
  if (spec.regimes.empty()) throw Error(ErrorKind::InvalidSpec, "no regimes defined");

  SyntheticConversion out;
  std::vector<StepParams> regime_params;
  for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
    const auto& reg = spec.regimes[r];
    if (!reg.drift || !reg.diffusion) {
      throw Error(ErrorKind::InvalidSpec, "regime lacks drift or diffusion", {{"regime", std::to_string(r)}});
    }
    check_jump_params(reg.jump_rate, reg.jump_variance, spec.dt, out.warnings,
                      "regime " + std::to_string(r) + ": ");
    regime_params.push_back({&reg.drift, &reg.diffusion, reg.jump_rate, reg.jump_variance});
  }

  std::vector<std::size_t> regime_of(condition.size());
  for (std::size_t k = 0; k < condition.size(); ++k) {
    const double c = condition[k];
    const auto it = std::find_if(spec.regimes.begin(), spec.regimes.end(), [c](const Regime& r) {
      return c >= r.condition.lo && c < r.condition.hi;
    });
    if (it == spec.regimes.end()) {
      throw Error(ErrorKind::UnmappedCondition, "condition value falls outside every regime",
                  {{"sample", std::to_string(k)}, {"condition", format_number(c)}});
    }
    regime_of[k] = static_cast<std::size_t>(it - spec.regimes.begin());
  }

  SimResult sim;
  integrate(sim, condition.size() - 1, spec.dt, spec.x0, Philox4x32(spec.seed), spec.stream,
            [&](std::size_t k) { return regime_params[regime_of[k]]; });

  ChannelSet& cs = out.channels;
  cs.time_base = {0.0, 1.0 / spec.dt};
  cs.segment.assign(condition.size(), 0);
  cs.channels[spec.condition_name] = std::vector<double>(condition.begin(), condition.end());
  cs.channels[spec.state_name] = std::move(sim.path);
  out.jumps = std::move(sim.jumps);
  return out;
}

}  // namespace jumpdiff
