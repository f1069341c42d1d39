#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "jumpdiff/error.hpp"
#include "jumpdiff/philox.hpp"
#include "jumpdiff/robust.hpp"
#include "jumpdiff/sim_config.hpp"
#include "jumpdiff/simulate.hpp"

using namespace jumpdiff;

namespace {

SimSpec ou(std::uint64_t seed, std::size_t steps) {
  SimSpec s;
  s.drift = [](double x) { return -(x - 0.5); };
  s.diffusion = [](double) { return 0.05; };
  s.dt = 0.01;
  s.steps = steps;
  s.x0 = 0.5;
  s.seed = seed;
  return s;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

std::string field_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.context().count("field") ? e.context().at("field") : "";
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32(Philox4x32::Key{0, 0})(B{0, 0, 0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32(Philox4x32::Key{0xffffffff, 0xffffffff})(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32(Philox4x32::Key{0xa4093822, 0x299f31d0})(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  CHECK(Philox4x32::kName == "philox4x32-10");
}

TEST_CASE("open uniforms stay inside (0, 1)") {
  CHECK(open_uniform(0, 0) > 0.0);
  CHECK(open_uniform(0xffffffff, 0xffffffff) < 1.0);
  CHECK(std::isfinite(block_normal({0, 0, 0, 0})));
}

TEST_CASE("Gaussian sampler obeys Wick closure") {
  const Philox4x32 rng(12345);
  const double sigma2 = 0.16;
  double m2 = 0, m4 = 0, m6 = 0;
  const std::size_t n = 1000000;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = std::sqrt(sigma2) * block_normal(rng.block(k, 2, 0));
    const double x2 = xi * xi;
    m2 += x2;
    m4 += x2 * x2;
    m6 += x2 * x2 * x2;
  }
  m2 /= n;
  m4 /= n;
  m6 /= n;
  CHECK(m4 / (m2 * m2) == doctest::Approx(3.0).epsilon(0.05 / 3));
  CHECK(m6 / (m2 * m2 * m2) == doctest::Approx(15.0).epsilon(0.5 / 15));
}

TEST_CASE("noise-free reduction is forward Euler") {
  SimSpec s;
  s.drift = [](double x) { return -x; };
  s.diffusion = [](double) { return 0.0; };
  s.dt = 0.001;
  s.steps = 1000;
  s.x0 = 1.0;
  const auto x = simulate_langevin(s);
  REQUIRE(x.size() == 1001);
  double euler = 1.0;
  for (std::size_t k = 1; k <= 1000; ++k) {
    euler += -euler * s.dt;
    CHECK(x[k] == euler);
  }
  CHECK(std::abs(x.back() - std::exp(-1.0)) <= s.dt);
}

TEST_CASE("OU stationary variance D2/(2 theta)") {
  const auto x = simulate_langevin(ou(8, 1000000));
  const std::vector<double> tail(x.begin() + 1000, x.end());
  const double m = mean(tail);
  double v = 0;
  for (double e : tail) v += (e - m) * (e - m);
  v /= static_cast<double>(tail.size() - 1);
  CHECK(v == doctest::Approx(0.025).epsilon(0.05));
}

TEST_CASE("determinism and streams") {
  const auto a = simulate_langevin(ou(42, 20000));
  const auto b = simulate_langevin(ou(42, 20000));
  CHECK(a == b);
  CHECK(a != simulate_langevin(ou(43, 20000)));
  auto other = ou(42, 20000);
  other.stream = 1;
  CHECK(a != simulate_langevin(other));

  auto spec = ou(42, 5000);
  spec.jump_rate = 0.5;
  spec.jump_variance = 0.01;
  const auto one = simulate_paths(spec, 5, 1);
  const auto many = simulate_paths(spec, 5, 3);
  for (std::size_t p = 0; p < 5; ++p) {
    CHECK(one[p].path == many[p].path);
    CHECK(one[p].jumps.size() == many[p].jumps.size());
  }
  CHECK(one[0].path != one[1].path);
}

TEST_CASE("zero jump rate reproduces the Langevin path") {
  auto spec = ou(3, 50000);
  spec.jump_variance = 0.3;
  const auto jd = simulate_jump_diffusion(spec);
  CHECK(jd.path == simulate_langevin(spec));
  CHECK(jd.jumps.empty());
}

TEST_CASE("jump log statistics") {
  auto spec = ou(19, 1000000);  // T = 1e4 s
  spec.jump_rate = 0.5;
  spec.jump_variance = 0.16;
  const auto r = simulate_jump_diffusion(spec);
  const double expected = 0.5 * 1e4;
  CHECK(std::abs(static_cast<double>(r.jumps.size()) - expected) <= 3 * std::sqrt(expected));

  double m2 = 0, m4 = 0;
  for (const auto& j : r.jumps) {
    m2 += j.size * j.size;
    m4 += std::pow(j.size, 4);
    CHECK(j.time == static_cast<double>(j.step) * spec.dt);
  }
  m2 /= static_cast<double>(r.jumps.size());
  m4 /= static_cast<double>(r.jumps.size());
  // Sampling sd of the kurtosis is about sqrt(96 / n) = 0.14 here.
  CHECK(m4 / (m2 * m2) == doctest::Approx(3.0).epsilon(0.45 / 3));
  CHECK(m2 == doctest::Approx(0.16).epsilon(0.06));

  // Each logged jump shows up in the path increment.
  const auto& j = r.jumps.front();
  const double x = r.path[j.step];
  const double continuous = r.path[j.step + 1] - x - j.size;
  CHECK(std::abs(continuous) < 10 * std::sqrt(0.05 * spec.dt));
}

TEST_CASE("spec validation") {
  auto s = ou(1, 10);
  s.dt = 0.0;
  CHECK(kind_of([&] { simulate_jump_diffusion(s); }) == ErrorKind::InvalidSpec);
  CHECK(field_of([&] { simulate_jump_diffusion(s); }) == "dt");

  s = ou(1, 10);
  s.jump_rate = 100.0;  // rate * dt = 1
  CHECK(kind_of([&] { simulate_jump_diffusion(s); }) == ErrorKind::InvalidSpec);

  s = ou(1, 10);
  s.jump_rate = 1.0;  // rate * dt = 0.01
  CHECK(kind_of([&] { simulate_langevin(s); }) == ErrorKind::InvalidSpec);
  const auto warned = simulate_jump_diffusion(s);
  CHECK(warned.warnings.size() == 1);
  s.jump_rate = 0.99;
  CHECK(simulate_jump_diffusion(s).warnings.empty());

  s = ou(1, 10);
  s.diffusion = [](double x) { return x - 0.6; };
  CHECK(kind_of([&] { simulate_langevin(s); }) == ErrorKind::NegativeDiffusionAtState);

  s = ou(1, 0);
  CHECK(kind_of([&] { simulate_langevin(s); }) == ErrorKind::InvalidSpec);
}

TEST_CASE("synthetic conversion") {
  SUBCASE("constant condition reduces to a single-spec run") {
    auto spec = ou(4, 9999);
    spec.jump_rate = 0.5;
    spec.jump_variance = 0.04;
    SyntheticSpec syn;
    syn.regimes.push_back({{0.0, 1.0}, spec.drift, spec.diffusion, spec.jump_rate, spec.jump_variance});
    syn.dt = spec.dt;
    syn.x0 = spec.x0;
    syn.seed = spec.seed;
    const std::vector<double> cond(10000, 0.4);
    const auto conv = make_synthetic_conversion(syn, cond);
    const auto direct = simulate_jump_diffusion(spec);
    CHECK(conv.channels.channel("P") == direct.path);
    CHECK(conv.channels.channel("u") == cond);
    CHECK(conv.jumps.size() == direct.jumps.size());
    CHECK(conv.channels.time_base.fs == doctest::Approx(100.0));
    CHECK_NOTHROW(conv.channels.validate());
  }
  SUBCASE("unmapped condition") {
    SyntheticSpec syn;
    syn.regimes.push_back({{0.0, 0.5}, [](double) { return 0.0; }, [](double) { return 0.1; }, 0, 0});
    syn.dt = 0.1;
    const std::vector<double> cond{0.1, 0.2, 0.7};
    CHECK(kind_of([&] { make_synthetic_conversion(syn, cond); }) == ErrorKind::UnmappedCondition);
  }
}

TEST_CASE("simulation config file") {
  const std::string text = R"(# demo
dt = 0.01
steps = 100
x0 = 0.25
seed = 9
condition_square = 0.2 0.8 10
drift = 0.5 -1
diffusion = 0.05
jump_rate = 0.5   # per second
jump_variance = 0.04
)";
  const auto cfg = parse_sim_config(text);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.steps == 100);
  CHECK(cfg.seed == 9);
  REQUIRE(cfg.regimes.size() == 1);
  CHECK(cfg.regimes[0].drift(0.2) == doctest::Approx(0.3));
  CHECK(cfg.regimes[0].jump_rate == 0.5);
  const auto path = cfg.condition_path();
  CHECK(path.size() == 101);
  CHECK(path[9] == 0.2);
  CHECK(path[10] == 0.8);
  CHECK(path[20] == 0.2);

  SUBCASE("canonical text re-parses to itself") {
    const auto again = parse_sim_config(cfg.canonical());
    CHECK(again.canonical() == cfg.canonical());
  }
  SUBCASE("regimes with defaults") {
    const auto r = parse_sim_config(
        "dt = 0.1\nsteps = 5\ndiffusion = 0.1\n[regime]\ncondition_lo = 0\ncondition_hi = 0.5\ndrift = 1\n"
        "[regime]\ncondition_lo = 0.5\ncondition_hi = 1\ndrift = -1\ndiffusion = 0.2\n");
    REQUIRE(r.regimes.size() == 2);
    CHECK(r.regimes[0].diffusion(0.0) == 0.1);
    CHECK(r.regimes[1].diffusion(0.0) == 0.2);
    CHECK(parse_sim_config(r.canonical()).canonical() == r.canonical());
  }
  SUBCASE("errors name line and field") {
    auto ctx = [](const std::string& t) {
      try {
        parse_sim_config(t);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        return e.context();
      }
      FAIL("expected ConfigError");
      return std::map<std::string, std::string>{};
    };
    auto c = ctx("steps = 3\ndt = -0.1\ndrift = 0\ndiffusion = 1\n");
    CHECK(c["field"] == "dt");
    CHECK(c["line"] == "2");
    CHECK(ctx("dt = 0\nsteps = 3\ndrift = 0\ndiffusion = 1\n")["field"] == "dt");
    CHECK(ctx("steps = 3\ndrift = 0\ndiffusion = 1\n")["field"] == "dt");
    CHECK(ctx("dt = 1\nsteps = 3\ndrift = 0\ndiffusion = 1\nbogus = 2\n")["field"] == "bogus");
    CHECK(ctx("dt = 1\nsteps = 3\ndrift = x\ndiffusion = 1\n")["field"] == "drift");
    CHECK(ctx("dt = 0.1\nsteps = 3\ndrift = 0\n")["field"] == "diffusion");
    CHECK(ctx("dt = 0.1\nsteps = 3\ndrift = 0\ndiffusion = 1\njump_rate = 10\n")["field"] == "jump_rate");
  }
}
