// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jumpdiff/cli.hpp"
#include "jumpdiff/dynamics.hpp"
#include "jumpdiff/format.hpp"
#include "jumpdiff/ingest.hpp"
#include "jumpdiff/jump.hpp"
#include "jumpdiff/km.hpp"
#include "jumpdiff/philox.hpp"
#include "jumpdiff/robust.hpp"
#include "jumpdiff/simulate.hpp"
#include "support.hpp"

using namespace jumpdiff;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "MISS ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < budget_s, fmt("runtime %.2f s", secs) + fmt(" < %.0f s", budget_s));
  failures += !v.pass;
  std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
}

ChannelSet single_channel(std::vector<double> x, double dt) {
  ChannelSet cs;
  cs.time_base.fs = 1.0 / dt;
  cs.segment.assign(x.size(), 0);
  cs.channels["x"] = std::move(x);
  return cs;
}

KmGrid grid_of(const ChannelSet& cs, std::size_t bins, bool correct_k4, std::vector<int> orders) {
  BinningSpec b;
  b.state = "x";
  b.state_bins = bins;
  return estimate_km(bin_condition(cs, b), std::move(orders), LagPolicy{}, {correct_k4, 1});
}

// Count-weighted least-squares slope of K1 against the state over valid cells.
double drift_slope(const KmGrid& g) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < g.cells[0].size(); ++i) {
    const auto& c = g.cells[0][i];
    if (!c.valid) continue;
    const double w = static_cast<double>(c.count), x = g.state_centers[0][i], y = c.k[1];
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  return (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
}

double nearest(const std::vector<double>& xs, double target) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (std::abs(x - target) < std::abs(best - target)) best = x;
  }
  return best;
}

KmGrid jump_grid;  // criterion 2, seed 1; reused by criterion 6

Verdict ou_recovery() {
  SimSpec s;
  s.drift = [](double x) { return -(x - 0.5); };
  s.diffusion = [](double) { return 0.05; };
  s.dt = 0.01;
  s.steps = 499999;
  s.x0 = 0.5;
  s.seed = 1;
  const auto g = grid_of(single_channel(simulate_langevin(s), s.dt), 50, true, {1, 2, 3, 4, 5, 6});
  const auto p = recover_jump_diffusion(g);
  const double width = g.state_widths[0];

  Verdict v;
  const double slope = drift_slope(g);
  v.require(std::abs(slope + 1.0) <= 0.10, fmt("slope %.4f", slope));
  const double d2 = p.summary[0].diffusion.median;
  v.require(std::abs(d2 - 0.05) <= 0.10 * 0.05, fmt("median D2 %.5f", d2));

  std::vector<double> stable;
  for (const auto& fp : find_fixed_points(p.drift[0], g.state_centers[0], g.stderr_field(1)[0])) {
    if (fp.stability == Stability::stable) stable.push_back(fp.state);
  }
  const double fp = nearest(stable, 0.5);
  v.require(std::abs(fp - 0.5) <= width, fmt("fixed point %.4f", fp) + fmt(" (bin width %.4f)", width));

  std::size_t valid = 0, ok = 0;
  for (std::size_t i = 0; i < g.cells[0].size(); ++i) {
    if (!g.cells[0][i].valid) continue;
    ++valid;
    ok += !p.ratio[0][i].defined() || p.ratio[0][i].value > 10.0;
  }
  const double frac = valid ? static_cast<double>(ok) / static_cast<double>(valid) : 0.0;
  v.require(frac >= 0.90, fmt("ratio undefined or >10 in %.3f of valid bins", frac));
  return v;
}

Verdict jump_recovery_check() {
  Verdict v;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SimSpec s;
    s.drift = [](double x) { return -x; };
    s.diffusion = [](double) { return 0.5; };
    s.jump_rate = 0.5;
    s.jump_variance = 0.16;
    s.dt = 1e-3;
    s.steps = 999999;
    s.seed = seed;
    const auto g = grid_of(single_channel(simulate_jump_diffusion(s).path, s.dt), 50, true, {1, 2, 3, 4, 5, 6});
    const auto p = recover_jump_diffusion(g);
    const auto& sm = p.summary[0];
    const std::string tag = "seed " + std::to_string(seed) + " ";
    v.require(std::abs(sm.sigma2.median - 0.16) <= 0.20 * 0.16, tag + fmt("sigma2 %.4f", sm.sigma2.median));
    v.require(std::abs(sm.rate.median - 0.5) <= 0.25 * 0.5, tag + fmt("lambda %.4f", sm.rate.median));

    std::size_t defined = 0;
    double worst6 = 0, worst2 = 0;
    for (std::size_t i = 0; i < g.cells[0].size(); ++i) {
      const auto& c = g.cells[0][i];
      if (!p.sigma2[0][i].defined() || !p.rate[0][i].defined()) continue;
      ++defined;
      const double sg = p.sigma2[0][i].value, lam = p.rate[0][i].value;
      worst6 = std::max(worst6, std::abs(sg * 5 * c.k[4] - c.k[6]) / (kEps * std::abs(c.k[6])));
      worst2 = std::max(worst2, std::abs(p.diffusion[0][i].value + lam * sg - c.k[2]) /
                                    (kEps * (std::abs(c.k[2]) + lam * sg)));
    }
    v.require(defined > 0 && worst6 <= 4 && worst2 <= 4,
              tag + "identities on " + std::to_string(defined) + " cells" + fmt(" (max %.1f ulp", worst6) +
                  fmt(", %.1f ulp)", worst2));
    if (seed == 1) jump_grid = g;
  }
  return v;
}

Verdict wick_closure() {
  const Philox4x32 rng(20240101);
  const double sigma2 = 0.16;
  const std::size_t n = 1000000;
  double m2 = 0, m4 = 0, m6 = 0;
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
  Verdict v;
  const double r4 = m4 / (m2 * m2), r6 = m6 / (m2 * m2 * m2);
  v.require(std::abs(r4 - 3.0) <= 0.05, fmt("<xi^4>/<xi^2>^2 %.4f", r4));
  v.require(std::abs(r6 - 15.0) <= 0.5, fmt("<xi^6>/<xi^2>^3 %.3f", r6));
  return v;
}

Verdict multistability() {
  SimSpec s;
  s.drift = [](double x) { return x - x * x * x; };
  s.diffusion = [](double) { return 0.1; };
  s.dt = 0.05;
  s.steps = 2000000;
  s.x0 = 1.0;
  s.seed = 1;
  const auto g = grid_of(single_channel(simulate_langevin(s), s.dt), 50, false, {1, 2});
  const auto drift = g.field(1)[0];
  const auto fps = find_fixed_points(drift, g.state_centers[0], g.stderr_field(1)[0]);
  const double width = g.state_widths[0];

  std::vector<double> stable, unstable;
  for (const auto& fp : fps) (fp.stability == Stability::stable ? stable : unstable).push_back(fp.state);
  Verdict v;
  v.require(stable.size() == 2, std::to_string(stable.size()) + " stable");
  std::sort(stable.begin(), stable.end());
  if (stable.size() == 2) {
    v.require(std::abs(stable[0] + 1) <= width && std::abs(stable[1] - 1) <= width,
              fmt("stable at %.3f", stable[0]) + fmt(" and %.3f", stable[1]) + fmt(" (bin width %.3f)", width));
  }
  v.require(unstable.size() == 1 && std::abs(unstable[0]) <= width,
            std::to_string(unstable.size()) + " unstable" +
                (unstable.empty() ? std::string() : fmt(" at %.3f", unstable[0])));

  const auto minima = drift_potential(drift, g.state_centers[0]).minima_locations();
  bool colocated = minima.size() == stable.size();
  for (double x : stable) colocated = colocated && std::abs(nearest(minima, x) - x) <= width;
  std::string list;
  for (double m : minima) list += fmt(" %.3f", m);
  v.require(colocated, "potential minima" + list);
  return v;
}

Verdict three_wells() {
  SimSpec s;
  s.drift = [](double x) { return -6.0 * x * (x * x - 1.0) * (x * x - 0.25); };
  s.diffusion = [](double) { return 0.1; };
  s.dt = 0.05;
  s.steps = 2000000;
  s.seed = 1;
  const auto path = simulate_langevin(s);
  const Interval range{-1.4, 1.4};
  const std::size_t bins = 40;
  const auto u = unconditioned_potential(path, range, 1.0 / s.dt, {bins, 100, {}});
  const auto minima = u.potential.minima_locations();
  const double width = (range.hi - range.lo) / static_cast<double>(bins);

  Verdict v;
  std::string list;
  for (double m : minima) list += fmt(" %.3f", m);
  bool ok = minima.size() == 3;
  for (double well : {-1.0, 0.0, 1.0}) ok = ok && std::abs(nearest(minima, well) - well) <= width;
  v.require(ok, "minima" + list + " vs wells -1 0 1" + fmt(" (bin width %.3f)", width));
  return v;
}

Verdict median_robustness() {
  const auto row = jump_grid.field(4)[0];
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i].defined()) valid.push_back(i);
  }
  std::mt19937_64 rng(6);
  std::shuffle(valid.begin(), valid.end(), rng);

  auto stats = [](const std::vector<CellValue>& cells) {
    std::vector<double> xs;
    for (const auto& c : cells) {
      if (c.defined()) xs.push_back(c.value);
    }
    return std::pair{median_over_state(Field{cells})[0].median, mean(xs)};
  };
  const auto [m0, mean0] = stats(row);
  auto share = [&](double fraction) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(valid.size())));
  };
  auto contaminate = [&](std::size_t k) {
    auto bad = row;
    for (std::size_t i = 0; i < k; ++i) bad[valid[i]].value = 100.0 * std::abs(m0);
    return stats(bad);
  };
  const std::size_t k5 = share(0.05), k45 = share(0.45);
  const auto [m5, mean5] = contaminate(k5);
  const auto m45 = contaminate(k45).first;

  Verdict v;
  const double shift5 = std::abs(m5 - m0) / std::abs(m0);
  const double shift45 = std::abs(m45 - m0) / std::abs(m0);
  const double mshift = std::abs(mean5 - mean0) / std::abs(mean0);
  v.require(shift5 < 0.05, fmt("5%% median shift %.4f", shift5));
  v.require(std::isfinite(m45), fmt("45%% median shift %.4f", shift45));
  v.require(mshift > 1.0, fmt("5%% mean shift %.2f", mshift));
  v.require(valid.size() >= 20, std::to_string(k5) + " and " + std::to_string(k45) + " of " +
                                     std::to_string(valid.size()) + " valid K4 cells replaced");
  return v;
}

Verdict torque_identity() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 1e4);
  const std::size_t n = 100000;
  std::vector<double> p(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = u(rng);
    w[i] = u(rng);
  }
  ChannelSet cs;
  cs.segment.assign(n, 0);
  cs.channels["P"] = p;
  cs.channels["Omega"] = w;
  const auto out = derive_torque(cs);
  double worst = 0;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.usable("T", i)) continue;
    ++checked;
    worst = std::max(worst, std::abs(out.channel("T")[i] * w[i] * 2 * std::numbers::pi / 60 - p[i]) / (kEps * p[i]));
  }
  Verdict v;
  v.require(checked > 0 && worst <= 4, std::to_string(checked) + " samples above the standstill floor" + fmt(", max error %.1f ulp", worst));
  return v;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jumpdiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[e.path().lexically_relative(root).string()] = read_text_file(e.path());
  }
  return files;
}

Verdict end_to_end() {
  testing::TempDir dir("acceptance");
  const auto spec = dir.write("spec.txt",
                              "dt = 0.01\nsteps = 200000\nx0 = 0.5\nseed = 8\ncondition = 0.25\n"
                              "drift = 0.5 -1\ndiffusion = 0.05\njump_rate = 0.2\njump_variance = 0.01\n");
  auto pipeline = [&] {
    const auto sim = (dir / "sim").string();
    const auto est = (dir / "est").string();
    return cli({"simulate", "--spec", spec.string(), "--out", sim}) == 0 &&
           cli({"estimate", "-i", sim + "/series.csv", "--formats", "csv,json,svg", "--out", est}) == 0 &&
           cli({"report", "--run", est}) == 0;
  };
  Verdict v;
  const bool first = pipeline();
  v.require(first, "first run succeeded");
  const auto a = snapshot(dir.path());
  const bool second = pipeline();
  v.require(second, "second run succeeded");
  const auto b = snapshot(dir.path());
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) differing += !b.count(name) || b.at(name) != bytes;
  v.require(a.size() == b.size() && differing == 0 && a.count("est/report.md"),
            std::to_string(a.size()) + " artifacts, " + std::to_string(differing) + " differ");
  return v;
}

}  // namespace

int main() {
  criterion(1, "OU recovery", 30, ou_recovery);
  criterion(2, "jump-diffusion recovery, seeds 1-3", 3 * 120, jump_recovery_check);
  criterion(3, "Wick sampler closure", 5, wick_closure);
  criterion(4, "multistability", 30, multistability);
  criterion(5, "three-well potential", 30, three_wells);
  criterion(6, "median robustness", 1, median_robustness);
  criterion(7, "torque identity", 1, torque_identity);
  criterion(8, "end-to-end determinism", 180, end_to_end);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
