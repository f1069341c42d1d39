#include "jumpdiff/km.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"

namespace jumpdiff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Extends an equal-width axis so that [lo, hi] covers both data extremes.
Axis covering_axis(double origin, double width, double min, double max) {
  Axis a{origin + std::floor((min - origin) / width) * width, width, 1};
  while (a.lo > min) a.lo -= width;
  a.bins = static_cast<std::size_t>(std::max(1.0, std::ceil((max - a.lo) / width)));
  while (a.hi() < max) ++a.bins;
  return a;
}

struct LagMoments {
  std::array<double, kMaxOrder + 1> mean{};
  std::array<double, kMaxOrder + 1> var{};
};

LagMoments cell_moments(const std::vector<double>& x, const std::vector<std::size_t>& idx,
                        std::size_t lag) {
  LagMoments m;
  const double n = static_cast<double>(idx.size());
  for (std::size_t i : idx) {
    const double d = x[i + lag] - x[i];
    double p = 1.0;
    for (int j = 1; j <= kMaxOrder; ++j) {
      p *= d;
      m.mean[j] += p;
    }
  }
  for (int j = 1; j <= kMaxOrder; ++j) m.mean[j] /= n;
  if (idx.size() < 2) {
    m.var.fill(kNaN);
    return m;
  }
  for (std::size_t i : idx) {
    const double d = x[i + lag] - x[i];
    double p = 1.0;
    for (int j = 1; j <= kMaxOrder; ++j) {
      p *= d;
      const double r = p - m.mean[j];
      m.var[j] += r * r;
    }
  }
  for (int j = 1; j <= kMaxOrder; ++j) m.var[j] /= (n - 1.0);
  return m;
}

}  // namespace

void BinningSpec::validate() const {
  if (state.empty()) throw Error(ErrorKind::InvalidArgument, "state channel name is empty");
  if (!(condition_width > 0.0) || !std::isfinite(condition_width)) {
    throw Error(ErrorKind::InvalidArgument, "condition bin width must be positive",
                {{"condition_width", format_number(condition_width)}});
  }
  if (state_bins < 2) {
    throw Error(ErrorKind::InvalidArgument, "state bin count must be at least 2",
                {{"state_bins", std::to_string(state_bins)}});
  }
  if (min_count < 1) throw Error(ErrorKind::InvalidArgument, "minimum count must be at least 1");
  for (const auto* r : {&condition_range, &state_range}) {
    if (*r && !((*r)->hi > (*r)->lo)) {
      throw Error(ErrorKind::InvalidArgument, "range must satisfy lo < hi");
    }
  }
}

LagPolicy LagPolicy::multi(std::size_t max_lag) {
  LagPolicy p;
  p.mode = Mode::multi;
  p.lags.clear();
  for (std::size_t l = 1; l <= max_lag; ++l) p.lags.push_back(l);
  return p;
}

void LagPolicy::validate() const {
  if (lags.empty()) throw Error(ErrorKind::InvalidArgument, "lag list is empty");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] < 1 || (i > 0 && lags[i] <= lags[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "lags must be strictly increasing and >= 1");
    }
  }
  if (mode == Mode::single && lags.size() != 1) {
    throw Error(ErrorKind::InvalidArgument, "single-lag mode takes exactly one lag");
  }
}

std::optional<std::size_t> Axis::locate(double x) const {
  if (bins == 0 || !(x >= lo) || x > hi()) return std::nullopt;
  if (!(width > 0.0)) return std::size_t{0};
  const double raw = std::floor((x - lo) / width);
  auto idx = static_cast<std::size_t>(std::clamp(raw, 0.0, static_cast<double>(bins - 1)));
  while (idx + 1 < bins && x >= edge(idx + 1)) ++idx;
  while (idx > 0 && x < edge(idx)) --idx;
  return idx;
}

std::size_t BinnedSeries::assigned() const {
  std::size_t n = 0;
  for (const auto& b : bins) {
    for (const auto& c : b.cells) n += c.size();
  }
  return n;
}

BinnedSeries bin_condition(const ChannelSet& cs, const BinningSpec& spec, std::size_t max_lag) {
  spec.validate();
  cs.validate();
  if (max_lag < 1 || max_lag >= cs.size()) {
    throw Error(ErrorKind::LagOutOfRange, "lag exceeds series length",
                {{"lag", std::to_string(max_lag)}});
  }
  const auto& state = cs.channel(spec.state);
  const std::vector<double>* cond = spec.condition.empty() ? nullptr : &cs.channel(spec.condition);

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i + max_lag < cs.size(); ++i) {
    if (cs.segment[i] != cs.segment[i + max_lag]) continue;
    if (cond && !cs.usable(spec.condition, i)) continue;
    bool ok = true;
    for (std::size_t l = 0; l <= max_lag && ok; ++l) ok = cs.usable(spec.state, i + l);
    if (!ok) continue;
    if (spec.state_range && !(state[i] >= spec.state_range->lo && state[i] <= spec.state_range->hi)) continue;
    eligible.push_back(i);
  }

  Axis cond_axis{0.0, 0.0, 1};
  if (cond) {
    if (spec.condition_range) {
      const auto& r = *spec.condition_range;
      cond_axis = {r.lo, spec.condition_width,
                   static_cast<std::size_t>(
                       std::max(1.0, std::ceil((r.hi - r.lo) / spec.condition_width - 1e-9)))};
    } else if (!eligible.empty()) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto i : eligible) {
        lo = std::min(lo, (*cond)[i]);
        hi = std::max(hi, (*cond)[i]);
      }
      cond_axis = covering_axis(0.0, spec.condition_width, lo, hi);
    }
  }

  std::vector<std::vector<std::size_t>> per_condition(cond_axis.bins);
  for (auto i : eligible) {
    if (!cond) {
      per_condition[0].push_back(i);
      continue;
    }
    auto b = cond_axis.locate((*cond)[i]);
    if (!b && !spec.condition_range && (*cond)[i] > cond_axis.hi()) b = cond_axis.bins - 1;
    if (b) per_condition[*b].push_back(i);
  }

  BinnedSeries out;
  out.spec = spec;
  out.state = state;
  out.fs = cs.time_base.fs;
  out.max_lag = max_lag;
  out.bins.resize(cond_axis.bins);
  for (std::size_t b = 0; b < cond_axis.bins; ++b) {
    auto& bin = out.bins[b];
    if (cond) {
      bin.lo = cond_axis.edge(b);
      bin.hi = cond_axis.edge(b + 1);
      bin.center = cond_axis.center(b);
    }
    const auto& members = per_condition[b];
    if (spec.state_range) {
      const auto& r = *spec.state_range;
      bin.state = {r.lo, (r.hi - r.lo) / static_cast<double>(spec.state_bins), spec.state_bins};
    } else if (!members.empty()) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto i : members) {
        lo = std::min(lo, state[i]);
        hi = std::max(hi, state[i]);
      }
      bin.state = {lo, (hi - lo) / static_cast<double>(spec.state_bins), spec.state_bins};
    } else {
      bin.state = {0.0, 0.0, spec.state_bins};
    }
    bin.cells.resize(spec.state_bins);
    for (auto i : members) {
      auto s = bin.state.locate(state[i]);
      if (!s && state[i] >= bin.state.lo) s = spec.state_bins - 1;  // rounding at the closed top
      if (s) bin.cells[*s].push_back(i);
    }
  }
  if (out.assigned() == 0) {
    throw Error(ErrorKind::EmptyBinning, "no valid samples to bin",
                {{"state", spec.state}, {"condition", spec.condition}});
  }
  return out;
}

bool KmGrid::has_order(int j) const {
  return std::find(orders.begin(), orders.end(), j) != orders.end();
}

Field KmGrid::field(int order) const {
  if (!has_order(order)) {
    throw Error(ErrorKind::InvalidArgument, "order not estimated", {{"order", std::to_string(order)}});
  }
  Field f(cells.size());
  for (std::size_t b = 0; b < cells.size(); ++b) {
    f[b].reserve(cells[b].size());
    for (const auto& c : cells[b]) {
      f[b].push_back(c.valid ? CellValue::of(c.k[order]) : CellValue::missing(Reason::cell_invalid));
    }
  }
  return f;
}

Field KmGrid::stderr_field(int order) const {
  Field f = field(order);
  for (std::size_t b = 0; b < cells.size(); ++b) {
    for (std::size_t s = 0; s < cells[b].size(); ++s) {
      if (f[b][s].defined()) f[b][s].value = cells[b][s].stderr_[order];
    }
  }
  return f;
}

KmGrid estimate_km(const BinnedSeries& binned, std::vector<int> orders, const LagPolicy& lag,
                   const EstimateOptions& options) {
  lag.validate();
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (orders.empty() || orders.front() < 1 || orders.back() > kMaxOrder) {
    throw Error(ErrorKind::InvalidArgument, "orders must be a non-empty subset of 1..6");
  }
  if (lag.max_lag() > binned.max_lag) {
    throw Error(ErrorKind::LagOutOfRange, "lag exceeds the lag the series was binned for",
                {{"lag", std::to_string(lag.max_lag())}, {"binned", std::to_string(binned.max_lag)}});
  }

  KmGrid grid;
  grid.condition_name = binned.spec.condition;
  grid.state_name = binned.spec.state;
  grid.orders = orders;
  grid.lag = lag;
  grid.dt = static_cast<double>(lag.lags.front()) / binned.fs;
  grid.min_count = binned.spec.min_count;
  grid.k4_bias_corrected = options.correct_k4_bias && grid.has_order(4);

  const std::size_t nb = binned.bins.size();
  grid.condition_centers.resize(nb);
  grid.state_centers.resize(nb);
  grid.state_widths.resize(nb);
  grid.cells.resize(nb);

  std::vector<double> dts;
  double sum_dt2 = 0.0;
  for (auto l : lag.lags) {
    dts.push_back(static_cast<double>(l) / binned.fs);
    sum_dt2 += dts.back() * dts.back();
  }

  auto estimate_bin = [&](std::size_t b) {
    const auto& bin = binned.bins[b];
    grid.condition_centers[b] = bin.center;
    grid.state_widths[b] = bin.state.width;
    auto& centers = grid.state_centers[b];
    auto& row = grid.cells[b];
    centers.resize(bin.cells.size());
    row.assign(bin.cells.size(), KmCell{});
    for (std::size_t s = 0; s < bin.cells.size(); ++s) {
      centers[s] = bin.state.center(s);
      auto& cell = row[s];
      const auto& idx = bin.cells[s];
      cell.count = idx.size();
      cell.k.fill(kNaN);
      cell.stderr_.fill(kNaN);
      cell.valid = idx.size() >= binned.spec.min_count;
      if (!cell.valid) continue;

      const double n = static_cast<double>(idx.size());
      std::array<double, kMaxOrder + 1> num{};
      std::array<double, kMaxOrder + 1> var_num{};
      for (std::size_t li = 0; li < lag.lags.size(); ++li) {
        auto m = cell_moments(binned.state, idx, lag.lags[li]);
        if (grid.k4_bias_corrected) m.mean[4] -= 3.0 * m.mean[2] * m.mean[2];
        const double dt = dts[li];
        for (int j = 1; j <= kMaxOrder; ++j) {
          if (lag.mode == LagPolicy::Mode::single) {
            num[j] = m.mean[j] / dt;
            var_num[j] = m.var[j] / n / (dt * dt);
          } else {
            num[j] += dt * m.mean[j];
            var_num[j] += dt * dt * m.var[j] / n;
          }
        }
      }
      for (int j : orders) {
        if (lag.mode == LagPolicy::Mode::single) {
          cell.k[j] = num[j];
          cell.stderr_[j] = std::sqrt(var_num[j]);
        } else {
          cell.k[j] = num[j] / sum_dt2;
          cell.stderr_[j] = std::sqrt(var_num[j]) / sum_dt2;
        }
        if (j % 2 == 0 && cell.k[j] < 0.0) cell.negative_even |= static_cast<std::uint8_t>(1u << j);
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(nb, 1));
  if (threads == 1) {
    for (std::size_t b = 0; b < nb; ++b) estimate_bin(b);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t b = t; b < nb; b += threads) estimate_bin(b);
      });
    }
  }
  return grid;
}

std::vector<RobustSummary> median_over_state(const KmGrid& grid, int order) {
  return median_over_state(grid.field(order));
}

}  // namespace jumpdiff
