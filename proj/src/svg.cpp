#include "jumpdiff/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace jumpdiff {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 360.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 45.0;

// Coordinates are written with fixed precision; exact digits would only
// bloat the file.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

struct Panel {
  double y0;  // top of the panel in document coordinates
  Range x, y;

  double sx(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double sy(double v) const {
    const double h = kPanelHeight - kTop - kBottom;
    return y0 + kTop + h - (v - y.lo) / (y.hi - y.lo) * h;
  }

  std::string frame(const std::string& xlabel, const std::string& ylabel) const {
    std::string s;
    const double bottom = y0 + kPanelHeight - kBottom;
    s += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(y0 + kTop) + "\" width=\"" + px(kWidth - kLeft - kRight) +
         "\" height=\"" + px(kPanelHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x.lo + (x.hi - x.lo) * i / 4.0;
      const double yv = y.lo + (y.hi - y.lo) * i / 4.0;
      s += "<text x=\"" + px(sx(xv)) + "\" y=\"" + px(bottom + 15) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           tick(xv) + "</text>\n";
      s += "<text x=\"" + px(kLeft - 4) + "\" y=\"" + px(sy(yv) + 3) + "\" font-size=\"10\" text-anchor=\"end\">" +
           tick(yv) + "</text>\n";
    }
    s += "<text x=\"" + px(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" + px(bottom + 35) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
    s += "<text x=\"14\" y=\"" + px(y0 + kPanelHeight / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         px(y0 + kPanelHeight / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s;
  }
};

std::string document(double height, const std::string& body) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) +
         "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(height) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "</svg>\n";
}

std::string circle(double x, double y, double r, const std::string& color) {
  return "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"" + px(r) + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\"/>\n";
}

std::string cross(double x, double y, double r, const std::string& color) {
  return "<path d=\"M" + px(x - r) + " " + px(y - r) + "L" + px(x + r) + " " + px(y + r) + "M" + px(x - r) + " " +
         px(y + r) + "L" + px(x + r) + " " + px(y - r) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
}

}  // namespace

std::string curve_svg(std::span<const double> condition, std::span<const double> state,
                      const CharacteristicCurve& curve, const std::string& condition_label,
                      const std::string& state_label) {
  Panel p{0.0, {}, {}};
  const std::size_t n = std::min(condition.size(), state.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(condition[i]) && std::isfinite(state[i])) {
      p.x.add(condition[i]);
      p.y.add(state[i]);
    }
  }
  for (const auto& bin : curve.bins) {
    for (const auto& fp : bin.points) {
      p.x.add(bin.condition_center);
      p.y.add(fp.state);
    }
  }
  p.x.finish();
  p.y.finish();

  constexpr std::size_t kGrid = 80;
  std::vector<std::size_t> hist(kGrid * kGrid, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(condition[i]) || !std::isfinite(state[i])) continue;
    const auto gx = std::min<std::size_t>(kGrid - 1, static_cast<std::size_t>((condition[i] - p.x.lo) / (p.x.hi - p.x.lo) * kGrid));
    const auto gy = std::min<std::size_t>(kGrid - 1, static_cast<std::size_t>((state[i] - p.y.lo) / (p.y.hi - p.y.lo) * kGrid));
    ++hist[gy * kGrid + gx];
  }
  const double peak = std::log1p(static_cast<double>(*std::max_element(hist.begin(), hist.end())));

  std::string body;
  const double cw = (p.x.hi - p.x.lo) / kGrid;
  const double ch = (p.y.hi - p.y.lo) / kGrid;
  for (std::size_t gy = 0; gy < kGrid; ++gy) {
    for (std::size_t gx = 0; gx < kGrid; ++gx) {
      const auto c = hist[gy * kGrid + gx];
      if (c == 0) continue;
      const double x0 = p.sx(p.x.lo + gx * cw);
      const double y1 = p.sy(p.y.lo + (gy + 1) * ch);
      const double shade = 0.15 + 0.85 * std::log1p(static_cast<double>(c)) / peak;
      body += "<rect x=\"" + px(x0) + "\" y=\"" + px(y1) + "\" width=\"" + px(p.sx(p.x.lo + cw) - p.sx(p.x.lo)) +
              "\" height=\"" + px(p.sy(p.y.lo) - p.sy(p.y.lo + ch)) + "\" fill=\"black\" fill-opacity=\"" +
              px(shade * 0.6) + "\"/>\n";
    }
  }
  for (const auto& bin : curve.bins) {
    for (const auto& fp : bin.points) {
      const double x = p.sx(bin.condition_center);
      const double y = p.sy(fp.state);
      body += fp.stability == Stability::stable ? circle(x, y, 4, "red") : cross(x, y, 3, "blue");
    }
  }
  body += p.frame(condition_label, state_label);
  return document(kPanelHeight, body);
}

std::string medians_svg(const std::vector<ConditionSummary>& summary, const std::string& condition_label) {
  struct Quantity {
    const char* label;
    RobustSummary ConditionSummary::*member;
  };
  const Quantity quantities[] = {
      {"D2", &ConditionSummary::diffusion},
      {"lambda [1/s]", &ConditionSummary::rate},
      {"sigma_xi^2", &ConditionSummary::sigma2},
      {"lambda sigma_xi^2", &ConditionSummary::contribution},
      {"D2 / (lambda sigma_xi^2)", &ConditionSummary::ratio},
  };

  std::string body;
  double y0 = 0.0;
  for (const auto& q : quantities) {
    Panel p{y0, {}, {}};
    for (const auto& s : summary) {
      const auto& r = s.*q.member;
      if (!r.defined()) continue;
      p.x.add(s.condition_center);
      p.y.add(r.median - r.mad);
      p.y.add(r.median + r.mad);
    }
    p.x.finish();
    p.y.finish();

    std::string upper, lower, line;
    for (const auto& s : summary) {
      const auto& r = s.*q.member;
      if (!r.defined() || !std::isfinite(r.median)) continue;
      const std::string x = px(p.sx(s.condition_center));
      upper += (upper.empty() ? "M" : "L") + x + " " + px(p.sy(r.median + r.mad));
      lower = "L" + x + " " + px(p.sy(r.median - r.mad)) + lower;
      line += (line.empty() ? "M" : "L") + x + " " + px(p.sy(r.median));
    }
    if (!line.empty()) {
      body += "<path d=\"" + upper + lower + "Z\" fill=\"gray\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
      body += "<path d=\"" + line + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    }
    body += p.frame(condition_label, q.label);
    y0 += kPanelHeight;
  }
  return document(y0, body);
}

std::string potential_svg(const std::vector<std::pair<double, Potential>>& potentials,
                          const std::string& state_label) {
  Panel p{0.0, {}, {}};
  for (const auto& [center, pot] : potentials) {
    for (std::size_t k = 0; k < pot.grid.size(); ++k) {
      p.x.add(pot.grid[k]);
      p.y.add(pot.phi[k]);
    }
  }
  p.x.finish();
  p.y.finish();

  std::string body;
  const std::size_t count = potentials.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& pot = potentials[i].second;
    if (pot.grid.empty()) continue;
    const int hue = count > 1 ? static_cast<int>(240.0 * i / (count - 1)) : 0;
    const std::string color = "hsl(" + std::to_string(hue) + ",70%,40%)";
    std::string d;
    for (std::size_t k = 0; k < pot.grid.size(); ++k) {
      d += (k == 0 ? "M" : "L") + px(p.sx(pot.grid[k])) + " " + px(p.sy(pot.phi[k]));
    }
    body += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\"/>\n";
    for (std::size_t m : pot.minima) body += circle(p.sx(pot.grid[m]), p.sy(pot.phi[m]), 3.5, "red");
  }
  body += p.frame(state_label, "Phi");
  return document(kPanelHeight, body);
}

}  // namespace jumpdiff
