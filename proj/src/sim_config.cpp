#include "jumpdiff/sim_config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"

namespace jumpdiff {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, std::string_view field, const std::string& message) {
  throw Error(ErrorKind::ConfigError, message,
              {{"line", std::to_string(line)}, {"field", std::string(field)}});
}

std::vector<double> parse_numbers(std::string_view value, std::size_t line, std::string_view field) {
  std::vector<double> out;
  std::istringstream in{std::string(value)};
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const char* b = tok.data() + (tok.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(b, tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      fail(line, field, "'" + tok + "' is not a finite number");
    }
    out.push_back(v);
  }
  if (out.empty()) fail(line, field, "missing value");
  return out;
}

double parse_scalar(std::string_view value, std::size_t line, std::string_view field) {
  const auto v = parse_numbers(value, line, field);
  if (v.size() != 1) fail(line, field, "expected a single number");
  return v.front();
}

std::uint64_t parse_unsigned(std::string_view value, std::size_t line, std::string_view field) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    fail(line, field, "expected a non-negative integer");
  }
  return v;
}

struct PartialRegime {
  std::optional<double> lo, hi;
  std::optional<Polynomial> drift, diffusion;
  std::optional<double> rate, variance;
  std::size_t line = 0;

  // Returns false when `key` is not a regime key.
  bool set(std::string_view key, std::string_view value, std::size_t ln) {
    if (key == "condition_lo") lo = parse_scalar(value, ln, key);
    else if (key == "condition_hi") hi = parse_scalar(value, ln, key);
    else if (key == "drift") drift = Polynomial{parse_numbers(value, ln, key)};
    else if (key == "diffusion") diffusion = Polynomial{parse_numbers(value, ln, key)};
    else if (key == "jump_rate") rate = parse_scalar(value, ln, key);
    else if (key == "jump_variance") variance = parse_scalar(value, ln, key);
    else return false;
    return true;
  }
};

std::string poly_text(const Polynomial& p) {
  std::string s;
  for (std::size_t i = 0; i < p.coefficients.size(); ++i) {
    if (i) s += ' ';
    s += format_number(p.coefficients[i]);
  }
  return s;
}

}  // namespace

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

SimConfig parse_sim_config(std::string_view text) {
  SimConfig cfg;
  PartialRegime defaults;
  std::vector<PartialRegime> sections;
  bool have_dt = false;
  bool have_steps = false;
  bool have_condition = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line != "[regime]") fail(line_no, line, "unknown section");
      sections.emplace_back();
      sections.back().line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, line, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) fail(line_no, key, "missing value");

    if (!sections.empty()) {
      if (!sections.back().set(key, value, line_no)) fail(line_no, key, "unknown key in [regime]");
      continue;
    }
    if (defaults.set(key, value, line_no)) {
      if (key == "condition_lo" || key == "condition_hi") fail(line_no, key, "only valid inside [regime]");
      continue;
    }
    if (key == "dt") {
      cfg.dt = parse_scalar(value, line_no, key);
      if (!(cfg.dt > 0.0)) fail(line_no, key, "dt must be positive");
      have_dt = true;
    } else if (key == "steps") {
      cfg.steps = parse_unsigned(value, line_no, key);
      if (cfg.steps < 1) fail(line_no, key, "steps must be at least 1");
      have_steps = true;
    } else if (key == "x0") {
      cfg.x0 = parse_scalar(value, line_no, key);
    } else if (key == "seed") {
      cfg.seed = parse_unsigned(value, line_no, key);
    } else if (key == "stream") {
      const auto s = parse_unsigned(value, line_no, key);
      if (s > std::numeric_limits<std::uint32_t>::max()) fail(line_no, key, "stream exceeds 32 bits");
      cfg.stream = static_cast<std::uint32_t>(s);
    } else if (key == "condition") {
      if (have_condition) fail(line_no, key, "condition given twice");
      cfg.shape = SimConfig::ConditionShape::constant;
      cfg.condition_value = parse_scalar(value, line_no, key);
      have_condition = true;
    } else if (key == "condition_square") {
      if (have_condition) fail(line_no, key, "condition given twice");
      const auto v = parse_numbers(value, line_no, key);
      if (v.size() != 3 || !(v[2] >= 1.0) || v[2] != std::floor(v[2])) {
        fail(line_no, key, "expected: low high half-period-in-steps");
      }
      cfg.shape = SimConfig::ConditionShape::square;
      cfg.condition_low = v[0];
      cfg.condition_high = v[1];
      cfg.half_period = static_cast<std::size_t>(v[2]);
      have_condition = true;
    } else if (key == "condition_channel") {
      cfg.condition_channel = std::string(value);
    } else if (key == "state_channel") {
      cfg.state_channel = std::string(value);
    } else {
      fail(line_no, key, "unknown key");
    }
  }

  if (!have_dt) fail(0, "dt", "required key missing");
  if (!have_steps) fail(0, "steps", "required key missing");
  if (cfg.condition_channel.empty() || cfg.state_channel.empty() ||
      cfg.condition_channel == cfg.state_channel || cfg.condition_channel == "time" ||
      cfg.state_channel == "time") {
    fail(0, "state_channel", "channel names must be non-empty, distinct and not 'time'");
  }

  if (sections.empty()) {
    sections.push_back(defaults);
    sections.back().lo = -std::numeric_limits<double>::infinity();
    sections.back().hi = std::numeric_limits<double>::infinity();
  }
  for (const auto& s : sections) {
    RegimeConfig r;
    const auto pick = [&](const auto& own, const auto& fallback) { return own ? own : fallback; };
    const auto drift = pick(s.drift, defaults.drift);
    const auto diffusion = pick(s.diffusion, defaults.diffusion);
    if (!drift) fail(s.line, "drift", "required key missing");
    if (!diffusion) fail(s.line, "diffusion", "required key missing");
    if (!s.lo || !s.hi) fail(s.line, "condition_lo", "regime needs condition_lo and condition_hi");
    if (!(*s.hi > *s.lo)) fail(s.line, "condition_hi", "condition_hi must exceed condition_lo");
    r.condition = {*s.lo, *s.hi};
    r.drift = *drift;
    r.diffusion = *diffusion;
    r.jump_rate = pick(s.rate, defaults.rate).value_or(0.0);
    r.jump_variance = pick(s.variance, defaults.variance).value_or(0.0);
    if (r.jump_rate < 0.0) fail(s.line, "jump_rate", "jump_rate must be non-negative");
    if (r.jump_variance < 0.0) fail(s.line, "jump_variance", "jump_variance must be non-negative");
    if (!(r.jump_rate * cfg.dt < 1.0)) fail(s.line, "jump_rate", "jump_rate * dt must be below 1");
    cfg.regimes.push_back(std::move(r));
  }
  return cfg;
}

std::vector<double> SimConfig::condition_path() const {
  std::vector<double> out(steps + 1, condition_value);
  if (shape == ConditionShape::square) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = (k / half_period) % 2 == 0 ? condition_low : condition_high;
    }
  }
  return out;
}

SyntheticSpec SimConfig::synthetic() const {
  SyntheticSpec s;
  s.dt = dt;
  s.x0 = x0;
  s.seed = seed;
  s.stream = stream;
  s.condition_name = condition_channel;
  s.state_name = state_channel;
  for (const auto& r : regimes) {
    s.regimes.push_back({r.condition, r.drift, r.diffusion, r.jump_rate, r.jump_variance});
  }
  return s;
}

std::string SimConfig::canonical() const {
  std::ostringstream out;
  out << "dt = " << format_number(dt) << "\n"
      << "steps = " << steps << "\n"
      << "x0 = " << format_number(x0) << "\n"
      << "seed = " << seed << "\n"
      << "stream = " << stream << "\n";
  if (shape == ConditionShape::constant) {
    out << "condition = " << format_number(condition_value) << "\n";
  } else {
    out << "condition_square = " << format_number(condition_low) << " " << format_number(condition_high)
        << " " << half_period << "\n";
  }
  out << "condition_channel = " << condition_channel << "\n"
      << "state_channel = " << state_channel << "\n";
  const bool unbounded = regimes.size() == 1 && std::isinf(regimes.front().condition.lo) &&
                         std::isinf(regimes.front().condition.hi);
  for (const auto& r : regimes) {
    if (!unbounded) {
      out << "[regime]\n"
          << "condition_lo = " << format_number(r.condition.lo) << "\n"
          << "condition_hi = " << format_number(r.condition.hi) << "\n";
    }
    out << "drift = " << poly_text(r.drift) << "\n"
        << "diffusion = " << poly_text(r.diffusion) << "\n"
        << "jump_rate = " << format_number(r.jump_rate) << "\n"
        << "jump_variance = " << format_number(r.jump_variance) << "\n";
  }
  return out.str();
}

}  // namespace jumpdiff
