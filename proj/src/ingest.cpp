#include "jumpdiff/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <string_view>

#include "json.hpp"

#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"

namespace jumpdiff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kStepTolerance = 1e-6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_field(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return kNaN;
  double v = kNaN;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return kNaN;
  return v;
}

}  // namespace

const std::vector<double>& ChannelSet::channel(const std::string& name) const {
  const auto it = channels.find(name);
  if (it == channels.end()) {
    throw Error(ErrorKind::MissingChannel, "channel '" + name + "' not present", {{"channel", name}});
  }
  return it->second;
}

bool ChannelSet::usable(const std::string& name, std::size_t i) const {
  const auto& values = channel(name);
  if (!std::isfinite(values[i])) return false;
  const auto mask = invalid.find(name);
  return mask == invalid.end() || mask->second[i] == 0;
}

void ChannelSet::set_channel(const std::string& name, std::vector<double> values,
                             std::vector<std::uint8_t> mask) {
  if (values.size() != size()) {
    throw Error(ErrorKind::InvalidArgument, "channel length differs from time base",
                {{"channel", name}});
  }
  if (!mask.empty() && mask.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "mask length differs from channel", {{"channel", name}});
  }
  channels[name] = std::move(values);
  if (mask.empty()) {
    invalid.erase(name);
  } else {
    invalid[name] = std::move(mask);
  }
}

void ChannelSet::validate() const {
  if (size() < 2) throw Error(ErrorKind::EmptyInput, "channel set needs at least two samples");
  if (!(time_base.fs > 0.0) || !std::isfinite(time_base.fs)) {
    throw Error(ErrorKind::InvalidArgument, "sampling frequency must be positive");
  }
  for (const auto& [name, values] : channels) {
    if (values.size() != size()) {
      throw Error(ErrorKind::InvalidArgument, "channel length mismatch", {{"channel", name}});
    }
  }
  for (const auto& [name, mask] : invalid) {
    if (mask.size() != size()) {
      throw Error(ErrorKind::InvalidArgument, "mask length mismatch", {{"channel", name}});
    }
  }
}

void SeriesSchema::validate() const {
  if (time.empty()) throw Error(ErrorKind::InvalidArgument, "time column name is empty");
  std::set<std::string> seen{time};
  for (const auto& c : data_columns()) {
    if (!seen.insert(c).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate column name in schema", {{"column", c}});
    }
  }
  if (data_columns().empty()) {
    throw Error(ErrorKind::InvalidArgument, "schema names no data columns");
  }
}

std::vector<std::string> SeriesSchema::data_columns() const {
  std::vector<std::string> out;
  for (const auto* c : {&wind_speed, &power, &rotational_speed}) {
    if (!c->empty()) out.push_back(*c);
  }
  return out;
}

ChannelSet load_series(const std::filesystem::path& path, const SeriesSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open input file", {{"path", path.string()}});
  }

  std::string line;
  for (std::size_t i = 0; i < schema.skip_rows && std::getline(in, line); ++i) {
  }

  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    if (header_line.rfind("\xEF\xBB\xBF", 0) == 0) header_line.erase(0, 3);
    if (!trim(header_line).empty()) break;
  }
  header = split(header_line, schema.delimiter);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), std::string_view(name));
    if (it == header.end()) {
      throw Error(ErrorKind::MissingChannel, "column '" + name + "' not found in header",
                  {{"column", name}, {"path", path.string()}});
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const auto names = schema.data_columns();
  const std::size_t time_col = column_index(schema.time);
  std::vector<std::size_t> data_cols;
  for (const auto& n : names) data_cols.push_back(column_index(n));

  std::vector<std::size_t> row_index;
  std::vector<double> times;
  std::vector<std::vector<double>> data(names.size());
  std::size_t dropped = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, schema.delimiter);
    const std::size_t this_row = row++;
    auto get = [&](std::size_t col) { return col < fields.size() ? parse_field(fields[col]) : kNaN; };
    const double t = get(time_col);
    bool ok = std::isfinite(t);
    std::vector<double> values(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      values[c] = get(data_cols[c]);
      ok = ok && std::isfinite(values[c]);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    row_index.push_back(this_row);
    times.push_back(t);
    for (std::size_t c = 0; c < names.size(); ++c) data[c].push_back(values[c]);
  }

  if (times.size() < 2) {
    throw Error(ErrorKind::EmptyInput, "fewer than two usable rows",
                {{"path", path.string()}, {"rows", std::to_string(times.size())}});
  }

  const double step = (times[1] - times[0]) / static_cast<double>(row_index[1] - row_index[0]);
  if (!(step > 0.0)) {
    throw Error(ErrorKind::IrregularSampling, "time column is not strictly increasing",
                {{"row", std::to_string(row_index[1])}});
  }
  ChannelSet cs;
  cs.segment.resize(times.size());
  std::uint32_t seg = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double rows = static_cast<double>(row_index[i] - row_index[i - 1]);
    const double local = (times[i] - times[i - 1]) / rows;
    if (!(std::abs(local - step) <= kStepTolerance * step)) {
      throw Error(ErrorKind::IrregularSampling, "non-constant sampling step",
                  {{"row", std::to_string(row_index[i])},
                   {"expected_step", format_number(step)},
                   {"observed_step", format_number(local)}});
    }
    if (row_index[i] != row_index[i - 1] + 1) ++seg;
    cs.segment[i] = seg;
  }

  cs.time_base = {times.front(), 1.0 / step};
  cs.dropped_rows = dropped;
  for (std::size_t c = 0; c < names.size(); ++c) cs.channels[names[c]] = std::move(data[c]);
  cs.validate();
  return cs;
}

ChannelSet concatenate(std::span<const ChannelSet> parts) {
  if (parts.empty()) throw Error(ErrorKind::EmptyInput, "nothing to concatenate");
  if (parts.size() == 1) return parts.front();
  ChannelSet out;
  out.time_base = parts.front().time_base;
  const double fs = out.time_base.fs;
  std::uint32_t seg_offset = 0;
  for (const auto& p : parts) {
    if (std::abs(p.time_base.fs - fs) > kStepTolerance * fs) {
      throw Error(ErrorKind::IrregularSampling, "inputs have different sampling frequencies");
    }
    if (p.channels.size() != parts.front().channels.size()) {
      throw Error(ErrorKind::MissingChannel, "inputs carry different channel sets");
    }
    const std::size_t base = out.size();
    for (const auto& [name, values] : p.channels) {
      if (!parts.front().has(name)) {
        throw Error(ErrorKind::MissingChannel, "channel absent from first input", {{"channel", name}});
      }
      auto& dst = out.channels[name];
      dst.insert(dst.end(), values.begin(), values.end());
    }
    for (const auto& [name, _] : parts.front().invalid) out.invalid[name].resize(base, 0);
    for (const auto& [name, mask] : p.invalid) {
      auto& dst = out.invalid[name];
      dst.resize(base, 0);
      dst.insert(dst.end(), mask.begin(), mask.end());
    }
    std::uint32_t max_seg = 0;
    for (auto s : p.segment) {
      out.segment.push_back(s + seg_offset);
      max_seg = std::max(max_seg, s);
    }
    seg_offset += max_seg + 1;
    out.dropped_rows += p.dropped_rows;
  }
  for (auto& [name, mask] : out.invalid) mask.resize(out.size(), 0);
  out.normalization = parts.front().normalization;
  out.validate();
  return out;
}

ChannelSet normalize_by_max(ChannelSet cs, std::span<const std::string> names) {
  for (const auto& name : names) {
    cs.channel(name);
    auto& values = cs.channels[name];
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (cs.usable(name, i)) max = std::max(max, values[i]);
    }
    if (!(max > 0.0) || !std::isfinite(max)) {
      throw Error(ErrorKind::DegenerateMax, "channel maximum is not positive",
                  {{"channel", name}, {"max", format_number(max)}});
    }
    for (auto& v : values) v /= max;
    const auto it = cs.normalization.find(name);
    cs.normalization[name] = it == cs.normalization.end() ? max : it->second * max;
  }
  return cs;
}

ChannelSet derive_torque(ChannelSet cs, const TorqueOptions& options) {
  const auto& power = cs.channel(options.power);
  const auto& omega = cs.channel(options.rotational_speed);
  auto divisor = [&](const std::string& name) {
    const auto it = cs.normalization.find(name);
    return it == cs.normalization.end() ? 1.0 : it->second;
  };
  const double p_scale = divisor(options.power);
  const double w_scale = divisor(options.rotational_speed);

  double omega_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs.usable(options.rotational_speed, i)) omega_max = std::max(omega_max, omega[i] * w_scale);
  }
  const double floor = options.floor_fraction * omega_max;

  std::vector<double> torque(cs.size(), kNaN);
  std::vector<std::uint8_t> mask(cs.size(), 1);
  bool any = false;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!cs.usable(options.power, i) || !cs.usable(options.rotational_speed, i)) continue;
    const double w = omega[i] * w_scale;
    if (!(w >= floor) || !(w > 0.0)) continue;
    torque[i] = power[i] * p_scale / (w * kRadPerSecondPerRpm);
    mask[i] = 0;
    any = true;
  }
  if (!any) {
    throw Error(ErrorKind::AllInvalid, "every sample is below the rotational-speed floor",
                {{"floor", format_number(floor)}});
  }
  cs.normalization.erase(options.torque);
  cs.set_channel(options.torque, std::move(torque), std::move(mask));
  return cs;
}

std::vector<double> increments(std::span<const double> x, std::size_t tau) {
  if (tau < 1 || tau >= x.size()) {
    throw Error(ErrorKind::LagOutOfRange, "lag must satisfy 1 <= tau < N",
                {{"tau", std::to_string(tau)}, {"n", std::to_string(x.size())}});
  }
  std::vector<double> out(x.size() - tau);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i + tau] - x[i];
  return out;
}

void write_channel_set(const ChannelSet& cs, const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path) {
  std::string csv = "time";
  for (const auto& [name, _] : cs.channels) csv += "," + name;
  csv += "\n";
  const double step = 1.0 / cs.time_base.fs;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    csv += format_number(cs.time_base.start + static_cast<double>(i) * step);
    for (const auto& [_, values] : cs.channels) csv += "," + format_number(values[i]);
    csv += "\n";
  }
  write_text_file(csv_path, csv);

  nlohmann::ordered_json side;
  side["fs"] = cs.time_base.fs;
  side["start"] = cs.time_base.start;
  side["length"] = cs.size();
  side["dropped_rows"] = cs.dropped_rows;
  side["divisors"] = nlohmann::ordered_json::object();
  for (const auto& [name, d] : cs.normalization) side["divisors"][name] = d;
  side["invalid"] = nlohmann::ordered_json::object();
  for (const auto& [name, mask] : cs.invalid) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) idx.push_back(i);
    }
    side["invalid"][name] = idx;
  }
  std::vector<std::size_t> breaks;
  for (std::size_t i = 1; i < cs.segment.size(); ++i) {
    if (cs.segment[i] != cs.segment[i - 1]) breaks.push_back(i);
  }
  side["segment_starts"] = breaks;
  write_text_file(sidecar_path, side.dump(2) + "\n");
}

}  // namespace jumpdiff
