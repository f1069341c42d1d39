#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace jumpdiff {

struct TimeBase {
  double start = 0.0;
  double fs = 1.0;  // Hz
};

// Uniformly sampled channels sharing one time base.
//
// Rows with missing values are dropped on load; `segment` labels the maximal
// gap-free runs so that increments never straddle a dropped row. Samples can
// additionally be flagged per channel in `invalid` (1 = excluded).
struct ChannelSet {
  TimeBase time_base;
  std::map<std::string, std::vector<double>> channels;
  std::map<std::string, double> normalization;  // divisor applied so far
  std::map<std::string, std::vector<std::uint8_t>> invalid;
  std::vector<std::uint32_t> segment;
  std::size_t dropped_rows = 0;

  std::size_t size() const noexcept { return segment.size(); }
  bool has(const std::string& name) const { return channels.count(name) != 0; }

  // Throws MissingChannel.
  const std::vector<double>& channel(const std::string& name) const;

  // True when sample i of `name` is neither masked nor non-finite.
  bool usable(const std::string& name, std::size_t i) const;

  // Adds or replaces a channel, optionally with an invalid mask.
  void set_channel(const std::string& name, std::vector<double> values,
                   std::vector<std::uint8_t> mask = {});

  // Checks the structural invariants (equal lengths, N >= 2, fs > 0).
  void validate() const;
};

struct SeriesSchema {
  std::string time = "time";
  std::string wind_speed = "u";
  std::string power = "P";
  std::string rotational_speed = "Omega";  // may be empty: not loaded
  char delimiter = ',';
  std::size_t skip_rows = 0;

  void validate() const;
  std::vector<std::string> data_columns() const;
};

ChannelSet load_series(const std::filesystem::path& path, const SeriesSchema& schema);

// Joins several sets sampled at the same rate; each input becomes its own
// run of segments so no increment crosses a file boundary.
ChannelSet concatenate(std::span<const ChannelSet> parts);

ChannelSet normalize_by_max(ChannelSet cs, std::span<const std::string> names);

struct TorqueOptions {
  std::string power = "P";
  std::string rotational_speed = "Omega";
  std::string torque = "T";
  // Samples with Omega below floor_fraction * max(Omega) are flagged.
  double floor_fraction = 0.01;
};

// T = (60 s / 2 pi) * P / Omega, evaluated on physical (un-normalized) values.
ChannelSet derive_torque(ChannelSet cs, const TorqueOptions& options = {});

inline constexpr double kRadPerSecondPerRpm = 6.283185307179586476925286766559 / 60.0;

std::vector<double> increments(std::span<const double> x, std::size_t tau);

// CSV of all channels plus a JSON sidecar (fs, divisors, masks, segments).
void write_channel_set(const ChannelSet& cs, const std::filesystem::path& csv_path,
                       const std::filesystem::path& sidecar_path);

}  // namespace jumpdiff
