#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "jumpdiff/format.hpp"
#include "jumpdiff/simulate.hpp"

namespace testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("jumpdiff_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    jumpdiff::write_text_file(path_ / name, text);
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Single-regime synthetic conversion with a constant condition channel.
inline jumpdiff::SyntheticConversion constant_condition_run(jumpdiff::ScalarFn drift, jumpdiff::ScalarFn diffusion,
                                                            double rate, double variance, double dt,
                                                            std::size_t samples, double x0, std::uint64_t seed,
                                                            double condition = 0.25) {
  jumpdiff::SyntheticSpec spec;
  spec.regimes.push_back({{-1e300, 1e300}, std::move(drift), std::move(diffusion), rate, variance});
  spec.dt = dt;
  spec.x0 = x0;
  spec.seed = seed;
  const std::vector<double> cond(samples, condition);
  return jumpdiff::make_synthetic_conversion(spec, cond);
}

// Ordinary least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing
