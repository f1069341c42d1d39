#pragma once

#include <vector>

#include "jumpdiff/field.hpp"
#include "jumpdiff/km.hpp"

namespace jumpdiff {

// Guards for the ratio formulas below.
struct JumpThresholds {
  double k4 = 1e-12;     // K4 must exceed this for an amplitude
  double sigma = 1e-12;  // sigma^2 must exceed this for a rate
  double jump = 1e-12;   // lambda*sigma^2 must exceed this for a ratio
};

// D1 = K1.
Field drift_from_km(const KmGrid& grid);

// Gaussian jump sizes close the moment hierarchy: <xi^4> = 3 s^2 and
// <xi^6> = 15 s^3, so K6 / K4 = 5 sigma^2.
Field jump_amplitude(const KmGrid& grid, const JumpThresholds& eps = {});

// lambda = K4 / (3 sigma^4).
Field jump_rate(const KmGrid& grid, const Field& sigma2, const JumpThresholds& eps = {});

// D2 = K2 - lambda sigma^2 where both jump terms exist, else K2 (flagged).
Field diffusion_from_km(const KmGrid& grid, const Field& rate, const Field& sigma2);

struct ConditionSummary {
  double condition_center = 0.0;
  std::size_t valid_cells = 0;
  RobustSummary drift;
  RobustSummary k4;
  RobustSummary diffusion;
  RobustSummary sigma2;
  RobustSummary rate;
  RobustSummary contribution;  // lambda * sigma^2
  RobustSummary ratio;         // D2 / (lambda * sigma^2)
  double sigma2_undefined_fraction = 0.0;
  double rate_undefined_fraction = 0.0;
  double ratio_undefined_fraction = 0.0;
};

struct JumpDiffusionProfile {
  std::vector<double> condition_centers;
  std::vector<std::vector<double>> state_centers;
  std::vector<std::vector<std::size_t>> counts;
  Field k2;
  Field k4;
  Field drift;
  Field diffusion;
  Field sigma2;
  Field rate;
  Field contribution;
  Field ratio;
  JumpThresholds thresholds;
  std::vector<ConditionSummary> summary;
};

// Per-condition medians of every profile field, including lambda sigma^2
// and D2 / (lambda sigma^2).
std::vector<ConditionSummary> jump_diagnostics(const JumpDiffusionProfile& profile);

// Runs all of the above on a grid carrying orders 1, 2, 4 and 6.
JumpDiffusionProfile recover_jump_diffusion(const KmGrid& grid, const JumpThresholds& eps = {});

}  // namespace jumpdiff
