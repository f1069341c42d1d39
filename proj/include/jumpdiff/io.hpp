#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "jumpdiff/dynamics.hpp"
#include "jumpdiff/jump.hpp"
#include "jumpdiff/km.hpp"
#include "jumpdiff/simulate.hpp"

namespace jumpdiff {

// Long format: condition_center,state_center,order,value,stderr,count,valid
std::string km_grid_csv(const KmGrid& grid);
std::string km_grid_json(const KmGrid& grid);
KmGrid parse_km_grid_json(std::string_view text);

// One row per cell: drift, diffusion, sigma2, rate, contribution, ratio,
// each followed by its reason code; plus flags.
std::string profile_csv(const JumpDiffusionProfile& profile);
std::string profile_json(const JumpDiffusionProfile& profile);
std::vector<ConditionSummary> parse_profile_summary_json(std::string_view text);

// Per-condition medians and MAD bands.
std::string medians_csv(const std::vector<ConditionSummary>& summary);

std::string curve_csv(const CharacteristicCurve& curve);
std::string annotations_csv(const CharacteristicCurve& curve);
std::string potential_csv(const std::vector<std::pair<double, Potential>>& potentials);

std::string jump_log_csv(const std::vector<JumpEvent>& jumps);

}  // namespace jumpdiff
