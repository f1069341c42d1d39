#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jumpdiff/dynamics.hpp"
#include "jumpdiff/jump.hpp"

namespace jumpdiff {

// Fixed points over a 2-d histogram of the raw (condition, state) samples.
// Stable points are drawn as red open circles, unstable ones as blue crosses.
std::string curve_svg(std::span<const double> condition, std::span<const double> state,
                      const CharacteristicCurve& curve, const std::string& condition_label,
                      const std::string& state_label);

// One panel per quantity: median over state cells against the condition
// center, with a gray band of +/- one MAD.
std::string medians_svg(const std::vector<ConditionSummary>& summary, const std::string& condition_label);

// Phi against state, one polyline per condition bin, minima marked.
std::string potential_svg(const std::vector<std::pair<double, Potential>>& potentials,
                          const std::string& state_label);

}  // namespace jumpdiff
