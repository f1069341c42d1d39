#include "jumpdiff/io.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"

namespace jumpdiff {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json summary_json(const RobustSummary& s) { return {{"median", s.median}, {"mad", s.mad}, {"count", s.count}}; }

RobustSummary summary_from(const json& j) {
  return {num(j.at("median")), num(j.at("mad")), j.at("count").get<std::size_t>()};
}

json cell_value_json(const CellValue& v) {
  return {{"value", v.value}, {"reason", std::string(to_string(v.reason))}, {"flags", v.flags}};
}

std::string flag_text(std::uint8_t flags) {
  std::string s;
  auto add = [&](std::uint8_t bit, const char* name) {
    if (flags & bit) s += (s.empty() ? "" : "|") + std::string(name);
  };
  add(kFlagNegativeDiffusion, "NegativeDiffusion");
  add(kFlagNoJumpTerm, "NoJumpTerm");
  add(kFlagFlooredDiffusion, "FlooredDiffusion");
  return s;
}

KmGrid parse_grid(const json& j) {
  KmGrid g;
  g.condition_name = j.at("condition_name").get<std::string>();
  g.state_name = j.at("state_name").get<std::string>();
  g.dt = j.at("dt").get<double>();
  g.orders = j.at("orders").get<std::vector<int>>();
  g.lag.mode = j.at("lag").at("mode").get<std::string>() == "multi" ? LagPolicy::Mode::multi
                                                                    : LagPolicy::Mode::single;
  g.lag.lags = j.at("lag").at("lags").get<std::vector<std::size_t>>();
  g.k4_bias_corrected = j.at("k4_bias_corrected").get<bool>();
  g.min_count = j.at("min_count").get<std::size_t>();
  for (const auto& b : j.at("bins")) {
    g.condition_centers.push_back(b.at("condition_center").get<double>());
    g.state_widths.push_back(b.at("state_width").get<double>());
    auto& centers = g.state_centers.emplace_back();
    auto& row = g.cells.emplace_back();
    for (const auto& c : b.at("cells")) {
      centers.push_back(c.at("state_center").get<double>());
      KmCell cell;
      cell.count = c.at("count").get<std::size_t>();
      cell.valid = c.at("valid").get<bool>();
      cell.k.fill(kNaN);
      cell.stderr_.fill(kNaN);
      for (int order : g.orders) {
        const auto key = std::to_string(order);
        cell.k[order] = num(c.at("k").at(key));
        cell.stderr_[order] = num(c.at("stderr").at(key));
      }
      for (int order : c.at("negative_even").get<std::vector<int>>()) {
        cell.negative_even |= static_cast<std::uint8_t>(1u << order);
      }
      row.push_back(cell);
    }
  }
  return g;
}

}  // namespace

std::string km_grid_csv(const KmGrid& grid) {
  std::string out = "condition_center,state_center,order,value,stderr,count,valid\n";
  for (std::size_t b = 0; b < grid.cells.size(); ++b) {
    for (std::size_t s = 0; s < grid.cells[b].size(); ++s) {
      const auto& c = grid.cells[b][s];
      for (int j : grid.orders) {
        out += format_number(grid.condition_centers[b]) + "," + format_number(grid.state_centers[b][s]) + "," +
               std::to_string(j) + "," + format_number(c.k[j]) + "," + format_number(c.stderr_[j]) + "," +
               std::to_string(c.count) + "," + (c.valid ? "1" : "0") + "\n";
      }
    }
  }
  return out;
}

std::string km_grid_json(const KmGrid& grid) {
  json j;
  j["condition_name"] = grid.condition_name;
  j["state_name"] = grid.state_name;
  j["dt"] = grid.dt;
  j["orders"] = grid.orders;
  j["lag"] = {{"mode", grid.lag.mode == LagPolicy::Mode::multi ? "multi" : "single"}, {"lags", grid.lag.lags}};
  j["k4_bias_corrected"] = grid.k4_bias_corrected;
  j["min_count"] = grid.min_count;
  j["bins"] = json::array();
  for (std::size_t b = 0; b < grid.cells.size(); ++b) {
    json bin;
    bin["condition_center"] = grid.condition_centers[b];
    bin["state_width"] = grid.state_widths[b];
    bin["cells"] = json::array();
    for (std::size_t s = 0; s < grid.cells[b].size(); ++s) {
      const auto& c = grid.cells[b][s];
      json cell;
      cell["state_center"] = grid.state_centers[b][s];
      cell["count"] = c.count;
      cell["valid"] = c.valid;
      json k = json::object();
      json se = json::object();
      std::vector<int> neg;
      for (int order : grid.orders) {
        k[std::to_string(order)] = c.k[order];
        se[std::to_string(order)] = c.stderr_[order];
        if (c.negative_even & (1u << order)) neg.push_back(order);
      }
      cell["k"] = k;
      cell["stderr"] = se;
      cell["negative_even"] = neg;
      bin["cells"].push_back(cell);
    }
    j["bins"].push_back(bin);
  }
  return j.dump(1) + "\n";
}

KmGrid parse_km_grid_json(std::string_view text) {
  try {
    return parse_grid(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IncompleteRun, std::string("malformed grid JSON: ") + e.what());
  }
}

std::string profile_csv(const JumpDiffusionProfile& p) {
  std::string out =
      "condition_center,state_center,count,drift,drift_reason,diffusion,diffusion_reason,sigma2,sigma2_reason,"
      "rate,rate_reason,contribution,contribution_reason,ratio,ratio_reason,flags\n";
  for (std::size_t b = 0; b < p.drift.size(); ++b) {
    for (std::size_t s = 0; s < p.drift[b].size(); ++s) {
      out += format_number(p.condition_centers[b]) + "," + format_number(p.state_centers[b][s]) + "," +
             std::to_string(p.counts[b][s]);
      for (const Field* f : {&p.drift, &p.diffusion, &p.sigma2, &p.rate, &p.contribution, &p.ratio}) {
        const auto& v = (*f)[b][s];
        out += "," + format_number(v.value) + "," + std::string(to_string(v.reason));
      }
      out += "," + flag_text(static_cast<std::uint8_t>(p.diffusion[b][s].flags | p.ratio[b][s].flags)) + "\n";
    }
  }
  return out;
}

std::string profile_json(const JumpDiffusionProfile& p) {
  json j;
  j["thresholds"] = {{"k4", p.thresholds.k4}, {"sigma", p.thresholds.sigma}, {"jump", p.thresholds.jump}};
  j["bins"] = json::array();
  for (std::size_t b = 0; b < p.drift.size(); ++b) {
    json bin;
    bin["condition_center"] = p.condition_centers[b];
    bin["cells"] = json::array();
    for (std::size_t s = 0; s < p.drift[b].size(); ++s) {
      bin["cells"].push_back({{"state_center", p.state_centers[b][s]},
                              {"count", p.counts[b][s]},
                              {"drift", cell_value_json(p.drift[b][s])},
                              {"diffusion", cell_value_json(p.diffusion[b][s])},
                              {"sigma2", cell_value_json(p.sigma2[b][s])},
                              {"rate", cell_value_json(p.rate[b][s])},
                              {"contribution", cell_value_json(p.contribution[b][s])},
                              {"ratio", cell_value_json(p.ratio[b][s])}});
    }
    j["bins"].push_back(bin);
  }
  j["summary"] = json::array();
  for (const auto& s : p.summary) {
    j["summary"].push_back({{"condition_center", s.condition_center},
                            {"valid_cells", s.valid_cells},
                            {"drift", summary_json(s.drift)},
                            {"k4", summary_json(s.k4)},
                            {"diffusion", summary_json(s.diffusion)},
                            {"sigma2", summary_json(s.sigma2)},
                            {"rate", summary_json(s.rate)},
                            {"contribution", summary_json(s.contribution)},
                            {"ratio", summary_json(s.ratio)},
                            {"sigma2_undefined_fraction", s.sigma2_undefined_fraction},
                            {"rate_undefined_fraction", s.rate_undefined_fraction},
                            {"ratio_undefined_fraction", s.ratio_undefined_fraction}});
  }
  return j.dump(1) + "\n";
}

std::vector<ConditionSummary> parse_profile_summary_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    std::vector<ConditionSummary> out;
    for (const auto& s : j.at("summary")) {
      ConditionSummary c;
      c.condition_center = s.at("condition_center").get<double>();
      c.valid_cells = s.at("valid_cells").get<std::size_t>();
      c.drift = summary_from(s.at("drift"));
      c.k4 = summary_from(s.at("k4"));
      c.diffusion = summary_from(s.at("diffusion"));
      c.sigma2 = summary_from(s.at("sigma2"));
      c.rate = summary_from(s.at("rate"));
      c.contribution = summary_from(s.at("contribution"));
      c.ratio = summary_from(s.at("ratio"));
      c.sigma2_undefined_fraction = num(s.at("sigma2_undefined_fraction"));
      c.rate_undefined_fraction = num(s.at("rate_undefined_fraction"));
      c.ratio_undefined_fraction = num(s.at("ratio_undefined_fraction"));
      out.push_back(c);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IncompleteRun, std::string("malformed profile JSON: ") + e.what());
  }
}

std::string medians_csv(const std::vector<ConditionSummary>& summary) {
  std::string out = "condition_center,valid_cells";
  for (const char* name : {"k4", "diffusion", "sigma2", "rate", "contribution", "ratio"}) {
    out += std::string(",") + name + "_median," + name + "_mad," + name + "_count";
  }
  out += ",sigma2_undefined_fraction,rate_undefined_fraction,ratio_undefined_fraction\n";
  for (const auto& s : summary) {
    out += format_number(s.condition_center) + "," + std::to_string(s.valid_cells);
    for (const RobustSummary* r : {&s.k4, &s.diffusion, &s.sigma2, &s.rate, &s.contribution, &s.ratio}) {
      out += "," + format_number(r->median) + "," + format_number(r->mad) + "," + std::to_string(r->count);
    }
    out += "," + format_number(s.sigma2_undefined_fraction) + "," + format_number(s.rate_undefined_fraction) +
           "," + format_number(s.ratio_undefined_fraction) + "\n";
  }
  return out;
}

std::string curve_csv(const CharacteristicCurve& curve) {
  std::string out = "kind,condition_center,state,stability,slope,low_confidence,plateau\n";
  for (const auto& bin : curve.bins) {
    for (const auto& fp : bin.points) {
      out += std::string(to_string(curve.kind)) + "," + format_number(bin.condition_center) + "," +
             format_number(fp.state) + "," + std::string(to_string(fp.stability)) + "," +
             format_number(fp.slope) + "," + (fp.low_confidence ? "1" : "0") + "," + (fp.plateau ? "1" : "0") +
             "\n";
    }
  }
  return out;
}

std::string annotations_csv(const CharacteristicCurve& curve) {
  std::string out = "label,condition_center,stable_before,stable_after,heuristic\n";
  for (const auto& a : curve.annotations) {
    out += a.label + "," + format_number(a.condition_center) + "," + std::to_string(a.stable_before) + "," +
           std::to_string(a.stable_after) + ",1\n";
  }
  return out;
}

std::string potential_csv(const std::vector<std::pair<double, Potential>>& potentials) {
  std::string out = "condition_center,state,phi,is_minimum\n";
  for (const auto& [center, p] : potentials) {
    std::size_t next_min = 0;
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
      const bool is_min = next_min < p.minima.size() && p.minima[next_min] == k;
      if (is_min) ++next_min;
      out += format_number(center) + "," + format_number(p.grid[k]) + "," + format_number(p.phi[k]) + "," +
             (is_min ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string jump_log_csv(const std::vector<JumpEvent>& jumps) {
  std::string out = "step,time,size\n";
  for (const auto& e : jumps) {
    out += std::to_string(e.step) + "," + format_number(e.time) + "," + format_number(e.size) + "\n";
  }
  return out;
}

}  // namespace jumpdiff
