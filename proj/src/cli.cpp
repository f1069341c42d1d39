#include "jumpdiff/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jumpdiff/dynamics.hpp"
#include "jumpdiff/error.hpp"
#include "jumpdiff/format.hpp"
#include "jumpdiff/ingest.hpp"
#include "jumpdiff/io.hpp"
#include "jumpdiff/jump.hpp"
#include "jumpdiff/km.hpp"
#include "jumpdiff/philox.hpp"
#include "jumpdiff/sim_config.hpp"
#include "jumpdiff/simulate.hpp"
#include "jumpdiff/svg.hpp"

namespace jumpdiff {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct DataOptions {
  std::vector<std::string> inputs;
  std::string time_column = "time";
  std::string wind_column = "u";
  std::string power_column = "P";
  std::string rpm_column = "Omega";
  std::string delimiter = ",";
  std::size_t skip_rows = 0;
  std::vector<std::string> normalize;
  std::string kind = "power";
};

struct EstimateParams {
  double condition_width = 0.5;
  std::vector<double> condition_range;
  std::size_t state_bins = 50;
  std::vector<double> state_range;
  std::size_t min_count = 100;
  std::size_t lag = 1;
  std::size_t max_lag = 0;  // nonzero selects the multi-lag fit
  bool correct_k4_bias = false;
  double eps_k4 = 1e-12;
  double eps_sigma = 1e-12;
  double eps_jump = 1e-12;
  std::size_t threads = 1;
};

struct OutputOptions {
  std::string out;
  std::vector<std::string> formats{"csv", "json"};

  bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
};

struct CurveParams {
  std::string grid;
  std::string unconditioned;
  std::vector<double> range;
  std::size_t unconditioned_bins = 50;
};

struct Prepared {
  ChannelSet channels;
  std::string condition;
  std::string state;
};

// Output files of one command, hashed as they are written so the manifest
// can list them.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw Error(ErrorKind::Io, "cannot create output directory", {{"path", dir_.string()}});
    }
  }

  void write(const std::string& name, const std::string& contents) {
    write_text_file(dir_ / name, contents);
    list_.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(contents))}, {"bytes", contents.size()}});
  }

  void record(const std::string& name) {
    const auto contents = read_text_file(dir_ / name);
    list_.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(contents))}, {"bytes", contents.size()}});
  }

  const fs::path& dir() const { return dir_; }
  const json& list() const { return list_; }

 private:
  fs::path dir_;
  json list_ = json::array();
};

json input_record(const std::string& path) {
  const auto contents = read_text_file(path);
  return {{"path", path}, {"fnv1a64", hex64(fnv1a64(contents))}, {"bytes", contents.size()}};
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string s;
  for (const auto& item : items) s += (s.empty() ? "" : std::string(1, sep)) + item;
  return s;
}

std::string join(const std::vector<double>& items) {
  std::vector<std::string> parts;
  for (double v : items) parts.push_back(format_number(v));
  return join(parts);
}

char delimiter_char(const std::string& d) {
  if (d == "tab" || d == "\\t") return '\t';
  if (d.size() != 1) {
    throw Error(ErrorKind::ConfigError, "delimiter must be a single character or 'tab'", {{"field", "delimiter"}});
  }
  return d.front();
}

std::optional<Interval> interval_of(const std::vector<double>& v, const char* field) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 2 || !(v[1] > v[0])) {
    throw Error(ErrorKind::ConfigError, "range must be lo,hi with hi > lo", {{"field", field}});
  }
  return Interval{v[0], v[1]};
}

void add_data_options(CLI::App& cmd, DataOptions& d, bool inputs_required) {
  auto* in = cmd.add_option("-i,--input", d.inputs, "Input CSV file(s); several files are concatenated");
  if (inputs_required) in->required();
  cmd.add_option("--time-column", d.time_column, "Time column name")->capture_default_str();
  cmd.add_option("--wind-column", d.wind_column, "Wind speed column name")->capture_default_str();
  cmd.add_option("--power-column", d.power_column, "Power column name")->capture_default_str();
  cmd.add_option("--rpm-column", d.rpm_column, "Rotational speed column name (torque curves)")
      ->capture_default_str();
  cmd.add_option("--delimiter", d.delimiter, "Field delimiter, or 'tab'")->capture_default_str();
  cmd.add_option("--skip-rows", d.skip_rows, "Lines to skip before the header")->capture_default_str();
  cmd.add_option("--normalize", d.normalize, "Channels divided by their maximum")->delimiter(',');
  cmd.add_option("--kind", d.kind, "power: P conditioned on u; torque: T conditioned on Omega")
      ->check(CLI::IsMember({"power", "torque"}))
      ->capture_default_str();
}

void add_estimate_options(CLI::App& cmd, EstimateParams& p) {
  cmd.add_option("--condition-width", p.condition_width, "Condition bin width")->capture_default_str();
  cmd.add_option("--condition-range", p.condition_range, "Condition range lo,hi")->delimiter(',')->expected(2);
  cmd.add_option("--state-bins", p.state_bins, "State cells per condition bin")->capture_default_str();
  cmd.add_option("--state-range", p.state_range, "State range lo,hi")->delimiter(',')->expected(2);
  cmd.add_option("--min-count", p.min_count, "Minimum samples per valid cell")->capture_default_str();
  cmd.add_option("--lag", p.lag, "Single lag in samples")->capture_default_str();
  cmd.add_option("--max-lag", p.max_lag, "Fit lags 1..N through the origin instead of a single lag");
  cmd.add_flag("--correct-k4-bias", p.correct_k4_bias, "Subtract the finite-step bias 3 K2^2 dt from K4");
  cmd.add_option("--eps-k4", p.eps_k4, "K4 threshold for jump amplitudes")->capture_default_str();
  cmd.add_option("--eps-sigma", p.eps_sigma, "sigma^2 threshold for jump rates")->capture_default_str();
  cmd.add_option("--eps-jump", p.eps_jump, "lambda sigma^2 threshold for ratios")->capture_default_str();
  cmd.add_option("--threads", p.threads, "Worker threads")->capture_default_str();
}

void add_output_options(CLI::App& cmd, OutputOptions& o) {
  cmd.add_option("-o,--out", o.out, "Output directory")->required();
  cmd.add_option("--formats", o.formats, "Any of csv,json,svg")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->capture_default_str();
}

Prepared prepare(const DataOptions& d) {
  SeriesSchema schema;
  schema.time = d.time_column;
  schema.wind_speed = d.wind_column;
  schema.power = d.power_column;
  schema.rotational_speed = d.kind == "torque" ? d.rpm_column : "";
  schema.delimiter = delimiter_char(d.delimiter);
  schema.skip_rows = d.skip_rows;
  if (d.kind == "torque" && d.rpm_column.empty()) {
    throw Error(ErrorKind::MissingChannel, "torque curves need a rotational speed column", {{"field", "rpm-column"}});
  }

  std::vector<ChannelSet> parts;
  for (const auto& path : d.inputs) parts.push_back(load_series(path, schema));
  Prepared p;
  p.channels = parts.size() == 1 ? std::move(parts.front()) : concatenate(parts);
  if (d.kind == "torque") {
    TorqueOptions t;
    t.power = d.power_column;
    t.rotational_speed = d.rpm_column;
    p.channels = derive_torque(std::move(p.channels), t);
    p.condition = d.rpm_column;
    p.state = t.torque;
  } else {
    p.condition = d.wind_column;
    p.state = d.power_column;
  }
  if (!d.normalize.empty()) p.channels = normalize_by_max(std::move(p.channels), d.normalize);
  return p;
}

KmGrid compute_grid(const Prepared& data, const EstimateParams& p, std::vector<int> orders) {
  BinningSpec spec;
  spec.condition = data.condition;
  spec.condition_width = p.condition_width;
  spec.condition_range = interval_of(p.condition_range, "condition-range");
  spec.state = data.state;
  spec.state_bins = p.state_bins;
  spec.state_range = interval_of(p.state_range, "state-range");
  spec.min_count = p.min_count;

  LagPolicy lag;
  if (p.max_lag > 0) {
    lag = LagPolicy::multi(p.max_lag);
  } else {
    lag.lags = {p.lag};
  }
  lag.validate();
  const auto binned = bin_condition(data.channels, spec, lag.max_lag());
  return estimate_km(binned, std::move(orders), lag, {p.correct_k4_bias, std::max<std::size_t>(p.threads, 1)});
}

json data_json(const DataOptions& d) {
  return {{"inputs", d.inputs},         {"time_column", d.time_column}, {"wind_column", d.wind_column},
          {"power_column", d.power_column}, {"rpm_column", d.rpm_column},   {"delimiter", d.delimiter},
          {"skip_rows", d.skip_rows},   {"normalize", d.normalize},     {"kind", d.kind}};
}

// Numbers are stored as text so the manifest round-trips them exactly.
json estimate_json(const EstimateParams& p) {
  return {{"condition_width", format_number(p.condition_width)},
          {"condition_range", join(p.condition_range)},
          {"state_bins", p.state_bins},
          {"state_range", join(p.state_range)},
          {"min_count", p.min_count},
          {"lag", p.lag},
          {"max_lag", p.max_lag},
          {"correct_k4_bias", p.correct_k4_bias},
          {"eps_k4", format_number(p.eps_k4)},
          {"eps_sigma", format_number(p.eps_sigma)},
          {"eps_jump", format_number(p.eps_jump)},
          {"threads", p.threads}};
}

std::vector<std::string> data_args(const DataOptions& d) {
  std::vector<std::string> a;
  for (const auto& in : d.inputs) a.insert(a.end(), {"--input", in});
  a.insert(a.end(), {"--time-column", d.time_column, "--wind-column", d.wind_column, "--power-column",
                     d.power_column, "--rpm-column", d.rpm_column, "--delimiter", d.delimiter, "--skip-rows",
                     std::to_string(d.skip_rows), "--kind", d.kind});
  if (!d.normalize.empty()) a.insert(a.end(), {"--normalize", join(d.normalize)});
  return a;
}

std::vector<std::string> estimate_args(const EstimateParams& p) {
  std::vector<std::string> a{"--condition-width", format_number(p.condition_width), "--state-bins",
                             std::to_string(p.state_bins), "--min-count", std::to_string(p.min_count),
                             "--lag", std::to_string(p.lag), "--eps-k4", format_number(p.eps_k4),
                             "--eps-sigma", format_number(p.eps_sigma), "--eps-jump", format_number(p.eps_jump),
                             "--threads", std::to_string(p.threads)};
  if (!p.condition_range.empty()) a.insert(a.end(), {"--condition-range", join(p.condition_range)});
  if (!p.state_range.empty()) a.insert(a.end(), {"--state-range", join(p.state_range)});
  if (p.max_lag > 0) a.insert(a.end(), {"--max-lag", std::to_string(p.max_lag)});
  if (p.correct_k4_bias) a.push_back("--correct-k4-bias");
  return a;
}

json manifest_base(const std::string& command, std::vector<std::string> rerun) {
  json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  rerun.insert(rerun.begin(), {kToolName, command});
  m["rerun"] = rerun;
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_estimate(const DataOptions& d, const EstimateParams& p, const OutputOptions& o, std::ostream& out) {
  json inputs = json::array();
  for (const auto& path : d.inputs) inputs.push_back(input_record(path));
  const auto data = prepare(d);
  const auto grid = compute_grid(data, p, {1, 2, 3, 4, 5, 6});
  const auto profile = recover_jump_diffusion(grid, {p.eps_k4, p.eps_sigma, p.eps_jump});

  Artifacts art(o.out);
  if (o.wants("csv")) {
    art.write("km_grid.csv", km_grid_csv(grid));
    art.write("profile.csv", profile_csv(profile));
    art.write("medians.csv", medians_csv(profile.summary));
  }
  if (o.wants("json")) {
    art.write("km_grid.json", km_grid_json(grid));
    art.write("profile.json", profile_json(profile));
  }
  if (o.wants("svg")) art.write("medians.svg", medians_svg(profile.summary, data.condition));

  auto rerun = data_args(d);
  const auto est = estimate_args(p);
  rerun.insert(rerun.end(), est.begin(), est.end());
  rerun.insert(rerun.end(), {"--out", o.out, "--formats", join(o.formats)});
  json m = manifest_base("estimate", rerun);
  m["parameters"] = {{"data", data_json(d)}, {"estimate", estimate_json(p)}, {"formats", o.formats}};
  m["channels"] = {{"condition", data.condition}, {"state", data.state}};
  m["inputs"] = inputs;
  m["outputs"] = art.list();
  art.write("manifest.json", dump(m));
  out << "estimate: " << grid.condition_centers.size() << " condition bins written to " << o.out << "\n";
  return 0;
}

std::string unconditioned_csv(const UnconditionedPotential& u) {
  std::string s = "state,drift,count,phi,is_minimum\n";
  for (std::size_t k = 0; k < u.centers.size(); ++k) {
    double phi = std::numeric_limits<double>::quiet_NaN();
    bool is_min = false;
    const auto& g = u.potential.grid;
    if (const auto it = std::find(g.begin(), g.end(), u.centers[k]); it != g.end()) {
      const auto idx = static_cast<std::size_t>(it - g.begin());
      phi = u.potential.phi[idx];
      is_min = std::find(u.potential.minima.begin(), u.potential.minima.end(), idx) != u.potential.minima.end();
    }
    s += format_number(u.centers[k]) + "," + format_number(u.drift[k].value) + "," + std::to_string(u.counts[k]) +
         "," + format_number(phi) + "," + (is_min ? "1" : "0") + "\n";
  }
  return s;
}

int cmd_curve(const DataOptions& d, const EstimateParams& p, const CurveParams& c, const OutputOptions& o,
              std::ostream& out) {
  const bool need_data = c.grid.empty() || o.wants("svg") || !c.unconditioned.empty();
  if (need_data && d.inputs.empty()) {
    throw Error(ErrorKind::ConfigError, "--input is required unless --grid is given without svg or --unconditioned",
                {{"field", "input"}});
  }
  json inputs = json::array();
  for (const auto& path : d.inputs) inputs.push_back(input_record(path));
  std::optional<Prepared> data;
  if (need_data) data = prepare(d);

  KmGrid grid;
  if (!c.grid.empty()) {
    inputs.push_back(input_record(c.grid));
    grid = parse_km_grid_json(read_text_file(c.grid));
  } else {
    grid = compute_grid(*data, p, {1, 2});
  }
  const auto kind = d.kind == "torque" ? CurveKind::torque_vs_rpm : CurveKind::power_vs_wind;
  const auto curve = characteristic_curve(grid, kind);

  const auto drift = grid.field(1);
  std::vector<std::pair<double, Potential>> potentials;
  for (std::size_t b = 0; b < drift.size(); ++b) {
    try {
      potentials.emplace_back(grid.condition_centers[b], drift_potential(drift[b], grid.state_centers[b]));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoContiguousSegment) throw;
    }
  }

  Artifacts art(o.out);
  art.write("curve.csv", curve_csv(curve));
  art.write("annotations.csv", annotations_csv(curve));
  art.write("potentials.csv", potential_csv(potentials));
  if (o.wants("svg")) {
    art.write("curve.svg", curve_svg(data->channels.channel(grid.condition_name),
                                     data->channels.channel(grid.state_name), curve, grid.condition_name,
                                     grid.state_name));
    art.write("potentials.svg", potential_svg(potentials, grid.state_name));
  }
  if (!c.unconditioned.empty()) {
    const auto range = interval_of(c.range, "range");
    if (!range) throw Error(ErrorKind::ConfigError, "--unconditioned needs --range lo,hi", {{"field", "range"}});
    const auto& cs = data->channels;
    std::vector<double> series = cs.channel(c.unconditioned);
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (!cs.usable(c.unconditioned, i)) series[i] = std::numeric_limits<double>::quiet_NaN();
    }
    UnconditionedOptions uo;
    uo.bins = c.unconditioned_bins;
    uo.min_count = p.min_count;
    uo.segment = cs.segment;
    const auto u = unconditioned_potential(series, *range, cs.time_base.fs, uo);
    art.write("unconditioned.csv", unconditioned_csv(u));
    if (o.wants("svg")) {
      art.write("unconditioned.svg", potential_svg({{0.0, u.potential}}, c.unconditioned));
    }
  }

  auto rerun = data_args(d);
  const auto est = estimate_args(p);
  rerun.insert(rerun.end(), est.begin(), est.end());
  if (!c.grid.empty()) rerun.insert(rerun.end(), {"--grid", c.grid});
  if (!c.unconditioned.empty()) {
    rerun.insert(rerun.end(), {"--unconditioned", c.unconditioned, "--range", join(c.range),
                               "--unconditioned-bins", std::to_string(c.unconditioned_bins)});
  }
  rerun.insert(rerun.end(), {"--out", o.out, "--formats", join(o.formats)});
  json m = manifest_base("curve", rerun);
  m["parameters"] = {{"data", data_json(d)},
                     {"estimate", estimate_json(p)},
                     {"grid", c.grid},
                     {"unconditioned", c.unconditioned},
                     {"range", join(c.range)},
                     {"unconditioned_bins", c.unconditioned_bins},
                     {"formats", o.formats}};
  m["inputs"] = inputs;
  m["outputs"] = art.list();
  art.write("manifest.json", dump(m));
  std::size_t stable = 0;
  for (const auto& bin : curve.bins) {
    stable += static_cast<std::size_t>(std::count_if(bin.points.begin(), bin.points.end(), [](const FixedPoint& f) {
      return f.stability == Stability::stable;
    }));
  }
  out << "curve: " << stable << " stable fixed points written to " << o.out << "\n";
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto text = read_text_file(spec_path);
  const auto cfg = parse_sim_config(text);
  const auto condition = cfg.condition_path();
  const auto sim = make_synthetic_conversion(cfg.synthetic(), condition);

  Artifacts art(out_dir);
  write_channel_set(sim.channels, art.dir() / "series.csv", art.dir() / "series.json");
  art.record("series.csv");
  art.record("series.json");
  art.write("jumps.csv", jump_log_csv(sim.jumps));

  const auto canonical = cfg.canonical();
  json m = manifest_base("simulate", {"--spec", spec_path, "--out", out_dir});
  m["spec"] = {{"path", spec_path},
               {"fnv1a64", hex64(fnv1a64(text))},
               {"canonical", canonical},
               {"canonical_fnv1a64", hex64(fnv1a64(canonical))}};
  m["seed"] = cfg.seed;
  m["stream"] = cfg.stream;
  m["rng"] = std::string(Philox4x32::kName);
  m["dt"] = format_number(cfg.dt);
  m["steps"] = cfg.steps;
  m["jump_count"] = sim.jumps.size();
  m["jump_log"] = "jumps.csv";
  m["warnings"] = sim.warnings;
  m["outputs"] = art.list();
  art.write("manifest.json", dump(m));
  for (const auto& w : sim.warnings) err << "warning: " << w << "\n";
  out << "simulate: " << cfg.steps << " steps, " << sim.jumps.size() << " jumps written to " << out_dir << "\n";
  return 0;
}

std::string band(const RobustSummary& r) {
  if (!r.defined()) return "undefined";
  return format_number(r.median) + " ± " + format_number(r.mad);
}

std::string render_report(const json& manifest, const KmGrid& grid, const std::vector<ConditionSummary>& summary) {
  const auto kind_name = manifest.at("parameters").at("data").at("kind").get<std::string>();
  const auto kind = kind_name == "torque" ? CurveKind::torque_vs_rpm : CurveKind::power_vs_wind;
  const auto curve = characteristic_curve(grid, kind);

  std::string r = "# Run report\n\n";
  r += "- tool: " + manifest.at("tool").get<std::string>() + " " + manifest.at("version").get<std::string>() + "\n";
  r += "- condition channel: " + grid.condition_name + "\n";
  r += "- state channel: " + grid.state_name + "\n";
  r += "- time step: " + format_number(grid.dt) + " s\n";
  r += "- lag mode: " + std::string(grid.lag.mode == LagPolicy::Mode::multi ? "multi" : "single") + ", max lag " +
       std::to_string(grid.lag.max_lag()) + "\n";
  r += "- K4 bias corrected: " + std::string(grid.k4_bias_corrected ? "yes" : "no") + "\n";
  r += "- minimum samples per cell: " + std::to_string(grid.min_count) + "\n";
  for (const auto& in : manifest.at("inputs")) {
    r += "- input: " + in.at("path").get<std::string>() + " (fnv1a64 " + in.at("fnv1a64").get<std::string>() +
         ")\n";
  }

  r += "\n## Fixed points\n\n";
  std::size_t rows = 0;
  std::string table = "| condition | state | stability | slope | low confidence |\n|---|---|---|---|---|\n";
  for (const auto& bin : curve.bins) {
    for (const auto& fp : bin.points) {
      table += "| " + format_number(bin.condition_center) + " | " + format_number(fp.state) + " | " +
               std::string(to_string(fp.stability)) + " | " + format_number(fp.slope) + " | " +
               (fp.low_confidence ? "yes" : "no") + " |\n";
      ++rows;
    }
  }
  r += rows ? table : "No drift zero crossings found.\n";

  r += "\n## Per-bin medians (median ± MAD over state cells)\n\n";
  r += "| condition | valid cells | D2 | lambda | sigma_xi^2 | lambda sigma_xi^2 | D2/(lambda sigma_xi^2) |\n";
  r += "|---|---|---|---|---|---|---|\n";
  for (const auto& s : summary) {
    r += "| " + format_number(s.condition_center) + " | " + std::to_string(s.valid_cells) + " | " +
         band(s.diffusion) + " | " + band(s.rate) + " | " + band(s.sigma2) + " | " + band(s.contribution) + " | " +
         band(s.ratio) + " |\n";
  }

  r += "\n## Undefined-cell fractions\n\n";
  r += "| condition | sigma_xi^2 | lambda | ratio |\n|---|---|---|---|\n";
  for (const auto& s : summary) {
    r += "| " + format_number(s.condition_center) + " | " + format_number(s.sigma2_undefined_fraction) + " | " +
         format_number(s.rate_undefined_fraction) + " | " + format_number(s.ratio_undefined_fraction) + " |\n";
  }

  r += "\n## State annotations\n\n";
  if (curve.annotations.empty()) {
    r += "No change in the number of stable fixed points between condition bins.\n";
  } else {
    r += "Heuristic: a label marks each bin where the count of stable fixed points changes.\n\n";
    r += "| label | condition | stable before | stable after |\n|---|---|---|---|\n";
    for (const auto& a : curve.annotations) {
      r += "| " + a.label + " | " + format_number(a.condition_center) + " | " + std::to_string(a.stable_before) +
           " | " + std::to_string(a.stable_after) + " |\n";
    }
  }
  return r;
}

int cmd_report(const std::string& run_dir, const std::string& out_path, std::ostream& out) {
  const fs::path dir(run_dir);
  std::vector<std::string> missing;
  for (const char* name : {"manifest.json", "km_grid.json", "profile.json"}) {
    if (!fs::is_regular_file(dir / name)) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::IncompleteRun, "run directory lacks estimate artifacts",
                {{"run", run_dir}, {"missing", join(missing)}});
  }
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
    if (manifest.at("command").get<std::string>() != "estimate") {
      throw Error(ErrorKind::IncompleteRun, "manifest does not describe an estimate run", {{"run", run_dir}});
    }
    manifest.at("parameters").at("data").at("kind");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IncompleteRun, std::string("malformed manifest: ") + e.what(), {{"run", run_dir}});
  }
  const auto grid = parse_km_grid_json(read_text_file(dir / "km_grid.json"));
  for (int order : {1, 2, 4, 6}) {
    if (!grid.has_order(order)) {
      throw Error(ErrorKind::IncompleteRun, "grid lacks the orders needed for jump recovery",
                  {{"run", run_dir}, {"order", std::to_string(order)}});
    }
  }
  const auto summary = parse_profile_summary_json(read_text_file(dir / "profile.json"));
  const auto report = render_report(manifest, grid, summary);
  const fs::path target = out_path.empty() ? dir / "report.md" : fs::path(out_path);
  write_text_file(target, report);
  out << "report: written to " << target.string() << "\n";
  return 0;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message,
                const std::map<std::string, std::string>& context = {}) {
  json j;
  j["kind"] = kind;
  j["message"] = message;
  j["context"] = json::object();
  for (const auto& [k, v] : context) j["context"][k] = v;
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kramers-Moyal estimation and jump-diffusion analysis of conversion time series", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values in [estimate] or [curve] sections; flags override");

  DataOptions data;
  EstimateParams params;
  OutputOptions output;
  OutputOptions curve_output;
  curve_output.formats = {"csv"};
  CurveParams curve;
  std::string spec_path;
  std::string sim_out;
  std::string run_dir;
  std::string report_out;

  auto* estimate = app.add_subcommand("estimate", "Estimate Kramers-Moyal coefficients and jump-diffusion terms");
  add_data_options(*estimate, data, true);
  add_estimate_options(*estimate, params);
  add_output_options(*estimate, output);

  auto* curve_cmd = app.add_subcommand("curve", "Characteristic curve from stable fixed points of the drift");
  add_data_options(*curve_cmd, data, false);
  add_estimate_options(*curve_cmd, params);
  add_output_options(*curve_cmd, curve_output);
  curve_cmd->add_option("--grid", curve.grid, "Reuse a km_grid.json instead of estimating");
  curve_cmd->add_option("--unconditioned", curve.unconditioned,
                        "Also estimate the potential of this channel without conditioning");
  curve_cmd->add_option("--range", curve.range, "State range lo,hi for --unconditioned")
      ->delimiter(',')
      ->expected(2);
  curve_cmd->add_option("--unconditioned-bins", curve.unconditioned_bins, "Bins for --unconditioned")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Simulate a synthetic conversion process from a spec file");
  simulate->add_option("--spec", spec_path, "Simulation spec file")->required();
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Summarize a completed estimate run as markdown");
  report->add_option("--run", run_dir, "Run directory written by estimate")->required();
  report->add_option("-o,--out", report_out, "Report path (default: <run>/report.md)");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      emit_error(err, std::string(to_string(ErrorKind::ConfigError)), e.what(), {{"error", e.get_name()}});
      return 2;
    }
    if (estimate->parsed()) {
      if (output.formats.empty()) output.formats = {"csv", "json"};
      return cmd_estimate(data, params, output, out);
    }
    if (curve_cmd->parsed()) {
      if (curve_output.formats.empty()) curve_output.formats = {"csv"};
      return cmd_curve(data, params, curve, curve_output, out);
    }
    if (simulate->parsed()) return cmd_simulate(spec_path, sim_out, out, err);
    if (report->parsed()) return cmd_report(run_dir, report_out, out);
    emit_error(err, "Internal", "no subcommand ran");
    return 1;
  } catch (const Error& e) {
    emit_error(err, std::string(to_string(e.kind())), e.what(), e.context());
    return 2;
  } catch (const std::exception& e) {
    emit_error(err, "Internal", e.what());
    return 1;
  }
}

}  // namespace jumpdiff
