#pragma once

// Command implementations behind the `tpi` executable. Each command reads
// its inputs, writes its primary output to `out`, diagnostics to `log`, and
// returns a process exit status.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tpi/analytic.hpp"
#include "tpi/compare.hpp"
#include "tpi/config.hpp"
#include "tpi/correlator.hpp"
#include "tpi/error.hpp"
#include "tpi/model.hpp"
#include "tpi/pathamp.hpp"
#include "tpi/presets.hpp"
#include "tpi/tag_io.hpp"
#include "tpi/tagsim.hpp"

namespace tpi::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kValidation = 4,
  kTolerance = 5,
};

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw UsageError("unknown format '" + s + "' (csv or json)");
}

// JSON numbers carry the same 9 significant digits as CSV.
inline double round9(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_float(x));
}

inline nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round9(x);
}

// Runs fn, mapping library exceptions to exit statuses.
template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    log << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    log << "format error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    log << "validation error: " << e.what() << '\n';
    return kValidation;
  }
}

// ---------------------------------------------------------------------------
// Scenario: source + interferometer + grid, from a preset and/or config file.

struct Scenario {
  std::string name = "custom";
  SourceModel source = SourceModel::paper_device();
  InterferometerConfig interferometer = InterferometerConfig::symmetric(2.1e-9);
  GridSpec grid = GridSpec::uniform(-6e-9, 6e-9, 2401);
  std::optional<FeatureKind> expected_side;
};

inline Scenario load_scenario(const std::optional<std::string>& preset, const ConfigFile* config) {
  Scenario sc;
  if (preset) {
    const auto& p = find_preset(*preset);
    sc = {p.name, p.source, p.interferometer, p.grid, p.expected_side};
  }
  if (config == nullptr) return sc;
  const auto& c = *config;
  sc.source = SourceModel(c.number("source", "g2_zero", sc.source.g2_zero()),
                          c.time("source", "tau_corr", sc.source.correlation_time()),
                          c.time("source", "tau_coh", sc.source.coherence_time()));
  auto& ifm = sc.interferometer;
  ifm.r_a = c.number("interferometer", "r_a", ifm.r_a);
  ifm.t_a = c.number("interferometer", "t_a", c.has("interferometer", "r_a") ? 1.0 - ifm.r_a : ifm.t_a);
  ifm.r_b = c.number("interferometer", "r_b", ifm.r_b);
  ifm.t_b = c.number("interferometer", "t_b", c.has("interferometer", "r_b") ? 1.0 - ifm.r_b : ifm.t_b);
  ifm.delta_t = c.time("interferometer", "delta_t", ifm.delta_t);
  if (c.has("interferometer", "freq_shift") && c.has("interferometer", "omega"))
    throw ConfigError("interferometer: give either freq_shift or omega, not both");
  if (c.has("interferometer", "freq_shift"))
    ifm.omega = InterferometerConfig::omega_from_hz(c.frequency("interferometer", "freq_shift", 0.0));
  ifm.omega = c.number("interferometer", "omega", ifm.omega);
  ifm.v0 = c.number("interferometer", "v0", ifm.v0);
  if (c.has("grid", "start") || c.has("grid", "stop") || c.has("grid", "points")) {
    const double start = c.time("grid", "start", -6e-9);
    const double stop = c.time("grid", "stop", 6e-9);
    const auto points = c.integer("grid", "points", 2401);
    if (points == 0 || !(stop >= start)) throw ConfigError("grid: need stop >= start and points > 0");
    sc.grid = GridSpec::uniform(start, stop, points);
  }
  if (c.has("grid", "refine_halfwidth")) {
    const double hw = c.time("grid", "refine_halfwidth", 0.0);
    const auto pts = c.integer("grid", "refine_points", 401);
    sc.grid.refine({0.0, ifm.delta_t, -ifm.delta_t}, hw, pts);
  }
  if (c.has("source", "name")) sc.name = c.text("source", "name", sc.name);
  ifm.validate();
  return sc;
}

inline void report_warnings(const Scenario& sc, std::ostream& log) {
  for (const auto& w : sc.source.warnings()) log << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// analytic

enum class AnalyticMode { Cross, Parallel, Both, Visibility };

inline AnalyticMode parse_analytic_mode(const std::string& s) {
  if (s == "cross") return AnalyticMode::Cross;
  if (s == "parallel") return AnalyticMode::Parallel;
  if (s == "both") return AnalyticMode::Both;
  if (s == "visibility") return AnalyticMode::Visibility;
  throw UsageError("unknown mode '" + s + "' (cross, parallel, both, visibility)");
}

struct AnalyticOptions {
  AnalyticMode mode = AnalyticMode::Both;
  OutputFormat format = OutputFormat::Csv;
  std::optional<double> v0;
};

inline std::string analytic_output(const Scenario& sc, const AnalyticOptions& opt) {
  auto cfg = sc.interferometer;
  if (opt.v0) cfg.v0 = *opt.v0;
  cfg.validate();
  const auto grid = sc.grid.build();

  std::vector<std::pair<std::string, std::vector<double>>> columns;
  auto series = [&](PolarizationMode m) { return sample_series(cfg, sc.source, m, grid).values; };
  switch (opt.mode) {
    case AnalyticMode::Cross: columns.emplace_back("g2", series(PolarizationMode::Cross)); break;
    case AnalyticMode::Parallel: columns.emplace_back("g2", series(PolarizationMode::Parallel)); break;
    case AnalyticMode::Both:
      columns.emplace_back("g2_cross", series(PolarizationMode::Cross));
      columns.emplace_back("g2_parallel", series(PolarizationMode::Parallel));
      break;
    case AnalyticMode::Visibility: {
      std::vector<double> v;
      v.reserve(grid.size());
      for (double tau : grid) v.push_back(visibility(cfg, sc.source, tau));
      columns.emplace_back("visibility", std::move(v));
      break;
    }
  }

  if (opt.format == OutputFormat::Json) {
    nlohmann::json j;
    j["scenario"] = sc.name;
    j["delta_t_s"] = json_number(cfg.delta_t);
    j["omega_rad_s"] = json_number(cfg.omega);
    j["v0"] = json_number(cfg.v0);
    j["g2_zero"] = json_number(sc.source.g2_zero());
    j["tau_corr_s"] = json_number(sc.source.correlation_time());
    j["tau_coh_s"] = json_number(sc.source.coherence_time());
    auto& taus = j["tau_s"] = nlohmann::json::array();
    for (double t : grid) taus.push_back(json_number(t));
    for (const auto& [name, values] : columns) {
      auto& arr = j[name] = nlohmann::json::array();
      for (double v : values) arr.push_back(json_number(v));
    }
    return j.dump(2) + "\n";
  }
  std::string out = "tau_s";
  for (const auto& [name, values] : columns) out += "," + name;
  out += '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += format_float(grid[i]);
    for (const auto& [name, values] : columns) out += "," + format_float(values[i]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyRow {
  double delta_t;
  double shift_hz;
  double cos_omega_dt;
  SideFeature plus;
  SideFeature minus;
  double side_threshold_plus;   // omega = 0 reference, NaN when undefined
  double side_threshold_minus;
  double contrast_threshold_plus;
  double contrast_threshold_minus;
  double tau_coh_for_boundary;  // coherence time placing the side_threshold boundary at delta_t
  std::optional<FeatureKind> expected;
};

inline std::vector<ClassifyRow> classify_table(const Scenario& sc, std::vector<double> delta_ts,
                                               std::vector<double> shifts_hz, double epsilon) {
  if (delta_ts.empty()) delta_ts.push_back(sc.interferometer.delta_t);
  if (shifts_hz.empty()) shifts_hz.push_back(sc.interferometer.omega / (2.0 * std::numbers::pi));
  const bool single = delta_ts.size() == 1 && shifts_hz.size() == 1;
  std::vector<ClassifyRow> rows;
  for (double dt : delta_ts) {
    for (double hz : shifts_hz) {
      auto cfg = sc.interferometer;
      cfg.delta_t = dt;
      cfg.omega = InterferometerConfig::omega_from_hz(hz);
      cfg.validate();
      auto ref = cfg;
      ref.omega = 0.0;
      auto threshold = [&](SideLocation loc) {
        try {
          return side_threshold(ref, sc.source, loc);
        } catch (const Error&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      };
      const double g0 = sc.source.g2_zero();
      const double log_arg = cfg.r_b * cfg.v0 / (cfg.t_b * g0);
      const double tau_for = (g0 > 0.0 && log_arg > 1.0) ? 2.0 * dt / std::log(log_arg)
                                                         : std::numeric_limits<double>::quiet_NaN();
      rows.push_back({dt, hz, std::cos(cfg.omega * dt),
                      classify_side_feature(cfg, sc.source, SideLocation::Plus, epsilon),
                      classify_side_feature(cfg, sc.source, SideLocation::Minus, epsilon),
                      threshold(SideLocation::Plus), threshold(SideLocation::Minus),
                      contrast_threshold(ref, sc.source, SideLocation::Plus),
                      contrast_threshold(ref, sc.source, SideLocation::Minus), tau_for,
                      single ? sc.expected_side : std::nullopt});
    }
  }
  return rows;
}

inline std::string classify_output(const std::vector<ClassifyRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j;
      j["delta_t_s"] = json_number(r.delta_t);
      j["shift_hz"] = json_number(r.shift_hz);
      j["cos_omega_dt"] = json_number(r.cos_omega_dt);
      j["plus_kind"] = to_string(r.plus.kind);
      j["plus_contrast"] = json_number(r.plus.contrast);
      j["minus_kind"] = to_string(r.minus.kind);
      j["minus_contrast"] = json_number(r.minus.contrast);
      j["side_threshold_plus_s"] = json_number(r.side_threshold_plus);
      j["side_threshold_minus_s"] = json_number(r.side_threshold_minus);
      j["contrast_threshold_plus_s"] = json_number(r.contrast_threshold_plus);
      j["contrast_threshold_minus_s"] = json_number(r.contrast_threshold_minus);
      j["tau_coh_for_boundary_s"] = json_number(r.tau_coh_for_boundary);
      j["expected"] = r.expected ? nlohmann::json(to_string(*r.expected)) : nlohmann::json(nullptr);
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }
  std::string out =
      "delta_t_s,shift_hz,cos_omega_dt,plus_kind,plus_contrast,minus_kind,minus_contrast,"
      "side_threshold_plus_s,side_threshold_minus_s,contrast_threshold_plus_s,contrast_threshold_minus_s,"
      "tau_coh_for_boundary_s,expected\n";
  for (const auto& r : rows) {
    out += format_float(r.delta_t) + "," + format_float(r.shift_hz) + "," + format_float(r.cos_omega_dt) + "," +
           to_string(r.plus.kind) + "," + format_float(r.plus.contrast) + "," + to_string(r.minus.kind) + "," +
           format_float(r.minus.contrast) + "," + format_float(r.side_threshold_plus) + "," +
           format_float(r.side_threshold_minus) + "," + format_float(r.contrast_threshold_plus) + "," +
           format_float(r.contrast_threshold_minus) + "," + format_float(r.tau_coh_for_boundary) + "," +
           (r.expected ? to_string(*r.expected) : "") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

enum class TargetKind { Flat, Cross, Parallel };

inline TargetKind parse_target(const std::string& s) {
  if (s == "flat") return TargetKind::Flat;
  if (s == "cross") return TargetKind::Cross;
  if (s == "parallel") return TargetKind::Parallel;
  throw ConfigError("unknown target '" + s + "' (flat, cross, parallel)");
}

inline PairCorrelation make_target(const Scenario& sc, TargetKind kind) {
  switch (kind) {
    case TargetKind::Flat: return [](double) { return 1.0; };
    case TargetKind::Cross:
      return [cfg = sc.interferometer, src = sc.source](double tau) { return g2_cross(cfg, src, tau); };
    case TargetKind::Parallel:
      return [cfg = sc.interferometer, src = sc.source](double tau) { return g2_parallel(cfg, src, tau); };
  }
  return {};
}

struct SimulateSettings {
  std::string model = "pair";  // pair | renewal | poisson
  TargetKind target = TargetKind::Parallel;
  SimConfig sim;
  double renewal_rate = 1e5;
};

inline SimulateSettings load_simulate_settings(const ConfigFile* config, std::uint64_t seed) {
  SimulateSettings s;
  s.sim.seed = seed;
  s.sim.rate1 = 1e4;
  s.sim.rate2 = 1e4;
  s.sim.window = 4e-6;
  s.sim.duration = 100.0;
  if (config == nullptr) return s;
  const auto& c = *config;
  s.model = c.text("simulation", "model", s.model);
  s.target = parse_target(c.text("simulation", "target", "parallel"));
  s.sim.rate1 = c.frequency("simulation", "rate1", s.sim.rate1);
  s.sim.rate2 = c.frequency("simulation", "rate2", s.sim.rate2);
  s.sim.duration = c.time("simulation", "duration", s.sim.duration);
  s.sim.window = c.time("simulation", "window", s.sim.window);
  s.sim.background_rate = c.frequency("simulation", "background_rate", 0.0);
  s.renewal_rate = c.frequency("simulation", "rate", s.renewal_rate);
  if (s.model != "pair" && s.model != "renewal" && s.model != "poisson")
    throw ConfigError("simulation.model must be pair, renewal or poisson");
  return s;
}

inline std::pair<TagStream, TagStream> run_simulation(const Scenario& sc, SimulateSettings s, std::ostream& log) {
  if (s.model == "renewal") {
    const auto stream = generate_antibunched_renewal(s.renewal_rate, sc.source.g2_zero(), sc.source.correlation_time(),
                                                     s.sim.duration, s.sim.seed);
    return split_stream(stream, 0.5, s.sim.seed);
  }
  if (s.model == "poisson") {
    return {generate_poisson(s.sim.rate1, s.sim.duration, s.sim.seed, 1),
            generate_poisson(s.sim.rate2, s.sim.duration, s.sim.seed + 0x9E3779B97F4A7C15ull, 2)};
  }
  s.sim.target = make_target(sc, s.target);
  for (const auto& w : s.sim.validate()) log << "warning: " << w << '\n';
  return generate_pair_correlated(s.sim);
}

// ---------------------------------------------------------------------------
// correlate

inline CorrelatorConfig load_correlator_config(const ConfigFile* config) {
  CorrelatorConfig cc;
  cc.bin_width = 1000;
  cc.max_lag = 100000;
  if (config == nullptr) return cc;
  const auto& c = *config;
  cc.bin_width = static_cast<Picoseconds>(std::llround(c.time("correlator", "bin_width", 1e-9) * 1e12));
  cc.max_lag = static_cast<Picoseconds>(std::llround(c.time("correlator", "max_lag", 1e-7) * 1e12));
  const auto norm = c.text("correlator", "normalization", "rate");
  if (norm == "raw") cc.normalization = Normalization::Raw;
  else if (norm == "rate") cc.normalization = Normalization::RateNormalized;
  else throw ConfigError("correlator.normalization must be raw or rate");
  return cc;
}

// Binary when the file starts with the tag magic, text otherwise.
inline TagStream load_tag_file(const std::filesystem::path& path, std::optional<int> channel = std::nullopt) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= 4 && bytes.compare(0, 4, std::string(kTagMagic.begin(), kTagMagic.end())) == 0)
    return decode_tags(bytes);
  auto streams = decode_text_tags(bytes);
  if (streams.empty()) return TagStream(static_cast<std::uint8_t>(channel.value_or(0)), {}, 0);
  if (!channel) {
    if (streams.size() != 1) throw UsageError(path.string() + " holds several channels; pick one");
    return streams.front();
  }
  for (auto& s : streams)
    if (s.channel() == *channel) return s;
  throw UsageError(path.string() + " has no channel " + std::to_string(*channel));
}

inline TagStream with_duration(const TagStream& s, Picoseconds duration) {
  return TagStream(s.channel(), {s.tags().begin(), s.tags().end()}, duration);
}

inline std::string histogram_output(const CorrelationHistogram& h, OutputFormat format) {
  if (format == OutputFormat::Csv) return histogram_csv(h);
  nlohmann::json j;
  j["rate_a_hz"] = json_number(h.meta.rate_a);
  j["rate_b_hz"] = json_number(h.meta.rate_b);
  j["duration_ps"] = h.meta.duration;
  j["bin_width_ps"] = h.meta.config.bin_width;
  j["max_lag_ps"] = h.meta.config.max_lag;
  j["normalization"] = h.meta.config.normalization == Normalization::Raw ? "raw" : "rate";
  auto& tau = j["tau_s"] = nlohmann::json::array();
  auto& g2 = j["g2"] = nlohmann::json::array();
  auto& sigma = j["sigma"] = nlohmann::json::array();
  j["counts"] = h.counts;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    tau.push_back(json_number(h.bin_centers[k]));
    g2.push_back(json_number(h.g2[k]));
    sigma.push_back(json_number(h.sigma[k]));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// verify

struct OracleSweepResult {
  std::size_t points = 0;
  double max_relative_error = 0.0;
  double max_weight_sum_error = 0.0;
};

// Relative deviation with a 1e-6 floor on the denominator: both routes sum
// O(1) terms, so near-cancelling values are compared in absolute terms.
inline double relative_deviation(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-6);
}

// Randomized interferometer/source/lag draws, both polarization modes.
inline OracleSweepResult oracle_sweep(std::size_t points, std::uint64_t seed,
                                      pathamp::ExchangeRule rule = pathamp::ExchangeRule::DifferentArmsOnly) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto log_uniform = [&](double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); };
  OracleSweepResult result;
  for (std::size_t i = 0; i < points; ++i) {
    InterferometerConfig cfg;
    cfg.r_a = uniform(0.02, 0.98);
    cfg.t_a = 1.0 - cfg.r_a;
    cfg.r_b = uniform(0.02, 0.98);
    cfg.t_b = 1.0 - cfg.r_b;
    cfg.v0 = unit(rng);
    const double tau_corr = log_uniform(1e-12, 1e-8);
    const double tau_coh = tau_corr * log_uniform(10.0, 1e6);
    cfg.delta_t = tau_corr * log_uniform(0.1, 1e5);
    cfg.omega = unit(rng) < 0.25 ? 0.0 : uniform(-10.0, 10.0) / cfg.delta_t;
    const SourceModel src(uniform(0.0, 2.0), tau_corr, tau_coh);
    // Lags clustered around the features at 0 and +-dt as well as spread out.
    const double center = std::array<double, 3>{0.0, cfg.delta_t, -cfg.delta_t}[rng() % 3];
    const double tau = unit(rng) < 0.5 ? center + uniform(-5.0, 5.0) * tau_corr
                                       : uniform(-3.0, 3.0) * (cfg.delta_t + tau_coh * unit(rng));
    for (auto mode : {PolarizationMode::Cross, PolarizationMode::Parallel}) {
      const double analytic = g2_correlation(cfg, src, mode, tau);
      const double oracle = pathamp::oracle_g2(cfg, src, mode, tau, rule);
      result.max_relative_error = std::max(result.max_relative_error, relative_deviation(oracle, analytic));
    }
    result.max_weight_sum_error =
        std::max(result.max_weight_sum_error, std::abs(pathamp::pairing_weight_sum(cfg) - normalization(cfg)));
    ++result.points;
  }
  return result;
}

inline constexpr double kOracleTolerance = 1e-9;

struct MonteCarloCheck {
  HistogramComparison comparison;
  std::size_t tags_a = 0;
  std::size_t tags_b = 0;
  bool passed = false;
};

inline constexpr double kWithinFraction = 0.99;

// Simulate -> correlate -> compare every bin with the bin-averaged target.
inline MonteCarloCheck monte_carlo_check(const Scenario& sc, const SimulateSettings& settings,
                                         const CorrelatorConfig& cc, std::ostream& log) {
  auto s = settings;
  s.model = "pair";
  const auto [a, b] = run_simulation(sc, s, log);
  const auto h = correlate(a, b, cc);
  MonteCarloCheck check;
  check.tags_a = a.size();
  check.tags_b = b.size();
  check.comparison = compare_histogram(h, make_target(sc, settings.target));
  check.passed = check.comparison.bins > 0 && check.comparison.fraction_within() >= kWithinFraction;
  return check;
}

// ---------------------------------------------------------------------------
// cqed

inline CqedParams load_cqed(const ConfigFile* config) {
  // Device values, ordinary frequencies.
  CqedParams p{4.7e9, 36.8e9, 0.35e9, 0.0};
  if (config == nullptr) return p;
  p.g = config->frequency("cqed", "g", p.g);
  p.kappa = config->frequency("cqed", "kappa", p.kappa);
  p.gamma_par = config->frequency("cqed", "gamma_par", p.gamma_par);
  p.gamma_star = config->frequency("cqed", "gamma_star", p.gamma_star);
  return p;
}

inline std::string cqed_output(const CqedParams& p, OutputFormat format) {
  const double c = cooperativity(p);
  const double n0 = critical_photon_number(p);
  if (format == OutputFormat::Json) {
    nlohmann::json j;
    j["cooperativity"] = json_number(c);
    j["critical_photon_number"] = json_number(n0);
    j["gamma_perp_hz"] = json_number(p.gamma_perp());
    return j.dump(2) + "\n";
  }
  return "quantity,value\ncooperativity," + format_float(c) + "\ncritical_photon_number," + format_float(n0) +
         "\ngamma_perp_hz," + format_float(p.gamma_perp()) + "\n";
}

}  // namespace tpi::cli
