// tpi: analytic curves, side-feature tables, synthetic tag streams,
// correlation histograms and self-checks for the two-photon interference model.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tpi/commands.hpp"

namespace {

using namespace tpi;
using namespace tpi::cli;

struct Globals {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

std::optional<ConfigFile> load_config(const Globals& g) {
  if (g.config_path.empty()) return std::nullopt;
  return ConfigFile::load(g.config_path);
}

std::optional<std::string> preset_name(const Globals& g) {
  if (g.preset.empty()) return std::nullopt;
  return g.preset;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  tpi::detail::write_file(g.out, text);
}

std::vector<double> parse_times(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items)
    for (const auto& piece : split_list(s)) out.push_back(parse_time(piece));
  return out;
}

std::vector<double> parse_frequencies(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items)
    for (const auto& piece : split_list(s)) out.push_back(parse_frequency(piece));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-photon interference model, simulator and correlator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "configuration file");
  app.add_option("--preset", g.preset, "named experiment preset");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* presets_cmd = app.add_subcommand("presets", "list built-in presets");

  auto* analytic = app.add_subcommand("analytic", "closed-form correlation curves");
  std::string analytic_mode = "both";
  std::optional<double> v0_override;
  analytic->add_option("--mode", analytic_mode, "cross, parallel, both or visibility");
  analytic->add_option("--v0", v0_override, "override the mode overlap V0");

  auto* classify = app.add_subcommand("classify", "peak/dip character of the side features");
  std::vector<std::string> dt_list, shift_list;
  double epsilon = kDefaultFlatTolerance;
  classify->add_option("--delta-t", dt_list, "delays (unit suffixes or km), comma separated");
  classify->add_option("--shift", shift_list, "frequency shifts Omega/2pi, comma separated");
  classify->add_option("--epsilon", epsilon, "flat tolerance on the local contrast");

  auto* simulate = app.add_subcommand("simulate", "write synthetic tag streams");
  std::string out_a, out_b;
  bool text_output = false;
  simulate->add_option("--out-a", out_a, "stream A tag file")->required();
  simulate->add_option("--out-b", out_b, "stream B tag file")->required();
  simulate->add_flag("--text", text_output, "text tag files instead of binary");

  auto* correlate_cmd = app.add_subcommand("correlate", "cross-correlation histogram of two tag files");
  std::string file_a, file_b;
  std::optional<int> channel_a, channel_b;
  std::optional<std::string> bin_width, max_lag, duration, normalization;
  std::optional<double> segment;
  correlate_cmd->add_option("file_a", file_a, "start-channel tags")->required();
  correlate_cmd->add_option("file_b", file_b, "stop-channel tags")->required();
  correlate_cmd->add_option("--channel-a", channel_a, "channel to take from a text file");
  correlate_cmd->add_option("--channel-b", channel_b, "channel to take from a text file");
  correlate_cmd->add_option("--bin-width", bin_width, "bin width (e.g. 1ns)");
  correlate_cmd->add_option("--max-lag", max_lag, "histogram half range (e.g. 100ns)");
  correlate_cmd->add_option("--normalization", normalization, "raw or rate");
  correlate_cmd->add_option("--duration", duration, "acquisition duration (default: last tag)");
  correlate_cmd->add_option("--segment", segment, "batched mode: segment length in seconds");

  auto* verify = app.add_subcommand("verify", "self-checks with pass/fail exit status");
  std::string scope = "oracle";
  std::size_t points = 10000;
  std::string oracle_rule = "exchange";
  verify->add_option("--scope", scope, "oracle or montecarlo")->check(CLI::IsMember({"oracle", "montecarlo"}));
  verify->add_option("--points", points, "oracle sweep size");
  verify->add_option("--oracle-rule", oracle_rule, "exchange or all-pairs (negative control)")
      ->check(CLI::IsMember({"exchange", "all-pairs"}));

  auto* cqed = app.add_subcommand("cqed", "cooperativity and critical photon number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  return guarded(std::cerr, [&]() -> int {
    const auto format = parse_format(g.format);
    const auto config = load_config(g);
    const ConfigFile* cfg = config ? &*config : nullptr;

    if (presets_cmd->parsed()) {
      std::string text = "name,figure,description\n";
      for (const auto& p : presets()) text += p.name + "," + p.figure + ",\"" + p.description + "\"\n";
      emit(g, text);
      return kOk;
    }

    if (cqed->parsed()) {
      emit(g, cqed_output(load_cqed(cfg), format));
      return kOk;
    }

    if (analytic->parsed()) {
      const auto sc = load_scenario(preset_name(g), cfg);
      report_warnings(sc, std::cerr);
      AnalyticOptions opt;
      opt.mode = parse_analytic_mode(analytic_mode);
      opt.format = format;
      opt.v0 = v0_override;
      emit(g, analytic_output(sc, opt));
      return kOk;
    }

    if (classify->parsed()) {
      const auto sc = load_scenario(preset_name(g), cfg);
      report_warnings(sc, std::cerr);
      const auto rows = classify_table(sc, parse_times(dt_list), parse_frequencies(shift_list), epsilon);
      emit(g, classify_output(rows, format));
      return kOk;
    }

    if (simulate->parsed()) {
      const auto sc = load_scenario(preset_name(g), cfg);
      const auto settings = load_simulate_settings(cfg, g.seed);
      const auto [a, b] = run_simulation(sc, settings, std::cerr);
      if (text_output) {
        tpi::write_text_tags(std::span<const TagStream>(&a, 1), out_a);
        tpi::write_text_tags(std::span<const TagStream>(&b, 1), out_b);
      } else {
        tpi::write_tags(a, out_a);
        tpi::write_tags(b, out_b);
      }
      std::cerr << "wrote " << a.size() << " + " << b.size() << " tags\n";
      return kOk;
    }

    if (correlate_cmd->parsed()) {
      auto cc = load_correlator_config(cfg);
      if (bin_width) cc.bin_width = static_cast<Picoseconds>(std::llround(parse_time(*bin_width) * 1e12));
      if (max_lag) cc.max_lag = static_cast<Picoseconds>(std::llround(parse_time(*max_lag) * 1e12));
      if (normalization) {
        if (*normalization == "raw") cc.normalization = Normalization::Raw;
        else if (*normalization == "rate") cc.normalization = Normalization::RateNormalized;
        else throw UsageError("--normalization must be raw or rate");
      }
      auto a = load_tag_file(file_a, channel_a);
      auto b = load_tag_file(file_b, channel_b);
      if (duration) {
        const auto d = static_cast<Picoseconds>(std::llround(parse_time(*duration) * 1e12));
        a = with_duration(a, d);
        b = with_duration(b, d);
      }
      const auto h = segment ? correlate_batched(a, b, cc, *segment) : correlate(a, b, cc);
      emit(g, histogram_output(h, format));
      return kOk;
    }

    if (verify->parsed()) {
      if (scope == "oracle") {
        const auto rule = oracle_rule == "exchange" ? pathamp::ExchangeRule::DifferentArmsOnly
                                                    : pathamp::ExchangeRule::AllPairs;
        const auto r = oracle_sweep(points, g.seed, rule);
        const bool ok = r.max_relative_error < kOracleTolerance;
        std::string text = "check,value,tolerance,status\n";
        text += "oracle_max_relative_error," + format_float(r.max_relative_error) + "," +
                format_float(kOracleTolerance) + "," + (ok ? "pass" : "FAIL") + "\n";
        text += "points," + std::to_string(r.points) + ",,\n";
        emit(g, text);
        return ok ? kOk : kTolerance;
      }
      Scenario sc = load_scenario(preset_name(g) ? preset_name(g) : std::optional<std::string>("desk"), cfg);
      auto settings = load_simulate_settings(cfg, g.seed);
      if (!cfg || !cfg->has("simulation", "rate1")) settings.sim.rate1 = settings.sim.rate2 = 1.6e4;
      if (!cfg || !cfg->has("simulation", "window")) settings.sim.window = 3e-6;
      if (!cfg || !cfg->has("simulation", "duration")) settings.sim.duration = 100.0;
      auto cc = load_correlator_config(cfg);
      if (!cfg || !cfg->has("correlator", "bin_width")) cc.bin_width = 10000;
      if (!cfg || !cfg->has("correlator", "max_lag")) cc.max_lag = 2000000;
      const auto check = monte_carlo_check(sc, settings, cc, std::cerr);
      std::string text = "check,value,tolerance,status\n";
      text += "fraction_within_3sigma," + format_float(check.comparison.fraction_within()) + "," +
              format_float(kWithinFraction) + "," + (check.passed ? "pass" : "FAIL") + "\n";
      text += "reduced_chi2," + format_float(check.comparison.reduced_chi2()) + ",,\n";
      text += "worst_pull," + format_float(check.comparison.worst_pull) + ",,\n";
      text += "bins," + std::to_string(check.comparison.bins) + ",,\n";
      emit(g, text);
      return check.passed ? kOk : kTolerance;
    }
    throw UsageError("no command given");
  });
}
