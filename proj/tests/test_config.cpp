#include <gtest/gtest.h>

#include "tpi/commands.hpp"
#include "tpi/config.hpp"

using namespace tpi;

TEST(Units, Times) {
  EXPECT_DOUBLE_EQ(parse_time("2.1 ns"), 2.1e-9);
  EXPECT_DOUBLE_EQ(parse_time("115ps"), 115e-12);
  EXPECT_DOUBLE_EQ(parse_time("10 us"), 10e-6);
  EXPECT_DOUBLE_EQ(parse_time("3ms"), 3e-3);
  EXPECT_DOUBLE_EQ(parse_time("2 s"), 2.0);
  EXPECT_DOUBLE_EQ(parse_time("0.5"), 0.5);
  EXPECT_DOUBLE_EQ(parse_time("1e-9"), 1e-9);
  EXPECT_THROW(parse_time("5 furlongs"), ConfigError);
  EXPECT_THROW(parse_time("ns"), ConfigError);
}

TEST(Units, FibreLength) {
  EXPECT_DOUBLE_EQ(parse_time("1 km"), 5e-6);
  EXPECT_DOUBLE_EQ(parse_time("8km"), 40e-6);
  EXPECT_NEAR(parse_time("0.12 km"), 0.6e-6, 1e-18);
}

TEST(Units, Frequencies) {
  EXPECT_DOUBLE_EQ(parse_frequency("48 kHz"), 48e3);
  EXPECT_DOUBLE_EQ(parse_frequency("4.7 GHz"), 4.7e9);
  EXPECT_DOUBLE_EQ(parse_frequency("2MHz"), 2e6);
  EXPECT_DOUBLE_EQ(parse_frequency("17 Hz"), 17.0);
  EXPECT_THROW(parse_frequency("3 ns"), ConfigError);
}

TEST(Units, Lists) {
  EXPECT_EQ(split_list("0.12km, 1km,2km ,8km"), (std::vector<std::string>{"0.12km", "1km", "2km", "8km"}));
  EXPECT_TRUE(split_list("").empty());
}

TEST(ConfigFile, SectionsAndComments) {
  const auto c = ConfigFile::parse(
      "# device\n"
      "[source]\n"
      "g2_zero = 0.03\n"
      "tau_corr = 115 ps   # inline\n"
      "; other comment style\n"
      "\n"
      "[Interferometer]\n"
      "Delta_T = 1 km\n");
  EXPECT_DOUBLE_EQ(c.number("source", "g2_zero", 0), 0.03);
  EXPECT_DOUBLE_EQ(c.time("source", "tau_corr", 0), 115e-12);
  EXPECT_DOUBLE_EQ(c.time("interferometer", "delta_t", 0), 5e-6);
  EXPECT_DOUBLE_EQ(c.time("source", "tau_coh", 7.0), 7.0);
  EXPECT_TRUE(c.unused_keys().empty());
}

TEST(ConfigFile, Errors) {
  EXPECT_THROW(ConfigFile::parse("[a\nx=1\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[a]\nx 1\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[a]\nx=1\nx=2\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[a]\n=2\n"), ConfigError);
  const auto c = ConfigFile::parse("[a]\nx = 1 GHz\nn = -3\n");
  EXPECT_THROW(c.number("a", "x", 0), ConfigError);
  EXPECT_THROW(c.integer("a", "n", 0), ConfigError);
  EXPECT_THROW(ConfigFile::load("/nonexistent/file.ini"), IoError);
}

TEST(ConfigFile, ReportsUnusedKeys) {
  const auto c = ConfigFile::parse("[a]\nx = 1\ny = 2\n");
  c.number("a", "x", 0);
  EXPECT_EQ(c.unused_keys(), std::vector<std::string>{"a.y"});
}

TEST(Scenario, PresetWithOverrides) {
  const auto c = ConfigFile::parse("[source]\ntau_coh = 100 us\n[interferometer]\nfreq_shift = 194.7 kHz\n");
  const auto sc = cli::load_scenario(std::string("fig3b"), &c);
  EXPECT_DOUBLE_EQ(sc.source.coherence_time(), 100e-6);
  EXPECT_DOUBLE_EQ(sc.source.g2_zero(), 0.03);
  EXPECT_DOUBLE_EQ(sc.interferometer.delta_t, 5e-6);
  EXPECT_NEAR(sc.interferometer.omega, 2 * std::numbers::pi * 194.7e3, 1e-6);
}

TEST(Scenario, SplitterPartnerFollows) {
  const auto c = ConfigFile::parse("[interferometer]\nr_b = 0.55\n");
  const auto sc = cli::load_scenario(std::nullopt, &c);
  EXPECT_DOUBLE_EQ(sc.interferometer.t_b, 0.45);
  const auto bad = ConfigFile::parse("[interferometer]\nr_b = 0.55\nt_b = 0.5\n");
  EXPECT_THROW(cli::load_scenario(std::nullopt, &bad), ValidationError);
  const auto both = ConfigFile::parse("[interferometer]\nfreq_shift = 1 kHz\nomega = 3\n");
  EXPECT_THROW(cli::load_scenario(std::nullopt, &both), ConfigError);
}

TEST(Scenario, UnknownPreset) { EXPECT_THROW(cli::load_scenario(std::string("fig9"), nullptr), UsageError); }

TEST(Presets, NamesAreUniqueAndDocumented) {
  const auto& all = presets();
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_FALSE(all[i].figure.empty());
    EXPECT_NO_THROW(all[i].interferometer.validate());
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i].name, all[j].name);
  }
}

TEST(Presets, FigurePresetsUseDeviceDefaults) {
  for (const auto& p : presets()) {
    if (p.figure.rfind("Fig", 0) != 0) continue;
    EXPECT_DOUBLE_EQ(p.source.coherence_time(), 10e-6) << p.name;
    if (p.name != "fig4f") EXPECT_DOUBLE_EQ(p.source.g2_zero(), 0.03) << p.name;
  }
  EXPECT_DOUBLE_EQ(find_preset("fig3d").interferometer.delta_t, 40e-6);
}

TEST(Presets, GridIsSortedAndCoversFeatures) {
  const auto g = find_preset("fig3b").grid.build();
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(std::adjacent_find(g.begin(), g.end()), g.end());
  EXPECT_NE(std::find(g.begin(), g.end(), 5e-6), g.end());
  EXPECT_NE(std::find(g.begin(), g.end(), 0.0), g.end());
}
