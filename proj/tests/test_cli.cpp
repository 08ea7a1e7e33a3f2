#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "tpi/tag_io.hpp"

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TPI_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int raw = ::pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string config(const std::string& name) { return std::string(TPI_CONFIG_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tpi_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value in column `col` on the row whose first field equals `key`.
std::string field(const std::string& csv, const std::string& key, int col) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    if (cell != key) continue;
    for (int i = 0; i < col; ++i) std::getline(row, cell, ',');
    return cell;
  }
  return {};
}

}  // namespace

TEST(Cli, AnalyticCentralValues) {
  const auto r = run("analytic --preset fig2e");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "tau_s,g2_cross,g2_parallel");
  EXPECT_NEAR(std::stod(field(r.out, "0", 1)), 0.515, 1e-6);
  EXPECT_NEAR(std::stod(field(r.out, "0", 2)), 0.015, 1e-6);
}

TEST(Cli, AnalyticSingleMode) {
  const auto r = run("analytic --preset fig2e --mode cross");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "tau_s,g2");
}

TEST(Cli, VisibilityCurve) {
  const auto r = run("analytic --preset fig2f --mode visibility");
  ASSERT_EQ(r.status, 0);
  EXPECT_NEAR(std::stod(field(r.out, "0", 1)), 0.943, 1e-3);
  // background well away from the features, V0 / 2
  EXPECT_NEAR(std::stod(field(r.out, "6e-09", 1)), 0.5, 0.02);
  EXPECT_NEAR(std::stod(field(r.out, "6e-09", 1)), 0.971 / 2, 1e-3);
}

TEST(Cli, ZeroOverlapMakesCurvesEqual) {
  const auto r = run("analytic --preset fig2e --v0 0");
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    EXPECT_EQ(line.substr(a + 1, b - a - 1), line.substr(b + 1));
    ++rows;
  }
  EXPECT_GT(rows, 1000);
}

TEST(Cli, JsonOutput) {
  const auto r = run("analytic --preset fig2e --format json");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["tau_s"].size(), j["g2_cross"].size());
  EXPECT_EQ(j["scenario"], "fig2e");
}

TEST(Cli, WritesToFile) {
  const auto path = scratch("curve.csv");
  ASSERT_EQ(run("analytic --preset fig2e --out " + path.string()).status, 0);
  EXPECT_EQ(slurp(path), run("analytic --preset fig2e").out);
}

TEST(Cli, ClassifyQuadratureShiftDips) {
  // 50 kHz at 5 us: cos(Omega dt) = cos(pi / 2)
  const auto r = run("classify --preset fig3b --shift 50kHz");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find(",dip,"), std::string::npos);
  EXPECT_EQ(r.out.find(",peak,"), std::string::npos);
}

TEST(Cli, ClassifyFibreListWithLongerCoherence) {
  const auto r = run("classify --config " + config("long_coherence.ini") +
                     " --preset fig3a --delta-t 0.12km,1km,2km,8km");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(field(r.out, "6e-07", 3), "peak");
  EXPECT_EQ(field(r.out, "5e-06", 3), "peak");
  EXPECT_EQ(field(r.out, "1e-05", 3), "peak");
  EXPECT_EQ(field(r.out, "4e-05", 3), "dip");
}

TEST(Cli, ClassifyReportsBoundaryCoherenceTime) {
  const auto r = run("classify --preset fig3d");
  ASSERT_EQ(r.status, 0);
  // 2 dt / ln(1 / 0.03) for dt = 40 us
  EXPECT_NEAR(std::stod(field(r.out, "4e-05", 11)), 2 * 40e-6 / std::log(1 / 0.03), 1e-12);
  EXPECT_EQ(field(r.out, "4e-05", 12), "dip");
}

TEST(Cli, Cqed) {
  const auto r = run("cqed --config " + config("cqed.ini"));
  ASSERT_EQ(r.status, 0);
  EXPECT_NEAR(std::stod(field(r.out, "cooperativity", 1)), 6.9, 0.138);
  EXPECT_NEAR(std::stod(field(r.out, "critical_photon_number", 1)), 6.9e-4, 1.38e-5);
}

TEST(Cli, SimulateIsByteIdentical) {
  const auto a1 = scratch("a1.ttg"), b1 = scratch("b1.ttg"), a2 = scratch("a2.ttg"), b2 = scratch("b2.ttg");
  const std::string base = "simulate --config " + config("flat_mc.ini") + " --seed 9 ";
  ASSERT_EQ(run(base + "--out-a " + a1.string() + " --out-b " + b1.string()).status, 0);
  ASSERT_EQ(run(base + "--out-a " + a2.string() + " --out-b " + b2.string()).status, 0);
  EXPECT_EQ(slurp(a1), slurp(a2));
  EXPECT_EQ(slurp(b1), slurp(b2));
  EXPECT_NO_THROW(tpi::read_tags(a1));

  const auto c1 = run("correlate " + a1.string() + " " + b1.string() + " --bin-width 20ns --max-lag 2us");
  const auto c2 = run("correlate " + a2.string() + " " + b2.string() + " --bin-width 20ns --max-lag 2us");
  ASSERT_EQ(c1.status, 0);
  EXPECT_EQ(c1.out, c2.out);
  EXPECT_EQ(c1.out.substr(0, c1.out.find('\n')), "tau_s,g2,sigma,counts");
  const auto batched =
      run("correlate " + a1.string() + " " + b1.string() + " --bin-width 20ns --max-lag 2us --segment 0.5");
  EXPECT_EQ(batched.out, c1.out);
}

TEST(Cli, TextTagsAreAccepted) {
  const auto a = scratch("a.txt"), b = scratch("b.txt");
  ASSERT_EQ(run("simulate --config " + config("hbt_renewal.ini") + " --text --out-a " + a.string() + " --out-b " +
                b.string())
                .status,
            0);
  EXPECT_EQ(slurp(a).substr(0, 1), "#");
  const auto r = run("correlate " + a.string() + " " + b.string() + " --bin-width 2ns --max-lag 1us");
  ASSERT_EQ(r.status, 0);
  // antibunching dip next to zero lag
  EXPECT_LT(std::stod(field(r.out, "1e-09", 1)), 0.2);
}

TEST(Cli, VerifyOracle) {
  const auto r = run("verify --scope oracle");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("pass"), std::string::npos);
}

TEST(Cli, VerifyCorruptedOracleFails) {
  const auto r = run("verify --scope oracle --oracle-rule all-pairs --points 500");
  EXPECT_EQ(r.status, 5);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyFlatMonteCarlo) {
  const auto r = run("verify --scope montecarlo --config " + config("flat_mc.ini"));
  EXPECT_EQ(r.status, 0) << r.out;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("analytic --preset nosuch").status, 2);
  EXPECT_EQ(run("analytic --bogus-flag").status, 2);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("analytic --format xml").status, 2);
  EXPECT_EQ(run("analytic --config /nonexistent.ini").status, 3);
  EXPECT_EQ(run("correlate /nonexistent_a /nonexistent_b").status, 3);
  EXPECT_EQ(run("analytic --preset fig2e --out /nonexistent_dir/x.csv").status, 3);

  const auto bad = scratch("bad.ini");
  std::ofstream(bad) << "[interferometer]\nv0 = 1.5\n";
  EXPECT_EQ(run("analytic --config " + bad.string()).status, 4);

  const auto garbage = scratch("garbage.ttg");
  std::ofstream(garbage) << "TTG1 this is not a tag file";
  EXPECT_EQ(run("correlate " + garbage.string() + " " + garbage.string()).status, 3);
}

TEST(Cli, PresetList) {
  const auto r = run("presets");
  ASSERT_EQ(r.status, 0);
  for (const char* name : {"fig2e", "fig2f", "fig3a", "fig3d", "fig4a", "fig4f", "desk"})
    EXPECT_NE(r.out.find(std::string("\n") + name + ","), std::string::npos) << name;
}
