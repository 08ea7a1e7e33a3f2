#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "tpi/analytic.hpp"
#include "tpi/error.hpp"
#include "tpi/model.hpp"

namespace tpi {

// Union of uniform lag segments, sampled and merged into one increasing grid.
struct GridSpec {
  struct Segment {
    double start;
    double stop;
    std::size_t points;
  };
  std::vector<Segment> segments;

  static GridSpec uniform(double start, double stop, std::size_t points) { return {{{start, stop, points}}}; }

  // Adds a dense segment of +-half_width around each center.
  GridSpec& refine(std::initializer_list<double> centers, double half_width, std::size_t points) {
    for (double c : centers) segments.push_back({c - half_width, c + half_width, points});
    return *this;
  }

  std::vector<double> build() const {
    std::vector<double> grid;
    for (const auto& s : segments) {
      if (s.points == 1) {
        grid.push_back(s.start);
        continue;
      }
      for (std::size_t i = 0; i < s.points; ++i)
        grid.push_back(s.start + (s.stop - s.start) * static_cast<double>(i) / static_cast<double>(s.points - 1));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
  }
};

struct ExperimentPreset {
  std::string name;
  std::string figure;  // which measurement the preset mirrors
  std::string description;
  SourceModel source;
  InterferometerConfig interferometer;
  GridSpec grid;
  std::optional<FeatureKind> expected_side;  // feature reported at +-dt, if any
};

namespace detail {

inline GridSpec feature_grid(double delta_t, double span, std::size_t coarse) {
  auto grid = GridSpec::uniform(-span, span, coarse);
  grid.refine({0.0, delta_t, -delta_t}, 2e-9, 801);
  return grid;
}

inline std::vector<ExperimentPreset> build_presets() {
  const auto device = SourceModel::paper_device();
  std::vector<ExperimentPreset> out;

  const double dt_short = 2.1e-9;
  out.push_back({"fig2e", "Fig. 2(e)", "calculated cross/parallel correlations, dt = 2.1 ns, no shift",
                 device, InterferometerConfig::symmetric(dt_short), GridSpec::uniform(-6e-9, 6e-9, 2401),
                 std::nullopt});
  out.push_back({"fig2d", "Fig. 2(d)", "same settings as the measured cross/parallel correlations",
                 device, InterferometerConfig::symmetric(dt_short), GridSpec::uniform(-6e-9, 6e-9, 2401),
                 std::nullopt});
  // V0 back-solved from V_HOM(0) = 0.943 and g2(0) = 0.03.
  out.push_back({"fig2f", "Fig. 2(f)", "TPI visibility versus lag, V0 = 0.971",
                 device, InterferometerConfig::symmetric(dt_short, 0.0, 0.971),
                 GridSpec::uniform(-6e-9, 6e-9, 2401), std::nullopt});

  struct Fibre {
    const char* name;
    double km;
    FeatureKind observed;
  };
  for (const Fibre f : {Fibre{"fig3a", 0.12, FeatureKind::Peak}, Fibre{"fig3b", 1.0, FeatureKind::Peak},
                        Fibre{"fig3c", 2.0, FeatureKind::Peak}, Fibre{"fig3d", 8.0, FeatureKind::Dip}}) {
    const double dt = f.km * kFibreDelayPerKm;
    out.push_back({f.name, "Fig. 3", "parallel correlation with " + std::to_string(f.km).substr(0, 4) + " km fibre, no shift",
                   device, InterferometerConfig::symmetric(dt), feature_grid(dt, 1.5 * dt, 3001), f.observed});
  }

  struct Shift {
    const char* name;
    double khz;
    FeatureKind observed;
  };
  const double dt_1km = kFibreDelayPerKm;
  for (const Shift s : {Shift{"fig4a", 48.0, FeatureKind::Dip}, Shift{"fig4b", 101.6, FeatureKind::Dip},
                        Shift{"fig4c", 147.1, FeatureKind::Dip}, Shift{"fig4d", 194.7, FeatureKind::Peak},
                        Shift{"fig4e", 246.0, FeatureKind::Dip}}) {
    out.push_back({s.name, "Fig. 4", "beat with 1 km fibre, shift " + std::to_string(s.khz).substr(0, 5) + " kHz",
                   device,
                   InterferometerConfig::symmetric(dt_1km, InterferometerConfig::omega_from_hz(s.khz * 1e3)),
                   feature_grid(dt_1km, 1.5 * dt_1km, 6001), s.observed});
  }
  // Driving laser itself: Poissonian light, beat but no sharp features.
  out.push_back({"fig4f", "Fig. 4(f)", "driving laser (g2 = 1) with 1 km fibre, 48 kHz shift",
                 SourceModel(1.0, device.correlation_time(), device.coherence_time()),
                 InterferometerConfig::symmetric(dt_1km, InterferometerConfig::omega_from_hz(48.0e3)),
                 feature_grid(dt_1km, 1.5 * dt_1km, 6001), FeatureKind::Flat});

  // Desk-scale stand-ins for Monte-Carlo runs: tau_c 1 us, dt = tau_c / 2.
  const SourceModel desk(0.03, 20e-9, 1e-6);
  out.push_back({"desk", "scaled", "desk-scale device, dt = 0.5 us, no shift", desk,
                 InterferometerConfig::symmetric(0.5e-6), feature_grid(0.5e-6, 2.5e-6, 2001), std::nullopt});
  out.push_back({"desk-beat", "scaled", "desk-scale device, dt = 0.5 us, Omega dt = 2 pi", desk,
                 InterferometerConfig::symmetric(0.5e-6, InterferometerConfig::omega_from_hz(2.0e6)),
                 feature_grid(0.5e-6, 2.5e-6, 2001), std::nullopt});
  return out;
}

}  // namespace detail

inline const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = detail::build_presets();
  return all;
}

inline const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw UsageError("unknown preset '" + name + "'");
}

}  // namespace tpi
