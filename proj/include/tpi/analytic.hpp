#pragma once

// Closed-form coincidence statistics behind an asymmetric Mach-Zehnder
// interferometer fed by a stationary single-photon stream.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "tpi/error.hpp"
#include "tpi/model.hpp"

namespace tpi {

enum class SideLocation { Plus, Minus };
enum class FeatureKind { Peak, Dip, Flat };

inline const char* to_string(SideLocation loc) { return loc == SideLocation::Plus ? "+dt" : "-dt"; }

inline const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Peak: return "peak";
    case FeatureKind::Dip: return "dip";
    case FeatureKind::Flat: return "flat";
  }
  return "?";
}

struct SideFeature {
  SideLocation location;
  FeatureKind kind;
  double contrast;  // g2_parallel at the feature minus local background
};

template <CoherenceSource Source>
struct BasicCorrelationSeries {
  std::vector<double> taus;
  std::vector<double> values;
  PolarizationMode mode;
  InterferometerConfig config;
  Source source;
};

using CorrelationSeries = BasicCorrelationSeries<SourceModel>;

// Open interval (lo, hi) of lags used for beat extraction.
struct TauWindow {
  double lo;
  double hi;
};

inline constexpr double kDefaultFlatTolerance = 1e-3;
// Local background for side features sits this many correlation times off +-dt.
inline constexpr double kBackgroundOffset = 20.0;

inline double normalization(const InterferometerConfig& cfg) {
  return (cfg.r_a * cfg.r_a + cfg.t_a * cfg.t_a) * cfg.r_b * cfg.t_b +
         (cfg.r_b * cfg.r_b + cfg.t_b * cfg.t_b) * cfg.r_a * cfg.t_a;
}

namespace detail {

// Unnormalized pieces of the cross- and parallel-polarization correlations.
struct CoincidenceTerms {
  double distinguishable;  // same-arm and different-arm pair terms
  double interference;     // magnitude subtracted in parallel polarization
};

template <CoherenceSource Source>
CoincidenceTerms coincidence_terms(const InterferometerConfig& cfg, const Source& src, double tau) {
  const double ab = cfg.r_a * cfg.t_a;
  const double g_now = src.g2(tau);
  const double g_lead = src.g2(tau + cfg.delta_t);
  const double g_lag = src.g2(tau - cfg.delta_t);
  const double distinguishable = (cfg.r_a * cfg.r_a + cfg.t_a * cfg.t_a) * cfg.r_b * cfg.t_b * g_now +
                                 ab * cfg.r_b * cfg.r_b * g_lead + ab * cfg.t_b * cfg.t_b * g_lag;
  const double g1 = src.g1_magnitude(tau);
  const double pair = g_lead * g_lag;
  const double interference = pair > 0.0 ? 2.0 * ab * cfg.r_b * cfg.t_b * cfg.v0 * g1 * g1 *
                                               std::cos(cfg.omega * tau) * std::sqrt(pair)
                                         : 0.0;
  return {distinguishable, interference};
}

inline double location_sign(SideLocation loc) { return loc == SideLocation::Plus ? 1.0 : -1.0; }

}  // namespace detail

template <CoherenceSource Source>
double g2_cross(const InterferometerConfig& cfg, const Source& src, double tau) {
  cfg.validate();
  return detail::coincidence_terms(cfg, src, tau).distinguishable / normalization(cfg);
}

template <CoherenceSource Source>
double g2_parallel(const InterferometerConfig& cfg, const Source& src, double tau) {
  cfg.validate();
  const auto terms = detail::coincidence_terms(cfg, src, tau);
  // Non-negative analytically; clamp only absorbs rounding.
  return std::max(0.0, (terms.distinguishable - terms.interference) / normalization(cfg));
}

template <CoherenceSource Source>
double g2_correlation(const InterferometerConfig& cfg, const Source& src, PolarizationMode mode,
                      double tau) {
  return mode == PolarizationMode::Cross ? g2_cross(cfg, src, tau) : g2_parallel(cfg, src, tau);
}

template <CoherenceSource Source>
double visibility(const InterferometerConfig& cfg, const Source& src, double tau) {
  const double cross = g2_cross(cfg, src, tau);
  if (cross < 1e-12) throw DegenerateError("visibility: cross-polarization correlation vanishes");
  return (cross - g2_parallel(cfg, src, tau)) / cross;
}

// V0 / (1 + g2(0)); valid for balanced splitters with tau_corr << dt << tau_c.
template <CoherenceSource Source>
double visibility_zero(const InterferometerConfig& cfg, const Source& src) {
  cfg.validate();
  if (!cfg.is_symmetric())
    throw PreconditionError("visibility_zero: requires 50/50 splitters");
  return cfg.v0 / (1.0 + src.g2_zero());
}

// Largest arm delay for which the bracket rule predicts a bunching side peak
// at +dt (Plus) or -dt (Minus), Omega = 0:
//   (tau_c / 2) ln[R_B V0 / (T_B g2(0))]   and its R_B <-> T_B mirror.
template <CoherenceSource Source>
double side_threshold(const InterferometerConfig& cfg, const Source& src, SideLocation loc) {
  cfg.validate();
  if (cfg.omega != 0.0) throw PreconditionError("side_threshold: requires omega = 0");
  if (!(src.g2_zero() > 0.0)) throw PreconditionError("side_threshold: requires g2(0) > 0");
  if (!(cfg.v0 > 0.0)) throw PreconditionError("side_threshold: requires v0 > 0");
  const double ratio = loc == SideLocation::Plus ? cfg.r_b / cfg.t_b : cfg.t_b / cfg.r_b;
  const double arg = ratio * cfg.v0 / src.g2_zero();
  if (arg < 1.0) throw DegenerateError("side_threshold: no side peak for any delay");
  return 0.5 * src.coherence_time() * std::log(arg);
}

// Arm delay at which the local contrast of g2_parallel at the side feature
// changes sign (Omega = 0, dt >> tau_corr):
//   (tau_c / 2) ln[2 R_B V0 / (T_B (1 + sqrt g2(0)))]   and its mirror.
// Returns 0 when no positive delay yields a peak.
template <CoherenceSource Source>
double contrast_threshold(const InterferometerConfig& cfg, const Source& src, SideLocation loc) {
  cfg.validate();
  if (cfg.omega != 0.0) throw PreconditionError("contrast_threshold: requires omega = 0");
  const double g0 = src.g2_zero();
  if (!(g0 < 1.0)) return 0.0;
  const double ratio = loc == SideLocation::Plus ? cfg.r_b / cfg.t_b : cfg.t_b / cfg.r_b;
  const double arg = 2.0 * ratio * cfg.v0 / (1.0 + std::sqrt(g0));
  return arg > 1.0 ? 0.5 * src.coherence_time() * std::log(arg) : 0.0;
}

template <CoherenceSource Source>
SideFeature classify_side_feature(const InterferometerConfig& cfg, const Source& src,
                                  SideLocation loc, double epsilon = kDefaultFlatTolerance) {
  if (!(epsilon > 0.0)) throw PreconditionError("classify_side_feature: epsilon must be > 0");
  const double center = detail::location_sign(loc) * cfg.delta_t;
  const double offset = kBackgroundOffset * src.correlation_time();
  const double at_feature = g2_parallel(cfg, src, center);
  const double background =
      0.5 * (g2_parallel(cfg, src, center - offset) + g2_parallel(cfg, src, center + offset));
  const double contrast = at_feature - background;
  FeatureKind kind = FeatureKind::Flat;
  if (contrast > epsilon) kind = FeatureKind::Peak;
  else if (contrast < -epsilon) kind = FeatureKind::Dip;
  return {loc, kind, contrast};
}

// (max - min) / (max + min) of g2_parallel over a window that contains at
// least one beat period and avoids the narrow features at 0 and +-dt.
template <CoherenceSource Source>
double beat_visibility(const InterferometerConfig& cfg, const Source& src, TauWindow window) {
  cfg.validate();
  if (cfg.omega == 0.0) throw PreconditionError("beat_visibility: requires omega != 0");
  if (!(window.hi > window.lo)) throw PreconditionError("beat_visibility: empty window");
  const double period = 2.0 * std::numbers::pi / std::abs(cfg.omega);
  if (window.hi - window.lo < period)
    throw PreconditionError("beat_visibility: window shorter than one beat period");
  const double limit = src.coherence_time() / 10.0;
  if (window.lo <= -limit || window.hi >= limit)
    throw PreconditionError("beat_visibility: window must lie inside (-tau_c/10, tau_c/10)");
  const double guard = kBackgroundOffset * src.correlation_time();
  for (double center : {0.0, cfg.delta_t, -cfg.delta_t}) {
    if (window.lo < center + guard && window.hi > center - guard)
      throw PreconditionError("beat_visibility: window overlaps a narrow feature");
  }

  const double periods = (window.hi - window.lo) / period;
  const auto samples = static_cast<std::size_t>(
      std::clamp(std::ceil(periods * 1024.0), 4096.0, 4.0e6));
  const double step = (window.hi - window.lo) / static_cast<double>(samples - 1);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = g2_parallel(cfg, src, window.lo + step * static_cast<double>(i));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return (hi - lo) / (hi + lo);
}

template <CoherenceSource Source>
BasicCorrelationSeries<Source> sample_series(const InterferometerConfig& cfg, const Source& src,
                                             PolarizationMode mode, std::span<const double> grid) {
  cfg.validate();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw PreconditionError("sample_series: grid must be strictly increasing");
  }
  BasicCorrelationSeries<Source> series{{grid.begin(), grid.end()}, {}, mode, cfg, src};
  series.values.reserve(grid.size());
  for (double tau : grid) series.values.push_back(g2_correlation(cfg, src, mode, tau));
  return series;
}

}  // namespace tpi
