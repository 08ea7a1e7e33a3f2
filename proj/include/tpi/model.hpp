#pragma once

#include <cmath>
#include <concepts>
#include <numbers>
#include <string>
#include <vector>

#include "tpi/error.hpp"

namespace tpi {

// Fibre propagation delay used to convert fibre lengths to arm delays.
inline constexpr double kFibreDelayPerKm = 5e-6;  // s/km

enum class PolarizationMode { Cross, Parallel };

inline const char* to_string(PolarizationMode mode) {
  return mode == PolarizationMode::Cross ? "cross" : "parallel";
}

// Anything that can supply |g1(tau)| and g2(tau) for the light entering the
// interferometer. SourceModel is the stock implementation; tests and callers
// may substitute other line shapes.
template <typename S>
concept CoherenceSource = requires(const S& s, double tau) {
  { s.g1_magnitude(tau) } -> std::convertible_to<double>;
  { s.g2(tau) } -> std::convertible_to<double>;
  { s.g2_zero() } -> std::convertible_to<double>;
  { s.correlation_time() } -> std::convertible_to<double>;
  { s.coherence_time() } -> std::convertible_to<double>;
};

// Single-emitter stream: exponential first-order coherence decay and
// single-exponential antibunching recovery.
class SourceModel {
public:
  // Ratio tau_coh / tau_corr below which the long-coherence regime no longer
  // holds. Construction still succeeds; see warnings().
  static constexpr double kRegimeRatio = 10.0;

  SourceModel(double g2_zero, double tau_corr, double tau_coh)
      : g2_zero_(g2_zero), tau_corr_(tau_corr), tau_coh_(tau_coh) {
    if (!(g2_zero >= 0.0) || !std::isfinite(g2_zero))
      throw ValidationError("SourceModel: g2_zero must be finite and >= 0");
    if (!(tau_corr > 0.0) || !std::isfinite(tau_corr))
      throw ValidationError("SourceModel: tau_corr must be finite and > 0");
    if (!(tau_coh > 0.0) || std::isnan(tau_coh))
      throw ValidationError("SourceModel: tau_coh must be > 0");
  }

  // Quantum-dot device: g2(0)=0.03, 115 ps antibunching, 10 us coherence.
  static SourceModel paper_device() { return {0.03, 115e-12, 10e-6}; }

  double g2_zero() const noexcept { return g2_zero_; }
  double correlation_time() const noexcept { return tau_corr_; }
  double coherence_time() const noexcept { return tau_coh_; }

  double g1_magnitude(double tau) const noexcept { return std::exp(-std::abs(tau) / tau_coh_); }

  double g2(double tau) const noexcept {
    return 1.0 - (1.0 - g2_zero_) * std::exp(-std::abs(tau) / tau_corr_);
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (tau_coh_ / tau_corr_ < kRegimeRatio)
      out.emplace_back("coherence time is less than 10 correlation times; "
                       "the long-coherence approximations are not accurate");
    return out;
  }

  bool operator==(const SourceModel&) const = default;

private:
  double g2_zero_;
  double tau_corr_;
  double tau_coh_;
};

static_assert(CoherenceSource<SourceModel>);

inline double g1_magnitude(const SourceModel& model, double tau) { return model.g1_magnitude(tau); }
inline double g2_auto(const SourceModel& model, double tau) { return model.g2(tau); }

// Asymmetric Mach-Zehnder settings. Splitters are lossless (R + T = 1).
struct InterferometerConfig {
  static constexpr double kSplitTolerance = 1e-9;

  double r_a = 0.5;
  double t_a = 0.5;
  double r_b = 0.5;
  double t_b = 0.5;
  double delta_t = 0.0;  // long-arm delay, s
  double omega = 0.0;    // angular frequency shift in the long arm, rad/s
  double v0 = 1.0;       // mode overlap on the recombining splitter

  static InterferometerConfig symmetric(double delta_t, double omega = 0.0, double v0 = 1.0) {
    return {0.5, 0.5, 0.5, 0.5, delta_t, omega, v0};
  }

  // Frequency shift given as an ordinary frequency (Omega / 2 pi).
  static double omega_from_hz(double hz) { return 2.0 * std::numbers::pi * hz; }

  bool is_symmetric(double tol = kSplitTolerance) const noexcept {
    return std::abs(r_a - 0.5) <= tol && std::abs(t_a - 0.5) <= tol &&
           std::abs(r_b - 0.5) <= tol && std::abs(t_b - 0.5) <= tol;
  }

  void validate() const {
    auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!in_unit(r_a) || !in_unit(t_a) || !in_unit(r_b) || !in_unit(t_b))
      throw ValidationError("InterferometerConfig: splitter coefficients must lie in (0,1)");
    if (std::abs(r_a + t_a - 1.0) > kSplitTolerance || std::abs(r_b + t_b - 1.0) > kSplitTolerance)
      throw ValidationError("InterferometerConfig: each splitter must satisfy R + T = 1");
    if (!(delta_t >= 0.0) || !std::isfinite(delta_t))
      throw ValidationError("InterferometerConfig: delta_t must be finite and >= 0");
    if (!std::isfinite(omega))
      throw ValidationError("InterferometerConfig: omega must be finite");
    if (!(v0 >= 0.0 && v0 <= 1.0))
      throw ValidationError("InterferometerConfig: v0 must lie in [0,1]");
  }

  bool operator==(const InterferometerConfig&) const = default;
};

// Cavity-QED rates as ordinary frequencies (the "/2 pi" values).
struct CqedParams {
  double g = 0.0;
  double kappa = 0.0;
  double gamma_par = 0.0;
  double gamma_star = 0.0;

  double gamma_perp() const noexcept { return gamma_par / 2.0 + gamma_star; }

  void validate() const {
    if (!(g >= 0.0 && kappa >= 0.0 && gamma_par >= 0.0 && gamma_star >= 0.0))
      throw ValidationError("CqedParams: rates must be >= 0");
  }
};

inline double cooperativity(const CqedParams& p) {
  p.validate();
  const double denom = p.kappa * p.gamma_perp();
  if (denom == 0.0) throw DegenerateError("cooperativity: kappa * gamma_perp is zero");
  return 2.0 * p.g * p.g / denom;
}

inline double critical_photon_number(const CqedParams& p) {
  p.validate();
  if (p.g == 0.0) throw DegenerateError("critical_photon_number: g is zero");
  return p.gamma_perp() * p.gamma_par / (4.0 * p.g * p.g);
}

}  // namespace tpi
