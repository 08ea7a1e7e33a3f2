#pragma once

// Brute-force coincidence model: enumerate which interferometer arm each of
// the two detected photons took, weight each history by its splitter
// amplitudes, and add the exchange interference between the two
// different-arm histories. Serves as an independent check of analytic.hpp.
//
// Conventions
//   splitter A:  short arm <- reflection (i sqrt R_A), long arm <- transmission (sqrt T_A)
//   splitter B:  short -> D1 transmitted, short -> D2 reflected,
//                long  -> D1 reflected,   long  -> D2 transmitted
//   reflection carries a factor i; the long arm adds delay dt and the
//   frequency shift phase exp(i Omega t_detect).
//   Lag tau = t(D2) - t(D1).

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "tpi/model.hpp"

namespace tpi::pathamp {

enum class Arm { Short, Long };
enum class Detector { D1, D2 };
enum class DelaySignature { Zero, PlusDt, MinusDt };

// Which cross-terms between histories are kept.
enum class ExchangeRule {
  DifferentArmsOnly,  // the physical rule: only the +dt / -dt exchange pair interferes
  AllPairs,           // deliberately wrong: every pair of histories interferes
};

struct PathPairing {
  Arm path_first;   // arm of the photon detected first
  Arm path_second;  // arm of the photon detected second
  Detector detector_first;
  double amplitude_weight;  // |amplitude|, sqrt of the four intensity coefficients
  std::complex<double> amplitude;
  DelaySignature delay_signature;  // emission offset class, d(first) - d(second)
};

namespace detail {

inline std::complex<double> splitter_a(const InterferometerConfig& cfg, Arm arm) {
  using namespace std::complex_literals;
  return arm == Arm::Short ? 1i * std::sqrt(cfg.r_a) : std::complex<double>(std::sqrt(cfg.t_a));
}

inline std::complex<double> splitter_b(const InterferometerConfig& cfg, Arm arm, Detector det) {
  using namespace std::complex_literals;
  const bool transmitted = (arm == Arm::Short) == (det == Detector::D1);
  return transmitted ? std::complex<double>(std::sqrt(cfg.t_b)) : 1i * std::sqrt(cfg.r_b);
}

inline double arm_delay(const InterferometerConfig& cfg, Arm arm) {
  return arm == Arm::Long ? cfg.delta_t : 0.0;
}

inline Detector other(Detector d) { return d == Detector::D1 ? Detector::D2 : Detector::D1; }

}  // namespace detail

// The four arm histories for one detector ordering.
inline std::array<PathPairing, 4> enumerate_pairings(const InterferometerConfig& cfg,
                                                     Detector first) {
  std::array<PathPairing, 4> out{};
  std::size_t k = 0;
  for (Arm a1 : {Arm::Short, Arm::Long}) {
    for (Arm a2 : {Arm::Short, Arm::Long}) {
      const auto amp = detail::splitter_a(cfg, a1) * detail::splitter_b(cfg, a1, first) *
                       detail::splitter_a(cfg, a2) * detail::splitter_b(cfg, a2, detail::other(first));
      DelaySignature sig = DelaySignature::Zero;
      if (a1 == Arm::Long && a2 == Arm::Short) sig = DelaySignature::PlusDt;
      if (a1 == Arm::Short && a2 == Arm::Long) sig = DelaySignature::MinusDt;
      out[k++] = {a1, a2, first, std::abs(amp), amp, sig};
    }
  }
  return out;
}

namespace detail {

inline double signature_offset(const InterferometerConfig& cfg, DelaySignature sig) {
  switch (sig) {
    case DelaySignature::Zero: return 0.0;
    case DelaySignature::PlusDt: return cfg.delta_t;
    case DelaySignature::MinusDt: return -cfg.delta_t;
  }
  return 0.0;
}

// Unnormalized coincidence rate for one ordering, with detection lag s >= 0
// between the first and second click.
template <CoherenceSource Source>
double ordered_rate(const InterferometerConfig& cfg, const Source& src, PolarizationMode mode,
                    ExchangeRule rule, Detector first, double s) {
  const auto pairings = enumerate_pairings(cfg, first);
  double rate = 0.0;
  for (const auto& p : pairings) {
    rate += p.amplitude_weight * p.amplitude_weight * src.g2(s + signature_offset(cfg, p.delay_signature));
  }
  if (mode == PolarizationMode::Cross || cfg.v0 == 0.0) return rate;

  const double g1 = src.g1_magnitude(s);
  const double pair = src.g2(s - cfg.delta_t) * src.g2(s + cfg.delta_t);
  const double coherence = cfg.v0 * g1 * g1 * (pair > 0.0 ? std::sqrt(pair) : 0.0);
  // The long-arm photon picks up exp(i Omega t) at its detection time.
  // First click at t = 0, second at t = s.
  auto shifted = [&](const PathPairing& p) {
    const double phase = p.path_second == Arm::Long ? cfg.omega * s : 0.0;
    return p.amplitude * std::polar(1.0, phase);
  };
  for (std::size_t i = 0; i < pairings.size(); ++i) {
    for (std::size_t j = i + 1; j < pairings.size(); ++j) {
      const bool exchange_pair =
          pairings[i].delay_signature != DelaySignature::Zero &&
          pairings[j].delay_signature != DelaySignature::Zero;
      if (rule == ExchangeRule::DifferentArmsOnly && !exchange_pair) continue;
      rate += 2.0 * std::real(shifted(pairings[j]) * std::conj(shifted(pairings[i]))) * coherence;
    }
  }
  return rate;
}

}  // namespace detail

// Sum of |amplitude|^2 over the four histories of one ordering.
inline double pairing_weight_sum(const InterferometerConfig& cfg) {
  double sum = 0.0;
  for (const auto& p : enumerate_pairings(cfg, Detector::D1))
    sum += p.amplitude_weight * p.amplitude_weight;
  return sum;
}

// Normalized coincidence rate at lag tau = t(D2) - t(D1). Both detector
// orderings are visited; each contributes only for lags consistent with it.
template <CoherenceSource Source>
double oracle_g2(const InterferometerConfig& cfg, const Source& src, PolarizationMode mode,
                 double tau, ExchangeRule rule = ExchangeRule::DifferentArmsOnly) {
  cfg.validate();
  double rate = 0.0;
  for (Detector first : {Detector::D1, Detector::D2}) {
    const bool consistent = first == Detector::D1 ? tau >= 0.0 : tau < 0.0;
    if (!consistent) continue;
    rate += detail::ordered_rate(cfg, src, mode, rule, first, std::abs(tau));
  }
  return rate / pairing_weight_sum(cfg);
}

}  // namespace tpi::pathamp
