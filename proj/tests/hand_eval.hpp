#pragma once

// Straight transcriptions of the closed forms, written independently of the
// library (long double, no shared helpers) so tests compare two routes.

#include <cmath>

namespace hand {

struct Params {
  long double ra, ta, rb, tb;
  long double dt, omega, v0;
  long double g0, tcorr, tcoh;
};

inline long double g2(const Params& p, long double tau) {
  return 1.0L - (1.0L - p.g0) * std::exp(-std::fabs(tau) / p.tcorr);
}

inline long double g1(const Params& p, long double tau) { return std::exp(-std::fabs(tau) / p.tcoh); }

inline long double norm(const Params& p) {
  return (p.ra * p.ra + p.ta * p.ta) * p.rb * p.tb + (p.rb * p.rb + p.tb * p.tb) * p.ra * p.ta;
}

inline long double cross(const Params& p, long double tau) {
  const long double c1 = (p.ra * p.ra + p.ta * p.ta) * p.rb * p.tb;
  const long double c2 = p.ra * p.ta * p.rb * p.rb;
  const long double c3 = p.ra * p.ta * p.tb * p.tb;
  return (c1 * g2(p, tau) + c2 * g2(p, tau + p.dt) + c3 * g2(p, tau - p.dt)) / norm(p);
}

inline long double parallel(const Params& p, long double tau) {
  const long double gg = g1(p, tau);
  const long double term = 2.0L * p.ra * p.ta * p.rb * p.tb * p.v0 * gg * gg * std::cos(p.omega * tau) *
                           std::sqrt(g2(p, tau - p.dt) * g2(p, tau + p.dt));
  return cross(p, tau) - term / norm(p);
}

inline Params symmetric(long double dt, long double g0, long double tcorr, long double tcoh,
                        long double v0 = 1.0L, long double omega = 0.0L) {
  return {0.5L, 0.5L, 0.5L, 0.5L, dt, omega, v0, g0, tcorr, tcoh};
}

}  // namespace hand
