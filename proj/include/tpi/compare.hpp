#pragma once

// Measured-versus-model checks for correlation histograms.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "tpi/correlator.hpp"
#include "tpi/error.hpp"

namespace tpi {

// Mean of f over [lo, hi], 8-point Gauss-Legendre on 4 sub-intervals.
inline double interval_mean(const std::function<double(double)>& f, double lo, double hi) {
  static constexpr std::array<double, 4> x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                           0.9602898564975363};
  static constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                           0.1012285362903763};
  constexpr int kPieces = 4;
  const double piece = (hi - lo) / kPieces;
  double sum = 0.0;
  for (int p = 0; p < kPieces; ++p) {
    const double mid = lo + (p + 0.5) * piece;
    const double half = 0.5 * piece;
    for (std::size_t i = 0; i < x.size(); ++i)
      sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
  }
  return sum / (2.0 * kPieces);
}

// Model value averaged over each histogram bin.
inline std::vector<double> bin_averaged(const CorrelationHistogram& h, const std::function<double(double)>& f) {
  const double width = ps_to_seconds(h.meta.config.bin_width);
  std::vector<double> out(h.bin_centers.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = interval_mean(f, h.bin_centers[k] - 0.5 * width, h.bin_centers[k] + 0.5 * width);
  return out;
}

struct HistogramComparison {
  std::size_t bins = 0;
  std::size_t within = 0;  // bins with |g2 - model| <= k sigma
  double chi2 = 0.0;
  double worst_pull = 0.0;

  double fraction_within() const { return bins ? static_cast<double>(within) / static_cast<double>(bins) : 0.0; }
  double reduced_chi2() const { return bins ? chi2 / static_cast<double>(bins) : 0.0; }
};

// Pulls use the histogram's own Poisson sigma; empty bins are skipped.
inline HistogramComparison compare_histogram(const CorrelationHistogram& h, const std::function<double(double)>& model,
                                             double k_sigma = 3.0) {
  const auto expected = bin_averaged(h, model);
  HistogramComparison c;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (h.counts[k] == 0 || !(h.sigma[k] > 0.0)) continue;
    const double pull = (h.g2[k] - expected[k]) / h.sigma[k];
    ++c.bins;
    if (std::abs(pull) <= k_sigma) ++c.within;
    c.chi2 += pull * pull;
    c.worst_pull = std::max(c.worst_pull, std::abs(pull));
  }
  return c;
}

// Weighted mean of g2 over bins whose centers fall in [lo, hi].
struct PooledValue {
  double value = 0.0;
  double sigma = 0.0;
  double model = 0.0;
};

inline PooledValue pool_bins(const CorrelationHistogram& h, const std::function<double(double)>& model,
                             double lo, double hi) {
  const auto expected = bin_averaged(h, model);
  double counts = 0.0;
  double scale = 0.0;
  double m = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.bin_centers[k] < lo || h.bin_centers[k] > hi) continue;
    const double c = static_cast<double>(h.counts[k]);
    counts += c;
    // g2 = counts / scale for this bin
    scale += h.g2[k] > 0.0 ? c / h.g2[k] : 0.0;
    m += expected[k];
    ++n;
  }
  if (n == 0 || scale <= 0.0) throw PreconditionError("pool_bins: no populated bins in range");
  return {counts / scale, std::sqrt(counts) / scale, m / static_cast<double>(n)};
}

struct BeatFit {
  double omega = 0.0;  // rad/s
  double period = 0.0;  // s
  double chi2 = 0.0;
  std::size_t bins = 0;
};

// Fits g2 ~ a + exp(-2|tau|/tau_c) (b cos(omega tau) + c sin(omega tau)) over
// bins outside the excluded intervals, scanning omega in [lo, hi] then
// refining by golden-section search. a, b, c are solved linearly.
inline BeatFit fit_beat(const CorrelationHistogram& h, double tau_coh, double omega_lo, double omega_hi,
                        const std::vector<std::pair<double, double>>& excluded) {
  if (!(omega_hi > omega_lo && omega_lo > 0.0)) throw PreconditionError("fit_beat: bad omega range");
  std::vector<double> tau, y, w;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k] == 0) continue;
    bool skip = false;
    for (const auto& [lo, hi] : excluded) skip = skip || (h.bin_centers[k] >= lo && h.bin_centers[k] <= hi);
    if (skip) continue;
    tau.push_back(h.bin_centers[k]);
    y.push_back(h.g2[k]);
    w.push_back(1.0 / (h.sigma[k] * h.sigma[k]));
  }
  if (tau.size() < 8) throw PreconditionError("fit_beat: too few bins");

  auto chi2_at = [&](double omega) {
    // Normal equations for three basis functions.
    double m[3][3] = {};
    double r[3] = {};
    for (std::size_t i = 0; i < tau.size(); ++i) {
      const double env = std::exp(-2.0 * std::abs(tau[i]) / tau_coh);
      const double basis[3] = {1.0, env * std::cos(omega * tau[i]), env * std::sin(omega * tau[i])};
      for (int p = 0; p < 3; ++p) {
        r[p] += w[i] * basis[p] * y[i];
        for (int q = 0; q < 3; ++q) m[p][q] += w[i] * basis[p] * basis[q];
      }
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 3; ++col) {
      int pivot = col;
      for (int row = col + 1; row < 3; ++row)
        if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
      std::swap(m[col], m[pivot]);
      std::swap(r[col], r[pivot]);
      if (m[col][col] == 0.0) return std::numeric_limits<double>::infinity();
      for (int row = col + 1; row < 3; ++row) {
        const double f = m[row][col] / m[col][col];
        for (int q = col; q < 3; ++q) m[row][q] -= f * m[col][q];
        r[row] -= f * r[col];
      }
    }
    double coef[3];
    for (int row = 2; row >= 0; --row) {
      double s = r[row];
      for (int q = row + 1; q < 3; ++q) s -= m[row][q] * coef[q];
      coef[row] = s / m[row][row];
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
      const double env = std::exp(-2.0 * std::abs(tau[i]) / tau_coh);
      const double fit = coef[0] + env * (coef[1] * std::cos(omega * tau[i]) + coef[2] * std::sin(omega * tau[i]));
      chi2 += w[i] * (y[i] - fit) * (y[i] - fit);
    }
    return chi2;
  };

  constexpr int kScan = 2000;
  double best = omega_lo;
  double best_chi2 = std::numeric_limits<double>::infinity();
  const double step = (omega_hi - omega_lo) / kScan;
  for (int i = 0; i <= kScan; ++i) {
    const double om = omega_lo + step * i;
    const double c = chi2_at(om);
    if (c < best_chi2) {
      best_chi2 = c;
      best = om;
    }
  }
  double a = std::max(omega_lo, best - step);
  double b = std::min(omega_hi, best + step);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = chi2_at(x1);
  double f2 = chi2_at(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = chi2_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = chi2_at(x2);
    }
  }
  const double omega = 0.5 * (a + b);
  return {omega, 2.0 * std::numbers::pi / omega, chi2_at(omega), tau.size()};
}

}  // namespace tpi
