#pragma once

// Start-stop free cross-correlation of two time-tag streams.
//
// Lag convention: tau = t_b - t_a. Bin k covers
//   [-max_lag + k * bin_width, -max_lag + (k + 1) * bin_width).
//
// The sweep keeps a sliding window of b-tags within [t_a - max_lag,
// t_a + max_lag) for each a-tag, so the cost is O(N_a + N_b + pairs) and no
// pair list is ever materialized.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "tpi/error.hpp"
#include "tpi/tag_stream.hpp"

namespace tpi {

enum class Normalization { Raw, RateNormalized };

struct CorrelatorConfig {
  Picoseconds bin_width = 1000;
  Picoseconds max_lag = 100000;
  Normalization normalization = Normalization::RateNormalized;

  void validate() const {
    if (bin_width <= 0) throw ValidationError("CorrelatorConfig: bin_width must be > 0");
    if (max_lag <= 0) throw ValidationError("CorrelatorConfig: max_lag must be > 0");
    if ((2 * max_lag) % bin_width != 0)
      throw ValidationError("CorrelatorConfig: 2 * max_lag must be a multiple of bin_width");
  }

  std::size_t bin_count() const { return static_cast<std::size_t>(2 * max_lag / bin_width); }

  // Lag at the center of bin k, in seconds.
  double bin_center(std::size_t k) const {
    const double lo = static_cast<double>(-max_lag + static_cast<Picoseconds>(k) * bin_width);
    return (lo + 0.5 * static_cast<double>(bin_width)) / kPicosecondsPerSecond;
  }
};

struct HistogramMeta {
  double rate_a = 0.0;  // Hz
  double rate_b = 0.0;  // Hz
  Picoseconds duration = 0;
  CorrelatorConfig config;
};

struct CorrelationHistogram {
  std::vector<double> bin_centers;  // s
  std::vector<std::uint64_t> counts;
  std::vector<double> g2;     // counts itself for Normalization::Raw
  std::vector<double> sigma;  // sqrt(counts) through the same scaling
  HistogramMeta meta;
};

namespace detail {

inline void require_sorted(std::span<const Picoseconds> tags, const char* which) {
  if (std::adjacent_find(tags.begin(), tags.end(), std::greater<>()) != tags.end())
    throw UnsortedInputError(std::string("correlate: stream ") + which + " is not sorted");
}

template <typename Counter>
inline void bump(Counter& c) {
  if (c == std::numeric_limits<Counter>::max())
    throw CounterOverflowError("correlate: histogram counter overflow");
  ++c;
}

}  // namespace detail

// Adds every pair (t_a, t_b) with t_b - t_a in [-max_lag, max_lag) into
// counts. Inputs must be sorted; counts must hold cfg.bin_count() entries.
template <typename Counter>
void accumulate_pairs(std::span<const Picoseconds> a, std::span<const Picoseconds> b,
                      const CorrelatorConfig& cfg, std::span<Counter> counts) {
  static_assert(std::is_unsigned_v<Counter>);
  const Picoseconds lag = cfg.max_lag;
  const Picoseconds width = cfg.bin_width;
  std::size_t lo = 0;
  const std::size_t nb = b.size();
  for (const Picoseconds ta : a) {
    const Picoseconds start = ta - lag;
    while (lo < nb && b[lo] < start) ++lo;
    const Picoseconds stop = ta + lag;
    for (std::size_t j = lo; j < nb && b[j] < stop; ++j) {
      detail::bump(counts[static_cast<std::size_t>((b[j] - start) / width)]);
    }
  }
}

namespace detail {

template <typename Counter>
CorrelationHistogram finalize(std::vector<Counter> raw, const TagStream& a, const TagStream& b,
                              const CorrelatorConfig& cfg) {
  CorrelationHistogram h;
  const std::size_t bins = cfg.bin_count();
  h.meta.duration = std::max(a.duration(), b.duration());
  h.meta.config = cfg;
  const double duration_s = ps_to_seconds(h.meta.duration);
  h.meta.rate_a = duration_s > 0.0 ? static_cast<double>(a.size()) / duration_s : 0.0;
  h.meta.rate_b = duration_s > 0.0 ? static_cast<double>(b.size()) / duration_s : 0.0;

  h.bin_centers.resize(bins);
  h.counts.assign(raw.begin(), raw.end());
  h.g2.resize(bins);
  h.sigma.resize(bins);
  const double width_s = ps_to_seconds(cfg.bin_width);
  for (std::size_t k = 0; k < bins; ++k) {
    const double center = cfg.bin_center(k);
    h.bin_centers[k] = center;
    const double c = static_cast<double>(h.counts[k]);
    if (cfg.normalization == Normalization::Raw) {
      h.g2[k] = c;
      h.sigma[k] = std::sqrt(c);
      continue;
    }
    // Pairs at lag tau can only be seen during duration - |tau|.
    const double effective = duration_s - std::abs(center);
    const double scale = h.meta.rate_a * h.meta.rate_b * width_s * effective;
    h.g2[k] = scale > 0.0 ? c / scale : 0.0;
    h.sigma[k] = scale > 0.0 ? std::sqrt(c) / scale : 0.0;
  }
  return h;
}

}  // namespace detail

// Single forward sweep.
template <typename Counter = std::uint64_t>
CorrelationHistogram correlate(const TagStream& a, const TagStream& b, const CorrelatorConfig& cfg) {
  cfg.validate();
  detail::require_sorted(a.tags(), "a");
  detail::require_sorted(b.tags(), "b");
  std::vector<Counter> raw(cfg.bin_count(), Counter{0});
  accumulate_pairs<Counter>(a.tags(), b.tags(), cfg, raw);
  return detail::finalize(std::move(raw), a, b, cfg);
}

// Same counts as correlate, computed over time segments of the a-stream.
// Each segment sees the b-tags of its span widened by a max_lag halo; the
// per-worker partial histograms are combined by element-wise addition.
template <typename Counter = std::uint64_t>
CorrelationHistogram correlate_batched(const TagStream& a, const TagStream& b,
                                       const CorrelatorConfig& cfg, double segment_length,
                                       unsigned threads = 0) {
  cfg.validate();
  if (!(segment_length > 0.0))
    throw PreconditionError("correlate_batched: segment_length must be > 0");
  detail::require_sorted(a.tags(), "a");
  detail::require_sorted(b.tags(), "b");

  const auto ta = a.tags();
  const auto tb = b.tags();
  const std::size_t bins = cfg.bin_count();
  const double seg_ps_d = std::max(1.0, std::floor(segment_length * kPicosecondsPerSecond));
  const auto seg_ps = seg_ps_d >= 9.0e18 ? std::numeric_limits<Picoseconds>::max()
                                         : static_cast<Picoseconds>(seg_ps_d);
  const Picoseconds first = ta.empty() ? 0 : ta.front();
  const Picoseconds last = ta.empty() ? 0 : ta.back();
  const auto segments = ta.empty() ? std::size_t{0}
                                   : static_cast<std::size_t>((last - first) / seg_ps) + 1;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(segments, 1)));

  std::vector<std::vector<Counter>> partials(threads, std::vector<Counter>(bins, Counter{0}));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&](std::vector<Counter>& partial) {
    try {
      for (std::size_t s = next++; s < segments && !failed; s = next++) {
        const Picoseconds s0 = first + static_cast<Picoseconds>(s) * seg_ps;
        const Picoseconds s1 = s0 > std::numeric_limits<Picoseconds>::max() - seg_ps
                                   ? std::numeric_limits<Picoseconds>::max()
                                   : s0 + seg_ps;
        const auto a_lo = std::lower_bound(ta.begin(), ta.end(), s0);
        const auto a_hi = std::lower_bound(a_lo, ta.end(), s1);
        if (a_lo == a_hi) continue;
        const auto b_lo = std::lower_bound(tb.begin(), tb.end(), *a_lo - cfg.max_lag);
        const auto b_hi = std::lower_bound(b_lo, tb.end(), *(a_hi - 1) + cfg.max_lag);
        accumulate_pairs<Counter>({a_lo, a_hi}, {b_lo, b_hi}, cfg, partial);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(partials[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, std::ref(partials[t]));
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Counter> merged(std::move(partials[0]));
  for (std::size_t t = 1; t < partials.size(); ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      if (partials[t][k] > std::numeric_limits<Counter>::max() - merged[k])
        throw CounterOverflowError("correlate_batched: histogram counter overflow");
      merged[k] += partials[t][k];
    }
  }
  return detail::finalize(std::move(merged), a, b, cfg);
}

}  // namespace tpi
