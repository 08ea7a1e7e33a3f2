#pragma once

// Seeded synthetic detector streams.
//
// Pair-correlated streams are built by thinning: stream 1 is homogeneous
// Poisson, stream 2 has conditional intensity
//   lambda_2(t) = rate2 * prod_{|t - a_i| <= W} g(t - a_i)
// over stream-1 tags a_i. Only two-point statistics are faithful; triple and
// higher-order correlations of the output are not.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tpi/error.hpp"
#include "tpi/tag_stream.hpp"

namespace tpi {

using PairCorrelation = std::function<double(double)>;

inline constexpr double kMaxExpectedTags = 1e9;
inline constexpr double kValidityWarn = 0.05;
inline constexpr double kValidityReject = 0.2;

struct SimConfig {
  double rate1 = 1e3;  // Hz
  double rate2 = 1e3;  // Hz, baseline (uncorrelated) rate of stream 2
  double duration = 1.0;  // s
  std::uint64_t seed = 1;
  PairCorrelation target = [](double) { return 1.0; };
  double window = 1e-6;  // correlation support radius W, s
  double background_rate = 0.0;  // uncorrelated clicks added to each stream, Hz
  std::optional<double> target_bound;  // sup of target over [-W, W]; sampled if unset

  // Throws on hard violations, returns soft warnings.
  std::vector<std::string> validate() const {
    if (!(rate1 > 0.0) || !(rate2 > 0.0)) throw ValidationError("SimConfig: rates must be > 0");
    if (!(duration > 0.0)) throw ValidationError("SimConfig: duration must be > 0");
    if (!(window > 0.0)) throw ValidationError("SimConfig: window must be > 0");
    if (!(background_rate >= 0.0)) throw ValidationError("SimConfig: background_rate must be >= 0");
    if (!target) throw ValidationError("SimConfig: target correlation is empty");
    const double ratio = std::max(rate1, rate2) * window;
    if (ratio > kValidityReject)
      throw ValidationError("SimConfig: max(rate) * window = " + std::to_string(ratio) + " exceeds 0.2");
    const double expected = (std::max(rate1, rate2) + background_rate) * duration;
    if (expected > kMaxExpectedTags)
      throw CapacityError("SimConfig: expected tag count exceeds 1e9");
    std::vector<std::string> warnings;
    if (ratio > kValidityWarn)
      warnings.push_back("max(rate) * window = " + std::to_string(ratio) +
                         " exceeds 0.05; correlation estimates carry O(rate*W) bias");
    return warnings;
  }
};

namespace detail {

// Independent engine per (seed, stream) pair.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    0x54504931u};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& rng) { return -std::log1p(-uniform01(rng)); }

inline Picoseconds seconds_to_ps(double s) {
  return static_cast<Picoseconds>(std::llround(s * kPicosecondsPerSecond));
}

// Appends a tag on the 1 ps grid; collisions move forward by 1 ps.
inline bool push_tag(std::vector<Picoseconds>& tags, double t_ps, Picoseconds duration) {
  auto t = static_cast<Picoseconds>(std::llround(t_ps));
  if (!tags.empty() && t <= tags.back()) t = tags.back() + 1;
  if (t > duration) return false;
  tags.push_back(t);
  return true;
}

inline std::vector<Picoseconds> merge_tags(std::span<const Picoseconds> x, std::span<const Picoseconds> y,
                                           Picoseconds duration) {
  std::vector<Picoseconds> merged;
  merged.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(merged));
  std::vector<Picoseconds> out;
  out.reserve(merged.size());
  for (Picoseconds t : merged) push_tag(out, static_cast<double>(t), duration);
  return out;
}

inline std::vector<Picoseconds> poisson_tags(double rate, Picoseconds duration, std::mt19937_64& rng) {
  std::vector<Picoseconds> tags;
  const double mean_gap = kPicosecondsPerSecond / rate;
  tags.reserve(static_cast<std::size_t>(rate * ps_to_seconds(duration) * 1.01 + 16));
  const auto limit = static_cast<double>(duration);
  for (double t = mean_gap * exponential(rng); t <= limit; t += mean_gap * exponential(rng)) {
    if (!push_tag(tags, t, duration)) break;
  }
  return tags;
}

inline double sampled_sup(const PairCorrelation& g, double window) {
  constexpr int kSamples = 200001;
  double sup = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double tau = -window + 2.0 * window * i / (kSamples - 1);
    sup = std::max(sup, g(tau));
  }
  return sup;
}

}  // namespace detail

inline TagStream generate_poisson(double rate, double duration, std::uint64_t seed,
                                  std::uint8_t channel = 0) {
  if (!(duration >= 0.0)) throw ValidationError("generate_poisson: duration must be >= 0");
  if (duration == 0.0) return TagStream(channel, {}, 0);
  if (!(rate > 0.0)) throw ValidationError("generate_poisson: rate must be > 0");
  if (rate * duration > kMaxExpectedTags) throw CapacityError("generate_poisson: expected count exceeds 1e9");
  auto rng = detail::make_engine(seed, 0);
  const Picoseconds span = detail::seconds_to_ps(duration);
  return TagStream(channel, detail::poisson_tags(rate, span, rng), span);
}

// Stream 1 on channel 1, stream 2 on channel 2.
inline std::pair<TagStream, TagStream> generate_pair_correlated(const SimConfig& cfg) {
  cfg.validate();
  const Picoseconds span = detail::seconds_to_ps(cfg.duration);
  auto rng1 = detail::make_engine(cfg.seed, 1);
  auto rng2 = detail::make_engine(cfg.seed, 2);
  std::vector<Picoseconds> first = detail::poisson_tags(cfg.rate1, span, rng1);

  const double bound = cfg.target_bound ? *cfg.target_bound : detail::sampled_sup(cfg.target, cfg.window);
  if (!(bound >= 0.0)) throw ValidationError("generate_pair_correlated: target bound must be >= 0");

  // Dominating process: rate2 * bound^k while k stream-1 tags lie within W,
  // so the acceptance prod g / bound^k stays in [0, 1] without clamping
  // whenever the bound is exact.
  const double window_ps = cfg.window * kPicosecondsPerSecond;
  const double base_rate = cfg.rate2 / kPicosecondsPerSecond;  // per ps
  const auto end = static_cast<double>(span);
  const std::size_t n = first.size();
  std::vector<Picoseconds> second;
  second.reserve(static_cast<std::size_t>(cfg.rate2 * cfg.duration * 1.05 + 16));

  std::size_t lo = 0;  // first tag with a >= t - W
  std::size_t hi = 0;  // first tag with a > t + W
  double t = 0.0;
  while (t <= end) {
    while (lo < n && static_cast<double>(first[lo]) < t - window_ps) ++lo;
    while (hi < n && static_cast<double>(first[hi]) <= t + window_ps) ++hi;
    const std::size_t k = hi - lo;
    double next_change = end;
    if (lo < hi) next_change = std::min(next_change, static_cast<double>(first[lo]) + window_ps);
    if (hi < n) next_change = std::min(next_change, static_cast<double>(first[hi]) - window_ps);
    if (next_change <= t) next_change = std::nextafter(t, std::numeric_limits<double>::infinity());

    const double rate = base_rate * std::pow(bound, static_cast<double>(k));
    if (!(rate > 0.0)) {
      if (t >= end) break;
      t = next_change;
      continue;
    }
    const double candidate = t + detail::exponential(rng2) / rate;
    if (candidate >= next_change) {
      if (next_change >= end) break;
      t = next_change;  // memoryless restart at the boundary
      continue;
    }
    t = candidate;
    double accept = 1.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double lag = (t - static_cast<double>(first[i])) / kPicosecondsPerSecond;
      accept *= std::max(0.0, cfg.target(lag)) / bound;
    }
    if (detail::uniform01(rng2) < std::min(1.0, accept)) detail::push_tag(second, t, span);
  }

  if (cfg.background_rate > 0.0) {
    auto rng3 = detail::make_engine(cfg.seed, 3);
    auto rng4 = detail::make_engine(cfg.seed, 4);
    first = detail::merge_tags(first, detail::poisson_tags(cfg.background_rate, span, rng3), span);
    second = detail::merge_tags(second, detail::poisson_tags(cfg.background_rate, span, rng4), span);
  }
  return {TagStream(1, std::move(first), span), TagStream(2, std::move(second), span)};
}

// Renewal process with hazard rate * [1 - (1 - g2_zero) exp(-d / tau_corr)],
// d being the time since the previous click.
inline TagStream generate_antibunched_renewal(double rate, double g2_zero, double tau_corr,
                                              double duration, std::uint64_t seed,
                                              std::uint8_t channel = 0) {
  if (!(rate > 0.0)) throw ValidationError("generate_antibunched_renewal: rate must be > 0");
  if (!(tau_corr > 0.0)) throw ValidationError("generate_antibunched_renewal: tau_corr must be > 0");
  if (!(g2_zero >= 0.0)) throw ValidationError("generate_antibunched_renewal: g2_zero must be >= 0");
  if (!(duration >= 0.0)) throw ValidationError("generate_antibunched_renewal: duration must be >= 0");
  if (rate * tau_corr > kValidityWarn)
    throw ValidationError("generate_antibunched_renewal: rate * tau_corr exceeds 0.05");
  if (rate * duration > kMaxExpectedTags)
    throw CapacityError("generate_antibunched_renewal: expected count exceeds 1e9");

  auto rng = detail::make_engine(seed, 5);
  const Picoseconds span = detail::seconds_to_ps(duration);
  const double dominating = rate * std::max(1.0, g2_zero) / kPicosecondsPerSecond;
  const double tau_ps = tau_corr * kPicosecondsPerSecond;
  const auto end = static_cast<double>(span);
  std::vector<Picoseconds> tags;
  tags.reserve(static_cast<std::size_t>(rate * duration * 1.01 + 16));
  // Start as if the previous click were far in the past.
  double previous = -std::numeric_limits<double>::infinity();
  for (double t = detail::exponential(rng) / dominating; t <= end; t += detail::exponential(rng) / dominating) {
    const double since = t - previous;
    const double hazard = rate / kPicosecondsPerSecond * (1.0 - (1.0 - g2_zero) * std::exp(-since / tau_ps));
    if (detail::uniform01(rng) * dominating < hazard) {
      if (!detail::push_tag(tags, t, span)) break;
      previous = t;
    }
  }
  return TagStream(channel, std::move(tags), span);
}

// Routes each click to the first output with probability `fraction`.
inline std::pair<TagStream, TagStream> split_stream(const TagStream& in, double fraction, std::uint64_t seed,
                                                    std::uint8_t first_channel = 1,
                                                    std::uint8_t second_channel = 2) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("split_stream: fraction must lie in [0,1]");
  auto rng = detail::make_engine(seed, 6);
  std::vector<Picoseconds> x;
  std::vector<Picoseconds> y;
  for (Picoseconds t : in.tags()) (detail::uniform01(rng) < fraction ? x : y).push_back(t);
  return {TagStream(first_channel, std::move(x), in.duration()), TagStream(second_channel, std::move(y), in.duration())};
}

}  // namespace tpi
