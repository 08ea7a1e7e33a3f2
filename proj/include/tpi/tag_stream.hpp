#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tpi/error.hpp"

namespace tpi {

using Picoseconds = std::int64_t;

inline constexpr double kPicosecondsPerSecond = 1e12;

inline double ps_to_seconds(Picoseconds t) { return static_cast<double>(t) / kPicosecondsPerSecond; }

// Detector clicks on one channel: strictly increasing picosecond timestamps
// inside [0, duration].
class TagStream {
public:
  TagStream() = default;

  TagStream(std::uint8_t channel, std::vector<Picoseconds> tags, Picoseconds duration)
      : channel_(channel), tags_(std::move(tags)), duration_(duration) {
    if (duration_ < 0) throw ValidationError("TagStream: negative duration");
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (tags_[i] < 0 || tags_[i] > duration_)
        throw ValidationError("TagStream: tag " + std::to_string(tags_[i]) + " outside [0, duration]");
      if (i > 0 && tags_[i] <= tags_[i - 1])
        throw UnsortedInputError("TagStream: tags not strictly increasing at index " + std::to_string(i));
    }
  }

  // Duration defaults to the last tag.
  TagStream(std::uint8_t channel, std::vector<Picoseconds> tags)
      : TagStream(channel, tags, tags.empty() ? 0 : tags.back()) {}

  std::uint8_t channel() const noexcept { return channel_; }
  std::span<const Picoseconds> tags() const noexcept { return tags_; }
  Picoseconds duration() const noexcept { return duration_; }
  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }

  // Mean click rate in Hz.
  double rate() const noexcept {
    return duration_ > 0 ? static_cast<double>(tags_.size()) / ps_to_seconds(duration_) : 0.0;
  }

  bool operator==(const TagStream&) const = default;

private:
  std::uint8_t channel_ = 0;
  std::vector<Picoseconds> tags_;
  Picoseconds duration_ = 0;
};

}  // namespace tpi
