#pragma once

// Tag and histogram file formats.
//
// Binary tag file (little-endian, packed):
//   offset  size  field
//   0       4     magic "TTG1"
//   4       2     version (u16) = 1
//   6       2     reserved (u16) = 0
//   8       8     resolution_ps (u64) > 0
//   16      1     channel (u8)
//   17      8     record_count (u64)
//   25      8*n   timestamps (u64), in units of resolution_ps
//
// Text tag file: one "channel<TAB>timestamp_ps" record per line; lines
// starting with '#' and blank lines are ignored.
//
// Histogram CSV: header "tau_s,g2,sigma,counts", floats with 9 significant digits.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tpi/correlator.hpp"
#include "tpi/error.hpp"
#include "tpi/tag_stream.hpp"

namespace tpi {

inline constexpr std::array<char, 4> kTagMagic{'T', 'T', 'G', '1'};
inline constexpr std::uint16_t kTagVersion = 1;
inline constexpr std::size_t kTagHeaderSize = 25;

// "%.9g" formatting used by every text output.
inline std::string format_float(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace detail

inline std::string encode_tags(const TagStream& stream) {
  std::string out;
  out.reserve(kTagHeaderSize + 8 * stream.size());
  out.append(kTagMagic.data(), kTagMagic.size());
  detail::put_le<std::uint16_t>(out, kTagVersion);
  detail::put_le<std::uint16_t>(out, 0);
  detail::put_le<std::uint64_t>(out, 1);
  detail::put_le<std::uint8_t>(out, stream.channel());
  detail::put_le<std::uint64_t>(out, stream.size());
  for (Picoseconds t : stream.tags()) detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(t));
  return out;
}

// The file carries no duration; the decoded stream ends at its last tag.
inline TagStream decode_tags(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kTagHeaderSize)
    throw FormatError(FormatErrorKind::MalformedHeader, "file shorter than header");
  if (!std::equal(kTagMagic.begin(), kTagMagic.end(), bytes.begin()))
    throw FormatError(FormatErrorKind::MalformedHeader, "bad magic");
  const auto version = detail::get_le<std::uint16_t>(p + 4);
  if (version != kTagVersion)
    throw FormatError(FormatErrorKind::MalformedHeader, "unsupported version " + std::to_string(version));
  const auto resolution = detail::get_le<std::uint64_t>(p + 8);
  if (resolution == 0) throw FormatError(FormatErrorKind::MalformedHeader, "zero resolution");
  const auto channel = detail::get_le<std::uint8_t>(p + 16);
  const auto count = detail::get_le<std::uint64_t>(p + 17);

  const std::size_t payload = bytes.size() - kTagHeaderSize;
  if (count > payload / 8)
    throw FormatError(FormatErrorKind::TruncatedRecord,
                      "header announces " + std::to_string(count) + " records, file holds " +
                          std::to_string(payload / 8));
  if (payload != count * 8)
    throw FormatError(FormatErrorKind::MalformedHeader, "trailing bytes after last record");

  std::vector<Picoseconds> tags(count);
  const std::uint64_t limit = static_cast<std::uint64_t>(std::numeric_limits<Picoseconds>::max()) / resolution;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto raw = detail::get_le<std::uint64_t>(p + kTagHeaderSize + 8 * i);
    if (raw > limit) throw FormatError(FormatErrorKind::MalformedHeader, "timestamp out of range");
    tags[i] = static_cast<Picoseconds>(raw * resolution);
    if (i > 0 && tags[i] <= tags[i - 1])
      throw FormatError(FormatErrorKind::NonMonotonicTimestamp, "record " + std::to_string(i));
  }
  return TagStream(channel, std::move(tags));
}

inline void write_tags(const TagStream& stream, const std::filesystem::path& path) {
  detail::write_file(path, encode_tags(stream));
}

inline TagStream read_tags(const std::filesystem::path& path) {
  return decode_tags(detail::read_file(path));
}

inline std::string encode_text_tags(std::span<const TagStream> streams) {
  std::string out = "# channel\ttimestamp_ps\n";
  for (const auto& s : streams) {
    for (Picoseconds t : s.tags()) {
      out += std::to_string(s.channel());
      out += '\t';
      out += std::to_string(t);
      out += '\n';
    }
  }
  return out;
}

// One stream per channel present, ordered by channel id.
inline std::vector<TagStream> decode_text_tags(std::string_view text) {
  std::map<int, std::vector<Picoseconds>> by_channel;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError(FormatErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": missing tab");
    long long channel = 0;
    long long stamp = 0;
    try {
      std::size_t used = 0;
      channel = std::stoll(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("channel");
      const std::string rest = line.substr(tab + 1);
      stamp = std::stoll(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("timestamp");
    } catch (const std::logic_error&) {
      throw FormatError(FormatErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": bad record");
    }
    if (channel < 0 || channel > 255 || stamp < 0)
      throw FormatError(FormatErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": out of range");
    auto& tags = by_channel[static_cast<int>(channel)];
    if (!tags.empty() && stamp <= tags.back())
      throw FormatError(FormatErrorKind::NonMonotonicTimestamp, "line " + std::to_string(lineno));
    tags.push_back(stamp);
  }
  std::vector<TagStream> out;
  for (auto& [channel, tags] : by_channel) out.emplace_back(static_cast<std::uint8_t>(channel), std::move(tags));
  return out;
}

inline void write_text_tags(std::span<const TagStream> streams, const std::filesystem::path& path) {
  detail::write_file(path, encode_text_tags(streams));
}

inline std::vector<TagStream> read_text_tags(const std::filesystem::path& path) {
  return decode_text_tags(detail::read_file(path));
}

inline std::string histogram_csv(const CorrelationHistogram& h) {
  std::string out = "tau_s,g2,sigma,counts\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out += format_float(h.bin_centers[k]);
    out += ',';
    out += format_float(h.g2[k]);
    out += ',';
    out += format_float(h.sigma[k]);
    out += ',';
    out += std::to_string(h.counts[k]);
    out += '\n';
  }
  return out;
}

inline void write_histogram_csv(const CorrelationHistogram& h, const std::filesystem::path& path) {
  detail::write_file(path, histogram_csv(h));
}

}  // namespace tpi
