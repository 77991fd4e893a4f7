#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace lecsum::wav {

struct PcmData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<std::int16_t> samples;  // interleaved

  std::size_t frame_count() const noexcept {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
  double duration_seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(frame_count()) / sample_rate : 0.0;
  }
};

struct Header {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::uint64_t data_bytes = 0;

  double duration_seconds() const noexcept;
};

// 16-bit PCM RIFF/WAVE only. Throws Error(kWriteFailed) on I/O failure.
void write(const std::filesystem::path& path, int sample_rate, int channels,
           std::span<const std::int16_t> interleaved);

// Returns nullopt when the file is not a 16-bit PCM WAVE file.
std::optional<Header> read_header(const std::filesystem::path& path);
std::optional<PcmData> read(const std::filesystem::path& path);

}  // namespace lecsum::wav
