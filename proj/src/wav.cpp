#include "lecsum/wav.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "lecsum/error.hpp"

namespace lecsum::wav {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff),
                                 static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xff),
                                 static_cast<char>((v >> 8) & 0xff)};
  out.write(b.data(), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

// Walks the chunk list; leaves `in` positioned at the start of the data chunk.
std::optional<Header> parse(std::ifstream& in) {
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12)) return std::nullopt;
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0) {
    return std::nullopt;
  }
  Header h;
  bool have_fmt = false;
  for (;;) {
    unsigned char chunk[8];
    if (!in.read(reinterpret_cast<char*>(chunk), 8)) return std::nullopt;
    const std::uint32_t size = get_u32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) return std::nullopt;
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) return std::nullopt;
      if (get_u16(fmt.data()) != 1) return std::nullopt;  // PCM only
      h.channels = get_u16(fmt.data() + 2);
      h.sample_rate = static_cast<int>(get_u32(fmt.data() + 4));
      h.bits_per_sample = get_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt || h.bits_per_sample != 16 || h.channels <= 0 ||
          h.sample_rate <= 0) {
        return std::nullopt;
      }
      h.data_bytes = size;
      return h;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
  }
}

}  // namespace

double Header::duration_seconds() const noexcept {
  const std::uint64_t frame_bytes =
      static_cast<std::uint64_t>(channels) * (bits_per_sample / 8);
  if (frame_bytes == 0 || sample_rate <= 0) return 0.0;
  return static_cast<double>(data_bytes / frame_bytes) / sample_rate;
}

void write(const std::filesystem::path& path, int sample_rate, int channels,
           std::span<const std::int16_t> interleaved) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kWriteFailed, "cannot open " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, data_bytes);
  std::vector<char> bytes(interleaved.size() * 2);
  for (std::size_t i = 0; i < interleaved.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(interleaved[i]);
    bytes[2 * i] = static_cast<char>(v & 0xff);
    bytes[2 * i + 1] = static_cast<char>(v >> 8);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kWriteFailed, "short write to " + path.string());
}

std::optional<Header> read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return parse(in);
}

std::optional<PcmData> read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const auto header = parse(in);
  if (!header) return std::nullopt;
  std::vector<unsigned char> bytes(header->data_bytes);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  PcmData pcm;
  pcm.sample_rate = header->sample_rate;
  pcm.channels = header->channels;
  pcm.samples.resize(bytes.size() / 2);
  for (std::size_t i = 0; i < pcm.samples.size(); ++i) {
    pcm.samples[i] = static_cast<std::int16_t>(get_u16(&bytes[2 * i]));
  }
  return pcm;
}

}  // namespace lecsum::wav
