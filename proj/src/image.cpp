#include "lecsum/image.hpp"

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "lecsum/error.hpp"

namespace lecsum::image {
namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = ::crc32(0L, out.data() + type_pos,
                            static_cast<uInt>(4 + data.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kWriteFailed, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kWriteFailed, "short write to " + path.string());
}

}  // namespace

RgbImage fit_width(int width, int height, std::span<const std::uint8_t> rgb,
                   int max_width) {
  RgbImage out;
  if (max_width <= 0 || width <= max_width) {
    out.width = width;
    out.height = height;
    out.pixels.assign(rgb.begin(), rgb.end());
    return out;
  }
  out.width = max_width;
  out.height = std::max(1, static_cast<int>(std::lround(
                               static_cast<double>(height) * max_width / width)));
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = 0; y < out.height; ++y) {
    const int y0 = y * height / out.height;
    const int y1 = std::max(y0 + 1, (y + 1) * height / out.height);
    for (int x = 0; x < out.width; ++x) {
      const int x0 = x * width / out.width;
      const int x1 = std::max(x0 + 1, (x + 1) * width / out.width);
      std::array<std::uint64_t, 3> sum{};
      for (int sy = y0; sy < y1; ++sy) {
        const std::uint8_t* row = rgb.data() + (static_cast<std::size_t>(sy) * width) * 3;
        for (int sx = x0; sx < x1; ++sx) {
          for (int c = 0; c < 3; ++c) sum[c] += row[sx * 3 + c];
        }
      }
      const auto n = static_cast<std::uint64_t>((y1 - y0) * (x1 - x0));
      std::uint8_t* dst = out.pixels.data() + (static_cast<std::size_t>(y) * out.width + x) * 3;
      for (int c = 0; c < 3; ++c) dst[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    const auto* row = img.pixels.data() + stride * y;
    raw.insert(raw.end(), row, row + stride);
  }
  uLongf packed_size = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (::compress2(packed.data(), &packed_size, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorCode::kWriteFailed, "zlib compression failed");
  }
  packed.resize(packed_size);

  std::vector<std::uint8_t> file = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit truecolor
  put_chunk(file, "IHDR", ihdr);
  put_chunk(file, "IDAT", packed);
  put_chunk(file, "IEND", {});
  write_bytes(path, file);
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> file(header.begin(), header.end());
  file.insert(file.end(), img.pixels.begin(), img.pixels.end());
  write_bytes(path, file);
}

std::optional<Size> read_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::array<unsigned char, 24> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = in.gcount();
  if (got >= 24 && head[0] == 0x89 && std::memcmp(head.data() + 1, "PNG", 3) == 0) {
    auto be32 = [&](std::size_t o) {
      return static_cast<int>((head[o] << 24) | (head[o + 1] << 16) |
                              (head[o + 2] << 8) | head[o + 3]);
    };
    return Size{be32(16), be32(20)};
  }
  if (got >= 2 && head[0] == 'P' && head[1] == '6') {
    in.clear();
    in.seekg(2);
    Size s;
    if (in >> s.width >> s.height) return s;
  }
  return std::nullopt;
}

}  // namespace lecsum::image
