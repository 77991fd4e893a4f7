#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace lecsum::image {

// Packed 8-bit RGB, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Area-averaging downscale to `max_width` keeping the aspect ratio; returns
// an unscaled copy when the image already fits.
RgbImage fit_width(int width, int height, std::span<const std::uint8_t> rgb,
                   int max_width);

void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

struct Size {
  int width = 0;
  int height = 0;
};

// Reads dimensions from a PNG IHDR or a binary PPM header.
std::optional<Size> read_size(const std::filesystem::path& path);

}  // namespace lecsum::image
