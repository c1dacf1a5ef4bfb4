#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace glyphforge {

struct PixelPos {
  int x = 0;
  int y = 0;
  bool operator==(const PixelPos&) const = default;
};

/// 8-bit single channel raster. Binary masks use 0 for background and 255
/// for foreground; any value >= 128 counts as foreground.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }
  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  bool foreground(int x, int y) const { return at(x, y) >= 128; }

  std::span<std::uint8_t> pixels() noexcept { return data_; }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }

  std::size_t count_foreground() const;
  bool has_foreground() const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Interleaved 8-bit RGB raster, used for overlays.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  bool operator==(const RgbImage&) const = default;
};

/// Bounding box of foreground pixels, inclusive. Empty when no foreground.
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool empty() const noexcept { return x1 < x0 || y1 < y0; }
};
PixelBox foreground_bounds(const GrayImage& img);

// File I/O. Readers accept 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette)
// and binary PGM (P5); color input is converted to luminance.
GrayImage read_image(const std::filesystem::path& path);
GrayImage decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
/// Picks PNG or PGM from the file extension.
void write_image(const std::filesystem::path& path, const GrayImage& img);

/// Reads a glyph sample and normalizes polarity so ink is 255: images whose
/// border is predominantly bright are treated as dark-on-light and inverted.
GrayImage read_sample_image(const std::filesystem::path& path);
GrayImage normalize_polarity(GrayImage img);

GrayImage binarize(const GrayImage& img, std::uint8_t threshold = 128);
GrayImage invert(const GrayImage& img);

/// Box-filter (area average) resampling. Exact for integer downscale factors.
GrayImage resize_area(const GrayImage& img, int width, int height);

/// |A ∩ B| / |A ∪ B| over foreground pixels; 1 when both are empty.
double jaccard(const GrayImage& a, const GrayImage& b);
std::size_t hamming_distance(const GrayImage& a, const GrayImage& b);

/// 8-connected component labeling of foreground pixels.
struct Components {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> labels;  // -1 for background
  int label(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};
Components connected_components(const GrayImage& mask);

/// Mask of the single component with the given label.
GrayImage component_mask(const Components& comps, int label);

}  // namespace glyphforge
