#include <glyphforge/image.hpp>

#include <glyphforge/error.hpp>

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace glyphforge {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw UsageError("negative image size");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::size_t GrayImage::count_foreground() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](std::uint8_t v) { return v >= 128; }));
}

bool GrayImage::has_foreground() const {
  return std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v >= 128; });
}

RgbImage::RgbImage(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h) {
  data.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  data[i] = r;
  data[i + 1] = g;
  data[i + 2] = b;
}

PixelBox foreground_bounds(const GrayImage& img) {
  PixelBox box{img.width(), img.height(), -1, -1};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.foreground(x, y)) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  if (box.x1 < 0) return PixelBox{};
  return box;
}

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_ws();
    int v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw DataError("malformed PGM header");
    return v;
  };
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (maxval <= 0 || maxval > 255) throw DataError("unsupported PGM maxval");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + need) throw DataError("truncated PGM data");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < need; ++i) {
    img.pixels()[i] = static_cast<std::uint8_t>(bytes[pos + i] * 255 / maxval);
  }
  return img;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError(std::string("PNG decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  GrayImage img(static_cast<int>(image.width), static_cast<int>(image.height));
  // Composite any alpha onto black so transparent regions read as background.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, img.pixels().data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(std::string("PNG decode failed: ") + image.message);
  }
  return img;
}

std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* data, int w, int h,
                                         png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, data, 0, nullptr)) {
    throw Error(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, data, 0, nullptr)) {
    throw Error(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kPngSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw DataError("unrecognized image format");
}

GrayImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  return encode_png_raw(img.pixels().data(), img.width(), img.height(), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  return encode_png_raw(img.data.data(), img.width, img.height, PNG_FORMAT_RGB);
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  write_file_bytes(path, encode_png(img));
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  write_file_bytes(path, encode_png(img));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ostringstream header;
  header << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  bytes.insert(bytes.end(), img.pixels().begin(), img.pixels().end());
  write_file_bytes(path, bytes);
}

void write_image(const std::filesystem::path& path, const GrayImage& img) {
  if (path.extension() == ".pgm") {
    write_pgm(path, img);
  } else {
    write_png(path, img);
  }
}

GrayImage normalize_polarity(GrayImage img) {
  if (img.empty()) return img;
  std::size_t bright = 0, total = 0;
  auto visit = [&](int x, int y) {
    ++total;
    if (img.at(x, y) >= 128) ++bright;
  };
  for (int x = 0; x < img.width(); ++x) {
    visit(x, 0);
    visit(x, img.height() - 1);
  }
  for (int y = 1; y + 1 < img.height(); ++y) {
    visit(0, y);
    visit(img.width() - 1, y);
  }
  if (bright * 2 > total) return invert(img);
  return img;
}

GrayImage read_sample_image(const std::filesystem::path& path) {
  return binarize(normalize_polarity(read_image(path)));
}

GrayImage binarize(const GrayImage& img, std::uint8_t threshold) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 255 : 0;
  return out;
}

GrayImage invert(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<std::uint8_t>(255 - src[i]);
  return out;
}

GrayImage resize_area(const GrayImage& img, int width, int height) {
  if (width <= 0 || height <= 0) throw UsageError("resize target must be positive");
  GrayImage out(width, height);
  if (img.empty()) return out;
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int oy = 0; oy < height; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    for (int ox = 0; ox < width; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      double acc = 0.0, area = 0.0;
      for (int y = static_cast<int>(y0); y < static_cast<int>(std::ceil(y1)) && y < img.height(); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        if (wy <= 0) continue;
        for (int x = static_cast<int>(x0); x < static_cast<int>(std::ceil(x1)) && x < img.width(); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          if (wx <= 0) continue;
          acc += wx * wy * img.at(x, y);
          area += wx * wy;
        }
      }
      out.at(ox, oy) = static_cast<std::uint8_t>(std::clamp(std::lround(acc / area), 0L, 255L));
    }
  }
  return out;
}

double jaccard(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw UsageError("jaccard: size mismatch");
  std::size_t inter = 0, uni = 0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const bool fa = pa[i] >= 128, fb = pb[i] >= 128;
    inter += (fa && fb);
    uni += (fa || fb);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t hamming_distance(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw UsageError("hamming: size mismatch");
  std::size_t diff = 0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) diff += ((pa[i] >= 128) != (pb[i] >= 128));
  return diff;
}

Components connected_components(const GrayImage& mask) {
  Components c;
  c.width = mask.width();
  c.height = mask.height();
  c.labels.assign(static_cast<std::size_t>(c.width) * c.height, -1);
  std::vector<PixelPos> stack;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (!mask.foreground(x, y) || c.label(x, y) >= 0) continue;
      const int id = c.count++;
      c.labels[static_cast<std::size_t>(y) * c.width + x] = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const PixelPos p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx, ny = p.y + dy;
            if (!mask.in_bounds(nx, ny) || !mask.foreground(nx, ny)) continue;
            auto& l = c.labels[static_cast<std::size_t>(ny) * c.width + nx];
            if (l >= 0) continue;
            l = id;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  return c;
}

GrayImage component_mask(const Components& comps, int label) {
  GrayImage out(comps.width, comps.height);
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    if (comps.labels[i] == label) out.pixels()[i] = 255;
  }
  return out;
}

}  // namespace glyphforge
