#pragma once

#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline std::filesystem::path dataset_dir() { return std::filesystem::path(GLYPHFORGE_DATA_DIR) / "dataset"; }

inline glyphforge::Glyph dataset_glyph(const std::string& label) {
  return glyphforge::parse_glyph_file(dataset_dir() / (label + ".gd"));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("glyphforge_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline glyphforge::Skeleton line(double x0, double y0, double x1, double y1, int start = 2, int end = 2) {
  glyphforge::Skeleton s;
  s.line_type = 1;
  s.start_shape = start;
  s.end_shape = end;
  s.points = {{x0, y0}, {x1, y1}};
  return s;
}

inline glyphforge::Glyph glyph_of(std::vector<glyphforge::Skeleton> strokes, char32_t cp = 0x5341) {
  glyphforge::Glyph g;
  g.codepoint = cp;
  g.strokes = std::move(strokes);
  return g;
}

inline glyphforge::GrayImage filled_rect(int w, int h, int x0, int y0, int x1, int y1) {
  glyphforge::GrayImage img(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) img.at(x, y) = 255;
  return img;
}

}  // namespace testing
