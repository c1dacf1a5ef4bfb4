#pragma once

#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace glyphforge {

/// A programmatic font: an affine distortion of the design grid plus a brush
/// whose radius (canvas pixels) varies linearly from stroke start to end.
struct SyntheticFont {
  std::string name;
  Eigen::Matrix3d grid_transform = Eigen::Matrix3d::Identity();
  double radius_start = 10.0;
  double radius_end = 10.0;

  bool uniform_brush() const { return radius_start == radius_end; }
};

const std::vector<SyntheticFont>& synthetic_fonts();
/// Throws UsageError for unknown names.
const SyntheticFont& synthetic_font(const std::string& name);

/// Dataset glyph with every control point mapped through the font's grid
/// transform. Relations and groups are dropped.
Glyph font_skeleton(const Glyph& dataset, const SyntheticFont& font);

/// Ink (255) on background (0).
GrayImage render_font_strokes(const std::vector<Skeleton>& grid_strokes, const SyntheticFont& font,
                              int width, int height);
GrayImage render_font_glyph(const Glyph& adjusted, const SyntheticFont& font, int width, int height);

/// Fixed sample and held-out splits of the bundled dataset.
const std::vector<char32_t>& fixture_sample_codepoints();
const std::vector<char32_t>& fixture_heldout_codepoints();

struct FontFixturePaths {
  std::filesystem::path root;
  std::filesystem::path samples() const { return root / "samples"; }
  std::filesystem::path adjusted() const { return root / "adjusted"; }
  std::filesystem::path truth() const { return root / "truth"; }
};

/// Writes <out>/<font>/: samples/ and adjusted/ for every dataset glyph,
/// truth/ for the sample and held-out splits, the two split lists and a
/// pipeline.conf. Images are dark ink on a light background.
void make_fixtures(const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir,
                   int canvas = 500);

}  // namespace glyphforge
