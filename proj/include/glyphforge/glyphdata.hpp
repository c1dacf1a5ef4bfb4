#pragma once

#include <glyphforge/geometry.hpp>
#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace glyphforge {

/// Side length of the square design grid that skeleton coordinates live in.
inline constexpr double kGridSize = 200.0;
inline constexpr int kDefaultSamples = 32;

enum class LineType { Straight, Curve, Vertical };

/// Rendered geometry for a raw line-type code: 1 Straight, 2 Curve, 3..6 Vertical.
LineType render_type(int line_type_code);
int required_points(int line_type_code);

/// One stroke: raw attributes plus control points in design-grid units.
struct Skeleton {
  int line_type = 1;
  int start_shape = 0;
  int end_shape = 0;
  std::vector<Vec2> points;

  LineType type() const { return render_type(line_type); }
  bool same_attributes(const Skeleton& o) const {
    return line_type == o.line_type && start_shape == o.start_shape && end_shape == o.end_shape;
  }
  /// Homogeneous 3 x n samples, uniform in arc length from first to last point.
  Eigen::Matrix3Xd samples(int n = kDefaultSamples) const;
  /// Dense polyline of the drawn path with segments no longer than `max_step`.
  Polyline path(double max_step) const;
  double length() const;

  bool operator==(const Skeleton& o) const {
    return line_type == o.line_type && start_shape == o.start_shape && end_shape == o.end_shape &&
           points == o.points;
  }
};

/// Throws DataError when point count or shape codes are invalid.
void validate_skeleton(const Skeleton& sk);

Eigen::Matrix3Xd resample_skeleton(const Skeleton& sk, int n);

enum class RelationKind { Continuous, Connecting, Connected, Crossing, Isolated };

const char* relation_name(RelationKind kind);
std::optional<RelationKind> parse_relation_name(const std::string& s);

/// Relation of stroke i toward stroke j.
struct Relation {
  RelationKind kind = RelationKind::Isolated;
  double d = std::numeric_limits<double>::infinity();
  int i_bar = -1;
  int j_bar = -1;
  std::optional<Vec2> q;

  bool operator==(const Relation&) const = default;
};

/// Swaps the roles of the two strokes (Connecting <-> Connected, i_bar <-> j_bar).
Relation mirrored(const Relation& r);

struct Glyph {
  char32_t codepoint = 0;
  std::vector<Skeleton> strokes;
  /// relations[i][j] for i != j; empty until assigned.
  std::vector<std::vector<Relation>> relations;
  /// Partition of stroke indices; empty until grouped.
  std::vector<std::vector<int>> groups;

  std::size_t size() const { return strokes.size(); }
};

std::string codepoint_label(char32_t cp);            // "U+53E3"
std::optional<char32_t> parse_codepoint_label(const std::string& s);
std::string utf8_encode(char32_t cp);
/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

Glyph parse_glyph_text(const std::string& text, char32_t codepoint = 0);
/// Codepoint is taken from a `U+XXXX.gd` file name when present.
Glyph parse_glyph_file(const std::filesystem::path& path);
std::string serialize_glyph(const Glyph& g);
void write_glyph_file(const std::filesystem::path& path, const Glyph& g);

/// All `U+XXXX.gd` files of a directory, ordered by codepoint.
std::vector<Glyph> load_glyph_dir(const std::filesystem::path& dir);

/// Uniform scale plus centering from the design grid onto a W x H canvas.
struct CanvasMapping {
  double scale = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;

  static CanvasMapping for_canvas(int width, int height);
  Vec2 to_canvas(const Vec2& p) const { return {p.x() * scale + offset_x, p.y() * scale + offset_y}; }
  Vec2 to_grid(const Vec2& p) const {
    return {(p.x() - offset_x) / scale, (p.y() - offset_y) / scale};
  }
  Eigen::Matrix3d matrix() const;
  Skeleton to_canvas(const Skeleton& sk) const;
  Eigen::Matrix3Xd to_canvas(const Eigen::Matrix3Xd& samples) const;
};

struct RasterGlyph {
  GrayImage pixels;
  double tau = 1.0;
};

/// Exact distance from every pixel center to the nearest drawn skeleton path
/// (canvas coordinates). Pixels farther than `cutoff` are +infinity.
FloatImage skeleton_distance_field(const std::vector<Skeleton>& canvas_strokes, int width,
                                   int height, double cutoff);

/// Union of the strokes' paths dilated by a disk of radius tau (pixels).
/// Throws DataError when a mapped control point falls outside the canvas.
RasterGlyph rasterize_glyph(const Glyph& g, double tau, int width, int height);
GrayImage rasterize_strokes(const std::vector<Skeleton>& grid_strokes, double tau, int width,
                            int height);

}  // namespace glyphforge
