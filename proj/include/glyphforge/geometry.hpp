#pragma once

#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <array>
#include <vector>

namespace glyphforge {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
double point_segment_distance_sq(const Vec2& p, const Vec2& a, const Vec2& b);

Vec2 quadratic_bezier(const Vec2& p0, const Vec2& p1, const Vec2& p2, double t);

/// Cubic segment with control points (P1, P2, P3, P4).
struct Cubic {
  std::array<Vec2, 4> p;
  Vec2 eval(double t) const;
  /// Polyline with `segments + 1` points at uniform parameter steps.
  Polyline flatten(int segments) const;
};

double polyline_length(const Polyline& pts, bool closed = false);

/// Closed polygon resampled to uniform arc-length spacing (at least
/// `min_vertices` vertices). The first vertex is preserved.
Polyline resample_closed(const Polyline& poly, double spacing, int min_vertices = 8);

/// Douglas-Peucker simplification of a closed polygon. Returns indices into
/// the input of the retained vertices, in order.
std::vector<int> simplify_closed(const Polyline& poly, double epsilon);

/// Minimum distance from p to the closed polygon's edges.
double distance_to_closed(const Vec2& p, const Polyline& poly);

/// Rasterizes a closed polygon: a pixel center is foreground when its winding
/// number is nonzero or it lies within `band` of an edge.
GrayImage fill_polygon(const Polyline& poly, int width, int height, double band = 0.5);

/// Moore-neighbor trace of the outer boundary of the 8-connected component
/// containing the topmost-leftmost foreground pixel. Returned in clockwise
/// order (image coordinates, y down) as pixel centers.
std::vector<PixelPos> trace_boundary(const GrayImage& mask);

/// Dense scalar field.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  FloatImage() = default;
  FloatImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  /// Bilinear lookup with coordinates clamped to the image.
  double sample(double x, double y) const;
};

FloatImage to_float(const GrayImage& img);

/// Normalized 1-D Gaussian of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution with edge clamping.
FloatImage gaussian_blur(const FloatImage& img, double sigma);

/// Exact squared Euclidean distance from every pixel to the nearest site
/// (linear-time lower-envelope transform). Pixels with no site anywhere get
/// +infinity.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& sites, int width,
                                               int height);

/// Zhang-Suen thinning of the foreground.
GrayImage thin_zhang_suen(const GrayImage& mask);

}  // namespace glyphforge
