#pragma once

#include <glyphforge/geometry.hpp>
#include <glyphforge/image.hpp>

#include <filesystem>
#include <vector>

namespace glyphforge {

struct RestorationParams {
  double gamma = 0.4;
  double simplify_epsilon = 1.0;   // polygon simplification tolerance, px
  double corner_angle_deg = 60.0;  // turn angle that forces a breakpoint
  double fit_tolerance = 1.0;      // max deviation of a fitted curve, px
  double max_curve_length = 10.0;  // longer boundary pieces are split
};

/// Closed chain of cubic segments.
struct BezierChain {
  std::vector<Cubic> curves;
  Polyline flatten(int segments_per_curve = 8) const;
};

/// Curves and breakpoints of a vectorized outline, with the traced boundary
/// it was fitted to.
struct Vectorization {
  BezierChain chain;
  Polyline boundary;
  std::vector<int> corners;  // indices into boundary
};

Vectorization vectorize_outline(const GrayImage& stroke, const RestorationParams& params = {});
BezierChain vectorize_contour(const GrayImage& stroke, const RestorationParams& params = {});

/// Least-squares cubic through `pts` with fixed end points.
Cubic fit_cubic(const Polyline& pts);

/// Smallest distance between p and the curve, from 32 parameter samples.
double curve_point_distance(const Cubic& c, const Vec2& p);

struct ContactPoint {
  Vec2 p;
  double radius;
};

/// Maximal runs of consecutive surviving curves. When nothing is removed the
/// single run is the whole chain and `closed` is set.
struct ChainRuns {
  std::vector<std::vector<Cubic>> runs;
  bool closed = false;
  std::size_t removed = 0;
};

/// Drops every curve closer than `tau` to a contact point.
ChainRuns remove_damaged(const BezierChain& chain, const std::vector<Vec2>& contact_pts, double tau);
/// Same with a radius per contact point.
ChainRuns remove_damaged(const BezierChain& chain, const std::vector<ContactPoint>& contacts);

/// Gap-filling curve from `p1` (end of one run) to `p4` (start of the next).
/// Handles extend along p1 - p1_ref and p4 - p4_ref.
Cubic bridge_gap(const Vec2& p1, const Vec2& p1_ref, const Vec2& p4, const Vec2& p4_ref,
                 double gamma);
/// Picks the references as the nearest remaining control points that do not
/// coincide with the gap edges.
Cubic bridge_gap(const Cubic& end_a, const Cubic& end_b, const std::vector<Vec2>& remaining,
                 double gamma);

/// Closes every gap between consecutive runs with a bridge.
BezierChain bridge_runs(const ChainRuns& runs, double gamma);

/// Fills the closed outline. Throws on an open chain or zero area.
GrayImage render_restored(const BezierChain& chain, int width, int height);

/// Full restoration; throws DataError("stroke unrecoverable") when every
/// curve is damaged.
GrayImage restore_stroke(const GrayImage& stroke, const std::vector<ContactPoint>& contacts,
                         const RestorationParams& params = {});

void write_svg(const std::filesystem::path& path, const std::vector<BezierChain>& outlines,
               int width, int height);

}  // namespace glyphforge
