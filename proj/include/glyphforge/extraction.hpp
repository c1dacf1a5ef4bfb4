#pragma once

#include <glyphforge/geometry.hpp>
#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>
#include <glyphforge/relations.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace glyphforge {

struct ExtractionParams {
  double beta1 = 2.0;         // energy divisor near contacts
  double beta2 = 1.5;         // contact radius in units of tau
  double alpha = 0.1;         // contour continuity weight
  double beta = 0.4;          // contour curvature weight
  double w_int = 1.0;
  double w_img = 1.0;
  int max_iter = 200;
  double spacing = 3.0;       // initial vertex spacing in pixels
  double move_fraction = 0.02;
  /// Gaussian variance; (tau/2)^2 when unset.
  std::optional<double> variance;
};

/// Energy field: blurred sample plus a skeleton image, saturated at 255.
/// The two parts are kept apart so contact modifications can scale the
/// blurred part alone.
struct EnergyImage {
  FloatImage blurred;
  GrayImage skeleton;

  int width() const { return blurred.width; }
  int height() const { return blurred.height; }
  double value(int x, int y) const;
  FloatImage combined() const;
  GrayImage to_gray() const;
};

EnergyImage build_energy_image(const GrayImage& sample, const GrayImage& skeletons, double variance);

/// One-pixel-wide rendering of a skeleton given in canvas coordinates.
GrayImage skeleton_trace_image(const Skeleton& canvas_stroke, int width, int height);

struct Contour {
  Polyline vertices;
  std::vector<bool> pinned;

  std::size_t size() const { return vertices.size(); }
};

/// Outer boundary of the stroke's labeled region, resampled to `spacing`.
/// Pixels of `bridge` (if given) are added to the region first; a crossing
/// stroke can split a label region in two and the bridge reconnects it.
Contour init_contour(const SegmentationMap& seg, int stroke, double spacing = 3.0,
                     const GrayImage* bridge = nullptr);

/// Inserts `p` as a pinned vertex on the nearest contour edge.
void pin_point(Contour& c, const Vec2& p);

/// Applies one relation's contact modification to the blurred component.
/// `other_stroke` is the mask of the other stroke's labeled pixels. Returns
/// the pass-through point for Continuous and Connecting relations.
std::optional<Vec2> modify_energy(EnergyImage& e, const Relation& relation, double tau,
                                  const GrayImage& other_stroke, const ExtractionParams& params);

double contour_energy(const Contour& c, const FloatImage& field, const ExtractionParams& params);

struct MinimizeResult {
  Contour contour;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // total energy before the first and after every pass
};

MinimizeResult minimize_aacm(const Contour& c, const EnergyImage& e, const ExtractionParams& params);

/// Sample foreground inside the contour, restricted to the connected component
/// that overlaps the stroke's labeled pixels most.
GrayImage extract_stroke(const GrayImage& sample, const Contour& c, const SegmentationMap& seg,
                         int stroke);

struct StrokeExtraction {
  GrayImage mask;
  Contour contour;
  EnergyImage energy;
  std::vector<Vec2> pins;
  bool converged = false;
};

/// Runs the whole per-stroke procedure. `glyph` must carry relations computed
/// in the sample's canvas coordinates; `seg` is its segmentation.
StrokeExtraction extract_glyph_stroke(const GrayImage& sample, const Glyph& glyph,
                                      const SegmentationMap& seg, int stroke, double tau,
                                      const ExtractionParams& params);

void write_contour_text(const std::filesystem::path& path, const Contour& c);

}  // namespace glyphforge
