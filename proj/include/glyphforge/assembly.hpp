#pragma once

#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace glyphforge {

struct AffineFit {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  /// Source points were (near) collinear and a similarity was fitted instead.
  bool similarity = false;
};

/// Affine T minimizing sum ||dst_i - T src_i||^2 over homogeneous columns.
/// Collinear sources fall back to a similarity (rotation, uniform scale,
/// translation). Throws DataError with fewer than 2 distinct source points.
AffineFit fit_affine_detailed(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst);
Eigen::Matrix3d fit_affine(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst);

/// Width and height of a skeleton set's samples (any units).
struct Extent {
  double width = 0.0;
  double height = 0.0;
};
Extent samples_extent(const std::vector<Eigen::Matrix3Xd>& samples);

struct SizePair {
  Extent dataset;
  Extent adjusted;
};

/// Elementwise mean of diag(Wa/Wd, Ha/Hd) with translation (Iw Wa/(2Wd), Ih Ha/(2Hd)).
Eigen::Matrix3d estimate_t_sz(const std::vector<SizePair>& samples, double out_w, double out_h);

/// Connected components over non-Isolated relations; groups ordered by their
/// smallest member.
std::vector<std::vector<int>> group_skeletons(const Glyph& g);

/// One sample character for affine estimation: dataset samples in centered
/// output coordinates, adjusted samples in output coordinates, and the
/// sample's stroke groups.
struct AffineSample {
  std::vector<Eigen::Matrix3Xd> dataset;
  std::vector<Eigen::Matrix3Xd> adjusted;
  std::vector<std::vector<int>> groups;
};

struct AffineEstimate {
  Eigen::Matrix3d t_aff = Eigen::Matrix3d::Identity();
  std::size_t strokes_used = 0;
  std::size_t groups_used = 0;
  std::size_t groups_skipped = 0;  // collinear groups left out
};

/// Stroke-weighted mean of per-group fits from T_sz * dataset to adjusted.
/// With `per_stroke` each stroke is fitted alone instead of its group.
AffineEstimate estimate_t_aff(const std::vector<AffineSample>& samples, const Eigen::Matrix3d& t_sz,
                              bool per_stroke = false);

struct TransformPair {
  Eigen::Matrix3d t_sz = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d t_aff = Eigen::Matrix3d::Identity();
};

Eigen::Matrix3Xd transform_skeleton(const Eigen::Matrix3Xd& s, const TransformPair& pair);

/// Dataset samples of one stroke moved so the output canvas center is the origin.
Eigen::Matrix3Xd centered_dataset_samples(const Skeleton& sk, int out_w, int out_h, int n);

struct StrokeAttributes {
  int line_type = 1;
  int start_shape = 0;
  int end_shape = 0;

  static StrokeAttributes of(const Skeleton& sk) { return {sk.line_type, sk.start_shape, sk.end_shape}; }
  int differences(const StrokeAttributes& o) const {
    return (line_type != o.line_type) + (start_shape != o.start_shape) + (end_shape != o.end_shape);
  }
  bool operator==(const StrokeAttributes&) const = default;
};

/// Neighbor skeletons attached to a stroke's start and end points.
struct StrokeContext {
  std::optional<Eigen::Matrix3Xd> start;
  std::optional<Eigen::Matrix3Xd> end;
};

/// Context of stroke i from a glyph's relations; `samples` are the glyph's
/// samples in the frame energies are compared in.
StrokeContext stroke_context(const Glyph& g, const std::vector<Eigen::Matrix3Xd>& samples, int i);

inline constexpr double kMissingContextEnergy = 50.0;

/// Entrywise L1 of a - b divided by the sample count.
double mean_l1(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b);

double energy_es(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other,
                 const StrokeAttributes& attrs, const StrokeAttributes& attrs_other,
                 double lambda_attr = 1.0);
double energy_ea(const StrokeContext& c, const StrokeContext& c_other);

/// Restored stroke image with the skeletons it came from.
struct StrokeAsset {
  std::string id;
  char32_t codepoint = 0;
  int stroke = 0;
  GrayImage image;
  Eigen::Matrix3Xd adjusted;  // skeleton fitted to the sample, output coordinates
  Eigen::Matrix3Xd dataset;   // matching dataset skeleton, output coordinates
  StrokeAttributes attributes;
  StrokeContext context;      // dataset context, output coordinates
};

struct TargetStroke {
  Eigen::Matrix3Xd transformed;  // T_aff T_sz S
  Eigen::Matrix3Xd dataset;      // S in output coordinates
  StrokeAttributes attributes;
  StrokeContext context;
};

double deployment_energy(const StrokeAsset& asset, const TargetStroke& target, double lambda_attr = 1.0);

struct Selection {
  std::size_t index = 0;
  double energy = 0.0;
};

inline constexpr double kSelectionTieTolerance = 1e-6;

/// Lowest-energy asset. Energies within kSelectionTieTolerance of the lowest
/// count as tied; among those the asset whose skeleton sits closest to the
/// target (mean L1, no fitting) wins, then the lowest index.
Selection select_stroke(const TargetStroke& target, const std::vector<StrokeAsset>& assets,
                        double lambda_attr = 1.0);

/// Transform applied to an asset image when deploying it on a target
/// skeleton. Collinear sources are rotated, translated and stretched along
/// their axis only, so stroke width is preserved.
Eigen::Matrix3d deployment_transform(const Eigen::Matrix3Xd& asset_skeleton,
                                     const Eigen::Matrix3Xd& target_skeleton);

/// Nearest-neighbor inverse warp of the foreground onto a width x height
/// canvas. Throws DataError when nothing lands on the canvas.
GrayImage warp_foreground(const GrayImage& src, const Eigen::Matrix3d& t, int width, int height);

struct ComposeResult {
  GrayImage image;
  std::vector<std::string> errors;  // one entry per stroke that failed to deploy
};

ComposeResult compose_glyph(const std::vector<TargetStroke>& targets,
                            const std::vector<const StrokeAsset*>& selections, int width, int height);

}  // namespace glyphforge
