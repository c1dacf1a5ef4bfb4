#pragma once

#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <string>
#include <vector>

namespace glyphforge {

/// Perpendicular-intersection distance between two sampled skeletons.
/// Only d, i_bar, j_bar and q are filled in; kind stays Isolated.
Relation skeleton_distance(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other);

struct ContactIndicators {
  bool start = false;
  bool end = false;
  bool body = false;
};
ContactIndicators contact_indicators(int index, int n);

/// Relation of `s` toward `s_other` given their half-thicknesses.
Relation assign_relation(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other, double tau,
                         double tau_other);

/// Full relation matrix; each unordered pair is computed once and mirrored.
std::vector<std::vector<Relation>> assign_relations(const std::vector<Eigen::Matrix3Xd>& samples,
                                                    double tau);

struct TauEstimate {
  int tau = 1;
  int tau_max = 1;
  /// Argmin landed on the upper bound of the search range.
  bool at_upper_bound = false;
  std::vector<std::size_t> hamming;  // index k holds the distance for tau = k + 1
};

/// Scans integer tau in [1, tau_max] for the rendering closest to the sample
/// in Hamming distance. tau_max defaults to min(W,H)/4; ties resolve to the
/// smallest tau.
TauEstimate estimate_tau(const GrayImage& sample, const Glyph& glyph, int tau_max = 0);

struct SegmentationMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // stroke index, -1 for background
  int label(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  GrayImage mask(int stroke) const;
};

/// Labels each sample foreground pixel with the stroke whose drawn skeleton is
/// nearest (canvas mapping of the sample size). Ties go to the lower index.
SegmentationMap segment_pixels(const GrayImage& sample, const Glyph& glyph);

struct RelationFix {
  int i = 0;
  int j = 0;
  RelationKind old_kind = RelationKind::Isolated;
  RelationKind new_kind = RelationKind::Isolated;
};

/// Two strokes are in contact when some pixel of one is 8-adjacent to a pixel
/// of the other. Isolated pairs in contact become Crossing; non-Isolated pairs
/// without contact become Isolated. Fixes apply to both directions and are
/// returned once per unordered pair (i < j).
std::vector<RelationFix> verify_relations(Glyph& glyph, const SegmentationMap& seg);

/// Pairwise contact matrix used by verify_relations.
std::vector<std::vector<bool>> label_contacts(const SegmentationMap& seg, int strokes);

std::string format_relfix(const Glyph& glyph, const RelationFix& fix);

}  // namespace glyphforge
