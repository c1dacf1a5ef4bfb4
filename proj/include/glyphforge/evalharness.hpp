#pragma once

#include <glyphforge/image.hpp>

#include <string>
#include <vector>

namespace glyphforge {

/// Edge pixels on a width x height canvas.
struct EdgeSet {
  int width = 0;
  int height = 0;
  std::vector<PixelPos> points;

  bool empty() const noexcept { return points.empty(); }
  GrayImage to_mask() const;
};

EdgeSet edge_set_from_mask(const GrayImage& mask);

/// Mean distance from each point of `a` to its nearest point of `b`.
double directed_chamfer(const EdgeSet& a, const EdgeSet& b);
/// d(A,B) + d(B,A), via an exact distance transform.
double chamfer(const EdgeSet& a, const EdgeSet& b);
/// Same quantity by exhaustive pairwise search. O(|A||B|).
double chamfer_brute_force(const EdgeSet& a, const EdgeSet& b);

struct CannyParams {
  double sigma = 1.0;
  double low = 50.0;
  double high = 150.0;
};

EdgeSet canny_edges(const GrayImage& img, const CannyParams& params = {});

inline constexpr int kEvalSize = 100;

/// Area-resamples to the evaluation size and runs the edge detector.
EdgeSet eval_edges(const GrayImage& img, const CannyParams& params = {});

struct LabeledEdges {
  std::string label;
  EdgeSet edges;
};

struct Recognition {
  double accuracy = 0.0;
  std::vector<std::string> predicted;
  /// distances[t][r]: test t against train r. Infinite when either is empty.
  std::vector<std::vector<double>> distances;
};

/// 1-nearest-neighbor labeling under the symmetric chamfer distance. Ties go
/// to the earliest training entry.
Recognition recognize(const std::vector<LabeledEdges>& test, const std::vector<LabeledEdges>& train);

}  // namespace glyphforge
