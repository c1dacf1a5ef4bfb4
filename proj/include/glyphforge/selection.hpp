#pragma once

#include <glyphforge/assembly.hpp>
#include <glyphforge/glyphdata.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace glyphforge {

/// One dataset skeleton as seen by the selection energies.
struct SkeletonRecord {
  Eigen::Matrix3Xd samples;
  StrokeAttributes attributes;
  StrokeContext context;
};

/// Skeleton records of a dataset glyph in grid units. Relations are assigned
/// with half-thickness `dataset_tau` when the glyph has none.
std::vector<SkeletonRecord> skeleton_records(const Glyph& g, double dataset_tau, int n);

/// Distance scale used to normalize f_e: the design-grid diagonal.
double grid_diagonal();

/// Mean over validation skeletons of the best E_s + E_a against the candidate,
/// divided by `scale`. Infinity for an empty candidate.
double f_e(const std::vector<SkeletonRecord>& candidate, const std::vector<SkeletonRecord>& validation,
           double scale = 1.0, double lambda_attr = 1.0);

/// Strokes plus non-Isolated ordered relation entries, per glyph.
struct ComplexityCounts {
  int strokes = 0;
  int crossing = 0;
  int connecting = 0;  // Continuous, Connecting and Connected
};
ComplexityCounts complexity(const Glyph& g);

/// (strokes + crossings + connections) / normalizer over the candidate glyphs.
double f_r(const std::vector<const Glyph*>& candidate, double normalizer = 1.0);

double f_selection(double fe, double fr, double alpha);

struct SelectionParams {
  int k = 15;
  double dataset_tau = 4.0;  // grid units
  int samples = kDefaultSamples;
  double lambda_attr = 1.0;
};

/// Validation set with every pairwise skeleton energy precomputed.
class SelectionProblem {
 public:
  SelectionProblem(std::vector<Glyph> validation, const SelectionParams& params);

  std::size_t size() const { return glyphs_.size(); }
  const Glyph& glyph(std::size_t i) const { return glyphs_[i]; }
  int k() const { return params_.k; }
  std::size_t validation_strokes() const { return strokes_; }
  int max_strokes() const { return max_strokes_; }

  double fe(const std::vector<int>& ids) const;
  double fr(const std::vector<int>& ids) const;
  double energy(const std::vector<int>& ids, double alpha) const;

 private:
  std::vector<Glyph> glyphs_;
  SelectionParams params_;
  std::size_t strokes_ = 0;
  int max_strokes_ = 1;
  // best_[c][b]: min over strokes of character c of E_s + E_a against validation stroke b.
  std::vector<std::vector<double>> best_;
  std::vector<int> complexity_;
};

struct CandidateSet {
  std::vector<int> ids;  // sorted indices into the validation set
  double energy = std::numeric_limits<double>::infinity();
};

struct GaConfig {
  int population = 170;
  int survivors = 20;
  int offspring = 150;
  double mutation_rate = 0.05;
  int max_generations = 1000;
  int plateau = 50;
  std::uint64_t seed = 1;
  /// Called with the full population at the start of every generation.
  std::function<void(int, const std::vector<CandidateSet>&)> observer;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
};

struct GaResult {
  CandidateSet best;
  std::vector<GenerationStats> trace;
};

GaResult run_ga(const SelectionProblem& problem, double alpha, const GaConfig& config);

/// Exhaustive minimum over all k-subsets (small instances only).
CandidateSet exhaustive_best(const SelectionProblem& problem, double alpha);

}  // namespace glyphforge
