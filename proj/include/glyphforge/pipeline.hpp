#pragma once

#include <glyphforge/asset_store.hpp>
#include <glyphforge/assembly.hpp>
#include <glyphforge/config.hpp>
#include <glyphforge/evalharness.hpp>
#include <glyphforge/extraction.hpp>
#include <glyphforge/restoration.hpp>
#include <glyphforge/selection.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace glyphforge {

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception (lowest
/// index) is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

ExtractionParams extraction_params(const PipelineConfig& cfg);
RestorationParams restoration_params(const PipelineConfig& cfg);

/// Contact points that mark damaged outline pieces of stroke k: the other
/// stroke's skeleton for Crossing/Connected relations, the intersection point
/// otherwise. `glyph` carries relations; coordinates are canvas pixels.
std::vector<ContactPoint> restoration_contacts(const Glyph& glyph, int k, double tau, double beta2, int width,
                                               int height);

struct SampleExtraction {
  StoredSample stored;
  std::vector<std::string> relfix;
  std::vector<std::string> notes;
};

/// Relations, extraction and restoration for one sample image and its
/// adjusted glyph. Debug dumps go to `debug_dir` when it is nonempty.
SampleExtraction extract_sample(const GrayImage& sample, const Glyph& adjusted, const PipelineConfig& cfg,
                                const std::filesystem::path& debug_dir = {});

/// Dataset glyphs by codepoint.
using Dataset = std::map<char32_t, Glyph>;
Dataset load_dataset(const std::filesystem::path& dir);

/// Relations of a dataset glyph in canvas coordinates.
Glyph with_dataset_relations(const Glyph& g, const PipelineConfig& cfg);

struct Generator {
  TransformPair transforms;
  std::vector<StrokeAsset> assets;
  std::size_t size_samples_used = 0;
  std::vector<std::string> notes;
};

Generator build_generator(const AssetStore& store, const Dataset& dataset, const PipelineConfig& cfg);

struct GeneratedGlyph {
  char32_t codepoint = 0;
  GrayImage image;  // ink 255
  std::vector<std::string> asset_ids;
  std::vector<double> energies;
  std::vector<std::string> errors;
  std::vector<TargetStroke> targets;
};

std::vector<TargetStroke> target_strokes(const Glyph& dataset_glyph, const TransformPair& t,
                                         const PipelineConfig& cfg);
GeneratedGlyph generate_glyph(const Generator& gen, const Glyph& dataset_glyph, const PipelineConfig& cfg);

// Commands. Each appends human-readable lines to `log` and returns the lines
// that belong in the report.

struct StageResult {
  std::vector<std::string> report;
  bool reused = false;
};

struct SelectionOutcome {
  StageResult stage;
  std::vector<char32_t> chosen;
};

SelectionOutcome cmd_select(const PipelineConfig& cfg, std::ostream& log);
/// `subset` restricts extraction to those codepoints; empty means every pair found.
StageResult cmd_extract(const PipelineConfig& cfg, const std::vector<char32_t>& subset, std::ostream& log);
StageResult cmd_generate(const PipelineConfig& cfg, std::ostream& log);
StageResult cmd_eval(const PipelineConfig& cfg, std::ostream& log);
StageResult cmd_pipeline(const PipelineConfig& cfg, std::ostream& log);

std::vector<char32_t> read_codepoint_file(const std::filesystem::path& path);
std::filesystem::path font_output_dir(const PipelineConfig& cfg);

}  // namespace glyphforge
