#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace glyphforge {

struct PipelineConfig {
  // skeleton handling
  int samples_per_skeleton = 32;
  int tau_max = 0;  // 0: a quarter of the shorter canvas side
  double dataset_tau = 4.0;  // design-grid units

  // extraction and restoration
  double beta1 = 2.0;
  double beta2 = 1.5;
  double gamma = 0.4;
  double alpha_snake = 0.1;
  double beta_snake = 0.4;
  std::string v_policy = "half-tau";  // "half-tau" or a fixed variance in px^2
  int snake_iterations = 200;

  // assembly
  double lambda_attr = 1.0;
  bool per_stroke_affine = false;

  // selection
  double alpha_selection = 0.6;
  int k = 15;
  int ga_population = 170;
  int ga_survivors = 20;
  int ga_offspring = 150;
  double ga_mutation = 0.05;
  int ga_generations = 1000;
  int ga_plateau = 50;

  int canvas = 500;
  int eval_size = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool skip_selection = false;

  std::string font = "font";
  std::filesystem::path dataset_dir;
  std::filesystem::path samples_dir;
  std::filesystem::path adjusted_dir;
  std::filesystem::path truth_dir;
  std::filesystem::path store_dir = "store";
  std::filesystem::path output_dir = "out";
  std::filesystem::path report = "report.txt";
  std::filesystem::path debug_dir;
  std::filesystem::path sample_list;  // codepoints used with skip_selection
  std::vector<char32_t> targets;      // empty: every glyph in truth_dir, else the dataset

  /// Fixed variance for the energy image blur, or nothing for (tau/2)^2.
  std::optional<double> variance() const;
};

/// Applies `key = value` lines onto `cfg`. Blank lines, `#` comments and
/// `[section]` headers are ignored; string values may be quoted. Relative
/// paths are resolved against `base_dir`.
void apply_config_text(PipelineConfig& cfg, const std::string& text,
                       const std::filesystem::path& base_dir = {});
void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value,
                        const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws UsageError naming the first field out of range.
void validate_config(const PipelineConfig& cfg);

/// Accepts comma or whitespace separated labels ("U+5341") or raw characters.
std::vector<char32_t> parse_codepoint_list(const std::string& text);
std::vector<char32_t> utf8_decode(const std::string& s);

}  // namespace glyphforge
