#pragma once

#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace glyphforge {

/// One extracted sample character: the adjusted glyph with its verified
/// relations, the estimated thickness and one restored image per stroke.
struct StoredSample {
  Glyph glyph;
  int tau = 1;
  std::vector<GrayImage> strokes;
  std::vector<bool> fallback;  // restoration failed and the raw mask was kept
};

std::string asset_id(char32_t codepoint, int stroke);

/// Directory layout:
///   manifest.txt               header, input hash and one line per asset
///   samples/U+XXXX.gd, .rel    adjusted glyph and its relations
///   assets/U+XXXX_k.png        restored stroke images
struct AssetStore {
  std::string input_hash;
  int canvas = 0;
  std::vector<StoredSample> samples;
  std::vector<std::string> log;  // relation fixes and notes from extraction

  std::size_t stroke_count() const;
};

void write_asset_store(const std::filesystem::path& dir, const AssetStore& store);
AssetStore read_asset_store(const std::filesystem::path& dir);
/// Hash recorded in an existing store, or empty when there is none.
std::string stored_input_hash(const std::filesystem::path& dir);

std::string serialize_relations(const Glyph& g);
/// Fills g.relations from serialize_relations output.
void parse_relations(Glyph& g, const std::string& text);

/// Incremental SHA-256, hex digest.
class ContentHash {
 public:
  ContentHash();
  ~ContentHash();
  ContentHash(const ContentHash&) = delete;
  ContentHash& operator=(const ContentHash&) = delete;

  void add(std::span<const std::uint8_t> bytes);
  void add(const std::string& text);
  void add_file(const std::filesystem::path& path);
  std::string hex();

 private:
  void* ctx_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace glyphforge
