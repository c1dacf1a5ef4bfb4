#include <glyphforge/asset_store.hpp>

#include <glyphforge/error.hpp>

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace glyphforge {

namespace fs = std::filesystem;

std::string asset_id(char32_t codepoint, int stroke) {
  return codepoint_label(codepoint) + "_" + std::to_string(stroke);
}

std::size_t AssetStore::stroke_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.strokes.size();
  return n;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ContentHash::ContentHash() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 unavailable");
  }
}

ContentHash::~ContentHash() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void ContentHash::add(std::span<const std::uint8_t> bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
}

void ContentHash::add(const std::string& text) {
  add(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  static constexpr std::uint8_t kSeparator = 0;
  add(std::span<const std::uint8_t>(&kSeparator, 1));
}

void ContentHash::add_file(const fs::path& path) {
  add(path.filename().string());
  add(read_file_bytes(path));
}

std::string ContentHash::hex() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md, &len);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

std::string serialize_relations(const Glyph& g) {
  std::string out;
  for (std::size_t i = 0; i < g.relations.size(); ++i) {
    for (std::size_t j = 0; j < g.relations[i].size(); ++j) {
      if (i == j) continue;
      const Relation& r = g.relations[i][j];
      out += "REL " + std::to_string(i) + " " + std::to_string(j) + " " + relation_name(r.kind) + " " +
             (std::isfinite(r.d) ? format_number(r.d) : std::string("inf")) + " " + std::to_string(r.i_bar) +
             " " + std::to_string(r.j_bar);
      if (r.q) out += " " + format_number(r.q->x()) + " " + format_number(r.q->y());
      out += "\n";
    }
  }
  return out;
}

namespace {

double parse_double(const std::string& tok, const std::string& what) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) throw DataError("invalid " + what + " '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, const std::string& what) {
  int v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) throw DataError("invalid " + what + " '" + tok + "'");
  return v;
}

}  // namespace

void parse_relations(Glyph& g, const std::string& text) {
  const std::size_t n = g.strokes.size();
  g.relations.assign(n, std::vector<Relation>(n));
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (tok[0] != "REL" || (tok.size() != 7 && tok.size() != 9)) throw DataError("malformed relation");
      const int i = parse_int(tok[1], "stroke index");
      const int j = parse_int(tok[2], "stroke index");
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n || i == j) {
        throw DataError("stroke index out of range");
      }
      const auto kind = parse_relation_name(tok[3]);
      if (!kind) throw DataError("unknown relation '" + tok[3] + "'");
      Relation r;
      r.kind = *kind;
      r.d = parse_double(tok[4], "distance");
      r.i_bar = parse_int(tok[5], "sample index");
      r.j_bar = parse_int(tok[6], "sample index");
      if (tok.size() == 9) r.q = Vec2(parse_double(tok[7], "coordinate"), parse_double(tok[8], "coordinate"));
      g.relations[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r;
    } catch (const DataError& e) {
      throw ParseError(lineno, e.what());
    }
  }
}

void write_asset_store(const fs::path& dir, const AssetStore& store) {
  fs::create_directories(dir / "samples");
  fs::create_directories(dir / "assets");
  std::string manifest = "glyphforge-assets 1\n";
  manifest += "input_hash " + store.input_hash + "\n";
  manifest += "canvas " + std::to_string(store.canvas) + "\n";
  for (const StoredSample& s : store.samples) {
    const std::string label = codepoint_label(s.glyph.codepoint);
    write_glyph_file(dir / "samples" / (label + ".gd"), s.glyph);
    write_file_atomic(dir / "samples" / (label + ".rel"), serialize_relations(s.glyph));
    manifest += "sample " + label + " " + std::to_string(s.glyph.size()) + " " + std::to_string(s.tau) + "\n";
    for (std::size_t k = 0; k < s.strokes.size(); ++k) {
      const std::string id = asset_id(s.glyph.codepoint, static_cast<int>(k));
      write_file_atomic(dir / "assets" / (id + ".png"), encode_png(s.strokes[k]));
      manifest += "asset " + id + " " + label + " " + std::to_string(k) + " " +
                  (s.fallback.size() > k && s.fallback[k] ? "raw" : "restored") + "\n";
    }
  }
  for (const std::string& line : store.log) manifest += "log " + line + "\n";
  write_file_atomic(dir / "manifest.txt", manifest);
}

namespace {

std::vector<std::vector<std::string>> manifest_lines(const fs::path& dir, std::vector<std::string>* log = nullptr) {
  const fs::path p = dir / "manifest.txt";
  if (!fs::exists(p)) throw DataError("no asset store at " + dir.string());
  std::istringstream in(read_text_file(p));
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("log ", 0) == 0) {
      if (log) log->push_back(line.substr(4));
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  if (out.empty() || out[0][0] != "glyphforge-assets") throw DataError("not an asset store manifest: " + p.string());
  return out;
}

}  // namespace

std::string stored_input_hash(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.txt")) return {};
  try {
    for (const auto& tok : manifest_lines(dir))
      if (tok[0] == "input_hash" && tok.size() == 2) return tok[1];
  } catch (const DataError&) {
  }
  return {};
}

AssetStore read_asset_store(const fs::path& dir) {
  AssetStore store;
  for (const auto& tok : manifest_lines(dir, &store.log)) {
    if (tok[0] == "input_hash" && tok.size() == 2) {
      store.input_hash = tok[1];
    } else if (tok[0] == "canvas" && tok.size() == 2) {
      store.canvas = parse_int(tok[1], "canvas");
    } else if (tok[0] == "sample" && tok.size() == 4) {
      StoredSample s;
      s.glyph = parse_glyph_file(dir / "samples" / (tok[1] + ".gd"));
      parse_relations(s.glyph, read_text_file(dir / "samples" / (tok[1] + ".rel")));
      s.tau = parse_int(tok[3], "tau");
      if (parse_int(tok[2], "stroke count") != static_cast<int>(s.glyph.size())) {
        throw DataError("asset store: stroke count mismatch for " + tok[1]);
      }
      store.samples.push_back(std::move(s));
    } else if (tok[0] == "asset" && tok.size() == 5) {
      if (store.samples.empty() || codepoint_label(store.samples.back().glyph.codepoint) != tok[2]) {
        throw DataError("asset store: asset " + tok[1] + " precedes its sample");
      }
      StoredSample& s = store.samples.back();
      if (parse_int(tok[3], "stroke index") != static_cast<int>(s.strokes.size())) {
        throw DataError("asset store: assets out of order at " + tok[1]);
      }
      const fs::path img = dir / "assets" / (tok[1] + ".png");
      try {
        s.strokes.push_back(read_image(img));
      } catch (const Error& e) {
        throw DataError(img.string() + ": " + e.what());
      }
      s.fallback.push_back(tok[4] == "raw");
    } else if (tok[0] != "glyphforge-assets") {
      throw DataError("asset store: unrecognized manifest entry '" + tok[0] + "'");
    }
  }
  for (const StoredSample& s : store.samples) {
    if (s.strokes.size() != s.glyph.size()) {
      throw DataError("asset store: missing assets for " + codepoint_label(s.glyph.codepoint));
    }
  }
  return store;
}

}  // namespace glyphforge
