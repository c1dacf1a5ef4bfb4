#include <glyphforge/fixtures.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace glyphforge {

namespace {

Eigen::Matrix3d about_center(const Eigen::Matrix2d& a) {
  const Eigen::Vector2d c(kGridSize / 2.0, kGridSize / 2.0);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t.topLeftCorner<2, 2>() = a;
  t.topRightCorner<2, 1>() = c - a * c;
  return t;
}

std::vector<SyntheticFont> build_fonts() {
  Eigen::Matrix2d slant;
  slant << 0.92, -0.18, 0.0, 1.0;
  Eigen::Matrix2d taper;
  taper << 0.9, 0.0, 0.0, 0.94;
  return {{"slant", about_center(slant), 10.0, 10.0}, {"taper", about_center(taper), 13.0, 7.0}};
}

std::vector<char32_t> decode(std::u32string_view s) { return {s.begin(), s.end()}; }

}  // namespace

const std::vector<SyntheticFont>& synthetic_fonts() {
  static const std::vector<SyntheticFont> fonts = build_fonts();
  return fonts;
}

const SyntheticFont& synthetic_font(const std::string& name) {
  for (const SyntheticFont& f : synthetic_fonts())
    if (f.name == name) return f;
  throw UsageError("unknown synthetic font '" + name + "'");
}

Glyph font_skeleton(const Glyph& dataset, const SyntheticFont& font) {
  Glyph g;
  g.codepoint = dataset.codepoint;
  for (const Skeleton& sk : dataset.strokes) {
    Skeleton t = sk;
    for (Vec2& p : t.points) p = font.grid_transform.topLeftCorner<2, 2>() * p + font.grid_transform.topRightCorner<2, 1>();
    g.strokes.push_back(std::move(t));
  }
  return g;
}

GrayImage render_font_strokes(const std::vector<Skeleton>& grid_strokes, const SyntheticFont& font,
                              int width, int height) {
  if (font.uniform_brush()) return rasterize_strokes(grid_strokes, font.radius_start, width, height);
  const CanvasMapping map = CanvasMapping::for_canvas(width, height);
  GrayImage out(width, height);
  for (const Skeleton& sk : grid_strokes) {
    const Polyline path = map.to_canvas(sk).path(1.0);
    const double total = polyline_length(path);
    double walked = 0.0;
    auto radius = [&](double s) {
      const double t = total > 0.0 ? s / total : 0.0;
      return font.radius_start + (font.radius_end - font.radius_start) * t;
    };
    for (std::size_t s = 0; s < path.size(); ++s) {
      const Vec2 a = path[s];
      const Vec2 b = s + 1 < path.size() ? path[s + 1] : path[s];
      const double len = (b - a).norm();
      const double ra = radius(walked), rb = radius(walked + len);
      const double reach = std::max(ra, rb) + 1.0;
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - reach)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + reach)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - reach)));
      const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + reach)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const Vec2 p(x, y);
          double t = 0.0;
          if (len > 0.0) t = std::clamp((p - a).dot(b - a) / (len * len), 0.0, 1.0);
          const double r = ra + (rb - ra) * t;
          if ((p - (a + t * (b - a))).norm() <= r) out.at(x, y) = 255;
        }
      walked += len;
    }
  }
  return out;
}

GrayImage render_font_glyph(const Glyph& adjusted, const SyntheticFont& font, int width, int height) {
  return render_font_strokes(adjusted.strokes, font, width, height);
}

const std::vector<char32_t>& fixture_sample_codepoints() {
  static const std::vector<char32_t> ids = decode(U"十木口田大手人力女子水火小月文");
  return ids;
}

const std::vector<char32_t>& fixture_heldout_codepoints() {
  static const std::vector<char32_t> ids = decode(U"丁七万三上下中九了二五八六内円刀千午又古右四土工山川日王本目");
  return ids;
}

void make_fixtures(const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir, int canvas) {
  std::map<char32_t, Glyph> dataset;
  for (Glyph& g : load_glyph_dir(dataset_dir)) dataset.emplace(g.codepoint, std::move(g));
  auto lookup = [&](char32_t cp) -> const Glyph& {
    auto it = dataset.find(cp);
    if (it == dataset.end()) throw DataError("dataset has no glyph " + codepoint_label(cp));
    return it->second;
  };
  auto list_text = [](const std::vector<char32_t>& cps) {
    std::string s;
    for (char32_t cp : cps) s += codepoint_label(cp) + "  # " + utf8_encode(cp) + "\n";
    return s;
  };
  std::vector<char32_t> truth = fixture_sample_codepoints();
  truth.insert(truth.end(), fixture_heldout_codepoints().begin(), fixture_heldout_codepoints().end());
  for (char32_t cp : truth) lookup(cp);
  for (const SyntheticFont& font : synthetic_fonts()) {
    const FontFixturePaths paths{out_dir / font.name};
    std::filesystem::create_directories(paths.samples());
    std::filesystem::create_directories(paths.adjusted());
    std::filesystem::create_directories(paths.truth());
    for (const auto& [cp, g] : dataset) {
      const Glyph adj = font_skeleton(g, font);
      const std::string name = codepoint_label(cp);
      const GrayImage page = invert(render_font_glyph(adj, font, canvas, canvas));
      write_glyph_file(paths.adjusted() / (name + ".gd"), adj);
      write_png(paths.samples() / (name + ".png"), page);
      if (std::find(truth.begin(), truth.end(), cp) != truth.end()) write_png(paths.truth() / (name + ".png"), page);
    }
    std::ofstream(paths.root / "sample_list.txt") << list_text(fixture_sample_codepoints());
    std::ofstream(paths.root / "heldout_list.txt") << list_text(fixture_heldout_codepoints());
    std::ofstream conf(paths.root / "pipeline.conf");
    conf << "font = " << font.name << "\n"
         << "dataset_dir = \"" << std::filesystem::absolute(dataset_dir).string() << "\"\n"
         << "samples_dir = samples\nadjusted_dir = adjusted\ntruth_dir = truth\n"
         << "sample_list = sample_list.txt\nskip_selection = true\n"
         << "store_dir = store\noutput_dir = out\nreport = report.txt\n"
         << "canvas = " << canvas << "\n";
  }
}

}  // namespace glyphforge
