#include <glyphforge/glyphdata.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace glyphforge {

LineType render_type(int line_type_code) {
  switch (line_type_code) {
    case 1: return LineType::Straight;
    case 2: return LineType::Curve;
    default: return LineType::Vertical;
  }
}

int required_points(int line_type_code) {
  switch (render_type(line_type_code)) {
    case LineType::Straight: return 2;
    case LineType::Curve: return 3;
    case LineType::Vertical: return 4;
  }
  return 0;
}

void validate_skeleton(const Skeleton& sk) {
  if (sk.line_type < 1 || sk.line_type > 6) {
    throw DataError("line type " + std::to_string(sk.line_type) + " out of range [1,6]");
  }
  if (sk.start_shape < 0 || sk.start_shape > 6) {
    throw DataError("start shape " + std::to_string(sk.start_shape) + " out of range [0,6]");
  }
  if (sk.end_shape < 0 || sk.end_shape > 14) {
    throw DataError("end shape " + std::to_string(sk.end_shape) + " out of range [0,14]");
  }
  if (static_cast<int>(sk.points.size()) != required_points(sk.line_type)) {
    throw DataError("point count " + std::to_string(sk.points.size()) + " invalid for line type " +
                    std::to_string(sk.line_type));
  }
}

namespace {

constexpr int kArcTableSteps = 1024;

struct ArcTable {
  std::vector<double> s;  // cumulative length at t = k / kArcTableSteps
};

ArcTable quadratic_arc_table(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  ArcTable tab;
  tab.s.resize(kArcTableSteps + 1);
  tab.s[0] = 0.0;
  Vec2 prev = p0;
  for (int k = 1; k <= kArcTableSteps; ++k) {
    const Vec2 cur = quadratic_bezier(p0, p1, p2, static_cast<double>(k) / kArcTableSteps);
    tab.s[k] = tab.s[k - 1] + (cur - prev).norm();
    prev = cur;
  }
  return tab;
}

double param_at_length(const ArcTable& tab, double target) {
  const auto it = std::lower_bound(tab.s.begin(), tab.s.end(), target);
  if (it == tab.s.begin()) return 0.0;
  if (it == tab.s.end()) return 1.0;
  const auto k = static_cast<int>(it - tab.s.begin());
  const double s0 = tab.s[k - 1], s1 = tab.s[k];
  const double frac = s1 > s0 ? (target - s0) / (s1 - s0) : 0.0;
  return (k - 1 + frac) / kArcTableSteps;
}

void fill_segment(Eigen::Matrix3Xd& out, int first, int count, const Vec2& a, const Vec2& b) {
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    const Vec2 p = k == count - 1 ? b : Vec2(a + t * (b - a));
    out.col(first + k) << p.x(), p.y(), 1.0;
  }
}

void fill_quadratic(Eigen::Matrix3Xd& out, int first, int count, const Vec2& p0, const Vec2& p1,
                    const Vec2& p2) {
  const ArcTable tab = quadratic_arc_table(p0, p1, p2);
  const double total = tab.s.back();
  for (int k = 0; k < count; ++k) {
    Vec2 p;
    if (k == 0) {
      p = p0;
    } else if (k == count - 1) {
      p = p2;
    } else {
      p = quadratic_bezier(p0, p1, p2, param_at_length(tab, total * k / (count - 1)));
    }
    out.col(first + k) << p.x(), p.y(), 1.0;
  }
}

double quadratic_length(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  return quadratic_arc_table(p0, p1, p2).s.back();
}

}  // namespace

Eigen::Matrix3Xd resample_skeleton(const Skeleton& sk, int n) {
  if (n < 2) throw UsageError("sample count must be at least 2");
  validate_skeleton(sk);
  Eigen::Matrix3Xd out(3, n);
  const auto& p = sk.points;
  switch (sk.type()) {
    case LineType::Straight:
      fill_segment(out, 0, n, p[0], p[1]);
      break;
    case LineType::Curve:
      fill_quadratic(out, 0, n, p[0], p[1], p[2]);
      break;
    case LineType::Vertical: {
      const double l1 = (p[1] - p[0]).norm();
      const double l2 = quadratic_length(p[1], p[2], p[3]);
      if (l1 + l2 == 0.0) {
        fill_segment(out, 0, n, p[0], p[0]);
        break;
      }
      int j = static_cast<int>(std::lround((n - 1) * l1 / (l1 + l2)));
      if (n >= 3 && l1 > 0.0 && l2 > 0.0) j = std::clamp(j, 1, n - 2);
      if (j == 0) {
        fill_quadratic(out, 0, n, p[1], p[2], p[3]);
        out.col(0) << p[0].x(), p[0].y(), 1.0;
      } else if (j == n - 1) {
        fill_segment(out, 0, n, p[0], p[1]);
        out.col(n - 1) << p[3].x(), p[3].y(), 1.0;
      } else {
        fill_segment(out, 0, j + 1, p[0], p[1]);
        fill_quadratic(out, j, n - j, p[1], p[2], p[3]);
      }
      break;
    }
  }
  return out;
}

Eigen::Matrix3Xd Skeleton::samples(int n) const { return resample_skeleton(*this, n); }

double Skeleton::length() const {
  switch (type()) {
    case LineType::Straight: return (points[1] - points[0]).norm();
    case LineType::Curve: return quadratic_length(points[0], points[1], points[2]);
    case LineType::Vertical:
      return (points[1] - points[0]).norm() + quadratic_length(points[1], points[2], points[3]);
  }
  return 0.0;
}

Polyline Skeleton::path(double max_step) const {
  auto flatten_quadratic = [&](const Vec2& a, const Vec2& b, const Vec2& c, Polyline& out) {
    const double len = quadratic_length(a, b, c);
    const int segs = std::max(1, static_cast<int>(std::ceil(len / max_step)));
    for (int k = 1; k < segs; ++k) out.push_back(quadratic_bezier(a, b, c, static_cast<double>(k) / segs));
    out.push_back(c);
  };
  Polyline out{points.front()};
  switch (type()) {
    case LineType::Straight:
      out.push_back(points[1]);
      break;
    case LineType::Curve:
      flatten_quadratic(points[0], points[1], points[2], out);
      break;
    case LineType::Vertical:
      out.push_back(points[1]);
      flatten_quadratic(points[1], points[2], points[3], out);
      break;
  }
  return out;
}

const char* relation_name(RelationKind kind) {
  switch (kind) {
    case RelationKind::Continuous: return "Continuous";
    case RelationKind::Connecting: return "Connecting";
    case RelationKind::Connected: return "Connected";
    case RelationKind::Crossing: return "Crossing";
    case RelationKind::Isolated: return "Isolated";
  }
  return "Isolated";
}

std::optional<RelationKind> parse_relation_name(const std::string& s) {
  for (auto k : {RelationKind::Continuous, RelationKind::Connecting, RelationKind::Connected,
                 RelationKind::Crossing, RelationKind::Isolated}) {
    if (s == relation_name(k)) return k;
  }
  return std::nullopt;
}

Relation mirrored(const Relation& r) {
  Relation m = r;
  std::swap(m.i_bar, m.j_bar);
  if (r.kind == RelationKind::Connecting) m.kind = RelationKind::Connected;
  if (r.kind == RelationKind::Connected) m.kind = RelationKind::Connecting;
  return m;
}

std::string codepoint_label(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

std::optional<char32_t> parse_codepoint_label(const std::string& s) {
  if (s.size() < 3 || (s[0] != 'U' && s[0] != 'u') || s[1] != '+') return std::nullopt;
  unsigned value = 0;
  const char* first = s.data() + 2;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value, 16);
  if (ec != std::errc() || ptr != last || value > 0x10FFFF) return std::nullopt;
  return static_cast<char32_t>(value);
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  const auto c = static_cast<std::uint32_t>(cp);
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
  return out;
}

namespace {

// Adjusted skeletons may overhang the grid; values outside this window are
// rejected as corrupt.
constexpr double kCoordMin = -kGridSize;
constexpr double kCoordMax = 2.0 * kGridSize;

template <typename T>
T parse_number(const std::string& tok, int line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

Glyph parse_glyph_text(const std::string& text, char32_t codepoint) {
  Glyph g;
  g.codepoint = codepoint;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] != "STROKE") throw ParseError(line_no, "expected STROKE, got '" + tok[0] + "'");
    if (tok.size() < 4) throw ParseError(line_no, "missing stroke attributes");
    Skeleton sk;
    sk.line_type = parse_number<int>(tok[1], line_no, "line type");
    sk.start_shape = parse_number<int>(tok[2], line_no, "start shape");
    sk.end_shape = parse_number<int>(tok[3], line_no, "end shape");
    if ((tok.size() - 4) % 2 != 0) throw ParseError(line_no, "odd number of coordinates");
    for (std::size_t k = 4; k < tok.size(); k += 2) {
      const double x = parse_number<double>(tok[k], line_no, "coordinate");
      const double y = parse_number<double>(tok[k + 1], line_no, "coordinate");
      if (!std::isfinite(x) || !std::isfinite(y) || x < kCoordMin || x > kCoordMax ||
          y < kCoordMin || y > kCoordMax) {
        throw ParseError(line_no, "coordinate out of range");
      }
      sk.points.emplace_back(x, y);
    }
    try {
      validate_skeleton(sk);
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
    g.strokes.push_back(std::move(sk));
  }
  return g;
}

Glyph parse_glyph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const char32_t cp = parse_codepoint_label(path.stem().string()).value_or(0);
  try {
    return parse_glyph_text(buf.str(), cp);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.filename().string() + ": " + e.detail());
  }
}

std::string serialize_glyph(const Glyph& g) {
  std::string out;
  if (g.codepoint != 0) out += "# " + utf8_encode(g.codepoint) + "\n";
  for (const Skeleton& sk : g.strokes) {
    out += "STROKE " + std::to_string(sk.line_type) + ' ' + std::to_string(sk.start_shape) + ' ' +
           std::to_string(sk.end_shape);
    for (const Vec2& p : sk.points) out += ' ' + format_number(p.x()) + ' ' + format_number(p.y());
    out += '\n';
  }
  return out;
}

void write_glyph_file(const std::filesystem::path& path, const Glyph& g) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_glyph(g);
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Glyph> load_glyph_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<Glyph> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".gd") continue;
    if (!parse_codepoint_label(entry.path().stem().string())) continue;
    out.push_back(parse_glyph_file(entry.path()));
  }
  std::sort(out.begin(), out.end(),
            [](const Glyph& a, const Glyph& b) { return a.codepoint < b.codepoint; });
  return out;
}

CanvasMapping CanvasMapping::for_canvas(int width, int height) {
  CanvasMapping m;
  m.scale = std::min(width, height) / kGridSize;
  m.offset_x = (width - kGridSize * m.scale) / 2.0;
  m.offset_y = (height - kGridSize * m.scale) / 2.0;
  return m;
}

Eigen::Matrix3d CanvasMapping::matrix() const {
  Eigen::Matrix3d m;
  m << scale, 0, offset_x, 0, scale, offset_y, 0, 0, 1;
  return m;
}

Skeleton CanvasMapping::to_canvas(const Skeleton& sk) const {
  Skeleton out = sk;
  for (Vec2& p : out.points) p = to_canvas(p);
  return out;
}

Eigen::Matrix3Xd CanvasMapping::to_canvas(const Eigen::Matrix3Xd& samples) const {
  return matrix() * samples;
}

FloatImage skeleton_distance_field(const std::vector<Skeleton>& canvas_strokes, int width,
                                   int height, double cutoff) {
  FloatImage field(width, height, std::numeric_limits<double>::infinity());
  const double reach = std::isfinite(cutoff) ? cutoff + 1.0 : static_cast<double>(width + height);
  for (const Skeleton& sk : canvas_strokes) {
    const Polyline path = sk.path(2.0);
    for (std::size_t s = 0; s + 1 < path.size() || (path.size() == 1 && s == 0); ++s) {
      const Vec2& a = path[s];
      const Vec2& b = path.size() == 1 ? path[0] : path[s + 1];
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - reach)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + reach)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - reach)));
      const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + reach)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double d2 = point_segment_distance_sq(Vec2(x, y), a, b);
          double& f = field.at(x, y);
          if (d2 < f) f = d2;
        }
      }
    }
  }
  for (double& v : field.data) {
    if (std::isfinite(v)) {
      v = std::sqrt(v);
      if (v > cutoff) v = std::numeric_limits<double>::infinity();
    }
  }
  return field;
}

GrayImage rasterize_strokes(const std::vector<Skeleton>& grid_strokes, double tau, int width,
                            int height) {
  if (!(tau > 0.0)) throw UsageError("tau must be positive");
  const CanvasMapping map = CanvasMapping::for_canvas(width, height);
  std::vector<Skeleton> canvas;
  canvas.reserve(grid_strokes.size());
  for (const Skeleton& sk : grid_strokes) {
    Skeleton c = map.to_canvas(sk);
    for (const Vec2& p : c.points) {
      if (p.x() < 0.0 || p.y() < 0.0 || p.x() > width || p.y() > height) {
        throw DataError("canvas too small to contain glyph");
      }
    }
    canvas.push_back(std::move(c));
  }
  const FloatImage field = skeleton_distance_field(canvas, width, height, tau);
  GrayImage out(width, height);
  for (std::size_t i = 0; i < field.data.size(); ++i) {
    if (field.data[i] <= tau) out.pixels()[i] = 255;
  }
  return out;
}

RasterGlyph rasterize_glyph(const Glyph& g, double tau, int width, int height) {
  return {rasterize_strokes(g.strokes, tau, width, height), tau};
}

}  // namespace glyphforge
