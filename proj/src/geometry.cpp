#include <glyphforge/geometry.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace glyphforge {

double point_segment_distance_sq(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).squaredNorm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::sqrt(point_segment_distance_sq(p, a, b));
}

Vec2 quadratic_bezier(const Vec2& p0, const Vec2& p1, const Vec2& p2, double t) {
  const double u = 1.0 - t;
  return u * u * p0 + 2.0 * u * t * p1 + t * t * p2;
}

Vec2 Cubic::eval(double t) const {
  const double u = 1.0 - t;
  return u * u * u * p[0] + 3.0 * u * u * t * p[1] + 3.0 * u * t * t * p[2] + t * t * t * p[3];
}

Polyline Cubic::flatten(int segments) const {
  Polyline out;
  out.reserve(static_cast<std::size_t>(segments) + 1);
  out.push_back(p[0]);
  for (int i = 1; i < segments; ++i) out.push_back(eval(static_cast<double>(i) / segments));
  out.push_back(p[3]);
  return out;
}

double polyline_length(const Polyline& pts, bool closed) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  if (closed && pts.size() > 1) len += (pts.front() - pts.back()).norm();
  return len;
}

Polyline resample_closed(const Polyline& poly, double spacing, int min_vertices) {
  if (poly.empty()) return {};
  const double perimeter = polyline_length(poly, true);
  const int m = std::max(min_vertices, static_cast<int>(std::lround(perimeter / spacing)));
  Polyline out;
  out.reserve(static_cast<std::size_t>(m));
  if (perimeter == 0.0) {
    out.assign(static_cast<std::size_t>(m), poly.front());
    return out;
  }
  const double step = perimeter / m;
  const std::size_t n = poly.size();
  std::size_t edge = 0;
  double edge_start = 0.0;
  double edge_len = (poly[1 % n] - poly[0]).norm();
  for (int k = 0; k < m; ++k) {
    const double s = k * step;
    while (s > edge_start + edge_len && edge + 1 < n) {
      edge_start += edge_len;
      ++edge;
      edge_len = (poly[(edge + 1) % n] - poly[edge]).norm();
    }
    const Vec2& a = poly[edge];
    const Vec2& b = poly[(edge + 1) % n];
    const double t = edge_len > 0.0 ? std::clamp((s - edge_start) / edge_len, 0.0, 1.0) : 0.0;
    out.push_back(a + t * (b - a));
  }
  return out;
}

namespace {

void douglas_peucker(const Polyline& poly, int first, int last, double epsilon,
                     std::vector<int>& keep) {
  // `last` may equal poly.size(), meaning the wrap-around to vertex 0.
  const int n = static_cast<int>(poly.size());
  const Vec2& a = poly[first];
  const Vec2& b = poly[last % n];
  double best = -1.0;
  int best_idx = -1;
  for (int i = first + 1; i < last; ++i) {
    const double d = point_segment_distance(poly[i], a, b);
    if (d > best) {
      best = d;
      best_idx = i;
    }
  }
  if (best_idx >= 0 && best > epsilon) {
    douglas_peucker(poly, first, best_idx, epsilon, keep);
    keep.push_back(best_idx);
    douglas_peucker(poly, best_idx, last, epsilon, keep);
  }
}

}  // namespace

std::vector<int> simplify_closed(const Polyline& poly, double epsilon) {
  const int n = static_cast<int>(poly.size());
  std::vector<int> keep;
  if (n <= 3) {
    for (int i = 0; i < n; ++i) keep.push_back(i);
    return keep;
  }
  int far = 0;
  double far_d = -1.0;
  for (int i = 1; i < n; ++i) {
    const double d = (poly[i] - poly[0]).squaredNorm();
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  keep.push_back(0);
  douglas_peucker(poly, 0, far, epsilon, keep);
  keep.push_back(far);
  douglas_peucker(poly, far, n, epsilon, keep);
  return keep;
}

double distance_to_closed(const Vec2& p, const Polyline& poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  if (n == 1) return (p - poly[0]).norm();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance_sq(p, poly[i], poly[(i + 1) % n]));
  }
  return std::sqrt(best);
}

GrayImage fill_polygon(const Polyline& poly, int width, int height, double band) {
  GrayImage out(width, height);
  const std::size_t n = poly.size();
  if (n == 0) return out;
  struct Crossing {
    double x;
    int dir;
  };
  std::vector<Crossing> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    const double yc = y;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      int dir = 0;
      if (a.y() <= yc && yc < b.y()) dir = 1;
      else if (b.y() <= yc && yc < a.y()) dir = -1;
      if (dir == 0) continue;
      const double x = a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      xs.push_back({x, dir});
    }
    std::sort(xs.begin(), xs.end(), [](const Crossing& l, const Crossing& r) { return l.x < r.x; });
    int winding = 0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      winding += xs[k].dir;
      if (winding == 0) continue;
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k].x)));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1].x)));
      for (int x = x0; x <= x1; ++x) out.at(x, y) = 255;
    }
  }
  if (band > 0.0) {
    const double band2 = band * band;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - band)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + band)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - band)));
      const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + band)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if (point_segment_distance_sq(Vec2(x, y), a, b) <= band2) out.at(x, y) = 255;
        }
      }
    }
  }
  return out;
}

namespace {

// Clockwise on screen (y down), starting west.
constexpr std::array<PixelPos, 8> kRing{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                         {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[i].x == dx && kRing[i].y == dy) return i;
  }
  return 0;
}

}  // namespace

std::vector<PixelPos> trace_boundary(const GrayImage& mask) {
  PixelPos start{-1, -1};
  for (int y = 0; y < mask.height() && start.x < 0; ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.foreground(x, y)) {
        start = {x, y};
        break;
      }
    }
  }
  if (start.x < 0) return {};
  auto fg = [&](int x, int y) { return mask.in_bounds(x, y) && mask.foreground(x, y); };

  std::vector<PixelPos> out{start};
  PixelPos cur = start;
  int back = 0;
  PixelPos first_step{-1, -1};
  const std::size_t limit = static_cast<std::size_t>(mask.width()) * mask.height() * 4 + 8;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (fg(cur.x + kRing[d].x, cur.y + kRing[d].y)) {
        found = d;
        break;
      }
    }
    if (found < 0) return out;
    const PixelPos next{cur.x + kRing[found].x, cur.y + kRing[found].y};
    const PixelPos prev{cur.x + kRing[(found + 7) % 8].x, cur.y + kRing[(found + 7) % 8].y};
    if (cur == start) {
      if (first_step.x < 0) {
        first_step = next;
      } else if (next == first_step) {
        break;
      }
    }
    back = ring_index(prev.x - next.x, prev.y - next.y);
    cur = next;
    if (cur == start) continue;
    out.push_back(cur);
  }
  return out;
}

double FloatImage::sample(double x, double y) const {
  if (width == 0 || height == 0) return 0.0;
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = std::min(static_cast<int>(x), width - 1);
  const int y0 = std::min(static_cast<int>(y), height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = at(x0, y0) * (1 - fx) + at(x1, y0) * fx;
  const double bot = at(x0, y1) * (1 - fx) + at(x1, y1) * fx;
  return top * (1 - fy) + bot * fy;
}

FloatImage to_float(const GrayImage& img) {
  FloatImage out(img.width(), img.height());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) out.data[i] = px[i];
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& v : k) v /= sum;
  return k;
}

FloatImage gaussian_blur(const FloatImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width, h = img.height;
  FloatImage tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img.at(std::clamp(x + i, 0, w - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

namespace {

constexpr double kFar = 1e20;

void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto intersect = [&](int p) {
      return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
             (2.0 * q - 2.0 * p);
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& sites, int width,
                                               int height) {
  const std::size_t total = static_cast<std::size_t>(width) * height;
  if (sites.size() != total) throw UsageError("distance transform: size mismatch");
  std::vector<double> grid(total);
  for (std::size_t i = 0; i < total; ++i) grid[i] = sites[i] ? 0.0 : kFar;
  const int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = grid[static_cast<std::size_t>(y) * width + x];
    edt_1d(f.data(), d.data(), height, v, z);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[y];
  }
  for (int y = 0; y < height; ++y) {
    double* row = grid.data() + static_cast<std::size_t>(y) * width;
    std::copy(row, row + width, f.begin());
    edt_1d(f.data(), d.data(), width, v, z);
    std::copy(d.begin(), d.begin() + width, row);
  }
  for (double& g : grid) {
    if (g >= kFar * 0.5) g = std::numeric_limits<double>::infinity();
  }
  return grid;
}

GrayImage thin_zhang_suen(const GrayImage& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::uint8_t> img(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img[static_cast<std::size_t>(y) * w + x] = mask.foreground(x, y);
  auto px = [&](int x, int y) -> int {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return img[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<std::size_t> marked;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      marked.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!px(x, y)) continue;
          const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y);
          const int p5 = px(x + 1, y + 1), p6 = px(x, y + 1), p7 = px(x - 1, y + 1);
          const int p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const int a = (!p2 && p3) + (!p3 && p4) + (!p4 && p5) + (!p5 && p6) + (!p6 && p7) +
                        (!p7 && p8) + (!p8 && p9) + (!p9 && p2);
          if (a != 1) continue;
          const int m1 = pass == 0 ? p2 * p4 * p6 : p2 * p4 * p8;
          const int m2 = pass == 0 ? p4 * p6 * p8 : p2 * p6 * p8;
          if (m1 == 0 && m2 == 0) marked.push_back(static_cast<std::size_t>(y) * w + x);
        }
      }
      for (std::size_t i : marked) img[i] = 0;
      if (!marked.empty()) changed = true;
    }
  }
  GrayImage out(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) out.pixels()[i] = img[i] ? 255 : 0;
  return out;
}

}  // namespace glyphforge
