#include <glyphforge/restoration.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace glyphforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kDistanceSamples = 32;

Vec2 cubic_derivative(const Cubic& c, double t) {
  const double u = 1.0 - t;
  return 3.0 * u * u * (c.p[1] - c.p[0]) + 6.0 * u * t * (c.p[2] - c.p[1]) +
         3.0 * t * t * (c.p[3] - c.p[2]);
}

Vec2 cubic_second_derivative(const Cubic& c, double t) {
  return 6.0 * (1.0 - t) * (c.p[2] - 2.0 * c.p[1] + c.p[0]) +
         6.0 * t * (c.p[3] - 2.0 * c.p[2] + c.p[1]);
}

Cubic straight_cubic(const Vec2& a, const Vec2& b) {
  return Cubic{{a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b}};
}

Cubic solve_handles(const Polyline& pts, const std::vector<double>& t, bool& ok) {
  const Vec2& p0 = pts.front();
  const Vec2& p3 = pts.back();
  double a11 = 0, a12 = 0, a22 = 0;
  Vec2 r1 = Vec2::Zero(), r2 = Vec2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double u = 1.0 - t[i];
    const double b0 = u * u * u, b1 = 3 * u * u * t[i], b2 = 3 * u * t[i] * t[i], b3 = t[i] * t[i] * t[i];
    const Vec2 r = pts[i] - b0 * p0 - b3 * p3;
    a11 += b1 * b1;
    a12 += b1 * b2;
    a22 += b2 * b2;
    r1 += b1 * r;
    r2 += b2 * r;
  }
  const double det = a11 * a22 - a12 * a12;
  ok = std::abs(det) > 1e-12 * std::max(1.0, a11 * a22);
  if (!ok) return straight_cubic(p0, p3);
  const Vec2 h1 = (a22 * r1 - a12 * r2) / det;
  const Vec2 h2 = (a11 * r2 - a12 * r1) / det;
  return Cubic{{p0, h1, h2, p3}};
}

double max_fit_error(const Cubic& c, const Polyline& pts, std::size_t& worst) {
  double err = 0.0;
  worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = curve_point_distance(c, pts[i]);
    if (d > err) {
      err = d;
      worst = i;
    }
  }
  return err;
}

void fit_piece(const Polyline& pts, std::size_t lo, std::size_t hi, const RestorationParams& params,
               std::vector<Cubic>& out) {
  const Polyline sub(pts.begin() + static_cast<std::ptrdiff_t>(lo),
                     pts.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  const Cubic c = fit_cubic(sub);
  std::size_t worst = 0;
  const double err = max_fit_error(c, sub, worst);
  const double len = polyline_length(sub);
  if (hi - lo >= 2 && (err > params.fit_tolerance || len > params.max_curve_length)) {
    std::size_t split = lo + worst;
    if (err <= params.fit_tolerance || split <= lo || split >= hi) split = (lo + hi) / 2;
    fit_piece(pts, lo, split, params, out);
    fit_piece(pts, split, hi, params, out);
    return;
  }
  out.push_back(c);
}

}  // namespace

Polyline BezierChain::flatten(int segments_per_curve) const {
  Polyline out;
  for (const Cubic& c : curves) {
    const Polyline part = c.flatten(segments_per_curve);
    out.insert(out.end(), part.begin(), part.end() - 1);
  }
  return out;
}

double curve_point_distance(const Cubic& c, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 prev = c.p[0];
  for (int k = 1; k <= kDistanceSamples; ++k) {
    const Vec2 cur = k == kDistanceSamples ? c.p[3] : c.eval(static_cast<double>(k) / kDistanceSamples);
    best = std::min(best, point_segment_distance_sq(p, prev, cur));
    prev = cur;
  }
  return std::sqrt(best);
}

Cubic fit_cubic(const Polyline& pts) {
  if (pts.empty()) throw UsageError("fit_cubic: no points");
  if (pts.size() <= 2) return straight_cubic(pts.front(), pts.back());
  std::vector<double> t(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) t[i] = t[i - 1] + (pts[i] - pts[i - 1]).norm();
  if (t.back() == 0.0) return straight_cubic(pts.front(), pts.back());
  for (double& v : t) v /= t.back();
  bool ok = false;
  Cubic c = solve_handles(pts, t, ok);
  if (!ok) return c;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const Vec2 diff = c.eval(t[i]) - pts[i];
      const Vec2 d1 = cubic_derivative(c, t[i]);
      const Vec2 d2 = cubic_second_derivative(c, t[i]);
      const double denom = d1.squaredNorm() + diff.dot(d2);
      if (std::abs(denom) > 1e-12) t[i] = std::clamp(t[i] - diff.dot(d1) / denom, 0.0, 1.0);
    }
    const Cubic refined = solve_handles(pts, t, ok);
    if (!ok) break;
    c = refined;
  }
  return c;
}

Vectorization vectorize_outline(const GrayImage& stroke, const RestorationParams& params) {
  const Components comps = connected_components(stroke);
  if (comps.count == 0) throw DataError("empty stroke mask");
  if (comps.count > 1) {
    throw DataError("stroke mask has " + std::to_string(comps.count) + " components");
  }
  Vectorization v;
  for (const PixelPos& p : trace_boundary(stroke)) v.boundary.emplace_back(p.x, p.y);
  const std::size_t n = v.boundary.size();
  if (n < 3) throw DataError("stroke too small to vectorize");

  const auto keep = simplify_closed(v.boundary, params.simplify_epsilon);
  const double corner_cos = std::cos(params.corner_angle_deg * kPi / 180.0);
  const std::size_t m = keep.size();
  for (std::size_t k = 0; k < m && m >= 3; ++k) {
    const Vec2& prev = v.boundary[static_cast<std::size_t>(keep[(k + m - 1) % m])];
    const Vec2& cur = v.boundary[static_cast<std::size_t>(keep[k])];
    const Vec2& next = v.boundary[static_cast<std::size_t>(keep[(k + 1) % m])];
    const Vec2 a = cur - prev, b = next - cur;
    if (a.norm() == 0.0 || b.norm() == 0.0) continue;
    if (a.dot(b) / (a.norm() * b.norm()) < corner_cos) v.corners.push_back(keep[k]);
  }
  std::vector<int> breaks = v.corners;
  if (breaks.empty()) breaks.push_back(0);

  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const auto from = static_cast<std::size_t>(breaks[k]);
    const auto to = static_cast<std::size_t>(breaks[(k + 1) % breaks.size()]);
    Polyline piece;
    std::size_t i = from;
    do {
      piece.push_back(v.boundary[i]);
      i = (i + 1) % n;
    } while (i != to);
    piece.push_back(v.boundary[to]);
    fit_piece(piece, 0, piece.size() - 1, params, v.chain.curves);
  }
  return v;
}

BezierChain vectorize_contour(const GrayImage& stroke, const RestorationParams& params) {
  return vectorize_outline(stroke, params).chain;
}

ChainRuns remove_damaged(const BezierChain& chain, const std::vector<Vec2>& contact_pts, double tau) {
  std::vector<ContactPoint> contacts;
  contacts.reserve(contact_pts.size());
  for (const Vec2& p : contact_pts) contacts.push_back({p, tau});
  return remove_damaged(chain, contacts);
}

ChainRuns remove_damaged(const BezierChain& chain, const std::vector<ContactPoint>& contacts) {
  const std::size_t n = chain.curves.size();
  std::vector<bool> damaged(n, false);
  ChainRuns out;
  for (std::size_t i = 0; i < n; ++i) {
    for (const ContactPoint& c : contacts) {
      if (curve_point_distance(chain.curves[i], c.p) < c.radius) {
        damaged[i] = true;
        ++out.removed;
        break;
      }
    }
  }
  if (n > 0 && out.removed == n) throw DataError("stroke unrecoverable");
  if (out.removed == 0) {
    out.runs.push_back(chain.curves);
    out.closed = true;
    return out;
  }
  std::size_t start = 0;
  while (!(!damaged[start] && damaged[(start + n - 1) % n])) ++start;
  std::vector<Cubic> run;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (start + k) % n;
    if (damaged[i]) {
      if (!run.empty()) out.runs.push_back(std::move(run));
      run.clear();
    } else {
      run.push_back(chain.curves[i]);
    }
  }
  if (!run.empty()) out.runs.push_back(std::move(run));
  return out;
}

Cubic bridge_gap(const Vec2& p1, const Vec2& p1_ref, const Vec2& p4, const Vec2& p4_ref,
                 double gamma) {
  return Cubic{{p1, p1 + gamma * (p1 - p1_ref), p4 + gamma * (p4 - p4_ref), p4}};
}

Cubic bridge_gap(const Cubic& end_a, const Cubic& end_b, const std::vector<Vec2>& remaining,
                 double gamma) {
  auto nearest = [&](const Vec2& p) {
    Vec2 best = p;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Vec2& q : remaining) {
      const double d = (q - p).squaredNorm();
      if (d > 0.0 && d < best_d) {
        best_d = d;
        best = q;
      }
    }
    return best;
  };
  const Vec2 p1 = end_a.p[3];
  const Vec2 p4 = end_b.p[0];
  return bridge_gap(p1, nearest(p1), p4, nearest(p4), gamma);
}

BezierChain bridge_runs(const ChainRuns& runs, double gamma) {
  BezierChain out;
  if (runs.closed) {
    out.curves = runs.runs.front();
    return out;
  }
  std::vector<Vec2> remaining;
  for (const auto& run : runs.runs) {
    for (const Cubic& c : run) remaining.insert(remaining.end(), c.p.begin(), c.p.end());
  }
  for (std::size_t k = 0; k < runs.runs.size(); ++k) {
    const auto& run = runs.runs[k];
    const auto& next = runs.runs[(k + 1) % runs.runs.size()];
    out.curves.insert(out.curves.end(), run.begin(), run.end());
    out.curves.push_back(bridge_gap(run.back(), next.front(), remaining, gamma));
  }
  return out;
}

GrayImage render_restored(const BezierChain& chain, int width, int height) {
  const std::size_t n = chain.curves.size();
  if (n == 0) throw DataError("empty outline");
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.curves[i].p[3] != chain.curves[(i + 1) % n].p[0]) throw DataError("open outline");
  }
  const Polyline poly = chain.flatten(8);
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  if (std::abs(area) < 1e-9) throw DataError("zero-area outline");
  return fill_polygon(poly, width, height, 0.5);
}

GrayImage restore_stroke(const GrayImage& stroke, const std::vector<ContactPoint>& contacts,
                         const RestorationParams& params) {
  const BezierChain chain = vectorize_contour(stroke, params);
  const ChainRuns runs = remove_damaged(chain, contacts);
  return render_restored(bridge_runs(runs, params.gamma), stroke.width(), stroke.height());
}

void write_svg(const std::filesystem::path& path, const std::vector<BezierChain>& outlines,
               int width, int height) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  for (const BezierChain& chain : outlines) {
    if (chain.curves.empty()) continue;
    out << "<path fill=\"black\" fill-rule=\"nonzero\" d=\"M " << chain.curves[0].p[0].x() << ' '
        << chain.curves[0].p[0].y();
    for (const Cubic& c : chain.curves) {
      out << " C " << c.p[1].x() << ' ' << c.p[1].y() << ' ' << c.p[2].x() << ' ' << c.p[2].y()
          << ' ' << c.p[3].x() << ' ' << c.p[3].y();
    }
    out << " Z\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace glyphforge
