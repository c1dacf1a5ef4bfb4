#include <glyphforge/extraction.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

namespace glyphforge {

double EnergyImage::value(int x, int y) const {
  return std::min(255.0, blurred.at(x, y) + skeleton.at(x, y));
}

FloatImage EnergyImage::combined() const {
  FloatImage out(width(), height());
  const auto sk = skeleton.pixels();
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = std::min(255.0, blurred.data[i] + sk[i]);
  }
  return out;
}

GrayImage EnergyImage::to_gray() const {
  GrayImage out(width(), height());
  const FloatImage c = combined();
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    out.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(c.data[i]), 0L, 255L));
  }
  return out;
}

EnergyImage build_energy_image(const GrayImage& sample, const GrayImage& skeletons, double variance) {
  if (sample.width() != skeletons.width() || sample.height() != skeletons.height()) {
    throw UsageError("energy image: sample and skeleton sizes differ");
  }
  EnergyImage e;
  e.blurred = gaussian_blur(to_float(binarize(sample)), std::sqrt(std::max(variance, 0.0)));
  e.skeleton = binarize(skeletons);
  return e;
}

GrayImage skeleton_trace_image(const Skeleton& canvas_stroke, int width, int height) {
  const FloatImage field = skeleton_distance_field({canvas_stroke}, width, height, 0.75);
  GrayImage out(width, height);
  for (std::size_t i = 0; i < field.data.size(); ++i) {
    if (std::isfinite(field.data[i])) out.pixels()[i] = 255;
  }
  return out;
}

Contour init_contour(const SegmentationMap& seg, int stroke, double spacing,
                     const GrayImage* bridge) {
  GrayImage region = seg.mask(stroke);
  if (bridge) {
    if (bridge->width() != region.width() || bridge->height() != region.height()) {
      throw UsageError("init_contour: bridge size mismatch");
    }
    for (std::size_t i = 0; i < region.pixels().size(); ++i) {
      if (bridge->pixels()[i] >= 128) region.pixels()[i] = 255;
    }
  }
  const Components comps = connected_components(region);
  if (comps.count == 0) throw DataError("stroke " + std::to_string(stroke) + " has no pixels");
  std::vector<std::size_t> sizes(static_cast<std::size_t>(comps.count), 0);
  for (int l : comps.labels) {
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  }
  const int largest =
      static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  const auto boundary = trace_boundary(component_mask(comps, largest));
  Polyline poly;
  poly.reserve(boundary.size());
  for (const PixelPos& p : boundary) poly.emplace_back(p.x, p.y);
  Contour c;
  c.vertices = resample_closed(poly, spacing, 8);
  c.pinned.assign(c.vertices.size(), false);
  return c;
}

void pin_point(Contour& c, const Vec2& p) {
  const std::size_t n = c.vertices.size();
  if (n == 0) return;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = point_segment_distance_sq(p, c.vertices[i], c.vertices[(i + 1) % n]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  c.vertices.insert(c.vertices.begin() + static_cast<std::ptrdiff_t>(best + 1), p);
  c.pinned.insert(c.pinned.begin() + static_cast<std::ptrdiff_t>(best + 1), true);
}

std::optional<Vec2> modify_energy(EnergyImage& e, const Relation& relation, double tau,
                                  const GrayImage& other_stroke, const ExtractionParams& params) {
  const double factor = 1.0 / params.beta1;
  const double radius = params.beta2 * tau;
  const int w = e.width(), h = e.height();
  switch (relation.kind) {
    case RelationKind::Isolated:
      return std::nullopt;
    case RelationKind::Continuous:
    case RelationKind::Connecting: {
      if (!relation.q) return std::nullopt;
      const Vec2 q = *relation.q;
      const int x0 = std::max(0, static_cast<int>(std::floor(q.x() - radius)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(q.x() + radius)));
      const int y0 = std::max(0, static_cast<int>(std::floor(q.y() - radius)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(q.y() + radius)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if ((Vec2(x, y) - q).squaredNorm() <= radius * radius) e.blurred.at(x, y) *= factor;
        }
      }
      return q;
    }
    case RelationKind::Crossing:
    case RelationKind::Connected: {
      if (other_stroke.width() != w || other_stroke.height() != h) {
        throw UsageError("modify_energy: stroke mask size mismatch");
      }
      std::vector<std::uint8_t> sites(static_cast<std::size_t>(w) * h);
      const auto px = other_stroke.pixels();
      for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = px[i] >= 128;
      const auto dist2 = squared_distance_transform(sites, w, h);
      for (std::size_t i = 0; i < dist2.size(); ++i) {
        if (dist2[i] <= radius * radius) e.blurred.data[i] *= factor;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

namespace {

struct SnakeTerms {
  double alpha, beta, w_int, w_img;
};

// Every energy term that involves vertex i, evaluated with v_i at `p`.
double local_energy(const Polyline& v, std::size_t i, const Vec2& p, const FloatImage& field,
                    const SnakeTerms& t) {
  const std::size_t n = v.size();
  const Vec2& a = v[(i + n - 2) % n];
  const Vec2& b = v[(i + n - 1) % n];
  const Vec2& c = v[(i + 1) % n];
  const Vec2& d = v[(i + 2) % n];
  const double cont = (p - b).squaredNorm() + (c - p).squaredNorm();
  const double curv = (a - 2.0 * b + p).squaredNorm() + (b - 2.0 * p + c).squaredNorm() +
                      (p - 2.0 * c + d).squaredNorm();
  return t.w_int * (t.alpha * cont + t.beta * curv) + t.w_img * field.sample(p.x(), p.y());
}

}  // namespace

double contour_energy(const Contour& c, const FloatImage& field, const ExtractionParams& params) {
  const auto& v = c.vertices;
  const std::size_t n = v.size();
  double cont = 0.0, curv = 0.0, img = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = v[(i + n - 1) % n];
    const Vec2& next = v[(i + 1) % n];
    cont += (next - v[i]).squaredNorm();
    curv += (prev - 2.0 * v[i] + next).squaredNorm();
    img += field.sample(v[i].x(), v[i].y());
  }
  return params.w_int * (params.alpha * cont + params.beta * curv) + params.w_img * img;
}

MinimizeResult minimize_aacm(const Contour& c, const EnergyImage& e, const ExtractionParams& params) {
  if (c.vertices.size() < 5) throw UsageError("contour needs at least 5 vertices");
  const FloatImage field = e.combined();
  const SnakeTerms terms{params.alpha, params.beta, params.w_int, params.w_img};
  MinimizeResult res;
  res.contour = c;
  if (res.contour.pinned.size() != res.contour.vertices.size()) {
    res.contour.pinned.resize(res.contour.vertices.size(), false);
  }
  auto& v = res.contour.vertices;
  const double xmax = e.width() - 1, ymax = e.height() - 1;
  res.energy_trace.push_back(contour_energy(res.contour, field, params));
  for (int iter = 0; iter < params.max_iter; ++iter) {
    std::size_t moved = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (res.contour.pinned[i]) continue;
      const Vec2 cur = v[i];
      const double base = local_energy(v, i, cur, field, terms);
      double best = 0.0;
      Vec2 best_p = cur;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Vec2 p(cur.x() + dx, cur.y() + dy);
          if (p.x() < 0 || p.y() < 0 || p.x() > xmax || p.y() > ymax) continue;
          const double delta = local_energy(v, i, p, field, terms) - base;
          if (delta < best - 1e-12) {
            best = delta;
            best_p = p;
          }
        }
      }
      if (best_p != cur) {
        v[i] = best_p;
        ++moved;
      }
    }
    res.iterations = iter + 1;
    res.energy_trace.push_back(contour_energy(res.contour, field, params));
    if (static_cast<double>(moved) < params.move_fraction * static_cast<double>(v.size())) {
      res.converged = true;
      break;
    }
  }
  return res;
}

GrayImage extract_stroke(const GrayImage& sample, const Contour& c, const SegmentationMap& seg,
                         int stroke) {
  const GrayImage inside = fill_polygon(c.vertices, sample.width(), sample.height(), 0.5);
  GrayImage cut(sample.width(), sample.height());
  for (std::size_t i = 0; i < cut.pixels().size(); ++i) {
    if (sample.pixels()[i] >= 128 && inside.pixels()[i] >= 128) cut.pixels()[i] = 255;
  }
  const Components comps = connected_components(cut);
  if (comps.count == 0) throw DataError("contour excludes stroke");
  std::vector<std::size_t> overlap(static_cast<std::size_t>(comps.count), 0);
  std::vector<std::size_t> size(static_cast<std::size_t>(comps.count), 0);
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    const int l = comps.labels[i];
    if (l < 0) continue;
    ++size[static_cast<std::size_t>(l)];
    if (seg.labels[i] == stroke) ++overlap[static_cast<std::size_t>(l)];
  }
  int keep = 0;
  for (int l = 1; l < comps.count; ++l) {
    const auto a = static_cast<std::size_t>(l), b = static_cast<std::size_t>(keep);
    if (overlap[a] > overlap[b] || (overlap[a] == overlap[b] && size[a] > size[b])) keep = l;
  }
  if (overlap[static_cast<std::size_t>(keep)] == 0) throw DataError("contour excludes stroke");
  return component_mask(comps, keep);
}

StrokeExtraction extract_glyph_stroke(const GrayImage& sample, const Glyph& glyph,
                                      const SegmentationMap& seg, int stroke, double tau,
                                      const ExtractionParams& params) {
  const int w = sample.width(), h = sample.height();
  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  const double variance = params.variance.value_or((tau / 2.0) * (tau / 2.0));
  StrokeExtraction out;
  out.energy = build_energy_image(
      sample, skeleton_trace_image(map.to_canvas(glyph.strokes[static_cast<std::size_t>(stroke)]), w, h),
      variance);
  const auto& rel = glyph.relations.at(static_cast<std::size_t>(stroke));
  for (std::size_t j = 0; j < glyph.strokes.size(); ++j) {
    if (static_cast<int>(j) == stroke || rel[j].kind == RelationKind::Isolated) continue;
    GrayImage other;
    if (rel[j].kind == RelationKind::Crossing || rel[j].kind == RelationKind::Connected) {
      other = seg.mask(static_cast<int>(j));
    }
    if (auto q = modify_energy(out.energy, rel[j], tau, other, params)) {
      out.pins.emplace_back(std::clamp(q->x(), 0.0, w - 1.0), std::clamp(q->y(), 0.0, h - 1.0));
    }
  }
  const Skeleton target = map.to_canvas(glyph.strokes[static_cast<std::size_t>(stroke)]);
  const FloatImage near = skeleton_distance_field({target}, w, h, std::max(1.0, tau / 2.0));
  GrayImage bridge(w, h);
  for (std::size_t i = 0; i < near.data.size(); ++i) {
    if (std::isfinite(near.data[i]) && sample.pixels()[i] >= 128) bridge.pixels()[i] = 255;
  }
  Contour c = init_contour(seg, stroke, params.spacing, &bridge);
  for (const Vec2& p : out.pins) pin_point(c, p);
  MinimizeResult m = minimize_aacm(c, out.energy, params);
  out.contour = std::move(m.contour);
  out.converged = m.converged;
  out.mask = extract_stroke(sample, out.contour, seg, stroke);
  return out;
}

void write_contour_text(const std::filesystem::path& path, const Contour& c) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    out << c.vertices[i].x() << ' ' << c.vertices[i].y();
    if (i < c.pinned.size() && c.pinned[i]) out << " PIN";
    out << '\n';
  }
}

}  // namespace glyphforge
