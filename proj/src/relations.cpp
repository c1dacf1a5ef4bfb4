#include <glyphforge/relations.hpp>

#include <glyphforge/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace glyphforge {

namespace {

constexpr double kParallelEps = 1e-6;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Unit normal at every sample; nullopt where the local tangent vanishes.
std::vector<std::optional<Vec2>> sample_normals(const Eigen::Matrix3Xd& s) {
  const int n = static_cast<int>(s.cols());
  std::vector<std::optional<Vec2>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - 1);
    const int b = std::min(n - 1, i + 1);
    const Vec2 t = s.col(b).head<2>() - s.col(a).head<2>();
    const double len = t.norm();
    if (len == 0.0) continue;
    out[static_cast<std::size_t>(i)] = Vec2(-t.y() / len, t.x() / len);
  }
  return out;
}

}  // namespace

Relation skeleton_distance(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other) {
  if (s.cols() < 2 || s_other.cols() < 2) throw UsageError("skeletons need at least 2 samples");
  const auto na = sample_normals(s);
  const auto nb = sample_normals(s_other);
  Relation best;
  for (int i = 0; i < s.cols(); ++i) {
    if (!na[i]) continue;
    const Vec2 p = s.col(i).head<2>();
    const Vec2& n1 = *na[i];
    for (int j = 0; j < s_other.cols(); ++j) {
      if (!nb[j]) continue;
      const Vec2 pj = s_other.col(j).head<2>();
      const Vec2& n2 = *nb[j];
      const Vec2 delta = pj - p;
      const double det = cross(n2, n1);
      double d;
      Vec2 q;
      if (std::abs(det) < kParallelEps) {
        // Parallel perpendiculars only count when the sample points coincide.
        if (delta.norm() > 1e-9) continue;
        q = p;
        d = 0.0;
      } else {
        // p + a n1 = pj + b n2
        const double a = cross(n2, delta) / det;
        const double b = cross(n1, delta) / det;
        q = p + a * n1;
        d = std::abs(a) + std::abs(b);
      }
      if (d < best.d) {
        best.d = d;
        best.i_bar = i;
        best.j_bar = j;
        best.q = q;
      }
    }
  }
  return best;
}

ContactIndicators contact_indicators(int index, int n) {
  const double r = static_cast<double>(index) / n;
  ContactIndicators c;
  c.start = r < 0.05;
  c.end = r > 0.95;
  c.body = !c.start && !c.end;
  return c;
}

Relation assign_relation(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other, double tau,
                         double tau_other) {
  Relation r = skeleton_distance(s, s_other);
  r.kind = RelationKind::Isolated;
  if (!r.q || !(r.d < 2.0 * (tau + tau_other))) return r;
  const auto ci = contact_indicators(r.i_bar, static_cast<int>(s.cols()));
  const auto cj = contact_indicators(r.j_bar, static_cast<int>(s_other.cols()));
  const bool tip_i = ci.start || ci.end;
  const bool tip_j = cj.start || cj.end;
  if (tip_i && tip_j) r.kind = RelationKind::Continuous;
  else if (tip_i && cj.body) r.kind = RelationKind::Connecting;
  else if (ci.body && tip_j) r.kind = RelationKind::Connected;
  else r.kind = RelationKind::Crossing;
  return r;
}

std::vector<std::vector<Relation>> assign_relations(const std::vector<Eigen::Matrix3Xd>& samples,
                                                    double tau) {
  const std::size_t n = samples.size();
  std::vector<std::vector<Relation>> rel(n, std::vector<Relation>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      rel[i][j] = assign_relation(samples[i], samples[j], tau, tau);
      rel[j][i] = mirrored(rel[i][j]);
    }
  }
  return rel;
}

TauEstimate estimate_tau(const GrayImage& sample, const Glyph& glyph, int tau_max) {
  if (!sample.has_foreground()) throw DataError("blank sample");
  const int w = sample.width(), h = sample.height();
  TauEstimate est;
  est.tau_max = tau_max > 0 ? tau_max : std::max(1, std::min(w, h) / 4);
  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  std::vector<Skeleton> canvas;
  for (const Skeleton& sk : glyph.strokes) canvas.push_back(map.to_canvas(sk));
  const FloatImage field = skeleton_distance_field(canvas, w, h, est.tau_max);

  // fg_at[k] / bg_at[k]: pixels whose smallest covering tau is k (k = tau_max+1 means never).
  std::vector<std::size_t> fg_at(static_cast<std::size_t>(est.tau_max) + 2, 0);
  std::vector<std::size_t> bg_at(fg_at.size(), 0);
  std::size_t fg_total = 0;
  const auto px = sample.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double d = field.data[i];
    int k = est.tau_max + 1;
    if (std::isfinite(d)) k = std::max(1, static_cast<int>(std::ceil(d)));
    if (k > est.tau_max) k = est.tau_max + 1;
    if (px[i] >= 128) {
      ++fg_at[static_cast<std::size_t>(k)];
      ++fg_total;
    } else {
      ++bg_at[static_cast<std::size_t>(k)];
    }
  }
  std::size_t fg_covered = 0, bg_covered = 0;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (int t = 1; t <= est.tau_max; ++t) {
    fg_covered += fg_at[static_cast<std::size_t>(t)];
    bg_covered += bg_at[static_cast<std::size_t>(t)];
    const std::size_t ham = (fg_total - fg_covered) + bg_covered;
    est.hamming.push_back(ham);
    if (ham < best) {
      best = ham;
      est.tau = t;
    }
  }
  est.at_upper_bound = est.tau == est.tau_max;
  return est;
}

GrayImage SegmentationMap::mask(int stroke) const {
  GrayImage out(width, height);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == stroke) out.pixels()[i] = 255;
  }
  return out;
}

SegmentationMap segment_pixels(const GrayImage& sample, const Glyph& glyph) {
  const int w = sample.width(), h = sample.height();
  SegmentationMap seg;
  seg.width = w;
  seg.height = h;
  seg.labels.assign(static_cast<std::size_t>(w) * h, -1);
  if (glyph.strokes.empty()) {
    if (sample.has_foreground()) throw DataError("cannot segment a sample without strokes");
    return seg;
  }
  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  std::vector<double> best(seg.labels.size(), std::numeric_limits<double>::infinity());
  const auto px = sample.pixels();
  for (std::size_t s = 0; s < glyph.strokes.size(); ++s) {
    const FloatImage field = skeleton_distance_field({map.to_canvas(glyph.strokes[s])}, w, h,
                                                     std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (px[i] < 128) continue;
      if (field.data[i] < best[i]) {
        best[i] = field.data[i];
        seg.labels[i] = static_cast<int>(s);
      }
    }
  }
  return seg;
}

std::vector<std::vector<bool>> label_contacts(const SegmentationMap& seg, int strokes) {
  std::vector<std::vector<bool>> touch(static_cast<std::size_t>(strokes),
                                       std::vector<bool>(static_cast<std::size_t>(strokes), false));
  static constexpr int kDx[4] = {1, -1, 0, 1};
  static constexpr int kDy[4] = {0, 1, 1, 1};
  for (int y = 0; y < seg.height; ++y) {
    for (int x = 0; x < seg.width; ++x) {
      const int a = seg.label(x, y);
      if (a < 0) continue;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k], ny = y + kDy[k];
        if (nx < 0 || ny < 0 || nx >= seg.width || ny >= seg.height) continue;
        const int b = seg.label(nx, ny);
        if (b < 0 || b == a || a >= strokes || b >= strokes) continue;
        touch[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
        touch[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
      }
    }
  }
  return touch;
}

std::vector<RelationFix> verify_relations(Glyph& glyph, const SegmentationMap& seg) {
  const int n = static_cast<int>(glyph.strokes.size());
  if (static_cast<int>(glyph.relations.size()) != n) throw UsageError("relations not assigned");
  const auto touch = label_contacts(seg, n);
  std::vector<RelationFix> fixes;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Relation& r = glyph.relations[i][j];
      const bool isolated = r.kind == RelationKind::Isolated;
      const bool contact = touch[i][j];
      if (isolated == !contact) continue;
      RelationFix fix{i, j, r.kind, contact ? RelationKind::Crossing : RelationKind::Isolated};
      r.kind = fix.new_kind;
      glyph.relations[j][i].kind = fix.new_kind;
      fixes.push_back(fix);
    }
  }
  return fixes;
}

std::string format_relfix(const Glyph& glyph, const RelationFix& fix) {
  return "RELFIX " + codepoint_label(glyph.codepoint) + ' ' + std::to_string(fix.i) + ' ' +
         std::to_string(fix.j) + ' ' + relation_name(fix.old_kind) + ' ' +
         relation_name(fix.new_kind);
}

}  // namespace glyphforge
