#include <glyphforge/assembly.hpp>

#include <glyphforge/error.hpp>
#include <glyphforge/relations.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace glyphforge {

namespace {

constexpr double kRankRatio = 1e-8;
constexpr double kRidge = 1e-12;

Eigen::Matrix3d embed(const Eigen::Matrix2d& a, const Eigen::Vector2d& t) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = a;
  m.topRightCorner<2, 1>() = t;
  return m;
}

}  // namespace

AffineFit fit_affine_detailed(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
  if (src.cols() != dst.cols()) throw UsageError("fit_affine: sample counts differ");
  if (src.cols() < 2) throw DataError("fit_affine: fewer than 2 distinct points");
  const Eigen::Vector2d mu_s = src.topRows<2>().rowwise().mean();
  const Eigen::Vector2d mu_d = dst.topRows<2>().rowwise().mean();
  const Eigen::Matrix2Xd xs = src.topRows<2>().colwise() - mu_s;
  const Eigen::Matrix2Xd xd = dst.topRows<2>().colwise() - mu_d;
  const Eigen::Matrix2d cov = xs * xs.transpose();
  const Eigen::Matrix2d cross = xd * xs.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lmax = eig.eigenvalues()(1);
  const double lmin = eig.eigenvalues()(0);
  if (!(lmax > 0.0)) throw DataError("fit_affine: fewer than 2 distinct points");

  AffineFit fit;
  Eigen::Matrix2d a;
  if (lmin / lmax < kRankRatio) {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
    const Eigen::Matrix2d r = svd.matrixU() * Eigen::Vector2d(1.0, d).asDiagonal() *
                              svd.matrixV().transpose();
    const double scale = (svd.singularValues()(0) + d * svd.singularValues()(1)) / cov.trace();
    a = scale * r;
    fit.similarity = true;
  } else {
    const Eigen::Matrix2d reg = cov + kRidge * cov.trace() * Eigen::Matrix2d::Identity();
    a = cross * reg.inverse();
  }
  fit.t = embed(a, mu_d - a * mu_s);
  return fit;
}

Eigen::Matrix3d fit_affine(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
  return fit_affine_detailed(src, dst).t;
}

Extent samples_extent(const std::vector<Eigen::Matrix3Xd>& samples) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& s : samples) {
    if (s.cols() == 0) continue;
    x0 = std::min(x0, s.row(0).minCoeff());
    x1 = std::max(x1, s.row(0).maxCoeff());
    y0 = std::min(y0, s.row(1).minCoeff());
    y1 = std::max(y1, s.row(1).maxCoeff());
  }
  if (x1 < x0) return {};
  return {x1 - x0, y1 - y0};
}

Eigen::Matrix3d estimate_t_sz(const std::vector<SizePair>& samples, double out_w, double out_h) {
  if (samples.empty()) throw DataError("size estimation needs at least one sample");
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (const SizePair& s : samples) {
    if (!(s.dataset.width > 0.0) || !(s.dataset.height > 0.0) || !(s.adjusted.width > 0.0) ||
        !(s.adjusted.height > 0.0)) {
      throw DataError("size estimation: degenerate glyph extent");
    }
    const double rw = s.adjusted.width / s.dataset.width;
    const double rh = s.adjusted.height / s.dataset.height;
    Eigen::Matrix3d m;
    m << rw, 0, out_w * rw / 2.0, 0, rh, out_h * rh / 2.0, 0, 0, 1;
    sum += m;
  }
  return sum / static_cast<double>(samples.size());
}

std::vector<std::vector<int>> group_skeletons(const Glyph& g) {
  const int n = static_cast<int>(g.strokes.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  if (static_cast<int>(g.relations.size()) == n) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || g.relations[i][j].kind == RelationKind::Isolated) continue;
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[root]].push_back(i);
  }
  return groups;
}

AffineEstimate estimate_t_aff(const std::vector<AffineSample>& samples, const Eigen::Matrix3d& t_sz,
                              bool per_stroke) {
  struct GroupFit {
    AffineFit fit;
    std::size_t members;
  };
  std::vector<GroupFit> fits;
  for (const AffineSample& s : samples) {
    if (s.dataset.size() != s.adjusted.size()) throw UsageError("estimate_t_aff: stroke counts differ");
    std::vector<std::vector<int>> groups = s.groups;
    if (per_stroke || groups.empty()) {
      groups.clear();
      for (int j = 0; j < static_cast<int>(s.dataset.size()); ++j) groups.push_back({j});
    }
    for (const auto& group : groups) {
      Eigen::Index cols = 0;
      for (int j : group) cols += s.dataset.at(static_cast<std::size_t>(j)).cols();
      Eigen::Matrix3Xd src(3, cols), dst(3, cols);
      Eigen::Index at = 0;
      for (int j : group) {
        const auto& d = s.dataset[static_cast<std::size_t>(j)];
        const auto& a = s.adjusted[static_cast<std::size_t>(j)];
        if (d.cols() != a.cols()) throw UsageError("estimate_t_aff: sample counts differ");
        src.middleCols(at, d.cols()) = t_sz * d;
        dst.middleCols(at, a.cols()) = a;
        at += d.cols();
      }
      try {
        fits.push_back({fit_affine_detailed(src, dst), group.size()});
      } catch (const DataError&) {
        // Zero-extent group carries no shape information.
      }
    }
  }
  const bool any_full = std::any_of(fits.begin(), fits.end(),
                                    [](const GroupFit& f) { return !f.fit.similarity; });
  AffineEstimate est;
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (const GroupFit& f : fits) {
    if (any_full && f.fit.similarity) {
      ++est.groups_skipped;
      continue;
    }
    sum += f.fit.t * static_cast<double>(f.members);
    est.strokes_used += f.members;
    ++est.groups_used;
  }
  if (est.strokes_used == 0) throw DataError("affine estimation needs at least one stroke");
  est.t_aff = sum / static_cast<double>(est.strokes_used);
  return est;
}

Eigen::Matrix3Xd transform_skeleton(const Eigen::Matrix3Xd& s, const TransformPair& pair) {
  return pair.t_aff * (pair.t_sz * s);
}

Eigen::Matrix3Xd centered_dataset_samples(const Skeleton& sk, int out_w, int out_h, int n) {
  Eigen::Matrix3Xd s = CanvasMapping::for_canvas(out_w, out_h).to_canvas(sk.samples(n));
  s.row(0).array() -= out_w / 2.0;
  s.row(1).array() -= out_h / 2.0;
  return s;
}

StrokeContext stroke_context(const Glyph& g, const std::vector<Eigen::Matrix3Xd>& samples, int i) {
  StrokeContext ctx;
  const auto n = static_cast<int>(g.strokes.size());
  if (static_cast<int>(g.relations.size()) != n || static_cast<int>(samples.size()) != n) return ctx;
  const Eigen::Vector2d center = samples[i].topRows<2>().rowwise().mean();
  double best_start = std::numeric_limits<double>::infinity();
  double best_end = best_start;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const Relation& r = g.relations[i][j];
    if (r.kind != RelationKind::Continuous && r.kind != RelationKind::Connecting) continue;
    const auto ci = contact_indicators(r.i_bar, static_cast<int>(samples[i].cols()));
    const double d = (samples[j].topRows<2>().rowwise().mean() - center).norm();
    if (ci.start && d < best_start) {
      best_start = d;
      ctx.start = samples[j];
    }
    if (ci.end && d < best_end) {
      best_end = d;
      ctx.end = samples[j];
    }
  }
  return ctx;
}

double mean_l1(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  if (a.cols() != b.cols()) throw UsageError("sample counts differ");
  if (a.cols() == 0) return 0.0;
  return (a - b).cwiseAbs().sum() / static_cast<double>(a.cols());
}

namespace {

Eigen::Matrix3d robust_fit(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
  try {
    return fit_affine(src, dst);
  } catch (const DataError&) {
    // A single repeated point: translation only.
    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t.topRightCorner<2, 1>() =
        dst.topRows<2>().rowwise().mean() - src.topRows<2>().rowwise().mean();
    return t;
  }
}

}  // namespace

double energy_es(const Eigen::Matrix3Xd& s, const Eigen::Matrix3Xd& s_other,
                 const StrokeAttributes& attrs, const StrokeAttributes& attrs_other,
                 double lambda_attr) {
  const double forward = mean_l1(s_other, robust_fit(s, s_other) * s);
  const double backward = mean_l1(s, robust_fit(s_other, s) * s_other);
  return forward + backward + lambda_attr * attrs.differences(attrs_other);
}

double energy_ea(const StrokeContext& c, const StrokeContext& c_other) {
  if (!c.start || !c.end || !c_other.start || !c_other.end) return kMissingContextEnergy;
  return mean_l1(*c.start, *c_other.start) + mean_l1(*c.end, *c_other.end);
}

double deployment_energy(const StrokeAsset& asset, const TargetStroke& target, double lambda_attr) {
  return energy_es(asset.adjusted, target.transformed, asset.attributes, target.attributes,
                   lambda_attr) +
         energy_es(asset.dataset, target.dataset, asset.attributes, target.attributes, lambda_attr) +
         energy_ea(asset.context, target.context);
}

Selection select_stroke(const TargetStroke& target, const std::vector<StrokeAsset>& assets,
                        double lambda_attr) {
  if (assets.empty()) throw DataError("no stroke assets to select from");
  std::vector<double> energies(assets.size());
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < assets.size(); ++i) {
    energies[i] = deployment_energy(assets[i], target, lambda_attr);
    lowest = std::min(lowest, energies[i]);
  }
  Selection best{0, std::numeric_limits<double>::infinity()};
  double best_shift = best.energy;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (!(energies[i] <= lowest + kSelectionTieTolerance)) continue;
    const double shift = assets[i].adjusted.cols() == target.transformed.cols()
                             ? mean_l1(assets[i].adjusted, target.transformed)
                             : 0.0;
    if (shift < best_shift) {
      best = {i, energies[i]};
      best_shift = shift;
    }
  }
  if (!std::isfinite(best_shift)) best = {0, energies[0]};
  return best;
}

namespace {

// Rescales the linear part along the asset's normal direction so that the
// stroke width changes by at most kMaxWidthScale either way.
constexpr double kMaxWidthScale = 1.5;

Eigen::Matrix3d limit_width_scale(const Eigen::Matrix3d& t, const Eigen::Matrix3Xd& asset_skeleton,
                                  const Eigen::Matrix3Xd& target_skeleton) {
  const Eigen::Vector2d mu_s = asset_skeleton.topRows<2>().rowwise().mean();
  const Eigen::Vector2d mu_d = target_skeleton.topRows<2>().rowwise().mean();
  const Eigen::Matrix2Xd xs = asset_skeleton.topRows<2>().colwise() - mu_s;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(xs * xs.transpose());
  const Eigen::Vector2d axis = eig.eigenvectors().col(1);
  const Eigen::Vector2d normal = eig.eigenvectors().col(0);
  Eigen::Matrix2d a = t.topLeftCorner<2, 2>();
  const double along = (a * axis).norm();
  if (!(along > 0.0)) return t;
  const double width = std::abs(a.determinant()) / along;
  if (!(width > 0.0)) return t;
  const double limited = std::clamp(width, 1.0 / kMaxWidthScale, kMaxWidthScale);
  if (limited == width) return t;
  a = a * (Eigen::Matrix2d::Identity() + (limited / width - 1.0) * normal * normal.transpose());
  return embed(a, mu_d - a * mu_s);
}

}  // namespace

Eigen::Matrix3d deployment_transform(const Eigen::Matrix3Xd& asset_skeleton,
                                     const Eigen::Matrix3Xd& target_skeleton) {
  AffineFit fit;
  try {
    fit = fit_affine_detailed(asset_skeleton, target_skeleton);
  } catch (const DataError&) {
    return robust_fit(asset_skeleton, target_skeleton);
  }
  if (!fit.similarity) return limit_width_scale(fit.t, asset_skeleton, target_skeleton);
  const Eigen::Matrix2d sr = fit.t.topLeftCorner<2, 2>();
  const double scale = std::sqrt(std::abs(sr.determinant()));
  if (scale == 0.0) return fit.t;
  const Eigen::Matrix2d rot = sr / scale;
  const Eigen::Vector2d mu_s = asset_skeleton.topRows<2>().rowwise().mean();
  const Eigen::Vector2d mu_d = target_skeleton.topRows<2>().rowwise().mean();
  const Eigen::Matrix2Xd xs = asset_skeleton.topRows<2>().colwise() - mu_s;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(xs * xs.transpose());
  const Eigen::Vector2d axis = eig.eigenvectors().col(1);
  const Eigen::Matrix2d a =
      rot * (Eigen::Matrix2d::Identity() + (scale - 1.0) * axis * axis.transpose());
  return embed(a, mu_d - a * mu_s);
}

GrayImage warp_foreground(const GrayImage& src, const Eigen::Matrix3d& t, int width, int height) {
  GrayImage out(width, height);
  const PixelBox box = foreground_bounds(src);
  if (box.empty()) throw DataError("empty stroke image");
  if (std::abs(t.topLeftCorner<2, 2>().determinant()) < 1e-12) {
    throw DataError("degenerate stroke transform");
  }
  const Eigen::Matrix3d inv = t.inverse();
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (int cy : {box.y0, box.y1}) {
    for (int cx : {box.x0, box.x1}) {
      for (double ox : {-0.5, 0.5}) {
        for (double oy : {-0.5, 0.5}) {
          const Eigen::Vector3d p = t * Eigen::Vector3d(cx + ox, cy + oy, 1.0);
          x0 = std::min(x0, p.x());
          x1 = std::max(x1, p.x());
          y0 = std::min(y0, p.y());
          y1 = std::max(y1, p.y());
        }
      }
    }
  }
  const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int ix1 = std::min(width - 1, static_cast<int>(std::ceil(x1)));
  const int iy1 = std::min(height - 1, static_cast<int>(std::ceil(y1)));
  std::size_t painted = 0;
  for (int y = iy0; y <= iy1; ++y) {
    for (int x = ix0; x <= ix1; ++x) {
      const Eigen::Vector3d p = inv * Eigen::Vector3d(x, y, 1.0);
      const int sx = static_cast<int>(std::lround(p.x()));
      const int sy = static_cast<int>(std::lround(p.y()));
      if (src.in_bounds(sx, sy) && src.foreground(sx, sy)) {
        out.at(x, y) = 255;
        ++painted;
      }
    }
  }
  if (painted == 0) throw DataError("stroke warped outside canvas");
  return out;
}

ComposeResult compose_glyph(const std::vector<TargetStroke>& targets,
                            const std::vector<const StrokeAsset*>& selections, int width, int height) {
  if (targets.size() != selections.size()) throw UsageError("one selection per target required");
  ComposeResult res;
  res.image = GrayImage(width, height);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const StrokeAsset* asset = selections[k];
    if (!asset) {
      res.errors.push_back("stroke " + std::to_string(k) + ": no asset");
      continue;
    }
    try {
      const Eigen::Matrix3d t = deployment_transform(asset->adjusted, targets[k].transformed);
      const GrayImage warped = warp_foreground(asset->image, t, width, height);
      for (std::size_t i = 0; i < warped.pixels().size(); ++i) {
        if (warped.pixels()[i]) res.image.pixels()[i] = 255;
      }
    } catch (const DataError& e) {
      res.errors.push_back("stroke " + std::to_string(k) + ": " + e.what());
    }
  }
  return res;
}

}  // namespace glyphforge
