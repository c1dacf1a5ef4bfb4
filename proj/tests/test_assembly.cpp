#include "support.hpp"

#include <glyphforge/assembly.hpp>
#include <glyphforge/error.hpp>
#include <glyphforge/relations.hpp>

#include <doctest.h>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace glyphforge;

namespace {

Eigen::Matrix3d affine(double a, double b, double c, double d, double tx, double ty) {
  Eigen::Matrix3d m;
  m << a, b, tx, c, d, ty, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rotation(double deg, double tx = 0, double ty = 0) {
  const double t = deg * M_PI / 180.0;
  return affine(std::cos(t), -std::sin(t), std::sin(t), std::cos(t), tx, ty);
}

Eigen::Matrix3Xd l_shape() {
  Skeleton s;
  s.line_type = 3;
  s.points = {{20, 20}, {20, 120}, {20, 160}, {120, 160}};
  return resample_skeleton(s, 32);
}

double residual(const Eigen::Matrix3d& t, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  return (b - t * a).squaredNorm();
}

// Union-find written separately from the library's grouping.
std::vector<std::vector<int>> oracle_groups(const Glyph& g) {
  const int n = static_cast<int>(g.size());
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = next;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v)
        if (v != u && comp[v] < 0 &&
            (g.relations[u][v].kind != RelationKind::Isolated || g.relations[v][u].kind != RelationKind::Isolated)) {
          comp[v] = next;
          stack.push_back(v);
        }
    }
    ++next;
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(next));
  for (int i = 0; i < n; ++i) out[comp[i]].push_back(i);
  return out;
}

Glyph related(std::vector<Skeleton> strokes, double tau = 4) {
  Glyph g = testing::glyph_of(std::move(strokes));
  std::vector<Eigen::Matrix3Xd> s;
  for (const auto& sk : g.strokes) s.push_back(resample_skeleton(sk, 32));
  g.relations = assign_relations(s, tau);
  return g;
}

StrokeAsset asset_from(const Skeleton& sk, const std::string& id, int size = 200) {
  StrokeAsset a;
  a.id = id;
  a.image = rasterize_strokes({sk}, 5, size, size);
  const CanvasMapping map = CanvasMapping::for_canvas(size, size);
  a.adjusted = map.to_canvas(resample_skeleton(sk, 32));
  a.dataset = a.adjusted;
  a.attributes = StrokeAttributes::of(sk);
  return a;
}

TargetStroke target_from(const StrokeAsset& a) {
  TargetStroke t;
  t.transformed = a.adjusted;
  t.dataset = a.dataset;
  t.attributes = a.attributes;
  t.context = a.context;
  return t;
}

}  // namespace

TEST_CASE("fit_affine identity and known transforms") {
  const Eigen::Matrix3Xd s = l_shape();
  CHECK((fit_affine(s, s) - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  const Eigen::Matrix3d m = rotation(30, 12, -7);
  CHECK((fit_affine(s, m * s) - m).norm() < 1e-6);
}

TEST_CASE("collinear stroke falls back to a similarity") {
  const Eigen::Matrix3Xd s = resample_skeleton(testing::line(10, 50, 110, 50), 32);
  const Eigen::Matrix3d shift = affine(1, 0, 0, 1, 5, 7);
  const AffineFit fit = fit_affine_detailed(s, shift * s);
  CHECK(fit.similarity);
  CHECK((fit.t - shift).norm() < 1e-9);
  CHECK_THROWS_AS(fit_affine(resample_skeleton(testing::line(3, 3, 3, 3), 8),
                             resample_skeleton(testing::line(3, 3, 3, 3), 8)),
                  DataError);
}

TEST_CASE("property: fit residual never exceeds the identity residual") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(0, 200), noise(-20, 20);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix3Xd a(3, 16), b(3, 16);
    const bool collinear = trial % 4 == 0;
    for (int i = 0; i < 16; ++i) {
      const double x = c(rng);
      a.col(i) << x, collinear ? 0.5 * x + 3 : c(rng), 1;
      b.col(i) << a(0, i) + noise(rng), a(1, i) + noise(rng), 1;
    }
    const Eigen::Matrix3d t = fit_affine(a, b);
    CHECK(t.row(2).isApprox(Eigen::RowVector3d(0, 0, 1)));
    CHECK(residual(t, a, b) <= residual(Eigen::Matrix3d::Identity(), a, b) + 1e-6);
  }
}

TEST_CASE("t_sz examples") {
  const Eigen::Matrix3d one = estimate_t_sz({{{100, 100}, {100, 100}}}, 500, 500);
  CHECK(one(0, 0) == 1.0);
  CHECK(one(1, 1) == 1.0);
  CHECK(one(0, 2) == 250.0);
  CHECK(one(1, 2) == 250.0);
  CHECK(one.row(2) == Eigen::RowVector3d(0, 0, 1));
  const Eigen::Matrix3d avg = estimate_t_sz({{{100, 100}, {50, 50}}, {{100, 100}, {150, 150}}}, 500, 500);
  CHECK(avg(0, 0) == doctest::Approx(1.0));
  CHECK(avg(1, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_t_sz({{{0, 100}, {50, 50}}}, 500, 500), DataError);
  CHECK_THROWS_AS(estimate_t_sz({}, 500, 500), DataError);
}

TEST_CASE("grouping") {
  SUBCASE("isolated strokes") {
    const Glyph g = related({testing::line(20, 20, 60, 20), testing::line(20, 100, 60, 100)});
    CHECK(group_skeletons(g) == std::vector<std::vector<int>>{{0}, {1}});
  }
  SUBCASE("plus sign") {
    const Glyph g = related({testing::line(20, 100, 180, 100), testing::line(100, 20, 100, 180)});
    CHECK(group_skeletons(g) == std::vector<std::vector<int>>{{0, 1}});
  }
  SUBCASE("chain") {
    const Glyph g = related({testing::line(20, 20, 20, 100), testing::line(20, 100, 100, 100),
                             testing::line(100, 100, 100, 180), testing::line(160, 20, 180, 20)});
    CHECK(group_skeletons(g) == oracle_groups(g));
    CHECK(group_skeletons(g) == std::vector<std::vector<int>>{{0, 1, 2}, {3}});
  }
  SUBCASE("dataset glyphs agree with the oracle") {
    for (const Glyph& raw : load_glyph_dir(testing::dataset_dir())) {
      Glyph g = raw;
      std::vector<Eigen::Matrix3Xd> s;
      for (const auto& sk : g.strokes) s.push_back(resample_skeleton(sk, 32));
      g.relations = assign_relations(s, 4);
      const auto groups = group_skeletons(g);
      CHECK(groups == oracle_groups(g));
      std::vector<int> all;
      for (const auto& grp : groups) all.insert(all.end(), grp.begin(), grp.end());
      std::sort(all.begin(), all.end());
      std::vector<int> expect(g.size());
      std::iota(expect.begin(), expect.end(), 0);
      CHECK(all == expect);
    }
  }
}

TEST_CASE("t_aff estimation") {
  std::vector<AffineSample> samples;
  const Eigen::Matrix3d t_sz = affine(2.5, 0, 0, 2.5, 0, 0);
  const Eigen::Matrix3d m = affine(1, 0.3, 0, 1, 4, -2);
  for (const char* label : {"U+53E3", "U+5341", "U+6728", "U+5927"}) {
    const Glyph g = related(testing::dataset_glyph(label).strokes);
    AffineSample s;
    for (const auto& sk : g.strokes) {
      Eigen::Matrix3Xd d = resample_skeleton(sk, 32);
      d.row(0).array() -= 100;
      d.row(1).array() -= 100;
      s.dataset.push_back(d);
      s.adjusted.push_back(t_sz * d);
    }
    s.groups = group_skeletons(g);
    samples.push_back(s);
  }
  SUBCASE("unsheared data gives the identity") {
    const AffineEstimate e = estimate_t_aff(samples, t_sz);
    CHECK((e.t_aff - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  }
  SUBCASE("a single shear is recovered") {
    for (auto& s : samples)
      for (auto& a : s.adjusted) a = m * a;
    CHECK((estimate_t_aff(samples, t_sz).t_aff - m).norm() < 1e-6);
    CHECK((estimate_t_aff(samples, t_sz, true).t_aff - m).norm() < 1e-6);
  }
  SUBCASE("mixed populations average the matrices") {
    const Eigen::Matrix3d mi = m.inverse();
    std::size_t weight_m = 0, weight_mi = 0;
    for (std::size_t k = 0; k < samples.size(); ++k)
      for (auto& a : samples[k].adjusted) a = (k % 2 == 0 ? m : mi) * a;
    // Equal stroke weight is not guaranteed across glyphs, so compare against
    // the weighted oracle.
    for (std::size_t k = 0; k < samples.size(); ++k)
      (k % 2 == 0 ? weight_m : weight_mi) += samples[k].dataset.size();
    const Eigen::Matrix3d expect = (m * double(weight_m) + mi * double(weight_mi)) / double(weight_m + weight_mi);
    const Eigen::Matrix3d got = estimate_t_aff(samples, t_sz).t_aff;
    CHECK((got - expect).norm() < 1e-6);
    CHECK((got - Eigen::Matrix3d::Identity()).norm() > 1e-3);
  }
  SUBCASE("no strokes") { CHECK_THROWS_AS(estimate_t_aff({}, t_sz), DataError); }
}

TEST_CASE("transform_skeleton") {
  const Eigen::Matrix3Xd s = l_shape();
  CHECK(transform_skeleton(s, {}) == s);
  TransformPair p;
  p.t_sz = affine(2, 0, 0, 2, 250, 250);
  p.t_aff = affine(1, 0.2, 0.1, 1, 3, 4);
  const Eigen::Matrix3Xd out = transform_skeleton(s, p);
  CHECK((out - (p.t_aff * p.t_sz) * s).norm() < 1e-9);
  CHECK((out.row(2).array() == 1.0).all());
  TransformPair scale_only;
  scale_only.t_sz = affine(2, 0, 0, 2, 0, 0);
  CHECK((transform_skeleton(s, scale_only).topRows<2>() - 2 * s.topRows<2>()).norm() < 1e-12);
}

TEST_CASE("E_s examples") {
  const Eigen::Matrix3Xd s = l_shape();
  const StrokeAttributes a{3, 0, 0}, b{2, 0, 0};
  CHECK(energy_es(s, s, a, a) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(energy_es(s, s, a, b) == doctest::Approx(1.0));
  CHECK(energy_es(s, s, a, b, 2.5) == doctest::Approx(2.5));
  const Eigen::Matrix3Xd shifted = affine(1, 0, 0, 1, 13, -4) * s;
  CHECK(energy_es(s, shifted, a, a) < 1e-6);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(0, 200);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3Xd r(3, 32);
    for (int i = 0; i < 32; ++i) r.col(i) << c(rng), c(rng), 1;
    CHECK(energy_es(s, r, a, b) >= 0.0);
  }
}

TEST_CASE("E_a examples") {
  const Eigen::Matrix3Xd s = l_shape();
  StrokeContext full{s, s};
  StrokeContext partial{s, std::nullopt};
  CHECK(energy_ea(full, full) == 0.0);
  CHECK(energy_ea(full, partial) == kMissingContextEnergy);
  CHECK(energy_ea(StrokeContext{}, StrokeContext{}) == 50.0);
  const double c = 3.0;
  Eigen::Matrix3Xd off = s;
  off.row(0).array() += c;
  off.row(1).array() += c;
  CHECK(energy_ea(full, StrokeContext{off, off}) == doctest::Approx(2 * c * 2));
}

TEST_CASE("stroke context follows Continuous and Connecting relations") {
  // Stroke 0 runs from the end of stroke 1 to the body of stroke 2.
  const Glyph g = related({testing::line(60, 40, 60, 140), testing::line(20, 40, 60, 40),
                           testing::line(20, 140, 120, 140)});
  std::vector<Eigen::Matrix3Xd> s;
  for (const auto& sk : g.strokes) s.push_back(resample_skeleton(sk, 32));
  const StrokeContext ctx = stroke_context(g, s, 0);
  REQUIRE(ctx.start);
  REQUIRE(ctx.end);
  CHECK(*ctx.start == s[1]);
  CHECK(*ctx.end == s[2]);
}

TEST_CASE("select_stroke ties and worse candidates") {
  const StrokeAsset a = asset_from(testing::line(20, 20, 20, 150), "a");
  Skeleton bent;
  bent.line_type = 2;
  bent.points = {{20, 20}, {80, 60}, {30, 150}};
  const StrokeAsset worse = asset_from(bent, "w");
  const TargetStroke t = target_from(a);
  CHECK(select_stroke(t, {a, a}).index == 0);
  CHECK(select_stroke(t, {worse, a}).index == 1);
  CHECK_THROWS_AS(select_stroke(t, {}), DataError);

  SUBCASE("equal energies prefer the nearest skeleton") {
    const StrokeAsset far = asset_from(testing::line(150, 10, 150, 190), "far");
    REQUIRE(std::abs(deployment_energy(far, t) - deployment_energy(a, t)) <= kSelectionTieTolerance);
    CHECK(select_stroke(t, {far, a}).index == 1);
    CHECK(select_stroke(t, {a, far}).index == 0);
  }
  SUBCASE("property: appending strictly worse candidates keeps the argmin") {
    std::vector<StrokeAsset> pool = {worse, a};
    const Selection base = select_stroke(t, pool);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> c(20, 180);
    for (int k = 0; k < 20; ++k) {
      Skeleton sk;
      sk.line_type = 2;
      sk.points = {{c(rng), c(rng)}, {c(rng), c(rng)}, {c(rng), c(rng)}};
      StrokeAsset cand = asset_from(sk, "r" + std::to_string(k));
      if (deployment_energy(cand, t) <= base.energy + kSelectionTieTolerance) continue;
      pool.push_back(cand);
      CHECK(select_stroke(t, pool).index == base.index);
    }
  }
}

TEST_CASE("compose single and disjoint strokes") {
  const StrokeAsset a = asset_from(testing::line(20, 40, 150, 40), "a");
  const StrokeAsset b = asset_from(testing::line(30, 150, 170, 150), "b");
  const ComposeResult one = compose_glyph({target_from(a)}, {&a}, 200, 200);
  CHECK(one.errors.empty());
  CHECK(one.image == a.image);
  const ComposeResult two = compose_glyph({target_from(a), target_from(b)}, {&a, &b}, 200, 200);
  CHECK(two.image.count_foreground() == a.image.count_foreground() + b.image.count_foreground());
  CHECK_THROWS_AS(compose_glyph({target_from(a)}, {}, 200, 200), UsageError);
}

TEST_CASE("compose reports strokes pushed off the canvas") {
  const StrokeAsset a = asset_from(testing::line(20, 40, 150, 40), "a");
  TargetStroke t = target_from(a);
  t.transformed = affine(1, 0, 0, 1, 1000, 1000) * t.transformed;
  const ComposeResult r = compose_glyph({t}, {&a}, 200, 200);
  CHECK(r.errors.size() == 1);
  CHECK_FALSE(r.image.has_foreground());
}

TEST_CASE("reconstructing a glyph from its own strokes is exact") {
  const Glyph g = testing::dataset_glyph("U+6728");
  std::vector<StrokeAsset> assets;
  std::vector<TargetStroke> targets;
  for (std::size_t k = 0; k < g.size(); ++k) assets.push_back(asset_from(g.strokes[k], std::to_string(k)));
  std::vector<const StrokeAsset*> sel;
  for (const auto& a : assets) {
    targets.push_back(target_from(a));
    sel.push_back(&a);
  }
  const ComposeResult r = compose_glyph(targets, sel, 200, 200);
  CHECK(r.image == rasterize_glyph(g, 5, 200, 200).pixels);
}

TEST_CASE("deployment keeps collinear stroke width") {
  const Eigen::Matrix3Xd src = resample_skeleton(testing::line(20, 100, 120, 100), 32);
  const Eigen::Matrix3Xd dst = resample_skeleton(testing::line(50, 20, 50, 170), 32);
  const Eigen::Matrix3d t = deployment_transform(src, dst);
  // The axis is stretched by 1.5 and rotated; the normal keeps unit length.
  const Eigen::Vector2d along = t.topLeftCorner<2, 2>() * Eigen::Vector2d(1, 0);
  const Eigen::Vector2d across = t.topLeftCorner<2, 2>() * Eigen::Vector2d(0, 1);
  CHECK(along.norm() == doctest::Approx(1.5));
  CHECK(across.norm() == doctest::Approx(1.0));
  CHECK((t * src - dst).norm() < 1e-6);
}
