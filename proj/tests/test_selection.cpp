#include "support.hpp"

#include <glyphforge/error.hpp>
#include <glyphforge/relations.hpp>
#include <glyphforge/selection.hpp>

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace glyphforge;

namespace {

Glyph with_relations(Glyph g) {
  std::vector<Eigen::Matrix3Xd> s;
  for (const auto& sk : g.strokes) s.push_back(sk.samples(32));
  g.relations = assign_relations(s, 4.0);
  return g;
}

std::vector<Glyph> first_glyphs(std::size_t n) {
  auto all = load_glyph_dir(testing::dataset_dir());
  all.resize(std::min(n, all.size()));
  return all;
}

std::vector<SkeletonRecord> records_of(const std::vector<Glyph>& glyphs) {
  std::vector<SkeletonRecord> out;
  for (const Glyph& g : glyphs) {
    const auto r = skeleton_records(g, 4.0, 32);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace

TEST_CASE("f_e matches a double loop") {
  const Glyph g = testing::dataset_glyph("U+5927");  // three strokes
  const auto v = skeleton_records(g, 4.0, 32);
  REQUIRE(v.size() == 3);
  const auto c = records_of({testing::dataset_glyph("U+5341"), testing::dataset_glyph("U+4EBA")});
  double sum = 0;
  for (const auto& vv : v) {
    double best = INFINITY;
    for (const auto& cc : c)
      best = std::min(best, energy_es(cc.samples, vv.samples, cc.attributes, vv.attributes) +
                                energy_ea(cc.context, vv.context));
    sum += best;
  }
  CHECK(f_e(c, v) == doctest::Approx(sum / 3));
  CHECK(f_e(c, v, 10.0) == doctest::Approx(sum / 30));
  CHECK(std::isinf(f_e({}, v)));
}

TEST_CASE("f_e of a covering candidate has no shape term") {
  const auto v = records_of(first_glyphs(6));
  double ea_only = 0;
  for (const auto& r : v) ea_only += energy_ea(r.context, r.context);
  CHECK(f_e(v, v) <= ea_only / static_cast<double>(v.size()) + 1e-9);
}

TEST_CASE("property: f_e never grows with the candidate") {
  const auto glyphs = first_glyphs(20);
  const auto v = records_of(glyphs);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Glyph> cand;
    double prev = INFINITY;
    for (int step = 0; step < 6; ++step) {
      cand.push_back(glyphs[rng() % glyphs.size()]);
      const double now = f_e(records_of(cand), v);
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("f_r counts strokes and relation entries") {
  const Glyph iso = with_relations(testing::glyph_of({testing::line(20, 20, 60, 20), testing::line(20, 100, 60, 100),
                                                      testing::line(20, 180, 60, 180)}));
  CHECK(f_r({&iso}) == 3.0);
  const Glyph plus = with_relations(testing::glyph_of({testing::line(20, 100, 180, 100), testing::line(100, 20, 100, 180)}));
  CHECK(complexity(plus).crossing == 2);
  CHECK(f_r({&plus}) == 4.0);
  CHECK(f_r({&iso, &plus}) > f_r({&iso}));
  CHECK(f_r({&iso, &plus}, 7.0) == doctest::Approx(1.0));
}

TEST_CASE("f_selection endpoints") {
  CHECK(f_selection(0.3, 0.9, 1.0) == 0.3);
  CHECK(f_selection(0.3, 0.9, 0.0) == 0.9);
  CHECK(f_selection(0.3, 0.9, 0.5) == doctest::Approx(0.6));
}

TEST_CASE("selection problem normalizes consistently") {
  const auto glyphs = first_glyphs(12);
  SelectionParams p;
  p.k = 4;
  const SelectionProblem prob(glyphs, p);
  const std::vector<int> ids = {1, 4, 7, 9};
  std::vector<Glyph> chosen;
  std::vector<const Glyph*> ptrs;
  for (int i : ids) chosen.push_back(prob.glyph(static_cast<std::size_t>(i)));
  for (const Glyph& g : chosen) ptrs.push_back(&g);
  CHECK(prob.fe(ids) == doctest::Approx(f_e(records_of(chosen), records_of(glyphs), grid_diagonal())));
  CHECK(prob.fr(ids) == doctest::Approx(f_r(ptrs, double(p.k) * prob.max_strokes())));
  CHECK(prob.energy(ids, 0.6) == doctest::Approx(0.6 * prob.fe(ids) + 0.4 * prob.fr(ids)));
}

TEST_CASE("GA invariants, elitism and determinism") {
  const auto glyphs = first_glyphs(30);
  SelectionParams p;
  p.k = 5;
  const SelectionProblem prob(glyphs, p);
  GaConfig cfg;
  cfg.seed = 42;
  cfg.max_generations = 120;
  std::size_t checked = 0;
  cfg.observer = [&](int, const std::vector<CandidateSet>& pop) {
    for (const CandidateSet& c : pop) {
      REQUIRE(c.ids.size() == 5);
      const std::set<int> uniq(c.ids.begin(), c.ids.end());
      REQUIRE(uniq.size() == 5);
      REQUIRE(*uniq.begin() >= 0);
      REQUIRE(*uniq.rbegin() < 30);
      ++checked;
    }
  };
  const GaResult a = run_ga(prob, 0.6, cfg);
  CHECK(checked > 0);
  for (std::size_t g = 1; g < a.trace.size(); ++g) CHECK(a.trace[g].best <= a.trace[g - 1].best);
  CHECK(a.best.energy == a.trace.back().best);
  cfg.observer = nullptr;
  const GaResult b = run_ga(prob, 0.6, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t g = 0; g < a.trace.size(); ++g) {
    CHECK(a.trace[g].best == b.trace[g].best);
    CHECK(a.trace[g].mean == b.trace[g].mean);
  }
  CHECK(a.best.ids == b.best.ids);
}

TEST_CASE("GA errors") {
  SelectionParams p;
  p.k = 5;
  const SelectionProblem prob(first_glyphs(5), p);
  CHECK_THROWS_AS(run_ga(prob, 0.6, {}), UsageError);
}

TEST_CASE("exhaustive search on a tiny instance") {
  SelectionParams p;
  p.k = 2;
  const SelectionProblem prob(first_glyphs(6), p);
  const CandidateSet best = exhaustive_best(prob, 0.5);
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) CHECK(best.energy <= prob.energy({a, b}, 0.5));
  GaConfig cfg;
  cfg.population = 10;
  cfg.survivors = 4;
  cfg.offspring = 8;
  cfg.max_generations = 60;
  CHECK(run_ga(prob, 0.5, cfg).best.energy == doctest::Approx(best.energy));
}

TEST_CASE("property: complexity of the selection grows with alpha") {
  const auto glyphs = load_glyph_dir(testing::dataset_dir());
  SelectionParams p;
  const SelectionProblem prob(glyphs, p);
  std::vector<double> fr;
  for (double alpha : {0.4, 0.6, 0.8}) {
    double acc = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      GaConfig cfg;
      cfg.seed = seed;
      acc += prob.fr(run_ga(prob, alpha, cfg).best.ids);
    }
    fr.push_back(acc / 3);
  }
  // Spearman correlation of (alpha, f_r) over three points.
  std::vector<int> rank = {0, 1, 2};
  std::sort(rank.begin(), rank.end(), [&](int a, int b) { return fr[a] < fr[b]; });
  std::vector<double> r(3);
  for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(rank[i])] = i;
  double d2 = 0;
  for (int i = 0; i < 3; ++i) d2 += (r[i] - i) * (r[i] - i);
  const double rho = 1 - 6 * d2 / (3 * (9 - 1));
  INFO("f_r by alpha: " << fr[0] << " " << fr[1] << " " << fr[2]);
  CHECK(rho > 0);
  CHECK(fr[2] >= fr[0]);
}
