#include "support.hpp"

#include <glyphforge/error.hpp>
#include <glyphforge/evalharness.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace glyphforge;

namespace {

EdgeSet points(int w, int h, std::vector<PixelPos> p) { return EdgeSet{w, h, std::move(p)}; }

EdgeSet random_edges(std::mt19937_64& rng, int size, int n) {
  EdgeSet e{size, size, {}};
  for (int i = 0; i < n; ++i)
    e.points.push_back({static_cast<int>(rng() % size), static_cast<int>(rng() % size)});
  return e;
}

EdgeSet shifted(const EdgeSet& e, int dx) {
  EdgeSet out = e;
  out.width += dx;
  for (PixelPos& p : out.points) p.x += dx;
  return out;
}

}  // namespace

TEST_CASE("chamfer examples") {
  const EdgeSet a = points(20, 20, {{2, 3}, {7, 7}, {10, 1}});
  CHECK(chamfer(a, a) == 0.0);
  const EdgeSet p = points(20, 20, {{0, 0}});
  const EdgeSet q = points(20, 20, {{3, 4}});
  CHECK(directed_chamfer(p, q) == doctest::Approx(5.0));
  CHECK(chamfer(p, q) == doctest::Approx(10.0));
  CHECK_THROWS_AS(chamfer(EdgeSet{}, a), DataError);
}

TEST_CASE("property: chamfer is symmetric and matches brute force") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const EdgeSet a = random_edges(rng, 60, 1 + static_cast<int>(rng() % 80));
    const EdgeSet b = random_edges(rng, 60, 1 + static_cast<int>(rng() % 80));
    CHECK(std::abs(chamfer(a, b) - chamfer_brute_force(a, b)) <= 1e-9);
    CHECK(chamfer(a, b) == chamfer(b, a));
  }
}

TEST_CASE("property: chamfer grows with translation") {
  const GrayImage sq = testing::filled_rect(100, 100, 30, 30, 69, 69);
  const EdgeSet e = canny_edges(sq);
  double prev = -1;
  for (int t = 0; t <= 5; ++t) {
    const double d = chamfer(e, shifted(e, t));
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("canny finds the outline of a square") {
  const GrayImage sq = testing::filled_rect(100, 100, 30, 30, 69, 69);
  const EdgeSet e = canny_edges(sq);
  CHECK(std::abs(static_cast<double>(e.points.size()) - 160.0) <= 0.15 * 160);
  for (const PixelPos& p : e.points) {
    const double dx = std::min(std::abs(p.x - 29.5), std::abs(p.x - 69.5));
    const double dy = std::min(std::abs(p.y - 29.5), std::abs(p.y - 69.5));
    const bool inside_x = p.x >= 28 && p.x <= 71, inside_y = p.y >= 28 && p.y <= 71;
    CHECK(inside_x);
    CHECK(inside_y);
    CHECK(std::min(dx, dy) <= 1.0);
  }
}

TEST_CASE("canny on blank and inverted images") {
  CHECK(canny_edges(GrayImage(50, 50)).empty());
  CHECK(canny_edges(GrayImage(50, 50, 255)).empty());
  Skeleton s;
  s.line_type = 2;
  s.points = {{30, 160}, {100, 20}, {170, 160}};
  const GrayImage img = rasterize_glyph(testing::glyph_of({s}), 8, 200, 200).pixels;
  const GrayImage inv = invert(img);
  const EdgeSet a = canny_edges(img), b = canny_edges(inv);
  CHECK_FALSE(a.empty());
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].y == b.points[i].y);
  }
  const EdgeSet small = eval_edges(img);
  CHECK(small.width == kEvalSize);
  CHECK(small.height == kEvalSize);
}

TEST_CASE("recognition") {
  std::vector<LabeledEdges> train;
  for (const char* label : {"U+5341", "U+4EBA", "U+5927", "U+5C71"}) {
    const Glyph g = testing::dataset_glyph(label);
    train.push_back({label, eval_edges(rasterize_glyph(g, 10, 200, 200).pixels)});
  }
  SUBCASE("train equals test") {
    const Recognition r = recognize(train, train);
    CHECK(r.accuracy == 1.0);
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(r.distances[i][i] == 0.0);
  }
  SUBCASE("distance matrix and argmin") {
    std::vector<LabeledEdges> test;
    for (const char* label : {"U+5341", "U+4EBA", "U+5927", "U+5C71"}) {
      const Glyph g = testing::dataset_glyph(label);
      test.push_back({label, eval_edges(rasterize_glyph(g, 14, 200, 200).pixels)});
    }
    const Recognition r = recognize(test, train);
    std::size_t correct = 0;
    for (std::size_t t = 0; t < test.size(); ++t) {
      std::size_t best = 0;
      for (std::size_t j = 0; j < train.size(); ++j) {
        const double d = chamfer_brute_force(test[t].edges, train[j].edges);
        CHECK(r.distances[t][j] == doctest::Approx(d).epsilon(1e-12));
        if (d < chamfer_brute_force(test[t].edges, train[best].edges)) best = j;
      }
      CHECK(r.predicted[t] == train[best].label);
      correct += train[best].label == test[t].label;
    }
    CHECK(r.accuracy == doctest::Approx(double(correct) / test.size()));
  }
  SUBCASE("class mismatch") {
    std::vector<LabeledEdges> test = {train[0]};
    CHECK_THROWS_AS(recognize(test, train), DataError);
    CHECK_THROWS_AS(recognize({}, train), DataError);
  }
}
