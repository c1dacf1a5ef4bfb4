#include "support.hpp"

#include <glyphforge/geometry.hpp>

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace glyphforge;

TEST_CASE("property: distance transform equals brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 40), h = 5 + static_cast<int>(rng() % 40);
    std::vector<std::uint8_t> sites(static_cast<std::size_t>(w) * h, 0);
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) sites[rng() % sites.size()] = 1;
    const auto dt = squared_distance_transform(sites, w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double best = INFINITY;
        for (int v = 0; v < h; ++v)
          for (int u = 0; u < w; ++u)
            if (sites[static_cast<std::size_t>(v) * w + u])
              best = std::min(best, double((x - u) * (x - u) + (y - v) * (y - v)));
        REQUIRE(dt[static_cast<std::size_t>(y) * w + x] == best);
      }
  }
  const auto none = squared_distance_transform(std::vector<std::uint8_t>(9, 0), 3, 3);
  CHECK(std::isinf(none[4]));
}

TEST_CASE("gaussian kernel is normalized and symmetric") {
  for (double sigma : {0.5, 1.0, 2.5, 6.0}) {
    const auto k = gaussian_kernel(sigma);
    CHECK(static_cast<int>(k.size()) == 2 * static_cast<int>(std::ceil(3 * sigma)) + 1);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == doctest::Approx(k[k.size() - 1 - i]));
  }
}

TEST_CASE("blur preserves mass away from the border") {
  FloatImage img(41, 41);
  img.at(20, 20) = 100.0;
  const FloatImage b = gaussian_blur(img, 2.0);
  CHECK(std::accumulate(b.data.begin(), b.data.end(), 0.0) == doctest::Approx(100.0));
  CHECK(b.at(20, 20) < 100.0);
  CHECK(b.at(19, 20) == doctest::Approx(b.at(21, 20)));
}

TEST_CASE("fill_polygon square") {
  const Polyline sq = {{10, 10}, {30, 10}, {30, 30}, {10, 30}};
  const GrayImage m = fill_polygon(sq, 50, 50);
  CHECK(m.count_foreground() == 21 * 21);
  CHECK(m.foreground(20, 20));
  CHECK_FALSE(m.foreground(5, 5));
}

TEST_CASE("trace_boundary follows the outside of a rectangle") {
  const GrayImage m = testing::filled_rect(20, 20, 5, 5, 14, 9);
  const auto b = trace_boundary(m);
  CHECK(b.size() == 2 * (10 + 5) - 4);
  for (const PixelPos& p : b) {
    CHECK(m.foreground(p.x, p.y));
    const bool edge = p.x == 5 || p.x == 14 || p.y == 5 || p.y == 9;
    CHECK(edge);
  }
  // Clockwise in image coordinates: positive shoelace sum with y down.
  double area2 = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& p = b[i];
    const auto& q = b[(i + 1) % b.size()];
    area2 += double(p.x) * q.y - double(q.x) * p.y;
  }
  CHECK(area2 > 0);
}

TEST_CASE("simplify keeps square corners") {
  Polyline sq;
  for (int i = 0; i < 20; ++i) sq.emplace_back(i, 0);
  for (int i = 0; i < 20; ++i) sq.emplace_back(20, i);
  for (int i = 0; i < 20; ++i) sq.emplace_back(20 - i, 20);
  for (int i = 0; i < 20; ++i) sq.emplace_back(0, 20 - i);
  const auto kept = simplify_closed(sq, 1.0);
  CHECK(kept.size() == 4);
}

TEST_CASE("resample_closed spacing") {
  const Polyline sq = {{0, 0}, {30, 0}, {30, 30}, {0, 30}};
  const Polyline r = resample_closed(sq, 3.0);
  CHECK(r.size() == 40);
  CHECK(r[0].isApprox(sq[0]));
  CHECK(polyline_length(r, true) == doctest::Approx(120.0));
  CHECK(resample_closed(sq, 100.0).size() >= 8);
}

TEST_CASE("thinning a bar leaves a one-pixel line") {
  const GrayImage bar = testing::filled_rect(60, 30, 10, 10, 49, 16);
  const GrayImage t = thin_zhang_suen(bar);
  CHECK(t.count_foreground() > 25);
  for (int x = 15; x < 45; ++x) {
    int col = 0;
    for (int y = 0; y < 30; ++y) col += t.foreground(x, y);
    CHECK(col == 1);
  }
}

TEST_CASE("point segment distance and cubic evaluation") {
  CHECK(point_segment_distance(Vec2(5, 5), Vec2(0, 0), Vec2(10, 0)) == doctest::Approx(5));
  CHECK(point_segment_distance(Vec2(-3, 4), Vec2(0, 0), Vec2(10, 0)) == doctest::Approx(5));
  const Cubic c{{Vec2(0, 0), Vec2(0, 10), Vec2(10, 10), Vec2(10, 0)}};
  CHECK(c.eval(0).isApprox(Vec2(0, 0)));
  CHECK(c.eval(1).isApprox(Vec2(10, 0)));
  CHECK(c.eval(0.5).isApprox(Vec2(5, 7.5)));
  CHECK(c.flatten(8).size() == 9);
}
