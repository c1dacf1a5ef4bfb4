#include "support.hpp"

#include <glyphforge/error.hpp>
#include <glyphforge/image.hpp>

#include <doctest.h>

#include <fstream>
#include <random>

using namespace glyphforge;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

}  // namespace

TEST_CASE("png and pgm round trips") {
  testing::TempDir dir("img");
  const GrayImage img = random_image(37, 23, 1);
  write_png(dir / "a.png", img);
  write_pgm(dir / "a.pgm", img);
  CHECK(read_image(dir / "a.png") == img);
  CHECK(read_image(dir / "a.pgm") == img);
  write_image(dir / "b.pgm", img);
  CHECK(read_image(dir / "b.pgm") == img);
  const auto bytes = encode_png(img);
  CHECK(decode_image(bytes) == img);
}

TEST_CASE("corrupt files raise data errors naming the file") {
  testing::TempDir dir("img");
  {
    std::ofstream out(dir / "bad.png", std::ios::binary);
    out << "definitely not an image";
  }
  try {
    read_image(dir / "bad.png");
    FAIL("no error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.png") != std::string::npos);
  }
  CHECK_THROWS_AS(read_image(dir / "missing.png"), DataError);
}

TEST_CASE("polarity normalization") {
  GrayImage dark_on_light(20, 20, 255);
  dark_on_light.at(10, 10) = 0;
  const GrayImage n = normalize_polarity(dark_on_light);
  CHECK(n.at(10, 10) == 255);
  CHECK(n.at(0, 0) == 0);
  GrayImage light_on_dark(20, 20, 0);
  light_on_dark.at(3, 3) = 255;
  CHECK(normalize_polarity(light_on_dark) == light_on_dark);
}

TEST_CASE("resize_area is exact for integer factors") {
  GrayImage img(4, 4);
  img.at(0, 0) = 255;
  img.at(1, 0) = 255;
  img.at(0, 1) = 255;
  img.at(1, 1) = 255;
  img.at(2, 2) = 100;
  const GrayImage small = resize_area(img, 2, 2);
  CHECK(small.at(0, 0) == 255);
  CHECK(small.at(1, 0) == 0);
  CHECK(small.at(1, 1) == 25);
  const GrayImage same = resize_area(img, 4, 4);
  CHECK(same == img);
}

TEST_CASE("jaccard and hamming") {
  const GrayImage a = testing::filled_rect(10, 10, 0, 0, 4, 9);
  const GrayImage b = testing::filled_rect(10, 10, 0, 0, 9, 9);
  CHECK(jaccard(a, b) == doctest::Approx(0.5));
  CHECK(jaccard(a, a) == 1.0);
  CHECK(jaccard(GrayImage(5, 5), GrayImage(5, 5)) == 1.0);
  CHECK(hamming_distance(a, b) == 50);
  CHECK_THROWS_AS(jaccard(a, GrayImage(3, 3)), UsageError);
}

TEST_CASE("connected components are 8-connected") {
  GrayImage img(6, 6);
  img.at(0, 0) = 255;
  img.at(1, 1) = 255;  // diagonal neighbour
  img.at(4, 4) = 255;
  const Components c = connected_components(img);
  CHECK(c.count == 2);
  CHECK(c.label(0, 0) == c.label(1, 1));
  CHECK(c.label(4, 4) != c.label(0, 0));
  CHECK(c.label(3, 3) == -1);
  CHECK(component_mask(c, c.label(4, 4)).count_foreground() == 1);
}

TEST_CASE("foreground bounds") {
  const GrayImage img = testing::filled_rect(30, 20, 3, 4, 10, 12);
  const PixelBox b = foreground_bounds(img);
  CHECK(b.x0 == 3);
  CHECK(b.y0 == 4);
  CHECK(b.x1 == 10);
  CHECK(b.y1 == 12);
  CHECK(foreground_bounds(GrayImage(4, 4)).empty());
}
