#include <glyphforge/evalharness.hpp>

#include <glyphforge/error.hpp>
#include <glyphforge/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace glyphforge {

GrayImage EdgeSet::to_mask() const {
  GrayImage m(width, height);
  for (const PixelPos& p : points) m.at(p.x, p.y) = 255;
  return m;
}

EdgeSet edge_set_from_mask(const GrayImage& mask) {
  EdgeSet e{mask.width(), mask.height(), {}};
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.foreground(x, y)) e.points.push_back({x, y});
  return e;
}

double directed_chamfer(const EdgeSet& a, const EdgeSet& b) {
  if (a.empty() || b.empty()) throw DataError("chamfer distance of an empty edge set");
  int w = std::max(a.width, b.width);
  int h = std::max(a.height, b.height);
  for (const PixelPos& p : a.points) {
    w = std::max(w, p.x + 1);
    h = std::max(h, p.y + 1);
  }
  for (const PixelPos& p : b.points) {
    w = std::max(w, p.x + 1);
    h = std::max(h, p.y + 1);
  }
  std::vector<std::uint8_t> sites(static_cast<std::size_t>(w) * h, 0);
  for (const PixelPos& p : b.points) {
    if (p.x < 0 || p.y < 0) throw DataError("edge point outside the canvas");
    sites[static_cast<std::size_t>(p.y) * w + p.x] = 1;
  }
  const std::vector<double> dt = squared_distance_transform(sites, w, h);
  double sum = 0.0;
  for (const PixelPos& p : a.points) {
    if (p.x < 0 || p.y < 0) throw DataError("edge point outside the canvas");
    sum += std::sqrt(dt[static_cast<std::size_t>(p.y) * w + p.x]);
  }
  return sum / static_cast<double>(a.points.size());
}

double chamfer(const EdgeSet& a, const EdgeSet& b) { return directed_chamfer(a, b) + directed_chamfer(b, a); }

namespace {

double directed_brute(const EdgeSet& a, const EdgeSet& b) {
  double sum = 0.0;
  for (const PixelPos& p : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const PixelPos& q : b.points) {
      const double dx = p.x - q.x;
      const double dy = p.y - q.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(a.points.size());
}

}  // namespace

double chamfer_brute_force(const EdgeSet& a, const EdgeSet& b) {
  if (a.empty() || b.empty()) throw DataError("chamfer distance of an empty edge set");
  return directed_brute(a, b) + directed_brute(b, a);
}

namespace {

// Integer-weighted smoothing so that inverting the input negates the
// gradients exactly.
std::vector<double> integer_blur(const GrayImage& img, double sigma, double& scale) {
  const std::vector<double> k = gaussian_kernel(sigma);
  std::vector<double> wk(k.size());
  double total = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    wk[i] = std::round(k[i] * 4096.0);
    total += wk[i];
  }
  scale = total * total;
  const int w = img.width();
  const int h = img.height();
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(static_cast<std::size_t>(w) * h), out(tmp.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += wk[static_cast<std::size_t>(i + r)] * img.at(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i)
        s += wk[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

}  // namespace

EdgeSet canny_edges(const GrayImage& img, const CannyParams& params) {
  const int w = img.width();
  const int h = img.height();
  EdgeSet edges{w, h, {}};
  if (img.empty()) return edges;
  double scale = 1.0;
  const std::vector<double> s = integer_blur(img, params.sigma, scale);
  auto v = [&](int x, int y) {
    return s[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
  };
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> mag(n);
  std::vector<std::uint8_t> dir(n);
  const double tan22 = std::tan(M_PI / 8.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (v(x + 1, y - 1) + 2 * v(x + 1, y) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x - 1, y) + v(x - 1, y + 1));
      const double gy = (v(x - 1, y + 1) + 2 * v(x, y + 1) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x, y - 1) + v(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      mag[i] = std::sqrt(gx * gx + gy * gy) / scale;
      const double ax = std::abs(gx), ay = std::abs(gy);
      if (ay <= tan22 * ax) dir[i] = 0;
      else if (ax <= tan22 * ay) dir[i] = 1;
      else dir[i] = (gx * gy > 0) ? 2 : 3;
    }
  static constexpr int kOff[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  std::vector<std::uint8_t> state(n, 0);  // 1 weak, 2 strong
  auto m = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double c = mag[i];
      if (c < params.low) continue;
      const int dx = kOff[dir[i]][0], dy = kOff[dir[i]][1];
      if (!(c >= m(x + dx, y + dy) && c > m(x - dx, y - dy))) continue;
      state[i] = c >= params.high ? 2 : 1;
    }
  std::vector<PixelPos> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (state[static_cast<std::size_t>(y) * w + x] == 2) stack.push_back({x, y});
  while (!stack.empty()) {
    const PixelPos p = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = p.x + dx, y = p.y + dy;
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        std::uint8_t& st = state[static_cast<std::size_t>(y) * w + x];
        if (st == 1) {
          st = 2;
          stack.push_back({x, y});
        }
      }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (state[static_cast<std::size_t>(y) * w + x] == 2) edges.points.push_back({x, y});
  return edges;
}

EdgeSet eval_edges(const GrayImage& img, const CannyParams& params) {
  return canny_edges(resize_area(img, kEvalSize, kEvalSize), params);
}

Recognition recognize(const std::vector<LabeledEdges>& test, const std::vector<LabeledEdges>& train) {
  std::set<std::string> test_labels, train_labels;
  for (const auto& t : test) test_labels.insert(t.label);
  for (const auto& t : train) train_labels.insert(t.label);
  if (test.empty() || train.empty()) throw DataError("recognition needs test and training images");
  if (test_labels != train_labels) throw DataError("class mismatch between test and training sets");
  Recognition r;
  std::size_t correct = 0;
  for (const auto& t : test) {
    std::vector<double> row;
    row.reserve(train.size());
    std::size_t best = 0;
    for (std::size_t j = 0; j < train.size(); ++j) {
      const double d = (t.edges.empty() || train[j].edges.empty())
                           ? std::numeric_limits<double>::infinity()
                           : chamfer(t.edges, train[j].edges);
      row.push_back(d);
      if (d < row[best]) best = j;
    }
    r.predicted.push_back(train[best].label);
    if (train[best].label == t.label) ++correct;
    r.distances.push_back(std::move(row));
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  return r;
}

}  // namespace glyphforge
