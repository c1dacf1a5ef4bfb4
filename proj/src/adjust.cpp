#include <glyphforge/adjust.hpp>

#include <glyphforge/asset_store.hpp>
#include <glyphforge/geometry.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace glyphforge {

namespace fs = std::filesystem;

namespace {

Polyline canvas_path(const Glyph& g, const CanvasMapping& map, double step) {
  Polyline pts;
  for (const Skeleton& sk : g.strokes) {
    const Polyline p = map.to_canvas(sk).path(step);
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return pts;
}

Eigen::Matrix3d to_grid_transform(const Eigen::Matrix3d& canvas_t, const CanvasMapping& map) {
  const Eigen::Matrix3d c = map.matrix();
  return c.inverse() * canvas_t * c;
}

std::vector<Vec2> thinned_points(const GrayImage& sample) {
  const GrayImage thin = thin_zhang_suen(binarize(sample));
  std::vector<Vec2> pts;
  for (int y = 0; y < thin.height(); ++y)
    for (int x = 0; x < thin.width(); ++x)
      if (thin.foreground(x, y)) pts.emplace_back(x, y);
  return pts;
}

}  // namespace

Eigen::Matrix3d auto_scale_transform(const GrayImage& sample, const Glyph& g) {
  const PixelBox box = foreground_bounds(sample);
  if (box.empty()) throw DataError("blank sample");
  const int w = sample.width(), h = sample.height();
  std::vector<std::uint8_t> bg(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = sample.pixels()[i] < 128;
  const std::vector<double> dt = squared_distance_transform(bg, w, h);
  std::vector<double> radii;
  for (const Vec2& p : thinned_points(sample)) {
    const double d = dt[static_cast<std::size_t>(p.y()) * w + static_cast<std::size_t>(p.x())];
    if (std::isfinite(d)) radii.push_back(std::sqrt(d));
  }
  double half = 0.0;
  if (!radii.empty()) {
    std::nth_element(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(radii.size() / 2), radii.end());
    half = std::max(0.0, radii[radii.size() / 2] - 1.0);
  }
  double ix0 = box.x0 + half, ix1 = box.x1 - half, iy0 = box.y0 + half, iy1 = box.y1 - half;
  if (ix1 < ix0) ix0 = ix1 = (box.x0 + box.x1) / 2.0;
  if (iy1 < iy0) iy0 = iy1 = (box.y0 + box.y1) / 2.0;

  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  const Polyline path = canvas_path(g, map, 1.0);
  if (path.empty()) throw DataError("glyph has no strokes");
  double sx0 = std::numeric_limits<double>::infinity(), sy0 = sx0, sx1 = -sx0, sy1 = -sx0;
  for (const Vec2& p : path) {
    sx0 = std::min(sx0, p.x());
    sx1 = std::max(sx1, p.x());
    sy0 = std::min(sy0, p.y());
    sy1 = std::max(sy1, p.y());
  }
  const double sw = sx1 - sx0, sh = sy1 - sy0;
  const bool use_w = sw > 1e-9, use_h = sh > 1e-9;
  double s = 1.0;
  if (use_w && use_h) s = std::sqrt(((ix1 - ix0) / sw) * ((iy1 - iy0) / sh));
  else if (use_w) s = (ix1 - ix0) / sw;
  else if (use_h) s = (iy1 - iy0) / sh;
  if (!(s > 0.0)) s = 1.0;
  const Vec2 skel_c((sx0 + sx1) / 2.0, (sy0 + sy1) / 2.0);
  const Vec2 ink_c((ix0 + ix1) / 2.0, (iy0 + iy1) / 2.0);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = t(1, 1) = s;
  t.topRightCorner<2, 1>() = ink_c - s * skel_c;
  return to_grid_transform(t, map);
}

RotationFit auto_rotate_transform(const GrayImage& sample, const Glyph& g, int max_iterations, double tolerance,
                                  double gate) {
  const std::vector<Vec2> target = thinned_points(sample);
  if (target.size() < 10) throw DataError("thinned sample has fewer than 10 points");
  const CanvasMapping map = CanvasMapping::for_canvas(sample.width(), sample.height());
  const Polyline source = canvas_path(g, map, 2.0);
  if (source.empty()) throw DataError("glyph has no strokes");
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : source) c += p;
  c /= static_cast<double>(source.size());

  RotationFit fit;
  const double gate2 = gate * gate;
  for (int it = 0; it < max_iterations; ++it) {
    const double ct = std::cos(fit.theta), st = std::sin(fit.theta);
    double num = 0.0, den = 0.0;
    std::size_t pairs = 0;
    for (const Vec2& p : source) {
      const Vec2 d = p - c;
      const Vec2 r = c + Vec2(ct * d.x() - st * d.y(), st * d.x() + ct * d.y());
      double best = gate2;
      const Vec2* match = nullptr;
      for (const Vec2& q : target) {
        const double dd = (q - r).squaredNorm();
        if (dd <= best) {
          best = dd;
          match = &q;
        }
      }
      if (!match) continue;
      const Vec2 a = r - c, b = *match - c;
      num += a.x() * b.y() - a.y() * b.x();
      den += a.dot(b);
      ++pairs;
    }
    fit.iterations = it + 1;
    if (pairs == 0) break;
    const double step = std::atan2(num, den);
    fit.theta += step;
    if (std::abs(step) < tolerance) {
      fit.converged = true;
      break;
    }
  }
  const double ct = std::cos(fit.theta), st = std::sin(fit.theta);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = ct;
  t(0, 1) = -st;
  t(1, 0) = st;
  t(1, 1) = ct;
  t.topRightCorner<2, 1>() = c - t.topLeftCorner<2, 2>() * c;
  fit.transform = to_grid_transform(t, map);
  return fit;
}

Glyph apply_edit(const Glyph& g, const Edit& e) {
  Glyph out = g;
  out.relations.clear();
  out.groups.clear();
  if (e.kind == Edit::Kind::Transform) {
    const Eigen::Matrix2d a = e.transform.topLeftCorner<2, 2>();
    const Vec2 b = e.transform.topRightCorner<2, 1>();
    for (Skeleton& sk : out.strokes)
      for (Vec2& p : sk.points) p = a * p + b;
    return out;
  }
  if (e.stroke < 0 || static_cast<std::size_t>(e.stroke) >= out.strokes.size()) throw NotFoundError("stroke index out of range");
  Skeleton& sk = out.strokes[static_cast<std::size_t>(e.stroke)];
  if (e.point < 0 || static_cast<std::size_t>(e.point) >= sk.points.size()) throw NotFoundError("point index out of range");
  const Vec2 delta = e.position - sk.points[static_cast<std::size_t>(e.point)];
  if (e.cooperative && e.point == 0) {
    for (std::size_t i = 1; i < sk.points.size(); ++i) sk.points[i] += delta;
  }
  sk.points[static_cast<std::size_t>(e.point)] = e.position;
  return out;
}

Glyph replay_edits(const Glyph& base, const std::vector<Edit>& edits) {
  Glyph g = base;
  for (const Edit& e : edits) g = apply_edit(g, e);
  return g;
}

RgbImage render_overlay(const GrayImage& sample, const Glyph& g) {
  const int w = sample.width(), h = sample.height();
  RgbImage img(w, h, 255, 255, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (sample.foreground(x, y)) img.set(x, y, 160, 160, 160);
  const CanvasMapping map = CanvasMapping::for_canvas(w, h);
  auto plot = [&](const Vec2& p, std::uint8_t r, std::uint8_t gr, std::uint8_t b) {
    const int x = static_cast<int>(std::lround(p.x())), y = static_cast<int>(std::lround(p.y()));
    if (x >= 0 && y >= 0 && x < w && y < h) img.set(x, y, r, gr, b);
  };
  for (const Skeleton& sk : g.strokes)
    for (const Vec2& p : map.to_canvas(sk).path(0.5)) plot(p, 220, 0, 0);
  for (const Skeleton& sk : g.strokes)
    for (const Vec2& cp : map.to_canvas(sk).points)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) plot(cp + Vec2(dx, dy), 0, 0, 255);
  return img;
}

AdjustSession::AdjustSession(std::string id, Glyph base, GrayImage sample)
    : id_(std::move(id)), base_(std::move(base)), working_(base_), sample_(std::move(sample)) {}

SessionState AdjustSession::state() const { return {id_, working_, committed_, history_.size(), redo_.size()}; }

void AdjustSession::require_open() const {
  if (committed_) throw ConflictError("session " + id_ + " is committed");
}

void AdjustSession::push(const Edit& e) {
  working_ = apply_edit(working_, e);
  history_.push_back(e);
  redo_.clear();
}

double AdjustSession::auto_scale() {
  require_open();
  Edit e;
  e.transform = auto_scale_transform(sample_, working_);
  push(e);
  return e.transform(0, 0);
}

RotationFit AdjustSession::auto_rotate() {
  require_open();
  const RotationFit fit = auto_rotate_transform(sample_, working_);
  Edit e;
  e.transform = fit.transform;
  push(e);
  return fit;
}

void AdjustSession::move_point(int stroke, int point, double x, double y, bool cooperative) {
  require_open();
  if (!std::isfinite(x) || !std::isfinite(y)) throw UsageError("coordinates must be finite");
  Edit e;
  e.kind = Edit::Kind::MovePoint;
  e.stroke = stroke;
  e.point = point;
  e.position = Vec2(x, y);
  e.cooperative = cooperative;
  push(e);
}

void AdjustSession::undo() {
  require_open();
  if (history_.empty()) throw ConflictError("nothing to undo");
  redo_.push_back(history_.back());
  history_.pop_back();
  working_ = replay_edits(base_, history_);
}

void AdjustSession::redo() {
  require_open();
  if (redo_.empty()) throw ConflictError("nothing to redo");
  const Edit e = redo_.back();
  redo_.pop_back();
  working_ = apply_edit(working_, e);
  history_.push_back(e);
}

RgbImage AdjustSession::overlay() const { return render_overlay(sample_, working_); }

fs::path AdjustSession::commit(const fs::path& adjusted_dir) {
  require_open();
  fs::create_directories(adjusted_dir);
  const fs::path p = adjusted_dir / (codepoint_label(working_.codepoint) + ".gd");
  write_glyph_file(p, working_);
  committed_ = true;
  return p;
}

void AdjustSession::restore(std::vector<Edit> history, bool committed) {
  history_ = std::move(history);
  redo_.clear();
  working_ = replay_edits(base_, history_);
  committed_ = committed;
}

std::string serialize_history(const std::vector<Edit>& edits) {
  std::string out;
  for (const Edit& e : edits) {
    if (e.kind == Edit::Kind::Transform) {
      out += "T";
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) out += " " + format_number(e.transform(r, c));
    } else {
      out += "M " + std::to_string(e.stroke) + " " + std::to_string(e.point) + " " + format_number(e.position.x()) +
             " " + format_number(e.position.y()) + " " + (e.cooperative ? "1" : "0");
    }
    out += "\n";
  }
  return out;
}

std::vector<Edit> parse_history(const std::string& text) {
  std::vector<Edit> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    Edit e;
    bool ok = false;
    if (tag == "T") {
      double v[6];
      ok = true;
      for (double& x : v) ok = ok && static_cast<bool>(ls >> x);
      if (ok) {
        e.transform << v[0], v[1], v[2], v[3], v[4], v[5], 0, 0, 1;
      }
    } else if (tag == "M") {
      int coop = 0;
      double x = 0, y = 0;
      ok = static_cast<bool>(ls >> e.stroke >> e.point >> x >> y >> coop);
      e.kind = Edit::Kind::MovePoint;
      e.position = Vec2(x, y);
      e.cooperative = coop != 0;
    }
    if (!ok) throw ParseError(lineno, "malformed edit");
    out.push_back(e);
  }
  return out;
}

AdjustService::AdjustService(std::map<char32_t, Glyph> dataset, fs::path adjusted_dir, fs::path snapshot_dir)
    : dataset_(std::move(dataset)), adjusted_dir_(std::move(adjusted_dir)), snapshot_dir_(std::move(snapshot_dir)) {}

std::string AdjustService::create(char32_t codepoint, GrayImage sample) {
  const auto it = dataset_.find(codepoint);
  if (it == dataset_.end()) throw NotFoundError("codepoint " + codepoint_label(codepoint) + " not in dataset");
  if (sample.empty()) throw DataError("empty sample image");
  std::shared_ptr<AdjustSession> s;
  {
    std::lock_guard lock(table_mutex_);
    const std::string id = "s" + std::to_string(next_id_++);
    s = std::make_shared<AdjustSession>(id, it->second, std::move(sample));
    sessions_.emplace(id, s);
  }
  if (!snapshot_dir_.empty()) {
    fs::create_directories(snapshot_dir_);
    write_png(snapshot_dir_ / (s->id() + ".png"), s->sample());
    snapshot(*s);
  }
  return s->id();
}

std::shared_ptr<AdjustSession> AdjustService::find(const std::string& id) const {
  std::lock_guard lock(table_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

void AdjustService::snapshot(const AdjustSession& s) const {
  if (snapshot_dir_.empty()) return;
  const SessionState st = s.state();
  write_file_atomic(snapshot_dir_ / (s.id() + ".gd"), serialize_glyph(st.glyph));
  std::string hist = "# " + codepoint_label(st.glyph.codepoint) + (st.committed ? " committed" : "") + "\n";
  write_file_atomic(snapshot_dir_ / (s.id() + ".hist"), hist + serialize_history(s.history()));
}

std::size_t AdjustService::load_snapshots() {
  if (snapshot_dir_.empty() || !fs::is_directory(snapshot_dir_)) return 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(snapshot_dir_))
    if (e.path().extension() == ".hist") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::size_t loaded = 0;
  for (const fs::path& p : files) {
    const std::string text = read_text_file(p);
    const std::string header = text.substr(0, text.find('\n'));
    std::istringstream hs(header);
    std::string hash, label, flag;
    hs >> hash >> label >> flag;
    const auto cp = parse_codepoint_label(label);
    if (!cp || !dataset_.count(*cp)) continue;
    const std::string id = p.stem().string();
    auto s = std::make_shared<AdjustSession>(id, dataset_.at(*cp), read_image(snapshot_dir_ / (id + ".png")));
    s->restore(parse_history(text.substr(header.size())), flag == "committed");
    std::lock_guard lock(table_mutex_);
    sessions_[id] = s;
    if (id.size() > 1 && id[0] == 's') {
      try {
        next_id_ = std::max(next_id_, static_cast<std::size_t>(std::stoul(id.substr(1))) + 1);
      } catch (const std::exception&) {
      }
    }
    ++loaded;
  }
  return loaded;
}

}  // namespace glyphforge
