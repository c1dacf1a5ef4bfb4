#pragma once

#include <glyphforge/error.hpp>
#include <glyphforge/glyphdata.hpp>
#include <glyphforge/image.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace glyphforge {

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Uniform scale plus translation (design-grid units) that maps the drawn
/// skeleton's bounding box onto the sample ink's bounding box shrunk by half
/// the stroke thickness. Throws DataError on a blank sample.
Eigen::Matrix3d auto_scale_transform(const GrayImage& sample, const Glyph& g);

struct RotationFit {
  double theta = 0.0;  // radians, clockwise on screen (y down) is positive
  int iterations = 0;
  bool converged = false;
  Eigen::Matrix3d transform = Eigen::Matrix3d::Identity();  // design-grid units
};

/// Rotation-only ICP of the skeleton's drawn path onto the sample's thinned
/// ink, about the skeleton centroid. Throws DataError when thinning leaves
/// fewer than 10 points.
RotationFit auto_rotate_transform(const GrayImage& sample, const Glyph& g, int max_iterations = 50,
                                  double tolerance = 1e-4, double gate = 20.0);

struct Edit {
  enum class Kind { Transform, MovePoint };
  Kind kind = Kind::Transform;
  Eigen::Matrix3d transform = Eigen::Matrix3d::Identity();
  int stroke = 0;
  int point = 0;
  Vec2 position = Vec2::Zero();
  bool cooperative = false;
};

Glyph apply_edit(const Glyph& g, const Edit& e);
Glyph replay_edits(const Glyph& base, const std::vector<Edit>& edits);

/// Sample ink in gray on white, skeleton paths in red, control points as
/// blue 3x3 markers.
RgbImage render_overlay(const GrayImage& sample, const Glyph& g);

struct SessionState {
  std::string id;
  Glyph glyph;
  bool committed = false;
  std::size_t history = 0;
  std::size_t redo = 0;
};

class AdjustSession {
 public:
  AdjustSession(std::string id, Glyph base, GrayImage sample);

  const std::string& id() const { return id_; }
  SessionState state() const;
  const GrayImage& sample() const { return sample_; }
  const Glyph& base() const { return base_; }
  const std::vector<Edit>& history() const { return history_; }

  double auto_scale();
  RotationFit auto_rotate();
  void move_point(int stroke, int point, double x, double y, bool cooperative);
  void undo();
  void redo();
  RgbImage overlay() const;
  std::filesystem::path commit(const std::filesystem::path& adjusted_dir);
  /// Rebuilds the working glyph from a saved history.
  void restore(std::vector<Edit> history, bool committed);

  mutable std::shared_mutex mutex;

 private:
  void push(const Edit& e);
  void require_open() const;

  std::string id_;
  Glyph base_;
  Glyph working_;
  GrayImage sample_;
  std::vector<Edit> history_;
  std::vector<Edit> redo_;
  bool committed_ = false;
};

std::string serialize_history(const std::vector<Edit>& edits);
std::vector<Edit> parse_history(const std::string& text);

/// In-memory session table with an optional snapshot directory holding
/// <id>.png (sample), <id>.gd (working glyph) and <id>.hist (edit log).
class AdjustService {
 public:
  AdjustService(std::map<char32_t, Glyph> dataset, std::filesystem::path adjusted_dir,
                std::filesystem::path snapshot_dir = {});

  std::string create(char32_t codepoint, GrayImage sample);
  std::shared_ptr<AdjustSession> find(const std::string& id) const;
  void snapshot(const AdjustSession& s) const;
  /// Reloads sessions saved in the snapshot directory. Returns the count.
  std::size_t load_snapshots();
  const std::filesystem::path& adjusted_dir() const { return adjusted_dir_; }

 private:
  std::map<char32_t, Glyph> dataset_;
  std::filesystem::path adjusted_dir_;
  std::filesystem::path snapshot_dir_;
  mutable std::mutex table_mutex_;
  std::map<std::string, std::shared_ptr<AdjustSession>> sessions_;
  std::size_t next_id_ = 1;
};

}  // namespace glyphforge
