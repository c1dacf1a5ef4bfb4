#pragma once

#include <glyphforge/adjust.hpp>

#include <memory>
#include <string>
#include <vector>

namespace glyphforge {

std::vector<std::uint8_t> base64_decode(const std::string& text);
std::string base64_encode(std::span<const std::uint8_t> bytes);

/// JSON-over-HTTP front end for an AdjustService.
class AdjustServer {
 public:
  explicit AdjustServer(AdjustService& service);
  ~AdjustServer();
  AdjustServer(const AdjustServer&) = delete;
  AdjustServer& operator=(const AdjustServer&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glyphforge
