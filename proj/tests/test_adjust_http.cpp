#include "support.hpp"

#include <glyphforge/adjust_server.hpp>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <thread>

using namespace glyphforge;
using nlohmann::json;

namespace {

std::map<char32_t, Glyph> small_dataset() {
  std::map<char32_t, Glyph> d;
  for (const char* label : {"U+5341", "U+4EBA", "U+53E3"}) {
    const Glyph g = testing::dataset_glyph(label);
    d[g.codepoint] = g;
  }
  return d;
}

std::string sample_b64(const char* label) {
  const GrayImage img = invert(rasterize_glyph(testing::dataset_glyph(label), 10, 300, 300).pixels);
  return base64_encode(encode_png(img));
}

// Service plus server running on a background thread.
struct LiveServer {
  AdjustService service;
  AdjustServer server;
  int port = -1;
  std::thread thread;

  LiveServer(const std::filesystem::path& root)
      : service(small_dataset(), root / "adjusted", root / "snap"), server(service) {
    port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { server.serve(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
  const auto r = c.Post(path, body.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == expect);
  return json::parse(r->body, nullptr, false);
}

json patch(httplib::Client& c, const std::string& path, const json& body, int expect) {
  const auto r = c.Patch(path, body.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == expect);
  return json::parse(r->body, nullptr, false);
}

}  // namespace

TEST_CASE("base64 round trip") {
  const std::vector<std::uint8_t> bytes = {0, 1, 2, 250, 251, 252, 253};
  CHECK(base64_decode(base64_encode(bytes)) == bytes);
  CHECK(base64_encode(std::vector<std::uint8_t>{'M', 'a'}) == "TWE=");
}

TEST_CASE("session lifecycle over HTTP") {
  testing::TempDir dir("http");
  LiveServer live(dir.path());
  auto c = live.client();

  const json created = post(c, "/api/sessions", {{"codepoint", "U+5341"}, {"sample_png_base64", sample_b64("U+5341")}}, 200);
  const std::string id = created.at("id");
  const std::string base = "/api/sessions/" + id;

  auto got = c.Get(base);
  REQUIRE(got);
  CHECK(got->status == 200);
  const json state = json::parse(got->body);
  CHECK(state.at("codepoint") == "U+5341");
  CHECK(state.at("strokes").size() == 2);
  CHECK(state.at("history") == 0);

  const json scaled = post(c, base + "/auto", {{"mode", "scale"}}, 200);
  CHECK(scaled.at("result").at("scale").get<double>() == doctest::Approx(1.0).epsilon(0.05));
  const json rotated = post(c, base + "/auto", {{"mode", "rotate"}}, 200);
  CHECK(std::abs(rotated.at("result").at("theta_deg").get<double>()) < 1.0);
  CHECK(rotated.at("history") == 2);

  const json moved = patch(c, base + "/strokes/0/points/1", {{"x", 150.5}, {"y", 99.0}}, 200);
  CHECK(moved.at("strokes")[0].at("points")[1][0] == 150.5);
  const json undone = post(c, base + "/undo", json::object(), 200);
  CHECK(undone.at("redo") == 1);
  const json redone = post(c, base + "/redo", json::object(), 200);
  CHECK(redone.at("strokes") == moved.at("strokes"));

  const auto png1 = c.Get(base + "/overlay.png");
  const auto png2 = c.Get(base + "/overlay.png");
  REQUIRE(png1);
  REQUIRE(png2);
  CHECK(png1->status == 200);
  CHECK(png1->get_header_value("Content-Type") == "image/png");
  CHECK(png1->body == png2->body);
  CHECK(png1->body.substr(1, 3) == "PNG");

  const json committed = post(c, base + "/commit", json::object(), 200);
  CHECK(std::filesystem::exists(committed.at("path").get<std::string>()));
  post(c, base + "/commit", json::object(), 409);
  patch(c, base + "/strokes/0/points/1", {{"x", 1}, {"y", 1}}, 409);
}

TEST_CASE("HTTP error codes") {
  testing::TempDir dir("http_err");
  LiveServer live(dir.path());
  auto c = live.client();
  post(c, "/api/sessions", {{"codepoint", "U+9999"}, {"sample_png_base64", sample_b64("U+5341")}}, 404);
  post(c, "/api/sessions", {{"codepoint", "U+5341"}, {"sample_png_base64", "AAAA"}}, 400);
  post(c, "/api/sessions", {{"codepoint", "U+5341"}}, 400);
  const auto bad = c.Post("/api/sessions", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body).contains("error"));

  auto missing = c.Get("/api/sessions/s99");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  const std::string id =
      post(c, "/api/sessions", {{"codepoint", "十"}, {"sample_png_base64", sample_b64("U+5341")}}, 200).at("id");
  const std::string base = "/api/sessions/" + id;
  post(c, base + "/auto", {{"mode", "shear"}}, 400);
  post(c, base + "/undo", json::object(), 409);
  post(c, base + "/redo", json::object(), 409);
  patch(c, base + "/strokes/5/points/0", {{"x", 1}, {"y", 1}}, 404);
  patch(c, base + "/strokes/0/points/0", {{"x", "a"}, {"y", 1}}, 400);
  patch(c, base + "/strokes/x/points/0", {{"x", 1}, {"y", 1}}, 404);
}

TEST_CASE("concurrent edits are serialized per session") {
  testing::TempDir dir("http_conc");
  LiveServer live(dir.path());
  auto c0 = live.client();
  const std::string id =
      post(c0, "/api/sessions", {{"codepoint", "U+53E3"}, {"sample_png_base64", sample_b64("U+53E3")}}, 200).at("id");
  const std::string base = "/api/sessions/" + id;
  constexpr int kThreads = 6, kEach = 10;
  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  for (int t = 0; t < kThreads; ++t) {
    workers.emplace_back([&, t] {
      auto c = live.client();
      for (int k = 0; k < kEach; ++k) {
        const json body = {{"x", 10.0 * t + k}, {"y", 5.0}};
        const auto r = c.Patch(base + "/strokes/0/points/0", body.dump(), "application/json");
        if (r && r->status == 200) ++ok;
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(ok == kThreads * kEach);
  const json st = json::parse(c0.Get(base)->body);
  CHECK(st.at("history") == kThreads * kEach);
  auto s = live.service.find(id);
  CHECK(s->state().glyph.strokes == replay_edits(s->base(), s->history()).strokes);

  AdjustService reloaded(small_dataset(), dir / "adjusted", dir / "snap");
  CHECK(reloaded.load_snapshots() == 1);
  CHECK(reloaded.find(id)->state().glyph.strokes == s->state().glyph.strokes);
}
