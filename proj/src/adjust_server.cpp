#include <glyphforge/adjust_server.hpp>

#include <glyphforge/config.hpp>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <numbers>

namespace glyphforge {

using nlohmann::json;

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::string clean;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  if (clean.size() % 4 != 0) throw UsageError("invalid base64 length");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw UsageError("invalid base64 data");
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

namespace {

json state_json(const SessionState& st) {
  json strokes = json::array();
  for (const Skeleton& sk : st.glyph.strokes) {
    json pts = json::array();
    for (const Vec2& p : sk.points) pts.push_back({p.x(), p.y()});
    strokes.push_back({{"line_type", sk.line_type}, {"start_shape", sk.start_shape}, {"end_shape", sk.end_shape}, {"points", pts}});
  }
  return {{"id", st.id},
          {"codepoint", codepoint_label(st.glyph.codepoint)},
          {"strokes", strokes},
          {"committed", st.committed},
          {"history", st.history},
          {"redo", st.redo}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw UsageError("request body must be a JSON object");
  return body;
}

template <typename T>
T field(const json& body, const char* name) {
  if (!body.contains(name)) throw UsageError(std::string("missing field '") + name + "'");
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("field '") + name + "' has the wrong type");
  }
}

int index_param(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw NotFoundError("invalid index " + s);
    return v;
  } catch (const std::logic_error&) {
    throw NotFoundError("invalid index " + s);
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const NotFoundError& e) {
      send_json(res, 404, {{"error", e.what()}});
    } catch (const ConflictError& e) {
      send_json(res, 409, {{"error", e.what()}});
    } catch (const UsageError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const DataError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

struct AdjustServer::Impl {
  AdjustService& service;
  httplib::Server server;

  explicit Impl(AdjustService& s) : service(s) { routes(); }

  template <typename F>
  json mutate(const std::string& id, F&& f) {
    auto s = service.find(id);
    std::unique_lock lock(s->mutex);
    json extra = f(*s);
    service.snapshot(*s);
    json out = state_json(s->state());
    if (!extra.is_null()) out["result"] = extra;
    return out;
  }

  void routes() {
    server.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const std::string cp_text = field<std::string>(body, "codepoint");
      std::optional<char32_t> cp = parse_codepoint_label(cp_text);
      if (!cp) {
        std::vector<char32_t> chars;
        try {
          chars = utf8_decode(cp_text);
        } catch (const DataError&) {
        }
        if (chars.size() != 1) throw UsageError("invalid codepoint '" + cp_text + "'");
        cp = chars[0];
      }
      const auto png = base64_decode(field<std::string>(body, "sample_png_base64"));
      GrayImage sample;
      try {
        sample = normalize_polarity(decode_image(png));
      } catch (const Error& e) {
        throw UsageError(std::string("sample image: ") + e.what());
      }
      send_json(res, 200, {{"id", service.create(*cp, std::move(sample))}});
    }));
    server.Get(R"(/api/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = service.find(req.matches[1]);
      std::shared_lock lock(s->mutex);
      send_json(res, 200, state_json(s->state()));
    }));
    server.Post(R"(/api/sessions/([^/]+)/auto)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const std::string mode = field<std::string>(body, "mode");
      if (mode != "scale" && mode != "rotate") throw UsageError("mode must be 'scale' or 'rotate'");
      send_json(res, 200, mutate(req.matches[1], [&](AdjustSession& s) -> json {
        if (mode == "scale") return {{"scale", s.auto_scale()}};
        const RotationFit fit = s.auto_rotate();
        return {{"theta_deg", fit.theta * 180.0 / std::numbers::pi},
                {"iterations", fit.iterations},
                {"converged", fit.converged}};
      }));
    }));
    server.Patch(R"(/api/sessions/([^/]+)/strokes/([^/]+)/points/([^/]+))",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   const json body = parse_body(req);
                   const double x = field<double>(body, "x");
                   const double y = field<double>(body, "y");
                   const bool coop = body.contains("cooperative") ? field<bool>(body, "cooperative") : false;
                   const int k = index_param(req.matches[2]);
                   const int i = index_param(req.matches[3]);
                   send_json(res, 200, mutate(req.matches[1], [&](AdjustSession& s) -> json {
                     s.move_point(k, i, x, y, coop);
                     return nullptr;
                   }));
                 }));
    server.Post(R"(/api/sessions/([^/]+)/undo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, mutate(req.matches[1], [](AdjustSession& s) -> json {
        s.undo();
        return nullptr;
      }));
    }));
    server.Post(R"(/api/sessions/([^/]+)/redo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, mutate(req.matches[1], [](AdjustSession& s) -> json {
        s.redo();
        return nullptr;
      }));
    }));
    server.Get(R"(/api/sessions/([^/]+)/overlay\.png)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = service.find(req.matches[1]);
      std::vector<std::uint8_t> png;
      {
        std::shared_lock lock(s->mutex);
        png = encode_png(s->overlay());
      }
      res.status = 200;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    }));
    server.Post(R"(/api/sessions/([^/]+)/commit)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = service.find(req.matches[1]);
      std::unique_lock lock(s->mutex);
      const auto path = s->commit(service.adjusted_dir());
      service.snapshot(*s);
      send_json(res, 200, {{"path", path.string()}});
    }));
  }

};

AdjustServer::AdjustServer(AdjustService& service) : impl_(std::make_unique<Impl>(service)) {}
AdjustServer::~AdjustServer() = default;

int AdjustServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AdjustServer::serve() { return impl_->server.listen_after_bind(); }
void AdjustServer::stop() { impl_->server.stop(); }
void AdjustServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace glyphforge
