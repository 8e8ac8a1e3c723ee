#include "pooldesign/server.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "pooldesign/api.hpp"

namespace pooldesign {

int resolve_port(std::optional<int> flag) {
  auto valid = [](long v) { return v >= 0 && v <= 65535; };
  if (flag) {
    if (!valid(*flag)) throw InputError("port out of range");
    return *flag;
  }
  if (const char* env = std::getenv("POOLDESIGN_PORT"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || !valid(v)) throw InputError("POOLDESIGN_PORT is not a valid port");
    return static_cast<int>(v);
  }
  return 8090;
}

bool is_local_origin(const std::string& origin) {
  static const std::regex re(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d{1,5})?$)");
  return std::regex_match(origin, re);
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("request body is not valid JSON: ") + e.what());
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler wrap(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Error& e) {
      send_json(res, api::error_json(e.code(), e.what()), api::http_status(e.code()));
    } catch (const nlohmann::json::exception& e) {
      send_json(res, api::error_json(ErrorCode::bad_input, e.what()), 400);
    } catch (const std::exception& e) {
      send_json(res, api::error_json(ErrorCode::internal, e.what()), 500);
    }
  };
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
  api::SessionStore sessions;
  int port = 0;

  explicit Impl(ServerOptions o) : options(std::move(o)), sessions(options.session_dir) { routes(); }

  void routes() {
    http.set_post_routing_handler([](const httplib::Request& req, httplib::Response& res) {
      const auto origin = req.get_header_value("Origin");
      if (!origin.empty() && is_local_origin(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      }
    });
    http.Options(R"(/api/.*)", [](const httplib::Request& req, httplib::Response& res) {
      const auto origin = req.get_header_value("Origin");
      if (is_local_origin(origin)) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
      } else {
        res.status = 403;
      }
    });

    http.Get("/api/health", wrap([](const httplib::Request&, httplib::Response& res) {
      send_json(res, Json{{"status", "ok"}});
    }));
    http.Get("/api/methods", wrap([](const httplib::Request&, httplib::Response& res) { send_json(res, api::methods_json()); }));
    http.Post("/api/design", wrap([](const httplib::Request& req, httplib::Response& res) {
      send_json(res, api::guarded([&] { return to_json(api::design_from_request(parse_body(req))); }));
    }));
    http.Post("/api/decode", wrap([](const httplib::Request& req, httplib::Response& res) {
      send_json(res, api::decode_request(parse_body(req)));
    }));
    http.Get("/api/compare", wrap([](const httplib::Request& req, httplib::Response& res) {
      api::CompareQuery q;
      auto num = [&](const char* key) -> std::optional<std::size_t> {
        if (!req.has_param(key)) return std::nullopt;
        const auto v = req.get_param_value(key);
        char* end = nullptr;
        const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
        if (v.empty() || *end != '\0') throw InputError(std::string("bad query parameter '") + key + "'");
        return static_cast<std::size_t>(n);
      };
      const auto samples = num("samples");
      if (!samples || *samples < 1) throw InputError("samples is required");
      q.samples = *samples;
      q.differentiate = static_cast<int>(num("differentiate").value_or(1));
      q.max_group_size = num("max_group_size");
      q.max_steps = num("max_steps");
      send_json(res, api::compare(q));
    }));
    http.Post("/api/session", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto design = api::guarded([&] {
        return to_json(body.contains("design") ? design_from_json(body.at("design")) : api::design_from_request(body));
      });
      auto [id, state] = sessions.create(design_from_json(design));
      send_json(res, api::session_view(id, state), 201);
    }));
    http.Get(R"(/api/session/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      send_json(res, api::session_view(id, sessions.load(id)));
    }));
    http.Post(R"(/api/session/([^/]+)/results)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto body = parse_body(req);
      if (!body.contains("results") || !body.at("results").is_string()) {
        throw InputError("body must carry a 'results' string of 0/1 or -/+");
      }
      const auto state = sessions.submit(id, parse_outcomes(body.at("results").get<std::string>()));
      send_json(res, api::session_view(id, state));
    }));
    http.Post("/api/error-rate", wrap([](const httplib::Request& req, httplib::Response& res) {
      send_json(res, api::error_rate_request(parse_body(req)));
    }));
    http.Post("/api/recommend", wrap([](const httplib::Request& req, httplib::Response& res) {
      send_json(res, api::recommend_request(parse_body(req)));
    }));
    http.Get("/api/sweep", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::string filter = req.get_param_value("filter");
      for (const char* key : {"method", "S", "D", "metric"}) {
        if (req.has_param(key)) filter += std::string(filter.empty() ? "" : ",") + key + "=" + req.get_param_value(key);
      }
      send_json(res, api::sweep_query(options.sweep_root, filter));
    }));
    if (!options.static_dir.empty()) http.set_mount_point("/", options.static_dir.string());
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::internal, "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace pooldesign
