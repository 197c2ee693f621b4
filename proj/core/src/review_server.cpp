#include "curate/review_server.hpp"

#include <httplib.h>

#include <thread>

#include "curate/errors.hpp"

namespace curate {

namespace {

void send_json(httplib::Response& res, int status, const OrderedJson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, OrderedJson{{"error", message}});
}

}  // namespace

struct ReviewServer::Impl {
  ReviewService& service;
  ReviewServerOptions options;
  httplib::Server server;
  std::jthread thread;

  Impl(ReviewService& s, ReviewServerOptions o) : service(s), options(std::move(o)) {}

  void install() {
    if (!options.token.empty()) {
      server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (req.path.rfind("/api/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
        if (req.get_header_value("Authorization") == "Bearer " + options.token) {
          return httplib::Server::HandlerResponse::Unhandled;
        }
        send_error(res, 401, "missing or invalid bearer token");
        return httplib::Server::HandlerResponse::Handled;
      });
    }
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "internal error");
      }
    });

    server.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
      std::size_t limit = 50;
      if (req.has_param("limit")) {
        try {
          const long v = std::stol(req.get_param_value("limit"));
          if (v < 1) throw std::invalid_argument("limit");
          limit = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
          send_error(res, 400, "limit must be a positive integer");
          return;
        }
      }
      auto page = service.queue(req.get_param_value("cursor"), limit);
      OrderedJson body;
      body["items"] = page.items;
      body["next_cursor"] = page.next_cursor ? OrderedJson(*page.next_cursor) : OrderedJson(nullptr);
      send_json(res, 200, body);
    });

    server.Get(R"(/api/image/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        auto img = service.image(req.matches[1]);
        res.set_content(std::move(img.bytes), img.mime);
      } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
      }
    });

    server.Post("/api/decision", [this](const httplib::Request& req, httplib::Response& res) {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception&) {
        send_error(res, 400, "body is not valid JSON");
        return;
      }
      try {
        send_json(res, 200, OrderedJson{{"pending", service.decide(body)}});
      } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
      } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
      }
    });

    server.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      auto s = service.stats();
      send_json(res, 200, OrderedJson{{"pending", s.pending}, {"accepted", s.accepted}, {"rejected", s.rejected}});
    });

    if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
      throw InputError("static directory not found: " + options.static_dir);
    }
  }
};

ReviewServer::ReviewServer(ReviewService& service, ReviewServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->install();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start() {
  const auto& o = impl_->options;
  port_ = o.port == 0 ? impl_->server.bind_to_any_port(o.host) : (impl_->server.bind_to_port(o.host, o.port) ? o.port : -1);
  if (port_ < 0) throw InputError("cannot bind review server to " + o.host + ":" + std::to_string(o.port));
  impl_->thread = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void ReviewServer::run() {
  const auto& o = impl_->options;
  port_ = o.port == 0 ? impl_->server.bind_to_any_port(o.host) : (impl_->server.bind_to_port(o.host, o.port) ? o.port : -1);
  if (port_ < 0) throw InputError("cannot bind review server to " + o.host + ":" + std::to_string(o.port));
  impl_->server.listen_after_bind();
}

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace curate
