#pragma once

#include <atomic>
#include <csignal>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include "httplib.h"
#include "scichal/service.hpp"

// HTTP transport for SearchService, built on cpp-httplib.
namespace scichal::service {

struct ServerConfig {
  std::string snapshot_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> cors_origin;
  bool log_requests = true;
};

// "host:port"; a bare port binds the default host.
inline void parse_bind_address(const std::string& addr, ServerConfig& cfg) {
  const auto colon = addr.rfind(':');
  const std::string port = colon == std::string::npos ? addr : addr.substr(colon + 1);
  if (colon != std::string::npos && colon > 0) cfg.host = addr.substr(0, colon);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    cfg.port = p;
  } catch (const std::exception&) {
    fail(ErrorCode::kValidation, "bind address must be host:port, got '" + addr + "'");
  }
}

class HttpServer {
 public:
  HttpServer(std::shared_ptr<const SearchService> service, std::optional<std::string> cors_origin, bool log_requests)
      : service_(std::move(service)), cors_origin_(std::move(cors_origin)) {
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    auto params_of = [](const httplib::Request& req) {
      Params p;
      for (const auto& [k, v] : req.params) p.emplace(k, v);
      return p;
    };
    server_.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      if (cors_origin_) {
        res.set_header("Access-Control-Allow-Origin", *cors_origin_);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      }
    });
    server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_.Get("/search", [this, reply, params_of](const httplib::Request& req, httplib::Response& res) {
      reply(res, service_->handle_search(params_of(req)));
    });
    server_.Post("/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, service_->handle_search(parse_search_body(req.body)));
      } catch (const Error& e) {
        reply(res, error_response(e));
      }
    });
    server_.Get("/autocomplete", [this, reply, params_of](const httplib::Request& req, httplib::Response& res) {
      reply(res, service_->handle_autocomplete(params_of(req)));
    });
    server_.Get(R"(/cooccurring/(.+))", [this, reply, params_of](const httplib::Request& req, httplib::Response& res) {
      reply(res, service_->handle_cooccurring(req.matches[1], params_of(req)));
    });
    server_.Get(R"(/sentence/(.+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service_->handle_sentence(req.matches[1]));
    });
    server_.Get("/stats", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, service_->handle_stats()); });
    server_.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, service_->handle_health()); });
    if (log_requests) {
      server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        const json line{{"event", "request"}, {"method", req.method}, {"path", req.path},
                        {"status", res.status}, {"remote", req.remote_addr}};
        std::lock_guard<std::mutex> lock(log_mutex_);
        std::cerr << line.dump() << '\n';
      });
    }
  }

  // Returns the bound port (useful with port 0), or -1 on failure.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  std::shared_ptr<const SearchService> service_;
  std::optional<std::string> cors_origin_;
  httplib::Server server_;
  std::mutex log_mutex_;
};

// Loads the snapshot, binds and serves until SIGINT/SIGTERM. Returns the
// process exit code: 0 on clean shutdown, 2 if the snapshot fails to load,
// 3 if the address cannot be bound.
inline int run_server(const ServerConfig& cfg) {
  std::shared_ptr<const SearchService> svc;
  try {
    svc = std::make_shared<const SearchService>(std::make_shared<const IndexSnapshot>(load(cfg.snapshot_path)));
  } catch (const Error& e) {
    std::cerr << json{{"event", "startup_failed"}, {"code", std::string(error_code_name(e.code()))},
                      {"message", e.what()}}.dump()
              << '\n';
    return 2;
  }

  // Block the shutdown signals before any worker thread exists so that only
  // the dedicated waiter below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(svc, cfg.cors_origin, cfg.log_requests);
  const int port = server.bind(cfg.host, cfg.port);
  if (port < 0) {
    std::cerr << json{{"event", "startup_failed"}, {"code", "bind_error"},
                      {"message", "cannot bind " + cfg.host + ":" + std::to_string(cfg.port)}}.dump()
              << '\n';
    return 3;
  }
  std::cerr << json{{"event", "listening"}, {"host", cfg.host}, {"port", port},
                    {"manifest", manifest_summary(svc->snapshot().manifest)}}.dump()
            << '\n';

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (!signalled.exchange(true)) {
      std::cerr << json{{"event", "shutdown"}, {"signal", sig}}.dump() << '\n';
      server.stop();
    }
  });
  server.listen_after_bind();
  // listen returned on its own: release the waiter.
  if (!signalled.exchange(true)) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace scichal::service
