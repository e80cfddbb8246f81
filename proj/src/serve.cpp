#include "privmt/serve.hpp"

#include <cstdio>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "privmt/errors.hpp"

namespace privmt {

using nlohmann::json;

namespace {

void install_routes(httplib::Server& server, const TableBackend& backend) {
  server.Post("/translate", [&backend](const httplib::Request& req,
                                       httplib::Response& res) {
    json request;
    try {
      request = json::parse(req.body);
      const auto id = request.at("id").get<std::string>();
      const auto src = request.at("src").get<TokenSeq>();
      json response{{"id", id}, {"tgt", backend.translate(id, src)}};
      res.set_content(response.dump(), "application/json");
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

}  // namespace

struct StubServer::Impl {
  TableBackend backend;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit Impl(TableBackend b) : backend(std::move(b)) {
    install_routes(server, backend);
  }
};

StubServer::StubServer(TableBackend backend)
    : impl_(std::make_unique<Impl>(std::move(backend))) {}

StubServer::~StubServer() { stop(); }

int StubServer::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port)) {
      throw ConfigError("cannot bind stub server to port " +
                        std::to_string(port));
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void StubServer::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

std::string StubServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void serve_stub_blocking(TableBackend backend, int port) {
  httplib::Server server;
  install_routes(server, backend);
  std::fprintf(stderr, "stub translation server listening on port %d\n", port);
  server.listen("0.0.0.0", port);
  std::exit(0);
}

}  // namespace privmt
