#pragma once

#include <memory>
#include <string>

#include "privmt/gateway.hpp"

namespace privmt {

// Mock translation service: TableBackend behind the wire protocol.
// POST /translate with {"id": ..., "src": [...]} returns
// {"id": ..., "tgt": [...]}; malformed requests get a 400.
class StubServer {
 public:
  explicit StubServer(TableBackend backend);
  ~StubServer();

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Binds and serves on a background thread. port = 0 picks a free port.
  // Returns the bound port.
  int start(int port = 0);
  void stop();

  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Foreground variant for the CLI: serves until the process is killed.
[[noreturn]] void serve_stub_blocking(TableBackend backend, int port);

}  // namespace privmt
