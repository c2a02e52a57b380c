#pragma once

#include <memory>
#include <string>

#include "umivr/config.hpp"
#include "umivr/error.hpp"
#include "umivr/gateway.hpp"
#include "umivr/index.hpp"
#include "umivr/text_embedder.hpp"

namespace umivr {

// HTTP status for a typed error: 400 validation, 404 unknown session,
// 409 wrong session state, 502 backend failure, 500 otherwise.
int http_status(ErrorCode code) noexcept;

// /v1 JSON API over the core modules. Sessions are snapshot files in
// `config.session_dir`; requests on one session are serialized (a concurrent
// mutation gets 409), requests on different sessions run in parallel. Ingest
// swaps in a new index atomically.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<const VectorIndex> index,
          std::shared_ptr<const TextEmbedder> embedder, std::shared_ptr<Gateway> gateway);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Io on failure.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call bind() first.
  void run();
  void stop();
  // Blocks until the server accepts connections.
  void wait_until_ready() const;

  std::shared_ptr<const VectorIndex> index() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace umivr
