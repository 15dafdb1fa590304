#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "lifeserver/gateway/gateway.hpp"
#include "lifeserver/mind/engine.hpp"

namespace lifeserver::gateway {

class PortInUse : public std::runtime_error {
 public:
  explicit PortInUse(const std::string& where) : std::runtime_error("address in use: " + where) {}
};

struct HttpServices {
  Gateway* gateway = nullptr;
  mind::Engine* engine = nullptr;  // Mind routes answer 503 without one
  /// Body of GET /sense/v1/key, or nullopt while no key has been announced.
  std::function<std::optional<nlohmann::json>()> sealing_key;
};

/// JSON over HTTP in front of a Gateway and a Mind engine.
///
///   POST /pair                                  {code} -> credential
///   GET  /sense/v1/key                          -> {key_id, public_key}
///   POST /sense/v1/records                      SenseRecord -> {record_id}
///   POST /act/v1/devices                        descriptor -> {device_id}
///   GET  /act/v1/devices/{id}                   -> descriptor
///   POST /act/v1/devices/{id}/controls/{name}   {value} -> {command_id}
///   GET  /act/v1/devices/{id}/commands          -> [command]
///   POST /mind/v1/query                         MindQuery -> Insight
///   POST /mind/v1/settle                        {query_ref, fee} -> {query_ref, entries}
///
/// Everything except /pair needs `Authorization: Bearer <token>`.
class HttpServer {
 public:
  explicit HttpServer(HttpServices services);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Throws PortInUse.
  int bind(const std::string& host, int port);
  int port() const noexcept { return port_; }

  /// Blocks until stop().
  void serve();
  /// serve() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace lifeserver::gateway
