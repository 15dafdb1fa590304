#include "lifeserver/gateway/http_server.hpp"

#include <sys/socket.h>

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "lifeserver/mind/query.hpp"

namespace lifeserver::gateway {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, json{{"error", code}, {"message", message}});
}

std::string bearer(const httplib::Request& req) {
  const auto h = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0) return {};
  return h.substr(prefix.size());
}

int status_for(GatewayErrc code) {
  switch (code) {
    case GatewayErrc::PairingRejected: return 409;
    case GatewayErrc::Unauthenticated: return 401;
    case GatewayErrc::SchemaViolation:
    case GatewayErrc::ValueOutOfDomain: return 400;
    case GatewayErrc::UnknownDevice:
    case GatewayErrc::UnknownControl: return 404;
    case GatewayErrc::ChannelDown: return 503;
  }
  return 500;
}

int status_for(mind::MindErrc code) {
  switch (code) {
    case mind::MindErrc::InsufficientData: return 204;
    case mind::MindErrc::FeeTooLow:
    case mind::MindErrc::FeeMismatch: return 402;
    case mind::MindErrc::BadPredicate:
    case mind::MindErrc::BadQuery: return 400;
    case mind::MindErrc::UnknownQueryRef: return 404;
    case mind::MindErrc::AlreadySettled: return 409;
    case mind::MindErrc::ResolutionFailed: return 502;
  }
  return 500;
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw GatewayError(GatewayErrc::SchemaViolation, std::string("body is not JSON: ") + e.what());
  }
}

/// Runs a handler and turns every library error into its HTTP status.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const GatewayError& e) {
      if (e.code() == GatewayErrc::ChannelDown && !e.record_id().empty()) {
        reply(res, 202, json{{"record_id", e.record_id()}, {"deferred", true}});
        return;
      }
      fail(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const mind::MindError& e) {
      if (e.code() == mind::MindErrc::InsufficientData) {
        res.status = 204;
        return;
      }
      fail(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const store::StoreError& e) {
      const bool client = e.code() == store::StoreErrc::SchemaViolation ||
                          e.code() == store::StoreErrc::BadPredicate;
      const int status = client ? 400 : e.code() == store::StoreErrc::StorageFull ? 507 : 500;
      fail(res, status, to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      fail(res, 400, "SchemaViolation", e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      fail(res, 500, "Internal", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  HttpServices services;
  httplib::Server server;
  std::thread thread;

  Gateway& gw() { return *services.gateway; }

  void require_auth(const httplib::Request& req) {
    if (!gw().authenticate(bearer(req))) {
      throw GatewayError(GatewayErrc::Unauthenticated, "missing or invalid bearer token");
    }
  }

  mind::Engine& engine() {
    if (!services.engine) throw std::runtime_error("mind engine not configured");
    return *services.engine;
  }

  void routes() {
    server.Post("/pair", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto cred = gw().pair_client(body.value("code", std::string{}));
      reply(res, 200, json{{"client_id", cred.client_id}, {"token", cred.token}, {"created_at", cred.created_at}});
    }));

    server.Get("/sense/v1/key", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      const auto key = services.sealing_key ? services.sealing_key() : std::nullopt;
      if (!key) {
        fail(res, 404, "NoKey", "the private node has not announced a key yet");
        return;
      }
      reply(res, 200, *key);
    }));

    server.Post("/sense/v1/records", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      store::SenseRecord record;
      try {
        record = store::sense_record_from_json(parse_body(req));
      } catch (const store::StoreError& e) {
        throw GatewayError(GatewayErrc::SchemaViolation, e.detail());
      }
      reply(res, 200, json{{"record_id", gw().ingest(bearer(req), std::move(record))}});
    }));

    server.Post("/act/v1/devices", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      const auto id = gw().register_device(bearer(req), device_from_json(parse_body(req)));
      reply(res, 200, json{{"device_id", id}});
    }));

    server.Get(R"(/act/v1/devices/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      const auto d = gw().device(req.matches[1]);
      if (!d) throw GatewayError(GatewayErrc::UnknownDevice, req.matches[1]);
      reply(res, 200, to_json(*d));
    }));

    server.Post(R"(/act/v1/devices/([^/]+)/controls/([^/]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  require_auth(req);
                  const json body = parse_body(req);
                  if (!body.is_object() || !body.contains("value")) {
                    throw GatewayError(GatewayErrc::SchemaViolation, "body must be {\"value\": ...}");
                  }
                  const auto id = gw().set_control(bearer(req), req.matches[1], req.matches[2],
                                                   control_value_from_json(body["value"]));
                  reply(res, 200, json{{"command_id", id}});
                }));

    server.Get(R"(/act/v1/devices/([^/]+)/commands)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 require_auth(req);
                 json out = json::array();
                 for (const auto& c : gw().poll_commands(bearer(req), req.matches[1])) out.push_back(to_json(c));
                 reply(res, 200, out);
               }));

    server.Post("/mind/v1/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      const auto query = mind::parse_query(parse_body(req));
      reply(res, 200, mind::to_json(engine().execute(query)));
    }));

    server.Post("/mind/v1/settle", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_auth(req);
      const json body = parse_body(req);
      const auto ref = body.at("query_ref").get<std::string>();
      const auto& fee_j = body.at("fee");
      if (!fee_j.is_number_unsigned()) throw GatewayError(GatewayErrc::SchemaViolation, "fee must be a non-negative integer");
      json entries = json::array();
      for (const auto& e : engine().settle(ref, fee_j.get<std::uint64_t>())) entries.push_back(store::to_json(e));
      reply(res, 200, json{{"query_ref", ref}, {"entries", entries}});
    }));
  }
};

HttpServer::HttpServer(HttpServices services) : impl_(std::make_unique<Impl>()) {
  if (!services.gateway) throw std::invalid_argument("HttpServer needs a gateway");
  impl_->services = std::move(services);
  // httplib's defaults add SO_REUSEPORT, which would let a second node share
  // the port instead of failing with PortInUse.
  impl_->server.set_socket_options([](socket_t sock) {
    const int one = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  });
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const std::string where = host + ":" + std::to_string(port);
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ < 0) throw PortInUse(where);
  } else {
    if (!impl_->server.bind_to_port(host, port)) throw PortInUse(where);
    port_ = port;
  }
  return port_;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace lifeserver::gateway
