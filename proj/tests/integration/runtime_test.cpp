#include <gtest/gtest.h>

#include <httplib.h>

#include <future>
#include <sstream>
#include <thread>

#include "lifeserver/callosum/tcp_link.hpp"
#include "lifeserver/node/runtime.hpp"
#include "lifeserver/store/sense_store.hpp"
#include "support/node_configs.hpp"
#include "support/temp_dir.hpp"

using namespace lifeserver;
using namespace lifeserver::node;
using namespace std::chrono_literals;
using lifeserver::testing::TempDir;
using nlohmann::json;

namespace {

/// run_node on a background thread; stops and joins on destruction.
class Running {
 public:
  explicit Running(NodeConfig config, std::chrono::milliseconds handshake = 10s) : config_(std::move(config)) {
    std::promise<int> ready;
    auto port = ready.get_future();
    thread_ = std::thread([this, handshake, ready = std::move(ready)]() mutable {
      RunOptions o;
      o.stop = &stop_;
      o.out = &log_;
      o.handshake_timeout = handshake;
      o.on_ready = [&ready](int p) { ready.set_value(p); };
      try {
        run_node(config_, o);
      } catch (...) {
        try {
          ready.set_exception(std::current_exception());
        } catch (const std::future_error&) {
          error_ = std::current_exception();
        }
      }
    });
    try {
      port_ = port.get();
    } catch (...) {
      thread_.join();
      throw;
    }
  }

  ~Running() {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  NodeConfig config_;
  std::atomic<bool> stop_{false};
  std::ostringstream log_;
  std::exception_ptr error_;
  std::thread thread_;
  int port_ = 0;
};

RuntimeErrc runtime_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const RuntimeError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no RuntimeError";
  return RuntimeErrc::PortInUse;
}

bool eventually(const std::function<bool()>& cond, std::chrono::milliseconds limit = 10s) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (cond()) return true;
    std::this_thread::sleep_for(20ms);
  }
  return cond();
}

struct TcpPair {
  NodeConfig pub;
  NodeConfig priv;
};

TcpPair tcp_pair(const std::filesystem::path& root) {
  TcpPair p;
  p.priv.role = Role::Private;
  p.priv.data_dir = root / "private";
  p.priv.channel.endpoint = "127.0.0.1:0";
  p.pub.role = Role::Public;
  p.pub.data_dir = root / "public";
  p.pub.listen_address = "127.0.0.1:0";
  p.pub.pairing_code = "tcp-code";
  p.pub.k_min = 1;
  return p;
}

}  // namespace

TEST(Runtime, TwoNodesOverTcp) {
  TempDir dir;
  auto cfg = tcp_pair(dir.path());
  Running priv(cfg.priv);
  cfg.pub.channel.endpoint = "127.0.0.1:" + std::to_string(priv.port());
  Running pub(cfg.pub);

  httplib::Client http("127.0.0.1", pub.port());
  auto res = http.Post("/pair", json{{"code", "tcp-code"}}.dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  const httplib::Headers auth{{"Authorization", "Bearer " + json::parse(res->body)["token"].get<std::string>()}};

  res = http.Get("/sense/v1/key", auth);
  ASSERT_EQ(res->status, 200);
  const auto key = announced_key_from_json(json::parse(res->body));

  auto rec = lifeserver::testing::sealed_record(key, "mic", "audio", 1, to_bytes(std::string(512, 'q')));
  auto body = store::to_json(rec);
  body.erase("record_id");
  res = http.Post("/sense/v1/records", auth, body.dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  const auto id = json::parse(res->body)["record_id"].get<std::string>();

  EXPECT_TRUE(eventually([&] {
    return lifeserver::testing::read_file(cfg.priv.data_dir / store::kPrivateSenseFile).find(id) != std::string::npos;
  }));
  // Features flow back on the next housekeeping round.
  EXPECT_TRUE(eventually([&] {
    return lifeserver::testing::read_file(cfg.pub.data_dir / store::kDerivedFile).find(id) != std::string::npos;
  }));

  const json q = {{"record_types", {"audio"}}, {"time_range", {0, 10}},
                  {"aggregate", {{"op", "max"}, {"field", "byte_length"}}},
                  {"offered_fee", 0}, {"enterprise_payout_address", {{"bitcoin", "E"}}}};
  res = http.Post("/mind/v1/query", auth, q.dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["result"], 512.0);

  // Lock the channel; a fresh provisioning attempt must then hear nothing.
  lock_node(cfg.priv, false);
  std::this_thread::sleep_for(400ms);
  EXPECT_EQ(runtime_error([&] { provision_node(cfg.pub, 600ms); }), RuntimeErrc::ChannelHandshakeTimeout);
  lock_node(cfg.priv, true);
  std::this_thread::sleep_for(400ms);
  EXPECT_EQ(provision_node(cfg.pub, 5s).public_key, key.public_key);
}

TEST(Runtime, PortInUse) {
  TempDir dir;
  callosum::TcpListener squatter("127.0.0.1", 0);
  auto cfg = tcp_pair(dir.path());
  cfg.pub.listen_address = "127.0.0.1:" + std::to_string(squatter.port());
  EXPECT_EQ(runtime_error([&] { Running r(cfg.pub); }), RuntimeErrc::PortInUse);

  cfg.priv.channel.endpoint = cfg.pub.listen_address;
  EXPECT_EQ(runtime_error([&] { Running r(cfg.priv); }), RuntimeErrc::PortInUse);
}

TEST(Runtime, DataDirLocked) {
  TempDir dir;
  auto cfg = tcp_pair(dir.path());
  DataDirLock held(cfg.pub.data_dir);
  EXPECT_EQ(runtime_error([&] { Running r(cfg.pub); }), RuntimeErrc::DataDirLocked);
}

TEST(Runtime, DuplexPublicWithoutPrivateTimesOut) {
  TempDir dir;
  auto cfg = tcp_pair(dir.path());
  int unused = 0;
  {
    callosum::TcpListener probe("127.0.0.1", 0);
    unused = probe.port();
  }
  cfg.pub.channel.endpoint = "127.0.0.1:" + std::to_string(unused);
  EXPECT_EQ(runtime_error([&] { Running r(cfg.pub, 300ms); }), RuntimeErrc::ChannelHandshakeTimeout);
}

TEST(Runtime, InprocessDeploymentServesHttp) {
  TempDir dir;
  auto cfg = lifeserver::testing::inprocess_pair(dir.path(), 1);
  cfg.pub.listen_address = "127.0.0.1:0";
  lifeserver::testing::write_file(*cfg.pub.private_config,
                                  "role = private\ndata_dir = " + cfg.priv.data_dir.string() +
                                      "\nchannel.transport = inprocess\n");
  Running pub(cfg.pub);
  httplib::Client http("127.0.0.1", pub.port());
  auto res = http.Post("/pair", json{{"code", "setup"}}.dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  const httplib::Headers auth{{"Authorization", "Bearer " + json::parse(res->body)["token"].get<std::string>()}};
  EXPECT_EQ(http.Get("/sense/v1/key", auth)->status, 200);
  EXPECT_EQ(current_pairing_code(cfg.pub).size(), 10u);
}
