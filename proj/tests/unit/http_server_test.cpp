#include <gtest/gtest.h>

#include <httplib.h>

#include "lifeserver/gateway/http_server.hpp"
#include "lifeserver/mind/engine.hpp"
#include "support/records.hpp"
#include "support/temp_dir.hpp"

using namespace lifeserver;
using nlohmann::json;
using lifeserver::testing::TempDir;

namespace {

struct StoreSource : mind::RecordSource {
  explicit StoreSource(const store::SenseStore& s) : store(s) {}
  std::vector<store::SenseRecord> candidates(const store::RecordFilter& f) const override {
    return store.query(f);
  }
  const store::SenseStore& store;
};

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    gateway = std::make_unique<gateway::Gateway>(
        dir.path(), sense,
        [this](const store::SenseRecord&) {
          if (channel_down) throw gateway::GatewayError(gateway::GatewayErrc::ChannelDown, "down");
        },
        gateway::PairingOptions{"pair-me", std::chrono::seconds(600)});
    mind::EngineConfig config;
    config.k_min = 3;
    config.min_fee = 10;
    engine = std::make_unique<mind::Engine>(config, source, ledger, [](const std::string& url) -> std::string {
      throw std::runtime_error("404 " + url);
    });
    server = std::make_unique<gateway::HttpServer>(gateway::HttpServices{
        gateway.get(), engine.get(), [this]() -> std::optional<json> {
          if (!key) return std::nullopt;
          return *key;
        }});
    port = server->bind("127.0.0.1", 0);
    server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  void TearDown() override { server->stop(); }

  httplib::Result post(const std::string& path, const json& body, const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return client->Post(path, h, body.dump(), "application/json");
  }

  httplib::Result get(const std::string& path, const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return client->Get(path, h);
  }

  std::string pair() {
    auto res = post("/pair", {{"code", gateway->pairing_code()}});
    EXPECT_EQ(res->status, 200);
    return json::parse(res->body).at("token").get<std::string>();
  }

  static json heart_rate(double bpm) {
    auto r = lifeserver::testing::make_record("watch", "heart_rate", 100, {{"bpm", bpm}});
    auto j = store::to_json(r);
    j.erase("record_id");
    return j;
  }

  TempDir dir;
  store::SenseStore sense{dir / store::kPublicSenseFile};
  store::Ledger ledger{dir / store::kLedgerFile};
  StoreSource source{sense};
  bool channel_down = false;
  std::optional<json> key;
  std::unique_ptr<gateway::Gateway> gateway;
  std::unique_ptr<mind::Engine> engine;
  std::unique_ptr<gateway::HttpServer> server;
  std::unique_ptr<httplib::Client> client;
  int port = 0;
};

}  // namespace

TEST_F(HttpTest, PairingStatuses) {
  EXPECT_EQ(post("/pair", {{"code", "wrong"}})->status, 409);
  const auto res = post("/pair", {{"code", "pair-me"}});
  ASSERT_EQ(res->status, 200);
  const auto body = json::parse(res->body);
  EXPECT_TRUE(body.contains("client_id"));
  EXPECT_EQ(body["token"].get<std::string>().size(), 64u);
  EXPECT_EQ(post("/pair", {{"code", "pair-me"}})->status, 409);
  EXPECT_EQ(client->Post("/pair", "{nope", "application/json")->status, 400);
}

TEST_F(HttpTest, EveryOtherRouteNeedsAToken) {
  const std::vector<std::pair<std::string, std::string>> routes = {
      {"GET", "/sense/v1/key"},
      {"POST", "/sense/v1/records"},
      {"POST", "/act/v1/devices"},
      {"GET", "/act/v1/devices/x"},
      {"POST", "/act/v1/devices/x/controls/y"},
      {"GET", "/act/v1/devices/x/commands"},
      {"POST", "/mind/v1/query"},
      {"POST", "/mind/v1/settle"},
  };
  for (const auto& token : {std::string{}, std::string("0123")}) {
    for (const auto& [method, path] : routes) {
      const auto res = method == "GET" ? get(path, token) : post(path, json::object(), token);
      ASSERT_TRUE(res) << path;
      EXPECT_EQ(res->status, 401) << method << " " << path;
    }
  }
}

TEST_F(HttpTest, SenseIngest) {
  const auto token = pair();
  auto res = post("/sense/v1/records", heart_rate(60), token);
  ASSERT_EQ(res->status, 200);
  const auto id = json::parse(res->body).at("record_id").get<std::string>();
  EXPECT_TRUE(sense.contains(id));

  auto bad = heart_rate(60);
  bad.erase("source_vdp");
  EXPECT_EQ(post("/sense/v1/records", bad, token)->status, 400);
  auto with_id = heart_rate(60);
  with_id["record_id"] = "x";
  EXPECT_EQ(post("/sense/v1/records", with_id, token)->status, 400);
}

TEST_F(HttpTest, SealedIngestWhileChannelIsDownIsDeferred) {
  const auto token = pair();
  const auto keys = sealed::generate_keypair();
  auto r = lifeserver::testing::make_record("mic", "audio", 1, {}, store::Privacy::Sealed);
  r.sealed_payload = sealed::seal(keys.public_key, to_bytes("hello"));
  auto j = store::to_json(r);
  j.erase("record_id");
  channel_down = true;
  const auto res = post("/sense/v1/records", j, token);
  ASSERT_EQ(res->status, 202);
  const auto body = json::parse(res->body);
  EXPECT_TRUE(body["deferred"].get<bool>());
  EXPECT_TRUE(sense.contains(body["record_id"].get<std::string>()));
}

TEST_F(HttpTest, SealingKey) {
  const auto token = pair();
  EXPECT_EQ(get("/sense/v1/key", token)->status, 404);
  key = json{{"key_id", "ab"}, {"public_key", "cd"}};
  const auto res = get("/sense/v1/key", token);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body), *key);
}

TEST_F(HttpTest, ActRoutes) {
  const auto token = pair();
  const json light = json::parse(R"({"name": "lamp", "controls": [
      {"name": "brightness", "kind": "range", "lo": 0, "hi": 100, "current": 10},
      {"name": "power", "kind": "boolean"}]})");
  auto res = post("/act/v1/devices", light, token);
  ASSERT_EQ(res->status, 200);
  const auto dev = json::parse(res->body).at("device_id").get<std::string>();

  EXPECT_EQ(get("/act/v1/devices/" + dev, token)->status, 200);
  EXPECT_EQ(get("/act/v1/devices/ghost", token)->status, 404);

  const auto base = "/act/v1/devices/" + dev;
  res = post(base + "/controls/brightness", {{"value", 80}}, token);
  ASSERT_EQ(res->status, 200);
  const auto cmd = json::parse(res->body).at("command_id");
  EXPECT_EQ(post(base + "/controls/brightness", {{"value", 150}}, token)->status, 400);
  EXPECT_EQ(post(base + "/controls/volume", {{"value", 1}}, token)->status, 404);
  EXPECT_EQ(post("/act/v1/devices/ghost/controls/power", {{"value", true}}, token)->status, 404);
  EXPECT_EQ(post(base + "/controls/power", json::object(), token)->status, 400);

  res = get(base + "/commands", token);
  ASSERT_EQ(res->status, 200);
  const auto cmds = json::parse(res->body);
  ASSERT_EQ(cmds.size(), 1u);
  EXPECT_EQ(cmds[0]["command_id"], cmd);
  EXPECT_EQ(cmds[0]["value"], 80);
  EXPECT_EQ(json::parse(get(base + "/commands", token)->body).size(), 0u);
}

TEST_F(HttpTest, MindQueryAndSettle) {
  const auto token = pair();
  json q = json::parse(R"({"record_types": ["heart_rate"], "time_range": [0, 1000],
                           "aggregate": {"op": "mean", "field": "bpm"}, "offered_fee": 100,
                           "enterprise_payout_address": {"bitcoin": "1Ent"}})");
  post("/sense/v1/records", heart_rate(60), token);
  post("/sense/v1/records", heart_rate(70), token);
  EXPECT_EQ(post("/mind/v1/query", q, token)->status, 204);
  post("/sense/v1/records", heart_rate(80), token);

  auto cheap = q;
  cheap["offered_fee"] = 5;
  EXPECT_EQ(post("/mind/v1/query", cheap, token)->status, 402);
  auto broken = q;
  broken["aggregate"] = "median";
  EXPECT_EQ(post("/mind/v1/query", broken, token)->status, 400);

  auto res = post("/mind/v1/query", q, token);
  ASSERT_EQ(res->status, 200);
  const auto insight = json::parse(res->body);
  EXPECT_EQ(insight["result"], 70.0);
  EXPECT_EQ(insight["matched_count"], 3);
  EXPECT_EQ(insight["attribution"]["version"], 1);
  const auto ref = insight["query_ref"].get<std::string>();

  EXPECT_EQ(post("/mind/v1/settle", {{"query_ref", ref}, {"fee", 99}}, token)->status, 402);
  EXPECT_EQ(post("/mind/v1/settle", {{"query_ref", "nope"}, {"fee", 100}}, token)->status, 404);
  res = post("/mind/v1/settle", {{"query_ref", ref}, {"fee", 100}}, token);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["entries"].size(), 2u);
  EXPECT_EQ(post("/mind/v1/settle", {{"query_ref", ref}, {"fee", 100}}, token)->status, 409);
}

TEST(HttpServer, SecondBindOnAPortFails) {
  TempDir dir;
  store::SenseStore sense(dir / store::kPublicSenseFile);
  gateway::Gateway gw(dir.path(), sense, [](const store::SenseRecord&) {});
  gateway::HttpServer a(gateway::HttpServices{&gw, nullptr, {}});
  const int port = a.bind("127.0.0.1", 0);
  gateway::HttpServer b(gateway::HttpServices{&gw, nullptr, {}});
  EXPECT_THROW(b.bind("127.0.0.1", port), gateway::PortInUse);
}
