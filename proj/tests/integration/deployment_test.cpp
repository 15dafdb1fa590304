#include <gtest/gtest.h>

#include <random>

#include "lifeserver/node/deployment.hpp"
#include "support/node_configs.hpp"
#include "support/temp_dir.hpp"

using namespace lifeserver;
using namespace lifeserver::node;
using callosum::Direction;
using lifeserver::testing::make_record;
using lifeserver::testing::TempDir;

namespace {

bool file_tree_contains(const std::filesystem::path& root, const std::string& needle) {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() &&
        lifeserver::testing::read_file(entry.path()).find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

class DeploymentTest : public ::testing::Test {
 protected:
  std::unique_ptr<Deployment> boot() {
    return std::make_unique<Deployment>(cfg.pub, cfg.priv, lifeserver::testing::refuse_fetch());
  }

  TempDir dir;
  lifeserver::testing::NodePair cfg = lifeserver::testing::inprocess_pair(dir.path());
};

}  // namespace

TEST_F(DeploymentTest, ProvisionThenLockSilencesTheReverseDirection) {
  auto d = boot();
  // Attaching in duplex already announces the key.
  ASSERT_TRUE(d->public_node().announced_key());
  const auto key = d->provision();
  EXPECT_EQ(key.public_key, d->private_node().keys().public_key);
  EXPECT_TRUE(std::filesystem::exists(cfg.pub.data_dir / kAnnouncedKeyFile));

  d->lock();
  EXPECT_EQ(stored_mode(cfg.priv.data_dir), callosum::ChannelMode::Diode);
  const auto before = d->channel().wire_bytes(Direction::PrivateToPublic);

  auto& gw = d->public_node().gateway();
  const auto token = gw.pair_client("setup").token;
  gw.ingest(token, lifeserver::testing::sealed_record(key, "mic", "audio", 1, to_bytes("x")));
  d->public_node().request_derived();
  d->public_node().send_heartbeat();
  d->sync();
  EXPECT_THROW(d->provision(), callosum::ChannelError);
  EXPECT_FALSE(d->private_node().announce_key());
  d->sync();

  EXPECT_EQ(d->channel().wire_bytes(Direction::PrivateToPublic), before);
  EXPECT_EQ(d->private_node().sealed_store().size(), 1u);  // forward direction still flows
  EXPECT_GT(d->private_node().stats().refused_sends, 0u);
  EXPECT_EQ(d->public_node().imported().size(), 0u);

  d->unlock();
  d->public_node().request_derived();
  d->sync();
  EXPECT_EQ(d->public_node().imported().size(), 2u);
}

TEST_F(DeploymentTest, SealedRecordsStayPrivateAndFeaturesComeBack) {
  const std::string sentinel = "SENTINEL-PLAINTEXT-91c2";
  std::string stub_id;
  {
    auto d = boot();
    const auto key = *d->public_node().announced_key();
    auto& gw = d->public_node().gateway();
    const auto token = gw.pair_client("setup").token;
    Bytes audio(3000, 'a');
    std::copy(sentinel.begin(), sentinel.end(), audio.begin() + 100);
    stub_id = gw.ingest(token, lifeserver::testing::sealed_record(key, "mic", "audio", 5, audio));
    d->sync();

    auto& priv = d->private_node();
    ASSERT_TRUE(priv.sealed_store().get(stub_id));
    EXPECT_TRUE(priv.sealed_store().get(stub_id)->sealed_payload);
    const auto features = priv.derived().for_origin(stub_id);
    ASSERT_EQ(features.size(), 2u);

    d->public_node().request_derived();
    d->sync();
    store::RecordFilter f;
    f.record_types = {"audio"};
    const auto view = d->public_node().candidates(f);
    ASSERT_EQ(view.size(), 1u);
    EXPECT_EQ(std::get<double>(view[0].fields.at("byte_length")), 3000.0);
    EXPECT_EQ(view[0].source_id, "mic");

    const auto stub = d->public_node().store().get(stub_id);
    ASSERT_TRUE(stub);
    EXPECT_TRUE(stub->sealed_stub);
  }
  EXPECT_FALSE(file_tree_contains(cfg.pub.data_dir, sentinel));
  EXPECT_TRUE(std::filesystem::exists(cfg.priv.data_dir / store::kPrivateSenseFile));
}

TEST_F(DeploymentTest, DeferredForwardsFlushOnReconnect) {
  auto d = boot();
  const auto key = *d->public_node().announced_key();
  auto& gw = d->public_node().gateway();
  const auto token = gw.pair_client("setup").token;
  d->disconnect();
  std::string deferred;
  try {
    gw.ingest(token, lifeserver::testing::sealed_record(key, "mic", "audio", 1, to_bytes("later")));
    FAIL();
  } catch (const gateway::GatewayError& e) {
    EXPECT_EQ(e.code(), gateway::GatewayErrc::ChannelDown);
    deferred = e.record_id();
  }
  EXPECT_EQ(d->public_node().pending_forwards(), 1u);
  d->reconnect();
  d->sync();
  EXPECT_EQ(d->public_node().pending_forwards(), 0u);
  EXPECT_TRUE(d->private_node().sealed_store().contains(deferred));
}

TEST_F(DeploymentTest, DiodeWithoutKeyWarnsAtStartup) {
  store_mode(cfg.priv.data_dir, callosum::ChannelMode::Diode);
  auto d = boot();
  EXPECT_FALSE(d->public_node().announced_key());
  const auto warnings = d->public_node().startup_warnings(callosum::ChannelMode::Diode);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("sealed ingestion will queue until the node is provisioned"), std::string::npos);
  EXPECT_THROW(d->provision(), callosum::ChannelError);
  EXPECT_EQ(d->channel().wire_bytes(Direction::PrivateToPublic), 0u);
}

TEST_F(DeploymentTest, RestartReproducesAnswers) {
  std::string first;
  {
    auto d = boot();
    auto& gw = d->public_node().gateway();
    const auto token = gw.pair_client("setup").token;
    const auto key = *d->public_node().announced_key();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
      gw.ingest(token, make_record("s" + std::to_string(i % 3), "hr", i + 1, {{"bpm", double(rng() % 100)}}));
    }
    for (int i = 0; i < 6; ++i) {
      gw.ingest(token, lifeserver::testing::sealed_record(key, "mic", "audio", i + 1, Bytes(100 + i, 'z')));
    }
    d->sync();
    d->public_node().request_derived();
    d->sync();
    mind::MindQuery q;
    q.end = 1000;
    q.aggregate = {mind::AggregateOp::Sum, "bpm"};
    q.enterprise_payout_address = {"bitcoin", "E"};
    mind::MindQuery audio = q;
    audio.record_types = {"audio"};
    audio.aggregate = {mind::AggregateOp::Mean, "byte_length"};
    first = mind::to_json(d->public_node().engine().execute(q))["result"].dump() +
            mind::to_json(d->public_node().engine().execute(audio))["result"].dump();
  }
  auto d = boot();
  EXPECT_EQ(d->private_node().keys().public_key, d->public_node().announced_key()->public_key);
  mind::MindQuery q;
  q.end = 1000;
  q.aggregate = {mind::AggregateOp::Sum, "bpm"};
  q.enterprise_payout_address = {"bitcoin", "E"};
  mind::MindQuery audio = q;
  audio.record_types = {"audio"};
  audio.aggregate = {mind::AggregateOp::Mean, "byte_length"};
  const auto second = mind::to_json(d->public_node().engine().execute(q))["result"].dump() +
                      mind::to_json(d->public_node().engine().execute(audio))["result"].dump();
  EXPECT_EQ(first, second);
  EXPECT_EQ(d->private_node().sealed_store().size(), 6u);
  EXPECT_EQ(d->private_node().derived().size(), 12u);
}
