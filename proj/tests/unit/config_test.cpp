#include <gtest/gtest.h>

#include "lifeserver/node/config.hpp"
#include "support/temp_dir.hpp"

using namespace lifeserver;
using namespace lifeserver::node;

namespace {

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text, "/base");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "parsed:\n" << text;
  return ConfigError(ConfigErrc::Unreadable, "", "");
}

}  // namespace

TEST(Config, MinimalPublicConfigGetsDefaults) {
  const auto c = parse_config("role = public\ndata_dir = pub\n", "/base");
  EXPECT_EQ(c.role, Role::Public);
  EXPECT_EQ(c.data_dir, std::filesystem::path("/base/pub"));
  EXPECT_EQ(c.k_min, 5u);
  EXPECT_FALSE(c.channel.fec.enabled);
  EXPECT_EQ(c.channel.mode, callosum::ChannelMode::Duplex);
  EXPECT_EQ(c.channel.transport, Transport::TcpSim);
  EXPECT_EQ(c.listen_address, "127.0.0.1:8080");
  EXPECT_EQ(c.retention_ppm, 0u);
  EXPECT_EQ(c.min_fee, 0u);
  EXPECT_FALSE(c.pairing_code);
}

TEST(Config, FullPublicConfig) {
  const auto c = parse_config(R"(# a comment
role = public
data_dir = /var/ls/pub   # trailing comment
listen_address = 0.0.0.0:9090
pairing_code = 4242
k_min = 4
ls_retention = 0.05
min_fee = 10
vdp.max_depth = 8
vdp.max_docs = 20
channel.transport = inprocess
channel.mode = Diode
channel.endpoint = 127.0.0.1:7800
channel.fec.enabled = true
channel.fec.data_len = 223
channel.fec.parity_len = 32
channel.error.corrupt_p = 0.02
channel.error.seed = 9
private_config = private.conf
)",
                              "/etc/ls");
  EXPECT_EQ(c.data_dir, std::filesystem::path("/var/ls/pub"));
  EXPECT_EQ(c.listen_address, "0.0.0.0:9090");
  EXPECT_EQ(c.pairing_code, "4242");
  EXPECT_EQ(c.k_min, 4u);
  EXPECT_EQ(c.retention_ppm, 50'000u);
  EXPECT_EQ(c.min_fee, 10u);
  EXPECT_EQ(c.limits.max_depth, 8u);
  EXPECT_EQ(c.limits.max_documents, 20u);
  EXPECT_EQ(c.channel.transport, Transport::InProcess);
  EXPECT_EQ(c.channel.mode, callosum::ChannelMode::Diode);
  EXPECT_TRUE(c.channel.fec.enabled);
  EXPECT_DOUBLE_EQ(c.channel.error.corrupt_p, 0.02);
  EXPECT_EQ(c.channel.error.seed, 9u);
  EXPECT_EQ(c.private_config, std::filesystem::path("/etc/ls/private.conf"));
}

TEST(Config, Diagnostics) {
  auto e = config_error("data_dir = x\n");
  EXPECT_EQ(e.code(), ConfigErrc::MissingKey);
  EXPECT_EQ(e.key(), "role");

  e = config_error("role = private\ndata_dir = x\nlisten_address = 127.0.0.1:1\n");
  EXPECT_EQ(e.code(), ConfigErrc::UnknownKey);
  EXPECT_EQ(e.key(), "listen_address");

  e = config_error("role = public\ndata_dir = x\ncolour = blue\n");
  EXPECT_EQ(e.code(), ConfigErrc::UnknownKey);
  EXPECT_EQ(e.key(), "colour");

  e = config_error("role = public\ndata_dir = x\nk_min = many\n");
  EXPECT_EQ(e.code(), ConfigErrc::BadValue);
  EXPECT_EQ(e.key(), "k_min");

  e = config_error("role = public\ndata_dir = x\nk_min = 0\n");
  EXPECT_EQ(e.code(), ConfigErrc::BadValue);

  e = config_error("role = public\ndata_dir = x\nls_retention = 1.5\n");
  EXPECT_EQ(e.key(), "ls_retention");

  e = config_error("role = public\ndata_dir = x\nchannel.mode = simplex\n");
  EXPECT_EQ(e.key(), "channel.mode");

  e = config_error("role = public\ndata_dir = x\nchannel.fec.enabled = true\nchannel.fec.parity_len = 240\n");
  EXPECT_EQ(e.code(), ConfigErrc::BadValue);

  e = config_error("role = public\ndata_dir = x\nrole = private\n");
  EXPECT_EQ(e.code(), ConfigErrc::BadValue);
  EXPECT_EQ(e.key(), "role");

  e = config_error("role = public\ndata_dir = x\njust words\n");
  EXPECT_EQ(e.code(), ConfigErrc::BadValue);

  e = config_error("role = admin\ndata_dir = x\n");
  EXPECT_EQ(e.key(), "role");
}

TEST(Config, LoadResolvesAgainstTheFile) {
  lifeserver::testing::TempDir dir;
  lifeserver::testing::write_file(dir / "node.conf", "role = private\ndata_dir = data\n");
  const auto c = load_config(dir / "node.conf");
  EXPECT_EQ(c.role, Role::Private);
  EXPECT_EQ(c.data_dir, dir / "data");
  try {
    load_config(dir / "missing.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), ConfigErrc::Unreadable);
  }
}

TEST(Config, StoredModeOverridesTheFile) {
  lifeserver::testing::TempDir dir;
  auto c = parse_config("role = private\ndata_dir = " + dir.path().string() + "\n");
  EXPECT_EQ(effective_mode(c), callosum::ChannelMode::Duplex);
  store_mode(c.data_dir, callosum::ChannelMode::Diode);
  EXPECT_EQ(stored_mode(c.data_dir), callosum::ChannelMode::Diode);
  EXPECT_EQ(effective_mode(c), callosum::ChannelMode::Diode);
}
