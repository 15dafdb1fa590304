#include <gtest/gtest.h>

#include <algorithm>

#include "lifeserver/sealed/envelope.hpp"

using namespace lifeserver;
using namespace lifeserver::sealed;

namespace {

SealErrc open_error(const KeyPair& k, const SealedEnvelope& e) {
  try {
    open(k, e);
  } catch (const SealError& err) {
    return err.code();
  }
  ADD_FAILURE() << "envelope opened";
  return SealErrc::Malformed;
}

}  // namespace

TEST(Envelope, RoundTrip) {
  const auto keys = generate_keypair();
  for (const std::size_t n : {0u, 1u, 4096u, 100000u}) {
    Bytes plain(n);
    for (std::size_t i = 0; i < n; ++i) plain[i] = static_cast<std::uint8_t>(i * 31);
    const auto env = seal(keys.public_key, plain);
    EXPECT_EQ(env.key_id, keys.key_id);
    EXPECT_EQ(env.ciphertext.size(), n);
    EXPECT_EQ(open(keys, env), plain);
    EXPECT_EQ(parse_envelope(serialize_envelope(env)), env);
  }
}

TEST(Envelope, FreshKeysAndNoncesEachTime) {
  const auto keys = generate_keypair();
  const Bytes plain = to_bytes("same plaintext");
  const auto a = seal(keys.public_key, plain);
  const auto b = seal(keys.public_key, plain);
  EXPECT_NE(a.wrapped_key, b.wrapped_key);
  EXPECT_NE(a.nonce, b.nonce);
  EXPECT_NE(a.ciphertext, b.ciphertext);
}

TEST(Envelope, EveryByteFlipIsDetected) {
  const auto keys = generate_keypair();
  const auto env = seal(keys.public_key, to_bytes("sentinel-tamper-check"));
  const Bytes wire = serialize_envelope(env);
  for (std::size_t i = 0; i < wire.size(); ++i) {
    Bytes bad = wire;
    bad[i] ^= 0x01;
    SealedEnvelope parsed;
    try {
      parsed = parse_envelope(bad);
    } catch (const SealError& e) {
      EXPECT_EQ(e.code(), SealErrc::Malformed);  // a length prefix was hit
      continue;
    }
    const auto code = open_error(keys, parsed);
    EXPECT_TRUE(code == SealErrc::AuthError || code == SealErrc::UnknownKeyId) << "byte " << i;
  }
}

TEST(Envelope, WrongKeyIsUnknownKeyId) {
  const auto alice = generate_keypair();
  const auto bob = generate_keypair();
  const auto env = seal(alice.public_key, to_bytes("for alice"));
  EXPECT_EQ(open_error(bob, env), SealErrc::UnknownKeyId);

  // Relabelling the envelope for bob does not help him.
  auto relabelled = env;
  relabelled.key_id = bob.key_id;
  EXPECT_EQ(open_error(bob, relabelled), SealErrc::AuthError);
}

TEST(Envelope, KeyIdIsDerivedFromPublicKey) {
  const auto keys = generate_keypair();
  EXPECT_EQ(derive_key_id(keys.public_key), keys.key_id);
  const auto again = keypair_from_secret(keys.private_key.bytes());
  EXPECT_EQ(again.public_key, keys.public_key);
  EXPECT_EQ(again.key_id, keys.key_id);
}

TEST(Envelope, DeterministicFromSeedAndEntropyFailure) {
  const EntropySource fixed = [](std::span<std::uint8_t> out) { std::fill(out.begin(), out.end(), 7); };
  EXPECT_EQ(generate_keypair(fixed).public_key, generate_keypair(fixed).public_key);
  const EntropySource broken = [](std::span<std::uint8_t>) { throw std::runtime_error("no entropy"); };
  try {
    generate_keypair(broken);
    FAIL();
  } catch (const SealError& e) {
    EXPECT_EQ(e.code(), SealErrc::EntropyUnavailable);
  }
}

TEST(Envelope, InvalidPublicKey) {
  try {
    seal(Bytes(31, 1), to_bytes("x"));
    FAIL();
  } catch (const SealError& e) {
    EXPECT_EQ(e.code(), SealErrc::InvalidPublicKey);
  }
}

TEST(Envelope, MalformedWire) {
  EXPECT_THROW(parse_envelope(Bytes{}), SealError);
  EXPECT_THROW(parse_envelope(Bytes{0, 0, 0, 99, 1, 2}), SealError);
  const auto keys = generate_keypair();
  Bytes wire = serialize_envelope(seal(keys.public_key, to_bytes("x")));
  wire.push_back(0);
  EXPECT_THROW(parse_envelope(wire), SealError);
}

TEST(Envelope, Sha256AndWipe) {
  EXPECT_EQ(sha256_hex(as_bytes("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Bytes secret = to_bytes("secret");
  wipe(secret);
  EXPECT_TRUE(std::all_of(secret.begin(), secret.end(), [](std::uint8_t b) { return b == 0; }));
}
