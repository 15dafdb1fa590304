#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "lifeserver/common/bytes.hpp"

namespace lifeserver::sealed {

// Hybrid sealing to the private node:
//   content key   fresh 256-bit XChaCha20-Poly1305 key per message
//   wrapped_key   content key in an X25519 sealed box for the node's public key
//   ciphertext    AEAD over the plaintext, associated data = key_id || wrapped_key
// Only the holder of the X25519 secret key can unwrap the content key.

inline constexpr std::size_t kKeyIdSize = 16;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSecretKeySize = 32;

using KeyId = std::array<std::uint8_t, kKeyIdSize>;

enum class SealErrc { EntropyUnavailable, InvalidPublicKey, AuthError, UnknownKeyId, Malformed };

const char* to_string(SealErrc code);

class SealError : public std::runtime_error {
 public:
  SealError(SealErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SealErrc code() const noexcept { return code_; }

 private:
  SealErrc code_;
};

/// Secret bytes wiped on destruction.
class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(ByteView bytes);
  SecretKey(const SecretKey& other);
  SecretKey& operator=(const SecretKey& other);
  ~SecretKey();

  ByteView bytes() const { return {data_.data(), size_}; }
  bool empty() const noexcept { return size_ == 0; }

 private:
  std::array<std::uint8_t, kSecretKeySize> data_{};
  std::size_t size_ = 0;
};

/// BLAKE2b-128 of the public key.
KeyId derive_key_id(ByteView public_key);

struct KeyPair {
  KeyId key_id{};
  Bytes public_key;
  SecretKey private_key;
};

/// Fills a buffer with seed material; throw to signal no entropy.
using EntropySource = std::function<void(std::span<std::uint8_t>)>;

/// The operating system CSPRNG.
EntropySource system_entropy();

/// Throws SealError(EntropyUnavailable).
KeyPair generate_keypair(const EntropySource& entropy = system_entropy());

/// Rebuilds a keypair from a stored secret key.
KeyPair keypair_from_secret(ByteView secret_key);

struct SealedEnvelope {
  KeyId key_id{};
  Bytes wrapped_key;
  Bytes nonce;
  Bytes ciphertext;
  Bytes auth_tag;

  bool operator==(const SealedEnvelope&) const = default;
};

/// Throws SealError(InvalidPublicKey).
SealedEnvelope seal(ByteView public_key, ByteView plaintext);

/// Throws SealError(UnknownKeyId) when the envelope names another key and
/// SealError(AuthError) on any tampering.
Bytes open(const KeyPair& keys, const SealedEnvelope& envelope);

/// Length-prefixed (u32 big-endian) fields in declaration order.
Bytes serialize_envelope(const SealedEnvelope& envelope);

/// Throws SealError(Malformed).
SealedEnvelope parse_envelope(ByteView bytes);

/// Hex SHA-256.
std::string sha256_hex(ByteView data);

/// Overwrites the buffer with zeros in a way the compiler keeps.
void wipe(std::span<std::uint8_t> data);

}  // namespace lifeserver::sealed
