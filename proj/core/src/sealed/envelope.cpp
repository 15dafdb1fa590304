#include "lifeserver/sealed/envelope.hpp"

#include <sodium.h>

#include <algorithm>

#include "lifeserver/common/random.hpp"

namespace lifeserver::sealed {
namespace {

constexpr std::size_t kContentKeySize = crypto_aead_xchacha20poly1305_ietf_KEYBYTES;
constexpr std::size_t kNonceSize = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr std::size_t kTagSize = crypto_aead_xchacha20poly1305_ietf_ABYTES;
constexpr std::size_t kWrappedSize = crypto_box_SEALBYTES + kContentKeySize;

Bytes associated_data(const KeyId& key_id, ByteView wrapped) {
  Bytes ad(key_id.begin(), key_id.end());
  ad.insert(ad.end(), wrapped.begin(), wrapped.end());
  return ad;
}

void ready() {
  try {
    ensure_crypto_ready();
  } catch (const std::exception& e) {
    throw SealError(SealErrc::EntropyUnavailable, e.what());
  }
}

}  // namespace

const char* to_string(SealErrc code) {
  switch (code) {
    case SealErrc::EntropyUnavailable: return "EntropyUnavailable";
    case SealErrc::InvalidPublicKey: return "InvalidPublicKey";
    case SealErrc::AuthError: return "AuthError";
    case SealErrc::UnknownKeyId: return "UnknownKeyId";
    case SealErrc::Malformed: return "Malformed";
  }
  return "Unknown";
}

void wipe(std::span<std::uint8_t> data) { sodium_memzero(data.data(), data.size()); }

SecretKey::SecretKey(ByteView bytes) {
  if (bytes.size() != kSecretKeySize) throw SealError(SealErrc::Malformed, "secret key must be 32 bytes");
  std::copy(bytes.begin(), bytes.end(), data_.begin());
  size_ = bytes.size();
}

SecretKey::SecretKey(const SecretKey& other) : data_(other.data_), size_(other.size_) {}

SecretKey& SecretKey::operator=(const SecretKey& other) {
  if (this != &other) {
    data_ = other.data_;
    size_ = other.size_;
  }
  return *this;
}

SecretKey::~SecretKey() { sodium_memzero(data_.data(), data_.size()); }

KeyId derive_key_id(ByteView public_key) {
  ready();
  KeyId id{};
  crypto_generichash(id.data(), id.size(), public_key.data(), public_key.size(), nullptr, 0);
  return id;
}

EntropySource system_entropy() {
  return [](std::span<std::uint8_t> out) { random_fill(out); };
}

KeyPair generate_keypair(const EntropySource& entropy) {
  ready();
  std::array<std::uint8_t, crypto_box_SEEDBYTES> seed{};
  try {
    entropy(seed);
  } catch (const std::exception& e) {
    throw SealError(SealErrc::EntropyUnavailable, e.what());
  }
  std::array<std::uint8_t, kPublicKeySize> pk{};
  std::array<std::uint8_t, kSecretKeySize> sk{};
  crypto_box_seed_keypair(pk.data(), sk.data(), seed.data());
  sodium_memzero(seed.data(), seed.size());

  KeyPair kp;
  kp.public_key.assign(pk.begin(), pk.end());
  kp.private_key = SecretKey(sk);
  kp.key_id = derive_key_id(kp.public_key);
  sodium_memzero(sk.data(), sk.size());
  return kp;
}

KeyPair keypair_from_secret(ByteView secret_key) {
  ready();
  KeyPair kp;
  kp.private_key = SecretKey(secret_key);
  kp.public_key.resize(kPublicKeySize);
  crypto_scalarmult_base(kp.public_key.data(), secret_key.data());
  kp.key_id = derive_key_id(kp.public_key);
  return kp;
}

SealedEnvelope seal(ByteView public_key, ByteView plaintext) {
  ready();
  if (public_key.size() != kPublicKeySize) {
    throw SealError(SealErrc::InvalidPublicKey, "public key must be 32 bytes");
  }

  std::array<std::uint8_t, kContentKeySize> content_key{};
  crypto_aead_xchacha20poly1305_ietf_keygen(content_key.data());

  SealedEnvelope env;
  env.key_id = derive_key_id(public_key);
  env.wrapped_key.resize(kWrappedSize);
  if (crypto_box_seal(env.wrapped_key.data(), content_key.data(), content_key.size(),
                      public_key.data()) != 0) {
    sodium_memzero(content_key.data(), content_key.size());
    throw SealError(SealErrc::InvalidPublicKey, "public key rejected");
  }

  env.nonce.resize(kNonceSize);
  randombytes_buf(env.nonce.data(), env.nonce.size());
  env.ciphertext.resize(plaintext.size());
  env.auth_tag.resize(kTagSize);
  const Bytes ad = associated_data(env.key_id, env.wrapped_key);
  crypto_aead_xchacha20poly1305_ietf_encrypt_detached(
      env.ciphertext.data(), env.auth_tag.data(), nullptr, plaintext.data(), plaintext.size(),
      ad.data(), ad.size(), nullptr, env.nonce.data(), content_key.data());
  sodium_memzero(content_key.data(), content_key.size());
  return env;
}

Bytes open(const KeyPair& keys, const SealedEnvelope& env) {
  ready();
  if (env.key_id != keys.key_id) {
    throw SealError(SealErrc::UnknownKeyId, "envelope was sealed to key " + to_hex(env.key_id));
  }
  if (env.wrapped_key.size() != kWrappedSize || env.nonce.size() != kNonceSize ||
      env.auth_tag.size() != kTagSize) {
    throw SealError(SealErrc::AuthError, "envelope field sizes are wrong");
  }

  std::array<std::uint8_t, kContentKeySize> content_key{};
  if (crypto_box_seal_open(content_key.data(), env.wrapped_key.data(), env.wrapped_key.size(),
                           keys.public_key.data(), keys.private_key.bytes().data()) != 0) {
    throw SealError(SealErrc::AuthError, "content key does not unwrap");
  }

  Bytes plain(env.ciphertext.size());
  const Bytes ad = associated_data(env.key_id, env.wrapped_key);
  const int rc = crypto_aead_xchacha20poly1305_ietf_decrypt_detached(
      plain.data(), nullptr, env.ciphertext.data(), env.ciphertext.size(), env.auth_tag.data(),
      ad.data(), ad.size(), env.nonce.data(), content_key.data());
  sodium_memzero(content_key.data(), content_key.size());
  if (rc != 0) {
    wipe(plain);
    throw SealError(SealErrc::AuthError, "ciphertext failed authentication");
  }
  return plain;
}

Bytes serialize_envelope(const SealedEnvelope& env) {
  Bytes out;
  auto field = [&out](ByteView f) {
    put_u32_be(out, static_cast<std::uint32_t>(f.size()));
    out.insert(out.end(), f.begin(), f.end());
  };
  field(env.key_id);
  field(env.wrapped_key);
  field(env.nonce);
  field(env.ciphertext);
  field(env.auth_tag);
  return out;
}

SealedEnvelope parse_envelope(ByteView bytes) {
  std::size_t pos = 0;
  auto field = [&]() {
    if (bytes.size() - pos < 4) throw SealError(SealErrc::Malformed, "envelope truncated");
    const std::size_t len = get_u32_be(bytes.data() + pos);
    pos += 4;
    if (bytes.size() - pos < len) throw SealError(SealErrc::Malformed, "envelope truncated");
    Bytes f(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    return f;
  };
  SealedEnvelope env;
  const Bytes id = field();
  if (id.size() != kKeyIdSize) throw SealError(SealErrc::Malformed, "key id must be 16 bytes");
  std::copy(id.begin(), id.end(), env.key_id.begin());
  env.wrapped_key = field();
  env.nonce = field();
  env.ciphertext = field();
  env.auth_tag = field();
  if (pos != bytes.size()) throw SealError(SealErrc::Malformed, "trailing bytes after envelope");
  return env;
}

std::string sha256_hex(ByteView data) {
  ready();
  std::array<std::uint8_t, crypto_hash_sha256_BYTES> digest{};
  crypto_hash_sha256(digest.data(), data.data(), data.size());
  return to_hex(digest);
}

}  // namespace lifeserver::sealed
