#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace lifeserver {

/// Initializes libsodium once per process. Throws std::runtime_error if the
/// library cannot be initialized (no usable entropy source).
void ensure_crypto_ready();

/// Fills `out` from the operating system CSPRNG.
void random_fill(std::span<std::uint8_t> out);

/// Lowercase hex of `n_bytes` random bytes; 16 bytes gives a 128-bit id.
std::string random_hex(std::size_t n_bytes = 16);

/// Milliseconds since the Unix epoch (UTC).
std::int64_t now_ms();

}  // namespace lifeserver
