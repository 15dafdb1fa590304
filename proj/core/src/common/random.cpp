#include "lifeserver/common/random.hpp"

#include <sodium.h>

#include <chrono>
#include <stdexcept>
#include <vector>

#include "lifeserver/common/bytes.hpp"

namespace lifeserver {

void ensure_crypto_ready() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

void random_fill(std::span<std::uint8_t> out) {
  ensure_crypto_ready();
  randombytes_buf(out.data(), out.size());
}

std::string random_hex(std::size_t n_bytes) {
  std::vector<std::uint8_t> buf(n_bytes);
  random_fill(buf);
  return to_hex(buf);
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace lifeserver
