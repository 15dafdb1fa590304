#pragma once

#include <cstdint>
#include <vector>

namespace lifeserver::callosum {

/// Arithmetic in GF(2^m) for 2 <= m <= 8, built from a primitive polynomial
/// (0x11D for the GF(256) used on the wire). The generator is alpha = 2.
class GaloisField {
 public:
  GaloisField(unsigned bits, unsigned primitive_poly);

  /// GF(2^8) with polynomial x^8 + x^4 + x^3 + x^2 + 1.
  static const GaloisField& gf256();

  unsigned bits() const noexcept { return bits_; }
  unsigned size() const noexcept { return size_; }       // 2^m
  unsigned order() const noexcept { return size_ - 1; }  // multiplicative group order

  std::uint8_t add(std::uint8_t a, std::uint8_t b) const noexcept { return a ^ b; }
  std::uint8_t mul(std::uint8_t a, std::uint8_t b) const noexcept {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  std::uint8_t div(std::uint8_t a, std::uint8_t b) const;  // throws on b == 0
  std::uint8_t inv(std::uint8_t a) const { return div(1, a); }
  /// alpha^power for any (possibly negative) power.
  std::uint8_t alpha_pow(long power) const noexcept;
  unsigned log(std::uint8_t a) const noexcept { return log_[a]; }

 private:
  unsigned bits_;
  unsigned size_;
  std::vector<std::uint8_t> exp_;  // doubled so exp_[log a + log b] needs no modulo
  std::vector<unsigned> log_;
};

}  // namespace lifeserver::callosum
