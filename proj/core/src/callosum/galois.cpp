#include "lifeserver/callosum/galois.hpp"

#include <stdexcept>
#include <string>

namespace lifeserver::callosum {

GaloisField::GaloisField(unsigned bits, unsigned primitive_poly)
    : bits_(bits), size_(1u << bits), exp_(2 * (size_ - 1)), log_(size_, 0) {
  if (bits < 2 || bits > 8) throw std::invalid_argument("field width must be 2..8 bits");
  unsigned x = 1;
  for (unsigned i = 0; i < size_ - 1; ++i) {
    if (i > 0 && x == 1) {
      throw std::invalid_argument("polynomial 0x" + std::to_string(primitive_poly) +
                                  " is not primitive");
    }
    exp_[i] = static_cast<std::uint8_t>(x);
    log_[x] = i;
    x <<= 1;
    if (x & size_) x ^= primitive_poly;
  }
  if (x != 1) throw std::invalid_argument("polynomial is not primitive");
  for (unsigned i = size_ - 1; i < exp_.size(); ++i) exp_[i] = exp_[i - (size_ - 1)];
}

const GaloisField& GaloisField::gf256() {
  static const GaloisField field(8, 0x11D);
  return field;
}

std::uint8_t GaloisField::div(std::uint8_t a, std::uint8_t b) const {
  if (b == 0) throw std::domain_error("division by zero in GF(2^m)");
  if (a == 0) return 0;
  return exp_[(log_[a] + order() - log_[b]) % order()];
}

std::uint8_t GaloisField::alpha_pow(long power) const noexcept {
  const long n = static_cast<long>(order());
  long p = power % n;
  if (p < 0) p += n;
  return exp_[static_cast<std::size_t>(p)];
}

}  // namespace lifeserver::callosum
