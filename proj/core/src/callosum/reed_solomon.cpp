#include "lifeserver/callosum/reed_solomon.hpp"

#include <algorithm>

namespace lifeserver::callosum {
namespace {

using Poly = std::vector<std::uint8_t>;  // lowest degree first in the decoder

std::uint8_t eval_low_first(const GaloisField& f, const Poly& p, std::uint8_t x) {
  std::uint8_t y = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) y = f.mul(y, x) ^ *it;
  return y;
}

}  // namespace

ReedSolomon::ReedSolomon(const GaloisField& field, std::size_t nsym) : field_(field), nsym_(nsym) {
  if (nsym < 1 || nsym >= field.order()) {
    throw std::invalid_argument("parity length must be in [1, field order)");
  }
  generator_ = {1};
  for (std::size_t j = 0; j < nsym; ++j) {
    // multiply by (x + alpha^j)
    const std::uint8_t root = field_.alpha_pow(static_cast<long>(j));
    Poly next(generator_.size() + 1, 0);
    for (std::size_t i = 0; i < generator_.size(); ++i) {
      next[i] ^= generator_[i];
      next[i + 1] ^= field_.mul(generator_[i], root);
    }
    generator_ = std::move(next);
  }

  const std::size_t q = field_.size();
  generator_products_.resize(nsym_ * q);
  root_products_.resize(nsym_ * q);
  for (std::size_t j = 0; j < nsym_; ++j) {
    const std::uint8_t root = field_.alpha_pow(static_cast<long>(j));
    for (std::size_t v = 0; v < q; ++v) {
      const auto sym = static_cast<std::uint8_t>(v);
      generator_products_[j * q + v] = field_.mul(generator_[j + 1], sym);
      root_products_[j * q + v] = field_.mul(root, sym);
    }
  }
}

Bytes ReedSolomon::parity(ByteView data) const {
  if (data.size() > max_data_len()) throw std::invalid_argument("block longer than n - nsym");
  const std::size_t q = field_.size();
  // rem is kept one slot longer so the shift is a plain forward copy.
  Bytes rem(nsym_ + 1, 0);
  for (std::uint8_t d : data) {
    if (d >= q) throw std::invalid_argument("symbol outside the field");
    const std::uint8_t feedback = d ^ rem[0];
    const std::uint8_t* row = generator_products_.data() + feedback;
    for (std::size_t i = 0; i < nsym_; ++i) rem[i] = rem[i + 1] ^ row[i * q];
  }
  rem.pop_back();
  return rem;
}

Bytes ReedSolomon::encode(ByteView data) const {
  Bytes out(data.begin(), data.end());
  const Bytes p = parity(data);
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<std::uint8_t> ReedSolomon::syndromes(ByteView cw) const {
  std::vector<std::uint8_t> s(nsym_);
  const std::size_t q = field_.size();
  // Symbol-major order keeps the nsym Horner chains independent.
  const std::uint8_t* table = root_products_.data();
  for (std::uint8_t c : cw) {
    for (std::size_t j = 0; j < nsym_; ++j) s[j] = table[j * q + s[j]] ^ c;
  }
  return s;
}

std::optional<ReedSolomon::Decoded> ReedSolomon::try_decode(ByteView codeword) const {
  if (codeword.size() < nsym_ || codeword.size() > max_codeword_len()) return std::nullopt;
  for (std::uint8_t c : codeword) {
    if (c >= field_.size()) return std::nullopt;
  }
  const std::size_t n = codeword.size();
  const std::size_t k = n - nsym_;

  const auto synd = syndromes(codeword);
  if (std::all_of(synd.begin(), synd.end(), [](std::uint8_t v) { return v == 0; })) {
    return Decoded{Bytes(codeword.begin(), codeword.begin() + static_cast<std::ptrdiff_t>(k)), 0};
  }

  // Berlekamp-Massey: error locator lambda, lowest degree first.
  Poly lambda{1};
  Poly prev{1};
  std::size_t L = 0;
  std::size_t m = 1;
  std::uint8_t b = 1;
  for (std::size_t r = 0; r < nsym_; ++r) {
    std::uint8_t d = synd[r];
    for (std::size_t i = 1; i <= L && i < lambda.size(); ++i) d ^= field_.mul(lambda[i], synd[r - i]);
    if (d == 0) {
      ++m;
      continue;
    }
    const std::uint8_t coef = field_.div(d, b);
    Poly updated = lambda;
    if (updated.size() < prev.size() + m) updated.resize(prev.size() + m, 0);
    for (std::size_t i = 0; i < prev.size(); ++i) updated[i + m] ^= field_.mul(coef, prev[i]);
    if (2 * L <= r) {
      prev = std::move(lambda);
      L = r + 1 - L;
      b = d;
      m = 1;
    } else {
      ++m;
    }
    lambda = std::move(updated);
  }
  while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
  if (L != lambda.size() - 1 || 2 * L > nsym_) return std::nullopt;

  // Chien search over the positions that exist in this (possibly shortened)
  // codeword; byte i carries the coefficient of x^(n-1-i).
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < n; ++i) {
    const long power = static_cast<long>(n - 1 - i);
    if (eval_low_first(field_, lambda, field_.alpha_pow(-power)) == 0) positions.push_back(i);
  }
  if (positions.size() != L) return std::nullopt;

  // Forney with first consecutive root alpha^0:
  //   e = X * omega(X^-1) / lambda'(X^-1)
  Poly omega(nsym_, 0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    for (std::size_t j = 0; j < nsym_ && i + j < nsym_; ++j) {
      omega[i + j] ^= field_.mul(lambda[i], synd[j]);
    }
  }
  Poly dlambda(lambda.size() > 1 ? lambda.size() - 1 : 1, 0);
  for (std::size_t i = 1; i < lambda.size(); i += 2) dlambda[i - 1] = lambda[i];

  Bytes fixed(codeword.begin(), codeword.end());
  for (std::size_t pos : positions) {
    const long power = static_cast<long>(n - 1 - pos);
    const std::uint8_t x = field_.alpha_pow(power);
    const std::uint8_t x_inv = field_.alpha_pow(-power);
    const std::uint8_t denom = eval_low_first(field_, dlambda, x_inv);
    if (denom == 0) return std::nullopt;
    const std::uint8_t magnitude =
        field_.mul(x, field_.div(eval_low_first(field_, omega, x_inv), denom));
    fixed[pos] ^= magnitude;
  }

  const auto check = syndromes(fixed);
  if (!std::all_of(check.begin(), check.end(), [](std::uint8_t v) { return v == 0; })) {
    return std::nullopt;
  }
  fixed.resize(k);
  return Decoded{std::move(fixed), positions.size()};
}

Bytes ReedSolomon::decode(ByteView codeword) const {
  auto d = try_decode(codeword);
  if (!d) throw RsDecodeFailure("Reed-Solomon codeword is uncorrectable");
  return std::move(d->data);
}

}  // namespace lifeserver::callosum
