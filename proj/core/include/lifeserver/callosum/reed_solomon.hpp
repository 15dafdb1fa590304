#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lifeserver/callosum/galois.hpp"
#include "lifeserver/common/bytes.hpp"

namespace lifeserver::callosum {

class RsDecodeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Systematic Reed-Solomon code over a GaloisField with `nsym` parity
/// symbols. The generator polynomial has roots alpha^0 .. alpha^(nsym-1) and
/// the first symbol of a codeword is its highest-degree coefficient, so a
/// block shorter than n - nsym encodes as the equivalent shortened code.
/// Symbols are stored one per byte.
class ReedSolomon {
 public:
  ReedSolomon(const GaloisField& field, std::size_t nsym);

  std::size_t parity_len() const noexcept { return nsym_; }
  std::size_t max_codeword_len() const noexcept { return field_.order(); }
  std::size_t max_data_len() const noexcept { return field_.order() - nsym_; }

  /// data || parity. Throws std::invalid_argument if data is too long or a
  /// symbol lies outside the field.
  Bytes encode(ByteView data) const;

  /// Only the parity symbols.
  Bytes parity(ByteView data) const;

  struct Decoded {
    Bytes data;
    std::size_t corrected = 0;
  };

  /// Corrects up to nsym/2 symbol errors at unknown positions.
  std::optional<Decoded> try_decode(ByteView codeword) const;

  /// As try_decode, throwing RsDecodeFailure when the word is uncorrectable.
  Bytes decode(ByteView codeword) const;

 private:
  std::vector<std::uint8_t> syndromes(ByteView codeword) const;

  const GaloisField& field_;
  std::size_t nsym_;
  std::vector<std::uint8_t> generator_;  // highest degree first, monic
  // Row j holds v * generator_[j + 1] for every symbol v; the encoder's
  // inner loop is then a lookup and an XOR.
  std::vector<std::uint8_t> generator_products_;
  // Row j holds v * alpha^j, for Horner evaluation of the syndromes.
  std::vector<std::uint8_t> root_products_;
};

}  // namespace lifeserver::callosum
