#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "lifeserver/vdp/document.hpp"

namespace lifeserver::vdp {

inline constexpr std::uint64_t kMaxDistributableTotal =
    static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

/// Apportions `total` atomic units down a resolved tree.
///
/// At each split every child first gets floor(total * shares / sum_shares);
/// the leftover units go one each to the children with the largest
/// fractional remainders, ties to the earlier-declared child. Instructions
/// come out in depth-first declaration order and always sum to `total`.
///
/// Throws VdpError(UnresolvedNode) on an ExternalRef and VdpError(Overflow)
/// when `total` exceeds kMaxDistributableTotal or a split's share sum does not
/// fit in 64 bits.
std::vector<PaymentInstruction> distribute(const VdpDocument& doc, std::uint64_t total);

}  // namespace lifeserver::vdp
