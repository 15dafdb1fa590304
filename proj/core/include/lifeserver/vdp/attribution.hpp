#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "lifeserver/vdp/document.hpp"

namespace lifeserver::vdp {

struct Contribution {
  std::uint64_t weight = 1;
  VdpNode payee;  // usually the source's Payee or an ExternalRef to its document
};

/// One child per source, in source_id order, with shares = weight.
/// Throws VdpError(EmptyContributions) for an empty map and
/// VdpError(InvalidShares) for a zero weight.
VdpDocument build_attribution_vdp(const std::map<std::string, Contribution>& contributions,
                                  std::optional<std::string> description = std::nullopt);

}  // namespace lifeserver::vdp
