#pragma once

#include <string>
#include <string_view>

#include "lifeserver/vdp/document.hpp"

namespace lifeserver::vdp {

/// Parses a VDP document (UTF-8 JSON):
///
///   {"version": 1, "description": "...", "split": [
///     {"id": "contributors", "shares": 97, "split": [...]},
///     {"id": "maintainers", "shares": 3, "crypto": {"bitcoin": "1..."}}]}
///
/// A node is exactly one of `split`, `crypto` or `url`. Throws VdpError.
VdpDocument parse_vdp(std::string_view text);

/// Canonical text: fixed key order (version, description, node keys; id,
/// shares, node keys for children), children in declaration order, two-space
/// indentation, trailing newline.
std::string serialize_vdp(const VdpDocument& doc);

}  // namespace lifeserver::vdp
