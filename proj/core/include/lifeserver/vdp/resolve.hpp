#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lifeserver/vdp/document.hpp"

namespace lifeserver::vdp {

/// Returns the document body for `url`. Any exception thrown is reported as
/// VdpErrc::FetchError for that url.
using Fetcher = std::function<std::string(const std::string& url)>;

/// Replaces every ExternalRef with the root of the document it points to.
///
/// `origin_url` is where `doc` itself came from, if anywhere; a reference back
/// to it is a cycle. A url fetched on two different paths is fetched once and
/// counts once against `limits.max_documents`. Depth counts document hops
/// from `doc`.
VdpDocument resolve(const VdpDocument& doc, const Fetcher& fetcher,
                    const ResolutionLimits& limits = {},
                    const std::optional<std::string>& origin_url = std::nullopt);

}  // namespace lifeserver::vdp
