#pragma once

#include <chrono>

#include "lifeserver/vdp/resolve.hpp"

namespace lifeserver::node {

/// Fetches `http://`, `https://` and `file:` urls. Anything but a 200
/// response is an error.
vdp::Fetcher make_fetcher(std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace lifeserver::node
