#pragma once

#include <cstdint>

#include "lifeserver/common/bytes.hpp"

namespace lifeserver::callosum {

/// CRC-32/IEEE (reflected polynomial 0xEDB88320, init and final xor
/// 0xFFFFFFFF). Pass a previous result as `crc` to continue a running
/// checksum. crc32("123456789") == 0xCBF43926.
std::uint32_t crc32(ByteView data, std::uint32_t crc = 0);

}  // namespace lifeserver::callosum
