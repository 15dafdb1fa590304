#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "lifeserver/sealed/envelope.hpp"
#include "lifeserver/store/records.hpp"

namespace lifeserver::mind {

/// Features allowed to leave the private node.
inline constexpr std::array<std::string_view, 2> kExportableFeatures = {"byte_length",
                                                                        "content_digest"};

bool is_exportable(std::string_view feature_name);

/// Opens a sealed record on the private node and derives `byte_length` and
/// `content_digest` (hex SHA-256). The plaintext is wiped before returning.
/// Seal errors propagate and nothing is derived.
std::vector<store::DerivedRecord> extract_features(const sealed::KeyPair& keys,
                                                   const sealed::SealedEnvelope& envelope,
                                                   const std::string& origin_record_id,
                                                   std::int64_t timestamp);

}  // namespace lifeserver::mind
