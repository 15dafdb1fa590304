#include "lifeserver/mind/features.hpp"

#include <algorithm>

#include "lifeserver/common/random.hpp"

namespace lifeserver::mind {

bool is_exportable(std::string_view feature_name) {
  return std::find(kExportableFeatures.begin(), kExportableFeatures.end(), feature_name) !=
         kExportableFeatures.end();
}

std::vector<store::DerivedRecord> extract_features(const sealed::KeyPair& keys,
                                                   const sealed::SealedEnvelope& envelope,
                                                   const std::string& origin_record_id,
                                                   std::int64_t timestamp) {
  Bytes plain = sealed::open(keys, envelope);
  const double length = static_cast<double>(plain.size());
  const std::string digest = sealed::sha256_hex(plain);
  sealed::wipe(plain);

  std::vector<store::DerivedRecord> out;
  out.push_back({random_hex(16), origin_record_id, "byte_length", length, timestamp});
  out.push_back({random_hex(16), origin_record_id, "content_digest", digest, timestamp});
  return out;
}

}  // namespace lifeserver::mind
