#include "lifeserver/vdp/attribution.hpp"

namespace lifeserver::vdp {

VdpDocument build_attribution_vdp(const std::map<std::string, Contribution>& contributions,
                                  std::optional<std::string> description) {
  if (contributions.empty()) {
    throw VdpError(VdpErrc::EmptyContributions, "no data source contributed");
  }
  Split root;
  root.children.reserve(contributions.size());
  for (const auto& [source_id, c] : contributions) {
    if (c.weight < 1) {
      throw VdpError(VdpErrc::InvalidShares, "weight must be at least 1", source_id);
    }
    root.children.push_back(VdpChild{source_id, c.weight, c.payee});
  }
  VdpDocument doc;
  doc.description = std::move(description);
  doc.root = std::move(root);
  return doc;
}

}  // namespace lifeserver::vdp
