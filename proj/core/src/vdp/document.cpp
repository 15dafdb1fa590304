#include "lifeserver/vdp/document.hpp"

namespace lifeserver::vdp {

bool operator==(const Split& a, const Split& b) { return a.children == b.children; }

const char* to_string(VdpErrc code) {
  switch (code) {
    case VdpErrc::SyntaxError: return "SyntaxError";
    case VdpErrc::UnsupportedVersion: return "UnsupportedVersion";
    case VdpErrc::DuplicateSiblingId: return "DuplicateSiblingId";
    case VdpErrc::EmptySplit: return "EmptySplit";
    case VdpErrc::InvalidShares: return "InvalidShares";
    case VdpErrc::UnknownKeyword: return "UnknownKeyword";
    case VdpErrc::FetchError: return "FetchError";
    case VdpErrc::CycleError: return "CycleError";
    case VdpErrc::DepthExceeded: return "DepthExceeded";
    case VdpErrc::DocumentBudgetExceeded: return "DocumentBudgetExceeded";
    case VdpErrc::UnresolvedNode: return "UnresolvedNode";
    case VdpErrc::Overflow: return "Overflow";
    case VdpErrc::EmptyContributions: return "EmptyContributions";
  }
  return "Unknown";
}

namespace {

std::string compose(VdpErrc code, const std::string& detail, const std::string& where,
                    const std::string& url) {
  std::string msg = to_string(code);
  if (!url.empty()) msg += " in " + url;
  if (!where.empty()) msg += " at " + where;
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

VdpError::VdpError(VdpErrc code, std::string detail, std::string where, std::string url)
    : std::runtime_error(compose(code, detail, where, url)),
      code_(code),
      detail_(std::move(detail)),
      where_(std::move(where)),
      url_(std::move(url)) {}

VdpError VdpError::with_url(const std::string& url) const {
  // The innermost document keeps the attribution.
  if (!url_.empty()) return *this;
  return VdpError(code_, detail_, where_, url);
}

bool is_resolved(const VdpNode& node) {
  if (std::holds_alternative<ExternalRef>(node)) return false;
  if (const auto* split = std::get_if<Split>(&node)) {
    for (const auto& child : split->children) {
      if (!is_resolved(child.node)) return false;
    }
  }
  return true;
}

std::size_t count_payees(const VdpNode& node) {
  if (std::holds_alternative<Payee>(node)) return 1;
  std::size_t n = 0;
  if (const auto* split = std::get_if<Split>(&node)) {
    for (const auto& child : split->children) n += count_payees(child.node);
  }
  return n;
}

}  // namespace lifeserver::vdp
