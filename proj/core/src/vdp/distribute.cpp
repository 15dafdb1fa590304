#include "lifeserver/vdp/distribute.hpp"

#include <algorithm>
#include <numeric>

namespace lifeserver::vdp {
namespace {

__extension__ typedef unsigned __int128 u128;

struct Walker {
  std::vector<PaymentInstruction> out;
  std::vector<std::string> path;

  void walk(const VdpNode& node, std::uint64_t amount) {
    if (const auto* payee = std::get_if<Payee>(&node)) {
      out.push_back(PaymentInstruction{payee->address, amount, path});
      return;
    }
    if (const auto* ref = std::get_if<ExternalRef>(&node)) {
      throw VdpError(VdpErrc::UnresolvedNode, "external document not resolved", ref->url);
    }
    const auto& children = std::get<Split>(node).children;
    if (children.empty()) throw VdpError(VdpErrc::EmptySplit, "split has no children");

    u128 sum = 0;
    for (const auto& c : children) sum += c.shares;
    if (sum > std::numeric_limits<std::uint64_t>::max()) {
      throw VdpError(VdpErrc::Overflow, "sibling shares sum beyond 64 bits");
    }

    // amount < 2^63 and shares < 2^64, so every product fits in 127 bits.
    std::vector<std::uint64_t> alloc(children.size());
    std::vector<std::uint64_t> remainder(children.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < children.size(); ++i) {
      const u128 exact = u128{amount} * children[i].shares;
      alloc[i] = static_cast<std::uint64_t>(exact / sum);
      remainder[i] = static_cast<std::uint64_t>(exact % sum);
      assigned += alloc[i];
    }

    std::uint64_t leftover = amount - assigned;  // < children.size()
    if (leftover > 0) {
      std::vector<std::size_t> order(children.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
      for (std::size_t i = 0; leftover > 0; ++i, --leftover) ++alloc[order[i]];
    }

    for (std::size_t i = 0; i < children.size(); ++i) {
      path.push_back(children[i].id);
      walk(children[i].node, alloc[i]);
      path.pop_back();
    }
  }
};

}  // namespace

std::vector<PaymentInstruction> distribute(const VdpDocument& doc, std::uint64_t total) {
  if (total > kMaxDistributableTotal) {
    throw VdpError(VdpErrc::Overflow, "total exceeds 2^63-1 atomic units");
  }
  Walker w;
  w.walk(doc.root, total);
  return std::move(w.out);
}

}  // namespace lifeserver::vdp
