#pragma once

#include <random>
#include <string>
#include <vector>

#include "lifeserver/vdp/document.hpp"

namespace lifeserver::testing {

__extension__ typedef unsigned __int128 u128;

struct TreeShape {
  int max_depth = 5;
  int max_fanout = 6;
  std::uint64_t max_shares = 1000;
};

/// A random fully resolved tree. Every leaf gets a distinct address so the
/// oracle can find it again.
inline vdp::VdpNode random_tree(std::mt19937_64& rng, const TreeShape& shape, int depth, int& next_leaf) {
  std::uniform_int_distribution<int> coin(0, 2);
  if (depth >= shape.max_depth || (depth > 0 && coin(rng) == 0)) {
    return vdp::Payee{{"bitcoin", "leaf" + std::to_string(next_leaf++)}};
  }
  std::uniform_int_distribution<int> fan(1, shape.max_fanout);
  std::uniform_int_distribution<std::uint64_t> shares(1, shape.max_shares);
  vdp::Split s;
  const int n = fan(rng);
  for (int i = 0; i < n; ++i) {
    s.children.push_back({"c" + std::to_string(i), shares(rng), random_tree(rng, shape, depth + 1, next_leaf)});
  }
  return s;
}

/// Exact share of one leaf as num/den, plus its depth.
struct ExactShare {
  std::string address;
  u128 num = 0;
  u128 den = 1;
  int depth = 0;
};

inline void exact_shares(const vdp::VdpNode& node, u128 num, u128 den, int depth, std::vector<ExactShare>& out) {
  if (const auto* p = std::get_if<vdp::Payee>(&node)) {
    out.push_back({p->address.address, num, den, depth});
    return;
  }
  const auto& split = std::get<vdp::Split>(node);
  u128 sum = 0;
  for (const auto& c : split.children) sum += c.shares;
  for (const auto& c : split.children) exact_shares(c.node, num * c.shares, den * sum, depth + 1, out);
}

}  // namespace lifeserver::testing
