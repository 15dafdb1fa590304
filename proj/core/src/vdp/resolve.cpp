#include "lifeserver/vdp/resolve.hpp"

#include <algorithm>
#include <unordered_map>

#include "lifeserver/vdp/codec.hpp"

namespace lifeserver::vdp {
namespace {

class Resolver {
 public:
  Resolver(const Fetcher& fetcher, const ResolutionLimits& limits)
      : fetcher_(fetcher), limits_(limits) {}

  VdpNode node(const VdpNode& in, std::size_t depth) {
    if (const auto* split = std::get_if<Split>(&in)) {
      Split out;
      out.children.reserve(split->children.size());
      for (const auto& child : split->children) {
        out.children.push_back(VdpChild{child.id, child.shares, node(child.node, depth)});
      }
      return out;
    }
    if (const auto* ref = std::get_if<ExternalRef>(&in)) return external(ref->url, depth);
    return in;
  }

  void enter_origin(const std::string& url) { path_.push_back(url); }

 private:
  VdpNode external(const std::string& url, std::size_t depth) {
    if (std::find(path_.begin(), path_.end(), url) != path_.end()) {
      throw VdpError(VdpErrc::CycleError, "document references itself through " + url, {}, url);
    }
    if (const auto hit = cache_.find(url); hit != cache_.end()) return hit->second;
    if (depth + 1 > limits_.max_depth) {
      throw VdpError(VdpErrc::DepthExceeded,
                     "more than " + std::to_string(limits_.max_depth) + " nested documents", {},
                     url);
    }
    if (fetched_ + 1 > limits_.max_documents) {
      throw VdpError(VdpErrc::DocumentBudgetExceeded,
                     "more than " + std::to_string(limits_.max_documents) + " documents", {}, url);
    }
    ++fetched_;

    std::string body;
    try {
      body = fetcher_(url);
    } catch (const std::exception& e) {
      throw VdpError(VdpErrc::FetchError, e.what(), {}, url);
    }

    VdpDocument doc;
    try {
      doc = parse_vdp(body);
    } catch (const VdpError& e) {
      throw e.with_url(url);
    }

    path_.push_back(url);
    VdpNode resolved = node(doc.root, depth + 1);
    path_.pop_back();
    cache_.emplace(url, resolved);
    return resolved;
  }

  const Fetcher& fetcher_;
  ResolutionLimits limits_;
  std::vector<std::string> path_;
  std::unordered_map<std::string, VdpNode> cache_;
  std::size_t fetched_ = 0;
};

}  // namespace

VdpDocument resolve(const VdpDocument& doc, const Fetcher& fetcher, const ResolutionLimits& limits,
                    const std::optional<std::string>& origin_url) {
  Resolver r(fetcher, limits);
  if (origin_url) r.enter_origin(*origin_url);
  VdpDocument out;
  out.version = doc.version;
  out.description = doc.description;
  out.root = r.node(doc.root, 0);
  return out;
}

}  // namespace lifeserver::vdp
