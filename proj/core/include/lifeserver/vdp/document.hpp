#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lifeserver::vdp {

/// A payee address such as `bitcoin:1BoatSLRHtKNngkdXEeobR76b53LETtpyT`.
/// The scheme is always lowercase.
struct CryptoAddress {
  std::string scheme;
  std::string address;

  std::string to_string() const { return scheme + ":" + address; }
  auto operator<=>(const CryptoAddress&) const = default;
};

struct VdpChild;

/// Splits the value flowing into it amongst its children by relative shares.
struct Split {
  std::vector<VdpChild> children;
};

struct Payee {
  CryptoAddress address;
  bool operator==(const Payee&) const = default;
};

/// A node whose configuration lives in another document.
struct ExternalRef {
  std::string url;
  bool operator==(const ExternalRef&) const = default;
};

using VdpNode = std::variant<Split, Payee, ExternalRef>;

bool operator==(const Split& a, const Split& b);

/// A child of a split. `id` is unique only among its siblings.
struct VdpChild {
  std::string id;
  std::uint64_t shares = 1;
  VdpNode node;

  bool operator==(const VdpChild&) const = default;
};

struct VdpDocument {
  static constexpr int kSupportedVersion = 1;

  int version = kSupportedVersion;
  std::optional<std::string> description;
  VdpNode root;

  bool operator==(const VdpDocument&) const = default;
};

struct PaymentInstruction {
  CryptoAddress address;
  std::uint64_t amount = 0;
  std::vector<std::string> path;  // branch ids from root to leaf

  bool operator==(const PaymentInstruction&) const = default;
};

struct ResolutionLimits {
  std::size_t max_depth = 16;
  std::size_t max_documents = 64;
};

enum class VdpErrc {
  SyntaxError,
  UnsupportedVersion,
  DuplicateSiblingId,
  EmptySplit,
  InvalidShares,
  UnknownKeyword,
  FetchError,
  CycleError,
  DepthExceeded,
  DocumentBudgetExceeded,
  UnresolvedNode,
  Overflow,
  EmptyContributions,
};

const char* to_string(VdpErrc code);

/// Every failure in this module. `where()` names a line ("line 4, column 7")
/// or a field path ("split[1].shares"); `url()` is set when the failure
/// happened inside a fetched document.
class VdpError : public std::runtime_error {
 public:
  VdpError(VdpErrc code, std::string detail, std::string where = {}, std::string url = {});

  VdpErrc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& where() const noexcept { return where_; }
  const std::string& url() const noexcept { return url_; }

  /// Same error, attributed to the document fetched from `url`.
  VdpError with_url(const std::string& url) const;

 private:
  VdpErrc code_;
  std::string detail_;
  std::string where_;
  std::string url_;
};

/// True when no ExternalRef remains anywhere in the tree.
bool is_resolved(const VdpNode& node);

/// Number of Payee leaves.
std::size_t count_payees(const VdpNode& node);

}  // namespace lifeserver::vdp
