#include "lifeserver/vdp/codec.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

namespace lifeserver::vdp {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kNodeKeys[] = {"split", "crypto", "url"};

std::string line_column(std::string_view text, std::size_t byte_pos) {
  // nlohmann reports a 1-based byte position.
  const std::size_t end = std::min(byte_pos > 0 ? byte_pos - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool is_absolute_url(const std::string& url) {
  const auto colon = url.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= url.size()) return false;
  if (!std::isalpha(static_cast<unsigned char>(url[0]))) return false;
  return std::all_of(url.begin(), url.begin() + static_cast<std::ptrdiff_t>(colon), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-';
  });
}

bool is_scheme_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Parser {
 public:
  VdpDocument document(const json& j) {
    if (!j.is_object()) throw VdpError(VdpErrc::SyntaxError, "document must be a JSON object");
    const auto v = j.find("version");
    if (v == j.end()) throw VdpError(VdpErrc::SyntaxError, "missing key 'version'", "version");
    if (!v->is_number_integer()) {
      throw VdpError(VdpErrc::SyntaxError, "'version' must be an integer", "version");
    }
    if (v->get<std::int64_t>() != VdpDocument::kSupportedVersion) {
      throw VdpError(VdpErrc::UnsupportedVersion,
                     "version " + std::to_string(v->get<std::int64_t>()) + " is not supported",
                     "version");
    }

    VdpDocument doc;
    if (const auto d = j.find("description"); d != j.end()) {
      if (!d->is_string()) {
        throw VdpError(VdpErrc::SyntaxError, "'description' must be a string", "description");
      }
      doc.description = d->get<std::string>();
    }
    doc.root = node(j, "", {"version", "description"});
    return doc;
  }

 private:
  VdpNode node(const json& j, const std::string& path, std::set<std::string> allowed) {
    allowed.insert(std::begin(kNodeKeys), std::end(kNodeKeys));
    for (const auto& [key, _] : j.items()) {
      if (!allowed.contains(key)) {
        throw VdpError(VdpErrc::UnknownKeyword, "unknown key '" + key + "'", join(path, key));
      }
    }

    int kinds = 0;
    for (const char* k : kNodeKeys) kinds += j.contains(k) ? 1 : 0;
    if (kinds != 1) {
      throw VdpError(VdpErrc::SyntaxError,
                     "a node needs exactly one of 'split', 'crypto' or 'url'",
                     path.empty() ? "<root>" : path);
    }

    if (const auto s = j.find("split"); s != j.end()) return split(*s, join(path, "split"));
    if (const auto c = j.find("crypto"); c != j.end()) return payee(*c, join(path, "crypto"));
    return external(j.at("url"), join(path, "url"));
  }

  Split split(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw VdpError(VdpErrc::SyntaxError, "'split' must be an array", path);
    if (arr.empty()) throw VdpError(VdpErrc::EmptySplit, "split has no children", path);

    Split out;
    std::set<std::string> seen;
    out.children.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = path + "[" + std::to_string(i) + "]";
      const json& c = arr[i];
      if (!c.is_object()) throw VdpError(VdpErrc::SyntaxError, "child must be an object", at);

      const auto id = c.find("id");
      if (id == c.end() || !id->is_string() || id->get<std::string>().empty()) {
        throw VdpError(VdpErrc::SyntaxError, "child needs a non-empty string 'id'", at + ".id");
      }
      VdpChild child;
      child.id = id->get<std::string>();
      if (!seen.insert(child.id).second) {
        throw VdpError(VdpErrc::DuplicateSiblingId, "id '" + child.id + "' repeats in this branch",
                       at + ".id");
      }
      child.shares = shares(c, at + ".shares");
      child.node = node(c, at, {"id", "shares"});
      out.children.push_back(std::move(child));
    }
    return out;
  }

  static std::uint64_t shares(const json& c, const std::string& at) {
    const auto s = c.find("shares");
    if (s == c.end()) throw VdpError(VdpErrc::SyntaxError, "child needs 'shares'", at);
    if (!s->is_number_unsigned() || s->get<std::uint64_t>() < 1) {
      throw VdpError(VdpErrc::InvalidShares, "shares must be a positive integer, got " + s->dump(),
                     at);
    }
    return s->get<std::uint64_t>();
  }

  static Payee payee(const json& c, const std::string& path) {
    if (!c.is_object() || c.size() != 1) {
      throw VdpError(VdpErrc::SyntaxError, "'crypto' must hold exactly one scheme: address pair",
                     path);
    }
    const std::string scheme = c.begin().key();
    const json& address = c.begin().value();
    if (!is_scheme_name(scheme)) {
      throw VdpError(VdpErrc::SyntaxError, "scheme '" + scheme + "' must be lowercase", path);
    }
    if (!address.is_string() || address.get<std::string>().empty()) {
      throw VdpError(VdpErrc::SyntaxError, "address must be a non-empty string",
                     join(path, scheme));
    }
    return Payee{CryptoAddress{scheme, address.get<std::string>()}};
  }

  static ExternalRef external(const json& u, const std::string& path) {
    if (!u.is_string() || !is_absolute_url(u.get<std::string>())) {
      throw VdpError(VdpErrc::SyntaxError, "'url' must be an absolute URL", path);
    }
    return ExternalRef{u.get<std::string>()};
  }
};

ordered_json node_json(const VdpNode& node, ordered_json out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Split>) {
          ordered_json arr = ordered_json::array();
          for (const auto& child : n.children) {
            ordered_json c;
            c["id"] = child.id;
            c["shares"] = child.shares;
            arr.push_back(node_json(child.node, std::move(c)));
          }
          out["split"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, Payee>) {
          out["crypto"] = ordered_json{{n.address.scheme, n.address.address}};
        } else {
          out["url"] = n.url;
        }
      },
      node);
  return out;
}

}  // namespace

VdpDocument parse_vdp(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw VdpError(VdpErrc::SyntaxError, e.what(), line_column(text, e.byte));
  }
  return Parser{}.document(j);
}

std::string serialize_vdp(const VdpDocument& doc) {
  ordered_json j;
  j["version"] = doc.version;
  if (doc.description) j["description"] = *doc.description;
  return node_json(doc.root, std::move(j)).dump(2) + "\n";
}

}  // namespace lifeserver::vdp
