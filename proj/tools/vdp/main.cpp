// vdp: inspect and evaluate Value Distribution Protocol documents.
//
//   vdp parse FILE                     check a document and print it canonically
//   vdp resolve FILE [--max-depth N] [--max-docs N]
//                                      inline every url reference
//   vdp compute FILE --value N         print address<TAB>amount<TAB>path lines

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lifeserver/node/fetcher.hpp"
#include "lifeserver/vdp/codec.hpp"
#include "lifeserver/vdp/distribute.hpp"
#include "lifeserver/vdp/resolve.hpp"

namespace {

namespace fs = std::filesystem;
using namespace lifeserver;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

vdp::VdpDocument load_resolved(const fs::path& file, const vdp::ResolutionLimits& limits) {
  const auto doc = vdp::parse_vdp(slurp(file));
  const std::string origin = "file:" + fs::absolute(file).lexically_normal().string();
  return vdp::resolve(doc, node::make_fetcher(), limits, origin);
}

std::string join_path(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& id : path) {
    if (!out.empty()) out += '/';
    out += id;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value Distribution Protocol tool"};
  app.require_subcommand(1);

  std::string file;
  vdp::ResolutionLimits limits;
  std::uint64_t value = 0;

  auto* parse = app.add_subcommand("parse", "Validate a document and print its canonical form");
  parse->add_option("FILE", file, "VDP document")->required();

  auto* resolve = app.add_subcommand("resolve", "Replace url references with the documents they name");
  resolve->add_option("FILE", file, "VDP document")->required();
  resolve->add_option("--max-depth", limits.max_depth, "Maximum document hops");
  resolve->add_option("--max-docs", limits.max_documents, "Maximum documents fetched");

  auto* compute = app.add_subcommand("compute", "Distribute a value and print payment instructions");
  compute->add_option("FILE", file, "VDP document")->required();
  compute->add_option("--value", value, "Total in atomic units")->required();
  compute->add_option("--max-depth", limits.max_depth, "Maximum document hops");
  compute->add_option("--max-docs", limits.max_documents, "Maximum documents fetched");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*parse) {
      std::cout << vdp::serialize_vdp(vdp::parse_vdp(slurp(file)));
    } else if (*resolve) {
      std::cout << vdp::serialize_vdp(load_resolved(file, limits));
    } else if (*compute) {
      for (const auto& p : vdp::distribute(load_resolved(file, limits), value)) {
        std::cout << p.address.to_string() << '\t' << p.amount << '\t' << join_path(p.path) << '\n';
      }
    }
  } catch (const vdp::VdpError& e) {
    std::cerr << "vdp: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "vdp: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
