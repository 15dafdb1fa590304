// lifeserver: run and administer a node.
//
// Exit codes: 0 success, 1 usage, 2 configuration error, 3 runtime error.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lifeserver/common/bytes.hpp"
#include "lifeserver/node/config.hpp"
#include "lifeserver/node/runtime.hpp"

namespace {

using namespace lifeserver;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

int exit_code(node::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LifeServer personal data node"};
  app.require_subcommand(1);

  std::string config_path;
  bool verbose = false;
  bool unlock = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* run = app.add_subcommand("run", "Run a node until interrupted");
  auto* provision = app.add_subcommand("provision", "Fetch (public) or create (private) the sealing key");
  auto* lock = app.add_subcommand("lock", "Switch the channel to diode mode");
  auto* pairing = app.add_subcommand("pairing-code", "Print the current client pairing code");
  for (auto* sub : {run, provision, lock, pairing}) {
    sub->add_option("--config", config_path, "Node configuration file")->required();
  }
  lock->add_flag("--unlock", unlock, "Return to duplex mode instead (operator override)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(node::ExitCode::Usage);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  node::NodeConfig config;
  try {
    config = node::load_config(config_path);
  } catch (const node::ConfigError& e) {
    std::cerr << "lifeserver: " << config_path << ": " << e.what() << "\n";
    return exit_code(node::ExitCode::Config);
  }

  try {
    if (*run) {
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::signal(SIGPIPE, SIG_IGN);
      node::RunOptions options;
      options.stop = &g_stop;
      node::run_node(config, options);
    } else if (*provision) {
      const auto key = node::provision_node(config);
      std::cout << "key_id " << to_hex(key.key_id) << "\npublic_key " << to_hex(key.public_key) << "\n";
    } else if (*lock) {
      for (const auto& dir : node::lock_node(config, unlock)) {
        std::cout << dir.string() << ": " << (unlock ? "duplex" : "diode") << "\n";
      }
    } else if (*pairing) {
      std::cout << node::current_pairing_code(config) << "\n";
    }
  } catch (const node::ConfigError& e) {
    std::cerr << "lifeserver: " << e.what() << "\n";
    return exit_code(node::ExitCode::Config);
  } catch (const std::exception& e) {
    std::cerr << "lifeserver: " << e.what() << "\n";
    return exit_code(node::ExitCode::Runtime);
  }
  return exit_code(node::ExitCode::Ok);
}
