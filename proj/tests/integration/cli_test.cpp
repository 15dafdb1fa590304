// Drives the built `vdp` and `lifeserver` executables as child processes.

#include <gtest/gtest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include <regex>
#include <set>
#include <thread>

#include "lifeserver/store/sense_store.hpp"
#include "support/records.hpp"
#include "support/temp_dir.hpp"

using namespace std::chrono_literals;
using lifeserver::testing::read_file;
using lifeserver::testing::TempDir;
using lifeserver::testing::write_file;
using nlohmann::json;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome run(const std::vector<std::string>& args) {
  int pipefd[2];
  if (pipe(pipefd) != 0) return {};
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(argv[0], argv.data());
    _exit(127);
  }
  close(pipefd[1]);
  Outcome o;
  char buf[4096];
  ssize_t n;
  while ((n = read(pipefd[0], buf, sizeof buf)) > 0) o.out.append(buf, static_cast<std::size_t>(n));
  close(pipefd[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  o.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

/// A long-running child whose output goes to a file.
class Child {
 public:
  Child(const std::vector<std::string>& args, const std::filesystem::path& log) : log_(log) {
    pid_ = fork();
    if (pid_ == 0) {
      const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
      std::vector<char*> argv;
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(argv[0], argv.data());
      _exit(127);
    }
  }
  ~Child() {
    if (pid_ > 0) kill(SIGKILL);
  }

  /// Waits for the "listening on host:port" line.
  int http_port(std::chrono::milliseconds limit = 20s) const {
    const std::regex re(R"(listening on [0-9.]+:([0-9]+))");
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      std::smatch m;
      const auto text = read_file(log_);
      if (std::regex_search(text, m, re)) return std::stoi(m[1]);
      std::this_thread::sleep_for(20ms);
    }
    ADD_FAILURE() << "no listening line in:\n" << read_file(log_);
    return 0;
  }

  int kill(int sig) {
    if (pid_ <= 0) return -1;
    ::kill(pid_, sig);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }

 private:
  std::filesystem::path log_;
  pid_t pid_ = -1;
};

const std::string kVdp = LIFESERVER_VDP_EXE;
const std::string kCli = LIFESERVER_CLI_EXE;

std::string three_way() {
  return R"({"version": 1, "description": "project donations",
  "split": [
    {"id": "contributors", "shares": 97, "split": [
      {"id": "alice", "shares": 1, "crypto": {"bitcoin": "1Alice"}},
      {"id": "bob", "shares": 1, "crypto": {"bitcoin": "1Bob"}}]},
    {"id": "maintainers", "shares": 3, "crypto": {"bitcoin": "1Maint"}}]})";
}

/// Writes an inprocess public/private config pair and returns the public path.
std::filesystem::path inprocess_configs(const TempDir& dir, const std::string& extra = {}) {
  write_file(dir / "private.conf", "role = private\ndata_dir = private\nchannel.transport = inprocess\n");
  write_file(dir / "public.conf",
             "role = public\ndata_dir = public\nlisten_address = 127.0.0.1:0\npairing_code = cli-code\n"
             "k_min = 1\nchannel.transport = inprocess\nprivate_config = private.conf\n" + extra);
  return dir / "public.conf";
}

}  // namespace

TEST(VdpCli, ParseResolveCompute) {
  TempDir dir;
  write_file(dir / "three_way.json", three_way());
  auto o = run({kVdp, "parse", (dir / "three_way.json").string()});
  EXPECT_EQ(o.status, 0) << o.out;
  EXPECT_NE(o.out.find("\"maintainers\""), std::string::npos);

  o = run({kVdp, "compute", (dir / "three_way.json").string(), "--value", "10000"});
  EXPECT_EQ(o.status, 0);
  EXPECT_EQ(o.out,
            "bitcoin:1Alice\t4850\tcontributors/alice\n"
            "bitcoin:1Bob\t4850\tcontributors/bob\n"
            "bitcoin:1Maint\t300\tmaintainers\n");

  write_file(dir / "leaf.json", R"({"version": 1, "crypto": {"bitcoin": "1Leaf"}})");
  write_file(dir / "root.json", R"({"version": 1, "split": [
      {"id": "a", "shares": 1, "url": "file:)" + (dir / "leaf.json").string() + R"("},
      {"id": "b", "shares": 1, "crypto": {"bitcoin": "1B"}}]})");
  o = run({kVdp, "resolve", (dir / "root.json").string()});
  EXPECT_EQ(o.status, 0) << o.out;
  EXPECT_NE(o.out.find("1Leaf"), std::string::npos);
  o = run({kVdp, "compute", (dir / "root.json").string(), "--value", "3"});
  EXPECT_EQ(o.out, "bitcoin:1Leaf\t2\ta\nbitcoin:1B\t1\tb\n");
}

TEST(VdpCli, ExitCodes) {
  TempDir dir;
  write_file(dir / "bad.json", R"({"version": 1, "split": []})");
  write_file(dir / "three_way.json", three_way());
  EXPECT_EQ(run({kVdp}).status, 1);
  EXPECT_EQ(run({kVdp, "compute", (dir / "three_way.json").string()}).status, 1);
  const auto bad = run({kVdp, "parse", (dir / "bad.json").string()});
  EXPECT_EQ(bad.status, 2);
  EXPECT_NE(bad.out.find("EmptySplit"), std::string::npos);
  write_file(dir / "dangling.json", R"({"version": 1, "url": "file:/nonexistent/x.json"})");
  EXPECT_EQ(run({kVdp, "resolve", (dir / "dangling.json").string()}).status, 2);
  EXPECT_EQ(run({kVdp, "parse", (dir / "missing.json").string()}).status, 3);
}

TEST(LifeserverCli, UsageAndConfigErrors) {
  TempDir dir;
  EXPECT_EQ(run({kCli}).status, 1);
  EXPECT_EQ(run({kCli, "run"}).status, 1);
  EXPECT_EQ(run({kCli, "run", "--config", (dir / "nope.conf").string()}).status, 2);
  write_file(dir / "priv.conf", "role = private\ndata_dir = d\nlisten_address = 127.0.0.1:1\n");
  const auto o = run({kCli, "run", "--config", (dir / "priv.conf").string()});
  EXPECT_EQ(o.status, 2);
  EXPECT_NE(o.out.find("listen_address"), std::string::npos);
  write_file(dir / "pub.conf", "role = public\ndata_dir = d\n");
  EXPECT_EQ(run({kCli, "pairing-code", "--config", (dir / "pub.conf").string()}).status, 3);
}

TEST(LifeserverCli, ProvisionLockAndPairingCode) {
  TempDir dir;
  const auto conf = inprocess_configs(dir).string();
  auto o = run({kCli, "provision", "--config", conf});
  ASSERT_EQ(o.status, 0) << o.out;
  EXPECT_NE(o.out.find("public_key "), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "public" / "announced_key.json"));

  o = run({kCli, "lock", "--config", conf});
  EXPECT_EQ(o.status, 0) << o.out;
  EXPECT_NE(read_file(dir / "private" / "channel.mode").find("diode"), std::string::npos);
  o = run({kCli, "provision", "--config", conf});
  EXPECT_EQ(o.status, 3);

  EXPECT_EQ(run({kCli, "lock", "--unlock", "--config", conf}).status, 0);
  EXPECT_EQ(run({kCli, "provision", "--config", conf}).status, 0);

  o = run({kCli, "pairing-code", "--config", conf});
  EXPECT_EQ(o.status, 0);
  EXPECT_EQ(o.out, "cli-code\n");
}

TEST(LifeserverCli, AcknowledgedRecordsSurviveKillNine) {
  TempDir dir;
  const auto conf = inprocess_configs(dir).string();
  std::set<std::string> acked;
  {
    Child node({kCli, "run", "--config", conf}, dir / "run1.log");
    const int port = node.http_port();
    ASSERT_GT(port, 0);
    httplib::Client http("127.0.0.1", port);
    auto res = http.Post("/pair", json{{"code", "cli-code"}}.dump(), "application/json");
    ASSERT_EQ(res->status, 200) << res->body;
    const std::string token = json::parse(res->body)["token"];
    write_file(dir / "token", token);

    std::atomic<bool> stop{false};
    std::mutex mu;
    std::thread writer([&] {
      httplib::Client c("127.0.0.1", port);
      const httplib::Headers auth{{"Authorization", "Bearer " + token}};
      for (int i = 0; !stop; ++i) {
        auto r = lifeserver::store::to_json(
            lifeserver::testing::make_record("watch", "hr", i, {{"bpm", double(i % 90)}}));
        r.erase("record_id");
        auto resp = c.Post("/sense/v1/records", auth, r.dump(), "application/json");
        if (!resp) break;  // the server is gone
        if (resp->status == 200) {
          std::lock_guard lock(mu);
          acked.insert(json::parse(resp->body)["record_id"].get<std::string>());
        }
      }
    });
    for (int i = 0; i < 500; ++i) {
      {
        std::lock_guard lock(mu);
        if (acked.size() >= 150) break;
      }
      std::this_thread::sleep_for(10ms);
    }
    EXPECT_EQ(node.kill(SIGKILL), 128 + SIGKILL);
    stop = true;
    writer.join();
  }
  ASSERT_GE(acked.size(), 150u);

  Child node({kCli, "run", "--config", conf}, dir / "run2.log");
  const int port = node.http_port();
  httplib::Client http("127.0.0.1", port);
  const httplib::Headers auth{{"Authorization", "Bearer " + read_file(dir / "token")}};
  const json q = {{"record_types", {"hr"}}, {"time_range", {0, 1000000}}, {"aggregate", "count"},
                  {"offered_fee", 0}, {"enterprise_payout_address", {{"bitcoin", "E"}}}};
  auto res = http.Post("/mind/v1/query", auth, q.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_GE(json::parse(res->body)["matched_count"].get<std::size_t>(), acked.size());
  EXPECT_EQ(node.kill(SIGTERM), 0);

  lifeserver::store::SenseStore store(dir / "public" / lifeserver::store::kPublicSenseFile);
  for (const auto& id : acked) EXPECT_TRUE(store.contains(id)) << id;
}
