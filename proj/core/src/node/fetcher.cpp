#include "lifeserver/node/fetcher.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

namespace lifeserver::node {

namespace {

std::string read_file_url(const std::string& url) {
  // file:/abs/path and file:///abs/path
  std::string path = url.substr(5);
  if (path.rfind("//", 0) == 0) path = path.substr(2);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string http_get(const std::string& url, std::chrono::milliseconds timeout) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);
  const auto res = client.Get(path);
  if (!res) throw std::runtime_error(httplib::to_string(res.error()));
  if (res->status != 200) throw std::runtime_error("HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace

vdp::Fetcher make_fetcher(std::chrono::milliseconds timeout) {
  return [timeout](const std::string& url) -> std::string {
    if (url.rfind("file:", 0) == 0) return read_file_url(url);
    if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) return http_get(url, timeout);
    throw std::runtime_error("unsupported url scheme in " + url);
  };
}

}  // namespace lifeserver::node
