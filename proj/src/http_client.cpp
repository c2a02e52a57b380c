#include "http_client.hpp"

#include <httplib.h>

#include "umivr/error.hpp"

namespace umivr::detail {

namespace {

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "base URL needs a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const std::string& api_key,
                         std::chrono::milliseconds timeout) {
  const auto url = split(base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto msg = "request to " + base_url + path + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::BackendTimeout, msg);
    }
    throw Error(ErrorCode::BackendFailure, msg);
  }
  if (res->status >= 400 && res->status < 500) {
    throw Error(ErrorCode::BackendRefusal,
                "backend returned " + std::to_string(res->status) + ": " + res->body);
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::BackendFailure,
                "backend returned " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("backend reply is not JSON: ") + e.what(), res->body);
  }
}

}  // namespace umivr::detail
