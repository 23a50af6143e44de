#include "http_client.hpp"

#include <httplib.h>

#include "episodic/error.hpp"

namespace episodic::detail {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const std::string& bearer_token,
                         std::chrono::milliseconds timeout) {
  const auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result) {
    const auto err = result.error();
    const std::string reason = httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::kTimeout, "request to " + origin + " timed out", {{"endpoint", url}});
    }
    if (err == httplib::Error::Read) {
      // Read failures after a successful connect are almost always the read timeout expiring.
      throw Error(ErrorCode::kTimeout, "no response from " + origin + " within timeout", {{"endpoint", url}});
    }
    throw Error(ErrorCode::kProviderUnavailable, "cannot reach " + origin + ": " + reason,
                {{"endpoint", url}, {"reason", reason}});
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kProviderUnavailable,
                "provider returned HTTP " + std::to_string(result->status),
                {{"endpoint", url}, {"status", result->status}, {"body", result->body.substr(0, 512)}});
  }
  auto parsed = nlohmann::json::parse(result->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::kProviderUnavailable, "provider returned a non-JSON body", {{"endpoint", url}});
  }
  return parsed;
}

}  // namespace episodic::detail
