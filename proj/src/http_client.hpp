#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

namespace episodic::detail {

/// POSTs JSON to `url` with an optional bearer token and returns the parsed
/// response body. Connection failures raise ProviderUnavailable, elapsed
/// timeouts raise Timeout, non-2xx statuses raise ProviderUnavailable.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const std::string& bearer_token,
                         std::chrono::milliseconds timeout);

}  // namespace episodic::detail
