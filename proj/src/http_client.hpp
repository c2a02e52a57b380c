#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace umivr::detail {

// POSTs a JSON body to base_url + path and returns the parsed response.
// base_url is "scheme://host[:port][/prefix]". Maps transport failures onto
// BackendTimeout / BackendFailure and non-2xx replies onto BackendRefusal
// (4xx) or BackendFailure (5xx).
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const std::string& api_key,
                         std::chrono::milliseconds timeout);

}  // namespace umivr::detail
