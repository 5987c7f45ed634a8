#include "ramc/http.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"

namespace ramc {

std::string http_post_json(const std::string& baseUrl, const std::string& path,
                           const std::string& apiKey, const std::string& body) {
  std::string lastError;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::seconds(1 << (attempt - 1)));
    httplib::Client client(baseUrl);
    client.set_read_timeout(120, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!apiKey.empty()) headers.emplace("Authorization", "Bearer " + apiKey);
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return res->body;
    if (res)
      lastError = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    else
      lastError = "transport failure (" + httplib::to_string(res.error()) + ")";
  }
  throw TransportError("request to " + baseUrl + path + " failed after 3 attempts: " + lastError);
}

}  // namespace ramc
