#pragma once

#include <stdexcept>
#include <string>

namespace ramc {

/// Raised after the retry policy is exhausted; callers count the task as a
/// separate infrastructure failure rather than a wrong completion.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// POST a JSON body with bearer auth, 3 attempts with 1s/2s/4s backoff.
/// Returns the response body; throws TransportError when all attempts fail.
std::string http_post_json(const std::string& baseUrl, const std::string& path,
                           const std::string& apiKey, const std::string& body);

}  // namespace ramc
