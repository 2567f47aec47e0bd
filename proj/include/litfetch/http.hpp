#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace litfetch {

class Cache;

// Header names are compared case-insensitively.
struct HeaderLess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using Headers = std::multimap<std::string, std::string, HeaderLess>;

struct HttpRequest {
  std::string url;
  Headers headers;
};

struct HttpResponse {
  int status = 0;
  Headers headers;
  std::string body;
  // URLs visited before the final response when redirects were followed.
  std::vector<std::string> redirect_chain;
  bool from_cache = false;

  std::optional<std::string> header(const std::string& name) const;
};

// Thrown by transports when no HTTP response could be obtained at all
// (connection refused, timeout, DNS failure).
class TransportFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A blocking GET-only HTTP transport. Implementations must not follow
/// redirects; callers that want redirects follow them explicitly.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const HttpRequest& request,
                           std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport. http:// always; https:// when built with
/// OpenSSL support.
class NetworkTransport final : public Transport {
 public:
  HttpResponse get(const HttpRequest& request,
                   std::chrono::milliseconds timeout) override;
};

std::shared_ptr<Transport> default_transport();

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // includes leading '/', excludes the query
  std::vector<std::pair<std::string, std::string>> query;  // decoded
};

ParsedUrl parse_url(std::string_view url);
std::string percent_encode(std::string_view s, std::string_view keep = "");
std::string percent_decode(std::string_view s);
// Encodes a DOI for use as a path segment; '/' is kept.
std::string encode_doi_path(std::string_view doi);
std::string build_query(
    const std::vector<std::pair<std::string, std::string>>& params);

struct ClientPolicy {
  std::optional<std::string> contact_email;
  std::size_t max_page_size = 100;
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30'000};
  std::chrono::milliseconds request_timeout{30'000};
  std::chrono::microseconds min_request_interval{100'000};
  // A server-requested wait longer than this surfaces as RateLimited.
  std::chrono::milliseconds rate_limit_ceiling{60'000};
  // Jitter fraction in [0, 1): each backoff is scaled by 1 +/- jitter.
  double jitter = 0.2;
  std::string user_agent = "litfetch/0.1.0";
  // Cache-only operation: a miss is a NetworkError, no request is sent.
  bool replay_only = false;

  // Polite-pool defaults when an email is known, slower anonymous defaults
  // otherwise.
  static ClientPolicy defaults(std::optional<std::string> email);
  void validate() const;
};

/// Delay before retry number `retry` (1-based): initial * 2^(retry-1),
/// capped at ceiling. No jitter.
std::chrono::milliseconds backoff_delay(std::size_t retry,
                                        std::chrono::milliseconds initial,
                                        std::chrono::milliseconds ceiling);

/// Serializes request admission: no two admissions closer than the interval.
class RateGate {
 public:
  explicit RateGate(std::chrono::microseconds min_interval)
      : configured_(min_interval), interval_(min_interval) {}

  // Blocks until the caller may issue a request.
  void admit();
  // Raises the interval (never lowers it below the configured minimum).
  void widen(std::chrono::microseconds interval);
  std::chrono::microseconds interval() const;

 private:
  const std::chrono::microseconds configured_;
  std::chrono::microseconds interval_;
  mutable std::mutex mu_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

struct HttpStats {
  std::size_t requests = 0;  // attempts sent over the transport
  std::size_t retries = 0;
  std::size_t cache_hits = 0;
};

/// Policy-applying request executor shared by the API clients: admits
/// requests through the rate gate, retries network failures, 429 and 5xx
/// with exponential backoff, and consults/updates the response cache.
class HttpExecutor {
 public:
  HttpExecutor(ClientPolicy policy, std::shared_ptr<Transport> transport,
               std::shared_ptr<Cache> cache = nullptr);

  /// Returns the final response (2xx, 3xx or 4xx other than 429). Throws
  /// NetworkError, RateLimited or UpstreamError when retries run out.
  /// With max_redirects > 0, 3xx responses carrying a Location are followed
  /// and the final response is cached under the original URL.
  HttpResponse get(const std::string& url, const Headers& headers = {},
                   std::size_t max_redirects = 0);

  const ClientPolicy& policy() const noexcept { return policy_; }
  HttpStats stats() const;
  std::string user_agent() const;

 private:
  HttpResponse send_with_retries(const HttpRequest& request);
  std::chrono::milliseconds jittered(std::chrono::milliseconds d);

  ClientPolicy policy_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Cache> cache_;
  RateGate gate_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

}  // namespace litfetch
