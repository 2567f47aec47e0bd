#include "litfetch/http.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <thread>

#ifdef LITFETCH_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "litfetch/cache.hpp"
#include "litfetch/clock.hpp"
#include "litfetch/error.hpp"

namespace litfetch {

bool HeaderLess::operator()(const std::string& a, const std::string& b) const {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](unsigned char x, unsigned char y) {
        return std::tolower(x) < std::tolower(y);
      });
}

std::optional<std::string> HttpResponse::header(const std::string& name) const {
  auto it = headers.find(name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

namespace {

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Splits "scheme://host:port" from "/path?query".
std::pair<std::string, std::string> split_origin(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::kNetworkError,
                "URL lacks a scheme: " + std::string(url));
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) {
    return {std::string(url), "/"};
  }
  return {std::string(url.substr(0, path_start)),
          std::string(url.substr(path_start))};
}

}  // namespace

std::string percent_encode(std::string_view s, std::string_view keep) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (is_unreserved(c) || keep.find(static_cast<char>(c)) != keep.npos) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    if (s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string encode_doi_path(std::string_view doi) {
  return percent_encode(doi, "/");
}

std::string build_query(
    const std::vector<std::pair<std::string, std::string>>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    out += out.empty() ? "?" : "&";
    out += percent_encode(k);
    out += '=';
    out += percent_encode(v, ":,*");
  }
  return out;
}

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl p;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::kNetworkError,
                "URL lacks a scheme: " + std::string(url));
  }
  p.scheme = to_lower(url.substr(0, scheme_end));
  std::string_view rest = url.substr(scheme_end + 3);
  auto path_start = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, path_start);
  rest = path_start == std::string_view::npos ? std::string_view{}
                                              : rest.substr(path_start);
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos &&
      authority.find(']') == std::string_view::npos) {
    p.host = to_lower(authority.substr(0, colon));
    auto port_text = authority.substr(colon + 1);
    std::from_chars(port_text.data(), port_text.data() + port_text.size(),
                    p.port);
  } else {
    p.host = to_lower(authority);
    p.port = p.scheme == "https" ? 443 : 80;
  }
  auto q = rest.find('?');
  p.path = std::string(rest.substr(0, q));
  if (p.path.empty()) p.path = "/";
  if (q != std::string_view::npos) {
    std::string_view query = rest.substr(q + 1);
    std::size_t start = 0;
    while (start <= query.size()) {
      auto amp = query.find('&', start);
      auto part = query.substr(start, amp == std::string_view::npos
                                          ? std::string_view::npos
                                          : amp - start);
      if (!part.empty()) {
        auto eq = part.find('=');
        if (eq == std::string_view::npos) {
          p.query.emplace_back(percent_decode(part), "");
        } else {
          p.query.emplace_back(percent_decode(part.substr(0, eq)),
                               percent_decode(part.substr(eq + 1)));
        }
      }
      if (amp == std::string_view::npos) break;
      start = amp + 1;
    }
  }
  return p;
}

HttpResponse NetworkTransport::get(const HttpRequest& request,
                                   std::chrono::milliseconds timeout) {
  auto [origin, target] = split_origin(request.url);
  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw TransportFailure("unsupported URL (is OpenSSL support built in?): " +
                           request.url);
  }
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(false);
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  auto result = client.Get(target, headers);
  if (!result) {
    throw TransportFailure("request to " + request.url +
                           " failed: " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  for (const auto& [k, v] : result->headers) response.headers.emplace(k, v);
  return response;
}

std::shared_ptr<Transport> default_transport() {
  return std::make_shared<NetworkTransport>();
}

ClientPolicy ClientPolicy::defaults(std::optional<std::string> email) {
  ClientPolicy p;
  p.contact_email = std::move(email);
  // Anonymous callers share the public pool; stay well below its limits.
  p.min_request_interval = p.contact_email
                               ? std::chrono::microseconds(100'000)
                               : std::chrono::microseconds(500'000);
  return p;
}

void ClientPolicy::validate() const {
  if (max_page_size < 1 || max_page_size > 1000) {
    throw Error(ErrorKind::kInvalidQuery,
                "max_page_size must be in [1, 1000]");
  }
  if (min_request_interval <= std::chrono::microseconds::zero()) {
    throw Error(ErrorKind::kInvalidQuery, "min_request_interval must be > 0");
  }
  if (jitter < 0.0 || jitter >= 1.0) {
    throw Error(ErrorKind::kInvalidQuery, "jitter must be in [0, 1)");
  }
}

std::chrono::milliseconds backoff_delay(std::size_t retry,
                                        std::chrono::milliseconds initial,
                                        std::chrono::milliseconds ceiling) {
  if (retry == 0) return std::chrono::milliseconds::zero();
  auto delay = initial;
  for (std::size_t i = 1; i < retry; ++i) {
    if (delay >= ceiling) break;
    delay *= 2;
  }
  return std::min(delay, ceiling);
}

void RateGate::admit() {
  std::unique_lock lock(mu_);
  auto now = std::chrono::steady_clock::now();
  if (last_) {
    auto earliest = *last_ + interval_;
    if (now < earliest) {
      // Holding the lock while sleeping serializes admissions.
      std::this_thread::sleep_until(earliest);
      now = std::chrono::steady_clock::now();
    }
  }
  last_ = now;
}

void RateGate::widen(std::chrono::microseconds interval) {
  std::lock_guard lock(mu_);
  interval_ = std::max(configured_, interval);
}

std::chrono::microseconds RateGate::interval() const {
  std::lock_guard lock(mu_);
  return interval_;
}

namespace {

// "Retry-After: <seconds>" only; HTTP-date forms are treated as absent.
std::optional<std::chrono::milliseconds> retry_after(const HttpResponse& r) {
  auto value = r.header("Retry-After");
  if (!value) return std::nullopt;
  double seconds = 0;
  auto text = trim(*value);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   seconds);
  if (ec != std::errc{} || ptr != text.data() + text.size() || seconds < 0) {
    return std::nullopt;
  }
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000));
}

// Crossref advertises "X-Rate-Limit-Limit: 50" and
// "X-Rate-Limit-Interval: 1s"; translate into a per-request spacing.
std::optional<std::chrono::microseconds> advertised_spacing(
    const HttpResponse& r) {
  auto limit = r.header("X-Rate-Limit-Limit");
  auto interval = r.header("X-Rate-Limit-Interval");
  if (!limit || !interval) return std::nullopt;
  long n = 0;
  auto lt = trim(*limit);
  if (std::from_chars(lt.data(), lt.data() + lt.size(), n).ec != std::errc{} ||
      n <= 0) {
    return std::nullopt;
  }
  auto it = trim(*interval);
  double secs = 0;
  auto [ptr, ec] = std::from_chars(it.data(), it.data() + it.size(), secs);
  if (ec != std::errc{} || secs <= 0) return std::nullopt;
  std::string_view unit(ptr, it.data() + it.size() - ptr);
  if (unit == "ms") secs /= 1000.0;
  else if (unit == "m") secs *= 60.0;
  return std::chrono::microseconds(
      static_cast<long long>(secs * 1e6 / static_cast<double>(n)));
}

}  // namespace

HttpExecutor::HttpExecutor(ClientPolicy policy,
                           std::shared_ptr<Transport> transport,
                           std::shared_ptr<Cache> cache)
    : policy_(std::move(policy)),
      transport_(transport ? std::move(transport) : default_transport()),
      cache_(std::move(cache)),
      gate_(policy_.min_request_interval),
      rng_(std::random_device{}()) {
  policy_.validate();
}

std::string HttpExecutor::user_agent() const {
  std::string ua = policy_.user_agent;
  if (policy_.contact_email) ua += " (mailto:" + *policy_.contact_email + ")";
  return ua;
}

HttpStats HttpExecutor::stats() const {
  return HttpStats{requests_.load(), retries_.load(), cache_hits_.load()};
}

std::chrono::milliseconds HttpExecutor::jittered(std::chrono::milliseconds d) {
  if (policy_.jitter <= 0.0 || d.count() == 0) return d;
  std::lock_guard lock(rng_mu_);
  std::uniform_real_distribution<double> dist(1.0 - policy_.jitter,
                                              1.0 + policy_.jitter);
  return std::chrono::milliseconds(
      static_cast<long long>(std::llround(d.count() * dist(rng_))));
}

HttpResponse HttpExecutor::send_with_retries(const HttpRequest& request) {
  std::size_t attempt = 0;
  std::string last_problem;
  for (;;) {
    gate_.admit();
    ++requests_;
    std::optional<HttpResponse> response;
    try {
      response = transport_->get(request, policy_.request_timeout);
    } catch (const TransportFailure& e) {
      last_problem = e.what();
    }
    std::chrono::milliseconds server_wait{0};
    if (response) {
      if (auto spacing = advertised_spacing(*response)) gate_.widen(*spacing);
      int status = response->status;
      if (status == 429) {
        auto wait = retry_after(*response);
        if (wait && *wait > policy_.rate_limit_ceiling) {
          throw Error(ErrorKind::kRateLimited,
                      "server asked to wait " + std::to_string(wait->count()) +
                          " ms for " + request.url)
              .with_status(429);
        }
        server_wait = wait.value_or(std::chrono::milliseconds{0});
        last_problem = "HTTP 429 from " + request.url;
      } else if (status >= 500) {
        last_problem = "HTTP " + std::to_string(status) + " from " + request.url;
      } else {
        return std::move(*response);
      }
    }
    if (attempt >= policy_.max_retries) {
      if (!response) {
        throw Error(ErrorKind::kNetworkError,
                    last_problem + " (after " + std::to_string(attempt + 1) +
                        " attempts)");
      }
      if (response->status == 429) {
        throw Error(ErrorKind::kRateLimited, last_problem).with_status(429);
      }
      throw Error(ErrorKind::kUpstreamError,
                  last_problem + " (after " + std::to_string(attempt + 1) +
                      " attempts)")
          .with_status(response->status);
    }
    ++attempt;
    ++retries_;
    auto delay = jittered(
        backoff_delay(attempt, policy_.initial_backoff, policy_.max_backoff));
    std::this_thread::sleep_for(std::max(delay, server_wait));
  }
}

HttpResponse HttpExecutor::get(const std::string& url, const Headers& headers,
                               std::size_t max_redirects) {
  Headers all = headers;
  if (all.find("User-Agent") == all.end()) all.emplace("User-Agent", user_agent());
  std::string accept;
  if (auto it = all.find("Accept"); it != all.end()) accept = it->second;
  CacheKey key = CacheKey::for_request("GET", url, accept);

  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      HttpResponse r;
      r.status = hit->status;
      r.body = std::move(hit->body);
      r.from_cache = true;
      return r;
    }
  }
  if (policy_.replay_only) {
    throw Error(ErrorKind::kNetworkError,
                "replay mode: no cached response for " + url);
  }

  HttpRequest request{url, all};
  std::vector<std::string> chain;
  HttpResponse response = send_with_retries(request);
  while (max_redirects > 0 && response.status >= 300 && response.status < 400) {
    auto location = response.header("Location");
    if (!location) break;
    if (chain.size() >= max_redirects) {
      throw Error(ErrorKind::kNetworkError,
                  "too many redirects starting at " + url);
    }
    chain.push_back(request.url);
    std::string next = *location;
    if (next.find("://") == std::string::npos) {
      auto p = parse_url(request.url);
      std::string origin = p.scheme + "://" + p.host + ":" +
                           std::to_string(p.port);
      next = origin + (next.empty() || next[0] != '/' ? "/" : "") + next;
    }
    request.url = next;
    response = send_with_retries(request);
  }
  response.redirect_chain = std::move(chain);

  if (cache_ && (response.status == 200 || response.status == 404)) {
    cache_->put(CacheEntry{key, response.body, response.status, cache_->now()});
  }
  return response;
}

}  // namespace litfetch
