#include "litfetch/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "litfetch/clock.hpp"
#include "litfetch/coci.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/error.hpp"
#include "litfetch/ids.hpp"

namespace litfetch {

CliConfig CliConfig::defaults() {
  CliConfig c;
  c.crossref_url = std::string(kCrossrefDefaultUrl);
  c.resolver_url = std::string(kResolverDefaultUrl);
  c.coci_url = std::string(kCociDefaultUrl);
  if (const char* home = std::getenv("HOME"); home && *home) {
    c.cache_dir = (std::filesystem::path(home) / ".cache" / "litfetch").string();
  }
  return c;
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const std::string& why) {
  throw Error(ErrorKind::kInvalidQuery,
              std::string(key) + ": " + why + ", got '" + std::string(value) + "'")
      .with_token(std::string(key));
}

std::size_t to_count(std::string_view key, std::string_view value, std::size_t lo,
                     std::size_t hi) {
  std::string s(value);
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno != 0 || s[0] == '-' || v < lo || v > hi) {
    bad_value(key, value,
              "expected an integer in [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "]");
  }
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view value) {
  auto v = to_lower(value);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

}  // namespace

void CliConfig::set(std::string_view key, std::string_view raw) {
  std::string value = trim(raw);
  if (key == "email") {
    contact_email = value.empty() ? std::nullopt : std::optional(value);
  } else if (key == "cache_dir") {
    cache_dir = value;
  } else if (key == "crossref_url") {
    crossref_url = value;
  } else if (key == "resolver_url") {
    resolver_url = value;
  } else if (key == "coci_url") {
    coci_url = value;
  } else if (key == "parallelism") {
    parallelism = to_count(key, value, 1, 64);
  } else if (key == "continue_on_error") {
    continue_on_error = to_bool(key, value);
  } else if (key == "output_dir") {
    output_dir = value.empty() ? "." : value;
  } else if (key == "page_size") {
    page_size = to_count(key, value, 1, 1000);
  } else if (key == "max_retries") {
    max_retries = to_count(key, value, 0, 20);
  } else if (key == "replay_only") {
    replay_only = to_bool(key, value);
  } else if (key == "now") {
    if (!value.empty()) {
      try {
        parse_timestamp(value);
      } catch (const std::invalid_argument&) {
        bad_value(key, value, "expected YYYY-MM-DDTHH:MM:SSZ");
      }
    }
    now = value;
  } else {
    throw Error(ErrorKind::kInvalidQuery, "unknown configuration key '" +
                                              std::string(key) + "'")
        .with_token(std::string(key));
  }
}

std::map<std::string, std::string> CliConfig::echo() const {
  return {{"email", contact_email.value_or("")},
          {"cache_dir", cache_dir},
          {"crossref_url", crossref_url},
          {"resolver_url", resolver_url},
          {"coci_url", coci_url},
          {"parallelism", std::to_string(parallelism)},
          {"continue_on_error", continue_on_error ? "true" : "false"},
          {"page_size", std::to_string(page_size)},
          {"max_retries", std::to_string(max_retries)},
          {"replay_only", replay_only ? "true" : "false"}};
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidQuery,
                  "config line " + std::to_string(line_no) + ": expected key = value")
          .with_position(line_no);
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorKind::kInvalidQuery,
                  "config line " + std::to_string(line_no) + ": empty key")
          .with_position(line_no);
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    out[key] = value;
  }
  return out;
}

const std::map<std::string, std::string>& config_env_vars() {
  static const std::map<std::string, std::string> vars = {
      {"LITFETCH_EMAIL", "email"},
      {"LITFETCH_CACHE_DIR", "cache_dir"},
      {"LITFETCH_CROSSREF_URL", "crossref_url"},
      {"LITFETCH_RESOLVER_URL", "resolver_url"},
      {"LITFETCH_COCI_URL", "coci_url"},
      {"LITFETCH_NOW", "now"},
  };
  return vars;
}

CliConfig load_config(
    const std::filesystem::path& path,
    const std::function<std::optional<std::string>(const char*)>& getenv) {
  CliConfig c = CliConfig::defaults();
  std::error_code ec;
  if (!path.empty() && std::filesystem::exists(path, ec)) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    for (const auto& [k, v] : parse_config_text(buf.str())) {
      try {
        c.set(k, v);
      } catch (Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.message())
            .with_token(e.token().value_or(k));
      }
    }
  }
  auto env = getenv ? getenv : [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  for (const auto& [var, key] : config_env_vars()) {
    if (auto v = env(var.c_str())) {
      try {
        c.set(key, *v);
      } catch (Error& e) {
        throw Error(e.kind(), var + ": " + e.message()).with_token(var);
      }
    }
  }
  return c;
}

}  // namespace litfetch
