#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace litfetch {

/// Effective settings for the CLI and the service, merged in the order
///   defaults < config file < environment < flags
struct CliConfig {
  std::optional<std::string> contact_email;
  std::string cache_dir;  // empty disables the cache
  std::string crossref_url;
  std::string resolver_url;
  std::string coci_url;
  std::size_t parallelism = 4;
  bool continue_on_error = false;
  std::string output_dir = ".";
  std::size_t page_size = 100;
  std::size_t max_retries = 3;
  bool replay_only = false;
  // Fixed report clock, "YYYY-MM-DDTHH:MM:SSZ". Empty means system time.
  std::string now;

  static CliConfig defaults();

  // Input to the precedence merge. Unknown keys throw kInvalidQuery naming
  // the key; bad values name the key and the value.
  void set(std::string_view key, std::string_view value);

  // The configuration as echoed into reports.
  std::map<std::string, std::string> echo() const;
};

/// Parses the key/value configuration file. Grammar, one entry per line:
///   key = value        value may be wrapped in double quotes
///   # comment          blank lines are ignored
/// Throws kInvalidQuery with the 1-based line as position.
std::map<std::string, std::string> parse_config_text(std::string_view text);

/// Applies `path` (when it exists) and then the LITFETCH_* environment
/// variables on top of the defaults. `getenv` is injectable for tests.
CliConfig load_config(
    const std::filesystem::path& path,
    const std::function<std::optional<std::string>(const char*)>& getenv = {});

// Environment variable → config key.
const std::map<std::string, std::string>& config_env_vars();

}  // namespace litfetch
