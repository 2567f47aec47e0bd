#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "litfetch/http.hpp"

namespace litfetch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;  // also: lookup found nothing
inline constexpr int kExitAbort = 2;
inline constexpr int kExitUsage = 64;

/// What the CLI takes from its surroundings. Tests substitute all of it.
struct CliEnvironment {
  std::function<std::optional<std::string>(const char*)> getenv;
  // Config file used when --config is not given.
  std::filesystem::path default_config = "litfetch.toml";
  // Null means the network transport.
  std::shared_ptr<Transport> transport;
  // Applied to the client policy after config merging.
  std::function<void(ClientPolicy&)> adjust_policy;
};

/// Entry point of the litfetch command. Data goes to files, file paths to
/// `out`, progress and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const CliEnvironment& env = {});

}  // namespace litfetch
