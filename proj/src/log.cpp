#include "litfetch/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace litfetch::log {

namespace {

Level initial_level() {
  const char* env = std::getenv("LITFETCH_LOG");
  if (!env) return Level::kWarn;
  std::string v(env);
  if (v == "debug") return Level::kDebug;
  if (v == "info") return Level::kInfo;
  if (v == "error") return Level::kError;
  if (v == "off") return Level::kOff;
  return Level::kWarn;
}

std::atomic<Level>& threshold() {
  static std::atomic<Level> t{initial_level()};
  return t;
}

std::mutex& out_mu() {
  static std::mutex mu;
  return mu;
}

}  // namespace

void set_level(Level l) { threshold().store(l); }
Level level() { return threshold().load(); }

void write(Level l, std::string_view message) {
  if (l < threshold().load()) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  std::lock_guard lock(out_mu());
  std::cerr << "[litfetch " << kNames[static_cast<int>(l)] << "] " << message
            << '\n';
}

}  // namespace litfetch::log
