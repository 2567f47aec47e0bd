#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "litfetch/cache.hpp"
#include "litfetch/clock.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/report.hpp"
#include "litfetch/resultset.hpp"

namespace litfetch {

/// Knobs shared by handsearch and snowball runs.
struct SearchOptions {
  // Upper bound on origins (journals or seeds) fetched at the same time.
  std::size_t parallelism = 4;
  // Record failed origins in the report instead of aborting the run.
  bool continue_on_error = false;
  // Defaults to the system clock.
  std::shared_ptr<const Clock> clock;
  ProgressFn on_progress;
  // Where per-origin progress is recorded. Null disables resumption.
  std::shared_ptr<Cache> progress_store;
  // Pick up stored progress for the same query_id. When false, any stored
  // progress is discarded before the run.
  bool resume = true;
  // Effective configuration echoed into the report.
  std::map<std::string, std::string> config;
};

struct SearchOutcome {
  ResultSet results;
  SearchReport report;
};

/// Runs fn(0..n-1) on at most `bound` threads. Indices are handed out in
/// increasing order. Once stop() returns true no further indices start.
void for_each_bounded(std::size_t n, std::size_t bound,
                      const std::function<void(std::size_t)>& fn,
                      const std::function<bool()>& stop = {});

}  // namespace litfetch
