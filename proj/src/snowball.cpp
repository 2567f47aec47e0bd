#include "litfetch/snowball.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <unordered_set>

#include "litfetch/log.hpp"

namespace litfetch {

namespace {

struct SeedRun {
  std::vector<Doi> found;
  std::size_t unresolvable = 0;
  std::vector<std::string> flags;
  std::optional<Error> error;
};

using SeedFetch = std::function<SeedRun(const Doi&)>;

SearchOutcome chase(const SnowballQuery& query, SearchKind kind,
                    const SeedFetch& fetch, CrossrefClient& crossref,
                    std::vector<DataSource> sources, const SearchOptions& options) {
  auto clock = options.clock ? options.clock : std::make_shared<SystemClock>();
  const Timestamp started = clock->now();
  for (auto& s : sources) s.queried_at = started;
  const auto& seeds = query.seeds();
  std::unordered_set<Doi> seed_set(seeds.begin(), seeds.end());

  std::vector<SeedRun> runs(seeds.size());
  std::atomic<bool> stop{false};
  std::mutex progress_mu;
  for_each_bounded(
      seeds.size(), options.parallelism,
      [&](std::size_t i) {
        try {
          runs[i] = fetch(seeds[i]);
        } catch (const Error& e) {
          runs[i].error = e;
          runs[i].error->with_origin(seeds[i].str());
        }
        if (runs[i].error && !options.continue_on_error) stop = true;
        if (options.on_progress) {
          std::lock_guard lock(progress_mu);
          options.on_progress({seeds[i].str(), runs[i].found.size(),
                               runs[i].found.size()});
        }
      },
      [&] { return stop.load(); });

  if (!options.continue_on_error) {
    for (const auto& run : runs) {
      if (run.error) throw *run.error;
    }
  }

  ResultSet results(started);
  std::vector<OriginResult> per_origin;
  std::unordered_set<Doi> excluded;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    OriginResult o;
    o.origin = seeds[i].str();
    o.unresolvable = runs[i].unresolvable;
    o.flags = runs[i].flags;
    if (runs[i].error) {
      o.failures = 1;
      o.error = runs[i].error->what();
    }
    auto tag = SourceTag::snowball(kind, seeds[i], query.query_id());
    for (const auto& d : runs[i].found) {
      if (seed_set.count(d)) {
        excluded.insert(d);
        continue;
      }
      ++o.retrieved;
      results.add(WorkMetadata(d), tag);
    }
    per_origin.push_back(std::move(o));
  }

  std::size_t hydration_failures = 0;
  if (query.hydrate()) {
    hydration_failures = hydrate(results, crossref, options.parallelism);
    bool listed = false;
    for (const auto& s : sources) listed |= s.name == "Crossref";
    if (!listed) sources.push_back({"Crossref", crossref.base_url(), started});
  }

  ReportContext ctx;
  ctx.data_sources = std::move(sources);
  ctx.config = options.config;
  ctx.seeds_excluded = excluded.size();
  ctx.hydration_failures = hydration_failures;
  ctx.continue_on_error = options.continue_on_error;
  auto report = build_report(query, per_origin, results.size(), *clock, ctx);
  return SearchOutcome{std::move(results), std::move(report)};
}

}  // namespace

std::size_t hydrate(ResultSet& results, CrossrefClient& crossref,
                    std::size_t parallelism) {
  const auto& entries = results.entries();
  std::vector<std::optional<WorkMetadata>> fetched(entries.size());
  for_each_bounded(entries.size(), parallelism, [&](std::size_t i) {
    const Doi& doi = entries[i].work.doi;
    try {
      fetched[i] = crossref.fetch_work(doi);
    } catch (const Error& e) {
      log::warn("hydration failed for " + doi.str() + ": " + e.what());
    }
  });
  std::size_t failures = 0;
  for (std::size_t i = 0; i < fetched.size(); ++i) {
    if (!fetched[i]) {
      ++failures;
      continue;
    }
    Doi doi = entries[i].work.doi;
    results.replace_work(doi, std::move(*fetched[i]));
  }
  return failures;
}

SearchOutcome snowball_backward(const SnowballQuery& query, CrossrefClient& crossref,
                                const SearchOptions& options) {
  if (query.direction() != Direction::kBackward) {
    throw Error(ErrorKind::kInvalidQuery, "snowball_backward needs a backward query");
  }
  SeedFetch fetch = [&](const Doi& seed) {
    auto refs = crossref.fetch_references(seed);
    SeedRun run;
    run.found = std::move(refs.dois);
    run.unresolvable = refs.unresolvable;
    if (run.found.empty() && refs.declared > 0) {
      run.flags.push_back("references withheld or without DOIs (" +
                          std::to_string(refs.declared) + " declared)");
    }
    return run;
  };
  return chase(query, SearchKind::kSnowballBackward, fetch, crossref,
               {{"Crossref", crossref.base_url(), {}}}, options);
}

SearchOutcome snowball_forward(const SnowballQuery& query, CociClient& coci,
                               CrossrefClient& crossref,
                               const SearchOptions& options) {
  if (query.direction() != Direction::kForward) {
    throw Error(ErrorKind::kInvalidQuery, "snowball_forward needs a forward query");
  }
  SeedFetch fetch = [&](const Doi& seed) {
    SeedRun run;
    for (auto& edge : coci.fetch_citing(seed)) run.found.push_back(edge.citing);
    if (run.found.empty()) run.flags.emplace_back(kNoCitationsFlag);
    return run;
  };
  return chase(query, SearchKind::kSnowballForward, fetch, crossref,
               {{"COCI", coci.base_url(), {}}}, options);
}

SearchOutcome run_snowball(const SnowballQuery& query, CociClient& coci,
                           CrossrefClient& crossref, const SearchOptions& options) {
  if (query.direction() == Direction::kForward) {
    return snowball_forward(query, coci, crossref, options);
  }
  return snowball_backward(query, crossref, options);
}

}  // namespace litfetch
