#include "litfetch/handsearch.hpp"

#include <atomic>
#include <mutex>
#include <optional>

#include "litfetch/log.hpp"

namespace litfetch {

namespace {

struct JournalRun {
  std::vector<WorkMetadata> works;
  std::optional<Error> error;
};

}  // namespace

SearchOutcome run_handsearch(const HandsearchQuery& query, CrossrefClient& client,
                             const SearchOptions& options) {
  auto clock = options.clock ? options.clock : std::make_shared<SystemClock>();
  const Timestamp started = clock->now();
  const auto& qid = query.query_id();
  const auto& journals = query.journals();
  auto* store = options.progress_store.get();

  std::map<std::string, OriginProgress> stored;
  if (store) {
    if (options.resume) {
      stored = store->load_progress(qid);
    } else {
      store->clear_progress(qid);
    }
  }

  std::mutex progress_mu;
  auto report_progress = [&](const ProgressEvent& ev) {
    if (!options.on_progress) return;
    std::lock_guard lock(progress_mu);
    options.on_progress(ev);
  };

  std::vector<std::string> select = query.requested_fields().empty()
                                        ? default_select_fields()
                                        : query.requested_fields();
  std::vector<JournalRun> runs(journals.size());
  std::atomic<bool> stop{false};

  for_each_bounded(
      journals.size(), options.parallelism,
      [&](std::size_t i) {
        const Issn& issn = journals[i];
        const std::string origin = issn.str();
        DrainOptions drain;
        drain.select = select;
        drain.on_progress = report_progress;
        if (auto it = stored.find(origin); it != stored.end()) {
          if (it->second.cursor.exhausted) {
            log::info("resume: " + origin + " already complete");
            runs[i].works = it->second.works;
            report_progress({origin, runs[i].works.size(), runs[i].works.size()});
            return;
          }
          log::info("resume: " + origin + " from page " +
                    std::to_string(it->second.pages));
          drain.start = it->second.cursor;
          drain.already_fetched = it->second.works;
          drain.pages_done = it->second.pages;
        }
        if (store) {
          drain.on_page = [&, origin](const OriginProgress& p) {
            store->record_progress(qid, origin, p);
          };
        }
        try {
          runs[i].works = client.fetch_all_journal_works(issn, query.range(),
                                                         query.keywords(), drain);
        } catch (const PartialFetchError& e) {
          runs[i].works = e.partial();
          runs[i].error = static_cast<const Error&>(e);
          runs[i].error->with_origin(origin);
        } catch (const Error& e) {
          runs[i].error = e;
          runs[i].error->with_origin(origin);
        }
        if (runs[i].error && !options.continue_on_error) stop = true;
      },
      [&] { return stop.load(); });

  if (!options.continue_on_error) {
    for (const auto& run : runs) {
      if (run.error) throw *run.error;
    }
  }

  ResultSet results(started);
  std::vector<OriginResult> per_origin;
  for (std::size_t i = 0; i < journals.size(); ++i) {
    OriginResult o;
    o.origin = journals[i].str();
    o.retrieved = runs[i].works.size();
    if (runs[i].error) {
      o.failures = 1;
      o.error = runs[i].error->what();
    }
    auto tag = SourceTag::handsearch(journals[i], qid);
    for (auto& w : runs[i].works) results.add(std::move(w), tag);
    per_origin.push_back(std::move(o));
  }

  ReportContext ctx;
  ctx.data_sources.push_back({"Crossref", client.base_url(), started});
  ctx.config = options.config;
  ctx.continue_on_error = options.continue_on_error;
  auto report = build_report(query, per_origin, results.size(), *clock, ctx);
  return SearchOutcome{std::move(results), std::move(report)};
}

std::vector<std::pair<Issn, std::size_t>> estimate_workload(
    const HandsearchQuery& query, CrossrefClient& client) {
  std::vector<std::pair<Issn, std::size_t>> out;
  for (const auto& issn : query.journals()) {
    out.emplace_back(issn, client.declared_total(issn, query.range(), query.keywords()));
  }
  return out;
}

}  // namespace litfetch
