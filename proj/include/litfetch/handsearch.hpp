#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "litfetch/crossref.hpp"
#include "litfetch/query.hpp"
#include "litfetch/search.hpp"

namespace litfetch {

/// Fetches every work of every journal in the query's date range and merges
/// the per-journal sets in input order.
///
/// Without continue_on_error the first failing journal (in input order)
/// aborts the run: the error is rethrown with the ISSN as origin and no
/// result set is produced. Progress recorded up to that point survives in
/// options.progress_store, so a rerun with resume=true picks up there.
SearchOutcome run_handsearch(const HandsearchQuery& query, CrossrefClient& client,
                             const SearchOptions& options = {});

/// Upstream declared totals, one lightweight request per journal.
std::vector<std::pair<Issn, std::size_t>> estimate_workload(
    const HandsearchQuery& query, CrossrefClient& client);

}  // namespace litfetch
