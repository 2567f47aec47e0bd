#pragma once

#include "litfetch/coci.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/query.hpp"
#include "litfetch/search.hpp"

namespace litfetch {

inline constexpr std::string_view kNoCitationsFlag = "no citations found";

/// Union of the seeds' Crossref reference lists, seeds excluded. A seed
/// Crossref does not know aborts the run unless continue_on_error is set.
SearchOutcome snowball_backward(const SnowballQuery& query, CrossrefClient& crossref,
                                const SearchOptions& options = {});

/// Union of the works COCI lists as citing each seed, seeds excluded.
/// Hydration, when requested, goes through `crossref`.
SearchOutcome snowball_forward(const SnowballQuery& query, CociClient& coci,
                               CrossrefClient& crossref,
                               const SearchOptions& options = {});

/// Dispatches on the query's direction.
SearchOutcome run_snowball(const SnowballQuery& query, CociClient& coci,
                           CrossrefClient& crossref,
                           const SearchOptions& options = {});

/// Replaces DOI-only entries with full Crossref metadata. Entries that
/// cannot be resolved stay DOI-only; returns how many failed. Membership
/// and order never change.
std::size_t hydrate(ResultSet& results, CrossrefClient& crossref,
                    std::size_t parallelism);

}  // namespace litfetch
