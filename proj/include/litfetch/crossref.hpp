#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/cache.hpp"
#include "litfetch/error.hpp"
#include "litfetch/http.hpp"
#include "litfetch/ids.hpp"
#include "litfetch/work.hpp"

namespace litfetch {

inline constexpr std::string_view kCrossrefDefaultUrl = "https://api.crossref.org";
inline constexpr std::string_view kResolverDefaultUrl = "https://doi.org";
inline constexpr std::string_view kRisMediaType =
    "application/x-research-info-systems";
// Filter family used for handsearch date ranges; echoed into reports.
inline constexpr std::string_view kDateFilterFamily =
    "from-pub-date/until-pub-date";

/// Crossref work fields requested through "select" unless overridden.
const std::vector<std::string>& default_select_fields();

struct WorksPage {
  std::vector<WorkMetadata> works;
  PageCursor next;
  std::size_t total_results = 0;
};

struct ProgressEvent {
  std::string origin;
  std::size_t fetched = 0;
  std::size_t declared = 0;
};
using ProgressFn = std::function<void(const ProgressEvent&)>;

struct ReferenceList {
  std::vector<Doi> dois;
  // References without a DOI, or the declared count when none were deposited.
  std::size_t unresolvable = 0;
  std::size_t declared = 0;
};

struct JournalRecord {
  std::string title;
  std::vector<Issn> issns;
};

struct NegotiatedRis {
  std::string text;
  std::size_t redirect_hops = 0;
};

/// Raised by fetch_all_journal_works when a page fails after retries. Carries
/// everything fetched before the failure and the cursor to resume from.
class PartialFetchError : public Error {
 public:
  PartialFetchError(const Error& cause, std::vector<WorkMetadata> partial,
                    PageCursor resume_from, std::size_t page_index);

  const Error& cause() const noexcept { return cause_; }
  const std::vector<WorkMetadata>& partial() const noexcept { return partial_; }
  const PageCursor& resume_from() const noexcept { return resume_; }

 private:
  Error cause_;
  std::vector<WorkMetadata> partial_;
  PageCursor resume_;
};

/// Hooks for draining a journal listing.
struct DrainOptions {
  PageCursor start = PageCursor::initial();
  // Works already fetched by an earlier, interrupted run.
  std::vector<WorkMetadata> already_fetched;
  std::size_t pages_done = 0;
  ProgressFn on_progress;
  // Invoked after every page with the cumulative state.
  std::function<void(const OriginProgress&)> on_page;
  std::vector<std::string> select = default_select_fields();
};

/// Converts one Crossref "work" message object. Throws kMalformedResponse.
WorkMetadata parse_crossref_work(const nlohmann::json& item);

/// Removes JATS/HTML markup from an abstract and collapses whitespace.
std::string strip_markup(std::string_view text);

class CrossrefClient {
 public:
  CrossrefClient(std::string base_url, std::string resolver_url,
                 ClientPolicy policy,
                 std::shared_ptr<Transport> transport = nullptr,
                 std::shared_ptr<Cache> cache = nullptr);

  WorksPage fetch_journal_works_page(
      const Issn& issn, const DateRange& range, const KeywordList& keywords,
      const PageCursor& cursor,
      const std::vector<std::string>& select = default_select_fields());

  /// Drains the cursor; intra-journal duplicates are dropped (first wins).
  std::vector<WorkMetadata> fetch_all_journal_works(
      const Issn& issn, const DateRange& range, const KeywordList& keywords,
      const DrainOptions& options = {});

  /// Upstream total-results for the listing without fetching works.
  std::size_t declared_total(const Issn& issn, const DateRange& range,
                             const KeywordList& keywords);

  WorkMetadata fetch_work(const Doi& doi);
  ReferenceList fetch_references(const Doi& doi);
  std::vector<JournalRecord> lookup_journal(std::string_view name_or_issn,
                                            std::size_t max_candidates = 20);
  std::string negotiate_ris(const Doi& doi);
  NegotiatedRis negotiate_ris_detailed(const Doi& doi);

  HttpStats stats() const { return http_.stats(); }
  const ClientPolicy& policy() const noexcept { return http_.policy(); }
  const std::string& base_url() const noexcept { return base_url_; }
  const std::string& resolver_url() const noexcept { return resolver_url_; }

 private:
  std::string listing_url(const Issn& issn, const DateRange& range,
                          const KeywordList& keywords, std::size_t rows,
                          const std::string& cursor,
                          const std::vector<std::string>& select) const;
  nlohmann::json get_message(const std::string& url);
  void add_etiquette(std::vector<std::pair<std::string, std::string>>& q) const;

  std::string base_url_;
  std::string resolver_url_;
  HttpExecutor http_;
};

}  // namespace litfetch
