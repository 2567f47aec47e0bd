#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/clock.hpp"
#include "litfetch/query.hpp"
#include "litfetch/resultset.hpp"

namespace litfetch {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Outcome { kSuccess, kPartial, kAborted };
std::string_view outcome_name(Outcome o);

struct DataSource {
  std::string name;
  std::string base_url;
  Timestamp queried_at;
};

/// What one origin (journal or seed) contributed.
struct OriginResult {
  std::string origin;
  std::size_t retrieved = 0;
  std::size_t failures = 0;
  std::size_t unresolvable = 0;
  std::optional<std::string> error;
  // Free-form markers such as "no citations found".
  std::vector<std::string> flags;
};

struct ExportSummary {
  std::string format;  // doi | csv | ris
  std::string mode;    // assembled | negotiated (ris only)
  std::size_t records = 0;
  std::size_t fallbacks = 0;
};

struct SearchReport {
  std::string tool_version{kToolVersion};
  std::string kind;  // handsearch | snowball-forward | snowball-backward
  std::string query_id;
  nlohmann::json query;
  std::vector<DataSource> data_sources;
  std::vector<OriginResult> per_origin_counts;
  std::size_t total_unique = 0;
  std::size_t duplicates_removed = 0;
  std::size_t seeds_excluded = 0;
  std::size_t hydration_failures = 0;
  std::vector<std::string> caveats;
  std::vector<std::string> notes;
  Outcome outcome = Outcome::kSuccess;
  std::map<std::string, std::string> config;
  Timestamp generated_at;
  std::optional<ExportSummary> export_summary;
};

/// Extra context a search run knows beyond the per-origin counts.
struct ReportContext {
  std::vector<DataSource> data_sources;
  std::map<std::string, std::string> config;
  std::size_t seeds_excluded = 0;
  std::size_t hydration_failures = 0;
  bool continue_on_error = false;
  bool aborted = false;
};

/// Assembles the report and its caveats. Throws kInconsistentCounts when
/// the origins do not match the query or the counts cannot add up.
SearchReport build_report(const AnyQuery& query,
                          const std::vector<OriginResult>& per_origin,
                          std::size_t total_unique, const Clock& clock,
                          const ReportContext& context = {});

enum class ReportFormat { kStructured, kHuman };

nlohmann::json report_to_json(const SearchReport& r);
SearchReport report_from_json(const nlohmann::json& j);

/// Structured form: key-sorted JSON, two-space indent, trailing newline.
/// Human form: a plain-text summary with a "Failures" section when needed.
std::string render_report(const SearchReport& r, ReportFormat format);

}  // namespace litfetch
