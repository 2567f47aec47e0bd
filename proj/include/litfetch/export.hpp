#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "litfetch/crossref.hpp"
#include "litfetch/report.hpp"
#include "litfetch/resultset.hpp"

namespace litfetch {

/// One DOI per line, LF, trailing newline, nothing else.
std::string to_doi_text(const ResultSet& rs);

inline constexpr std::string_view kCsvHeader =
    "DOI,Title,Authors,Journal,Publisher,Year,Month,Day,Abstract,URL";

struct CsvOptions {
  bool crlf = false;
};

/// RFC 4180 table with the fixed kCsvHeader columns.
std::string to_csv(const ResultSet& rs, const CsvOptions& options = {});
std::string csv_escape(std::string_view field);

struct RisField {
  std::string tag;
  std::string value;

  friend bool operator==(const RisField&, const RisField&) = default;
};

/// Ordered tag/value pairs framed by TY (first) and ER (last, empty value).
struct RisRecord {
  std::vector<RisField> fields;

  friend bool operator==(const RisRecord&, const RisRecord&) = default;
};

// Throws kInvalidRecord describing the first violated rule.
void validate_ris(const RisRecord& r);
/// "TAG  - value\n" per field. Throws kInvalidRecord.
std::string ris_serialize(const RisRecord& r);
/// Reads LF or CRLF text with optional BOM. Blank lines are skipped.
/// Throws kParseError with the 1-based line number as position.
std::vector<RisRecord> ris_parse(std::string_view text);

/// Maps metadata onto RIS tags (TY TI AU JO PY DA AB DO UR PB SN ER).
RisRecord ris_from_work(const WorkMetadata& w);

enum class RisMode { kAssembled, kNegotiated };
std::string_view ris_mode_name(RisMode mode);

struct RisExport {
  std::string text;
  std::size_t records = 0;
  // Negotiated-mode entries that were assembled locally instead.
  std::size_t fallbacks = 0;
};

/// Records separated by one blank line. Negotiated mode asks the resolver
/// for every DOI and falls back to the assembled record whenever the answer
/// is missing or is not exactly one valid record. `client` is only used in
/// negotiated mode.
RisExport to_ris(const ResultSet& rs, RisMode mode = RisMode::kAssembled,
                 CrossrefClient* client = nullptr);

}  // namespace litfetch
