#pragma once

#include <compare>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace litfetch {

/// A normalized DOI: lowercase, no resolver prefix, starts with "10." and
/// contains a "/". Construct through normalize_doi().
class Doi {
 public:
  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const Doi&, const Doi&) = default;
  friend bool operator==(const Doi&, const Doi&) = default;

 private:
  friend Doi normalize_doi(std::string_view raw);
  explicit Doi(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// Strips "https://doi.org/", "http://dx.doi.org/", "doi:" and similar
/// prefixes, trims whitespace and lowercases. Throws Error(kMalformedDoi).
Doi normalize_doi(std::string_view raw);

/// Splits on commas and line breaks, drops empty tokens, normalizes and
/// removes duplicates keeping the first occurrence. A bad token raises
/// kMalformedDoi with the token and its 0-based position.
std::vector<Doi> parse_doi_list(std::string_view text);

/// Canonical hyphenated ISSN ("NNNN-NNNC") with a valid mod-11 check digit.
class Issn {
 public:
  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const Issn&, const Issn&) = default;
  friend bool operator==(const Issn&, const Issn&) = default;

 private:
  friend Issn validate_issn(std::string_view raw);
  explicit Issn(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// Accepts "0028-0836" or "00280836" (and a lowercase x check character).
/// Throws kMalformedIssn on shape errors, kIssnChecksumFailed otherwise.
Issn validate_issn(std::string_view raw);

/// Computes the ISSN check character ('0'..'9' or 'X') for 7 body digits.
char issn_check_char(std::string_view seven_digits);

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;
  friend bool operator==(const Date&, const Date&) = default;
};

bool is_valid_date(int year, unsigned month, unsigned day);
unsigned days_in_month(int year, unsigned month);

/// Parses "YYYY-MM-DD". Throws kInvalidDateRange with the token on failure.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

/// A date as Crossref reports it: the year is always present, month and day
/// may be missing.
struct PartialDate {
  int year = 0;
  std::optional<unsigned> month;
  std::optional<unsigned> day;

  Date earliest() const;
  Date latest() const;

  friend bool operator==(const PartialDate&, const PartialDate&) = default;
};

/// Inclusive date range with from <= until.
class DateRange {
 public:
  DateRange(Date from, Date until);

  const Date& from() const noexcept { return from_; }
  const Date& until() const noexcept { return until_; }

  bool contains(const Date& d) const { return from_ <= d && d <= until_; }
  // True if any completion of the partial date falls inside the range.
  bool overlaps(const PartialDate& d) const;

  friend bool operator==(const DateRange&, const DateRange&) = default;

 private:
  Date from_;
  Date until_;
};

DateRange parse_date_range(std::string_view from, std::string_view until);

/// Ordered list of search terms. No term may be empty or whitespace-only.
class KeywordList {
 public:
  KeywordList() = default;
  explicit KeywordList(std::vector<std::string> terms);

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }
  std::string joined(std::string_view sep = " ") const;

  friend bool operator==(const KeywordList&, const KeywordList&) = default;

 private:
  std::vector<std::string> terms_;
};

/// Splits a comma-separated keyword flag, trimming each term.
KeywordList parse_keywords(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace litfetch

template <>
struct std::hash<litfetch::Doi> {
  std::size_t operator()(const litfetch::Doi& d) const noexcept {
    return std::hash<std::string>{}(d.str());
  }
};

template <>
struct std::hash<litfetch::Issn> {
  std::size_t operator()(const litfetch::Issn& i) const noexcept {
    return std::hash<std::string>{}(i.str());
  }
};
