#include "litfetch/ids.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <unordered_set>

#include "litfetch/error.hpp"

namespace litfetch {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// Longest prefixes first so "https://dx.doi.org/" wins over "https://".
constexpr std::array<std::string_view, 9> kDoiPrefixes = {
    "https://dx.doi.org/", "http://dx.doi.org/", "https://doi.org/",
    "http://doi.org/",     "dx.doi.org/",        "doi.org/10.",
    "doi: ",               "doi:",               "info:doi/",
};

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

Doi normalize_doi(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) {
    throw Error(ErrorKind::kMalformedDoi, "empty DOI").with_token(s);
  }
  std::string_view rest = s;
  for (auto prefix : kDoiPrefixes) {
    if (starts_with_icase(rest, prefix)) {
      // "doi.org/10." is matched to catch a bare host, keep the "10.".
      if (prefix == "doi.org/10.") {
        rest.remove_prefix(std::string_view("doi.org/").size());
      } else {
        rest.remove_prefix(prefix.size());
      }
      break;
    }
  }
  std::string value = to_lower(trim(rest));
  if (value.rfind("10.", 0) != 0) {
    throw Error(ErrorKind::kMalformedDoi,
                "'" + std::string(raw) + "' does not start with \"10.\"")
        .with_token(std::string(raw));
  }
  auto slash = value.find('/');
  if (slash == std::string::npos || slash == 3 || slash + 1 == value.size()) {
    throw Error(ErrorKind::kMalformedDoi,
                "'" + std::string(raw) + "' lacks a registrant/suffix separator")
        .with_token(std::string(raw));
  }
  if (std::any_of(value.begin(), value.end(), [](unsigned char c) {
        return std::iscntrl(c) != 0 || c == ' ';
      })) {
    throw Error(ErrorKind::kMalformedDoi,
                "'" + std::string(raw) + "' contains whitespace")
        .with_token(std::string(raw));
  }
  return Doi(std::move(value));
}

std::vector<Doi> parse_doi_list(std::string_view text) {
  std::vector<Doi> out;
  std::unordered_set<Doi> seen;
  std::size_t position = 0;
  std::size_t start = 0;
  auto flush = [&](std::string_view token) {
    std::string t = trim(token);
    if (t.empty()) return;
    try {
      Doi d = normalize_doi(t);
      if (seen.insert(d).second) out.push_back(std::move(d));
    } catch (Error& e) {
      e.with_token(t).with_position(position);
      throw;
    }
    ++position;
  };
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',' || text[i] == '\n' ||
        text[i] == '\r') {
      flush(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

char issn_check_char(std::string_view seven_digits) {
  int sum = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    sum += (seven_digits[i] - '0') * static_cast<int>(8 - i);
  }
  int check = (11 - sum % 11) % 11;
  return check == 10 ? 'X' : static_cast<char>('0' + check);
}

Issn validate_issn(std::string_view raw) {
  std::string s = trim(raw);
  std::string digits;
  if (s.size() == 9 && s[4] == '-') {
    digits = s.substr(0, 4) + s.substr(5);
  } else if (s.size() == 8) {
    digits = s;
  } else {
    throw Error(ErrorKind::kMalformedIssn,
                "'" + s + "' is not of the form NNNN-NNNC")
        .with_token(s);
  }
  if (digits[7] == 'x') digits[7] = 'X';
  for (std::size_t i = 0; i < 8; ++i) {
    bool ok = std::isdigit(static_cast<unsigned char>(digits[i])) != 0 ||
              (i == 7 && digits[i] == 'X');
    if (!ok) {
      throw Error(ErrorKind::kMalformedIssn,
                  "'" + s + "' has a non-digit at position " +
                      std::to_string(i))
          .with_token(s);
    }
  }
  if (issn_check_char(digits) != digits[7]) {
    throw Error(ErrorKind::kIssnChecksumFailed,
                "'" + s + "' fails the mod-11 check digit")
        .with_token(s);
  }
  return Issn(digits.substr(0, 4) + "-" + digits.substr(4));
}

bool is_valid_date(int year, unsigned month, unsigned day) {
  if (year < 1 || year > 9999 || month < 1 || month > 12 || day < 1) {
    return false;
  }
  return day <= days_in_month(year, month);
}

unsigned days_in_month(int year, unsigned month) {
  static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                     31, 31, 30, 31, 30, 31};
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) return 29;
  return kDays[month - 1];
}

Date parse_date(std::string_view text) {
  std::string s = trim(text);
  auto bad = [&]() {
    return Error(ErrorKind::kInvalidDateRange,
                 "invalid DateRange: '" + s + "' is not a YYYY-MM-DD date")
        .with_token(s);
  };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse = [&](std::size_t off, std::size_t len, auto& v) {
    for (std::size_t i = off; i < off + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw bad();
    }
    std::from_chars(s.data() + off, s.data() + off + len, v);
  };
  parse(0, 4, y);
  parse(5, 2, m);
  parse(8, 2, d);
  if (!is_valid_date(y, m, d)) throw bad();
  return Date{y, m, d};
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", date.year, date.month,
                date.day);
  return buf;
}

Date PartialDate::earliest() const {
  return Date{year, month.value_or(1), month && day ? *day : 1u};
}

Date PartialDate::latest() const {
  unsigned m = month.value_or(12);
  unsigned d = month && day ? *day : days_in_month(year, m);
  return Date{year, m, d};
}

DateRange::DateRange(Date from, Date until) : from_(from), until_(until) {
  if (!is_valid_date(from.year, from.month, from.day) ||
      !is_valid_date(until.year, until.month, until.day)) {
    throw Error(ErrorKind::kInvalidDateRange,
                "invalid DateRange: not a calendar date");
  }
  if (until < from) {
    throw Error(ErrorKind::kInvalidDateRange,
                "invalid DateRange: from " + format_date(from) +
                    " is after until " + format_date(until));
  }
}

bool DateRange::overlaps(const PartialDate& d) const {
  return d.earliest() <= until_ && from_ <= d.latest();
}

DateRange parse_date_range(std::string_view from, std::string_view until) {
  return DateRange(parse_date(from), parse_date(until));
}

KeywordList::KeywordList(std::vector<std::string> terms)
    : terms_(std::move(terms)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (trim(terms_[i]).empty()) {
      throw Error(ErrorKind::kInvalidKeyword, "keyword term is empty")
          .with_position(i);
    }
  }
}

std::string KeywordList::joined(std::string_view sep) const {
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) out += sep;
    out += terms_[i];
  }
  return out;
}

KeywordList parse_keywords(std::string_view text) {
  std::vector<std::string> terms;
  if (trim(text).empty()) return KeywordList(std::vector<std::string>{});
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      std::string t = trim(text.substr(start, i - start));
      if (t.empty()) {
        throw Error(ErrorKind::kInvalidKeyword,
                    "empty keyword at term " + std::to_string(terms.size() + 1))
            .with_position(start);
      }
      terms.push_back(std::move(t));
      start = i + 1;
    }
  }
  return KeywordList(std::move(terms));
}

}  // namespace litfetch
