#include "litfetch/export.hpp"

#include <cstdio>

#include "litfetch/error.hpp"
#include "litfetch/log.hpp"

namespace litfetch {

std::string to_doi_text(const ResultSet& rs) {
  std::string out;
  for (const auto& e : rs.entries()) {
    out += e.work.doi.str();
    out += '\n';
  }
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string author_name(const Author& a) {
  if (a.family.empty()) return a.given;
  if (a.given.empty()) return a.family;
  return a.family + ", " + a.given;
}

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

}  // namespace

std::string to_csv(const ResultSet& rs, const CsvOptions& options) {
  const char* eol = options.crlf ? "\r\n" : "\n";
  std::string out(kCsvHeader);
  out += eol;
  for (const auto& e : rs.entries()) {
    const auto& w = e.work;
    std::string authors;
    for (std::size_t i = 0; i < w.authors.size(); ++i) {
      if (i) authors += "; ";
      authors += author_name(w.authors[i]);
    }
    std::string year, month, day;
    if (w.published) {
      year = std::to_string(w.published->year);
      if (w.published->month) month = two_digits(*w.published->month);
      if (w.published->day) day = two_digits(*w.published->day);
    }
    const std::string cells[] = {w.doi.str(),       w.title,
                                 authors,           w.container_title,
                                 w.publisher,       year,
                                 month,             day,
                                 w.abstract.value_or(""), w.url.value_or("")};
    for (std::size_t i = 0; i < std::size(cells); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += eol;
  }
  return out;
}

namespace {

bool valid_tag(std::string_view tag) {
  if (tag.size() != 2) return false;
  for (char c : tag) {
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
  }
  return true;
}

bool has_control(std::string_view v) {
  for (unsigned char c : v) {
    if (c < 0x20 || c == 0x7f) return true;
  }
  return false;
}

[[noreturn]] void invalid(const std::string& why) {
  throw Error(ErrorKind::kInvalidRecord, why);
}

// Values must be single-line: control characters become spaces.
std::string single_line(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  bool space = false;
  for (unsigned char c : v) {
    bool ws = c < 0x20 || c == 0x7f || c == ' ';
    if (ws) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(c);
  }
  return out;
}

}  // namespace

void validate_ris(const RisRecord& r) {
  const auto& f = r.fields;
  if (f.size() < 2) invalid("record needs at least TY and ER");
  if (f.front().tag != "TY") invalid("first tag must be TY, got " + f.front().tag);
  if (f.front().value.empty()) invalid("TY must have a value");
  if (f.back().tag != "ER") invalid("last tag must be ER, got " + f.back().tag);
  if (!f.back().value.empty()) invalid("ER must have an empty value");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!valid_tag(f[i].tag)) invalid("bad tag '" + f[i].tag + "'");
    if (has_control(f[i].value)) invalid("value of " + f[i].tag + " is not single-line");
    if (i > 0 && i + 1 < f.size() && (f[i].tag == "TY" || f[i].tag == "ER")) {
      invalid(f[i].tag + " may only frame the record");
    }
  }
}

std::string ris_serialize(const RisRecord& r) {
  validate_ris(r);
  std::string out;
  for (const auto& f : r.fields) {
    out += f.tag;
    out += "  - ";
    out += f.value;
    out += '\n';
  }
  return out;
}

std::vector<RisRecord> ris_parse(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<RisRecord> out;
  std::optional<RisRecord> current;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::kParseError,
                "line " + std::to_string(line_no) + ": " + why)
        .with_position(line_no);
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      continue;
    }
    std::string_view tag = line.substr(0, 2);
    bool shaped = line.size() >= 5 && valid_tag(tag) && line.substr(2, 3) == "  -" &&
                  (line.size() == 5 || line[5] == ' ');
    if (!shaped) fail("expected 'TAG  - value', got '" + std::string(line) + "'");
    std::string value = line.size() > 6 ? std::string(line.substr(6)) : "";
    if (has_control(value)) fail("control character in value");
    if (!current) {
      if (tag != "TY") fail("record must start with TY");
      if (value.empty()) fail("TY must have a value");
      current.emplace();
    }
    current->fields.push_back({std::string(tag), value});
    if (tag == "ER") {
      if (!value.empty()) fail("ER must have an empty value");
      out.push_back(std::move(*current));
      current.reset();
    }
  }
  if (current) {
    ++line_no;
    fail("record not terminated by ER");
  }
  return out;
}

RisRecord ris_from_work(const WorkMetadata& w) {
  RisRecord r;
  auto add = [&](const char* tag, std::string_view value) {
    auto v = single_line(value);
    if (!v.empty()) r.fields.push_back({tag, std::move(v)});
  };
  add("TY", w.work_type == "journal-article" ? "JOUR" : "GEN");
  add("TI", w.title);
  for (const auto& a : w.authors) add("AU", author_name(a));
  add("JO", w.container_title);
  if (w.published) {
    std::string y = std::to_string(w.published->year);
    add("PY", y);
    std::string da = y;
    if (w.published->month) {
      da += "/" + two_digits(*w.published->month);
      if (w.published->day) da += "/" + two_digits(*w.published->day);
    }
    add("DA", da);
  }
  if (w.abstract) add("AB", *w.abstract);
  add("DO", w.doi.str());
  if (w.url) add("UR", *w.url);
  add("PB", w.publisher);
  if (!w.issn_list.empty()) add("SN", w.issn_list.front().str());
  r.fields.push_back({"ER", ""});
  return r;
}

std::string_view ris_mode_name(RisMode mode) {
  return mode == RisMode::kNegotiated ? "negotiated" : "assembled";
}

RisExport to_ris(const ResultSet& rs, RisMode mode, CrossrefClient* client) {
  if (mode == RisMode::kNegotiated && !client) {
    throw Error(ErrorKind::kInvalidQuery, "negotiated RIS export needs a client");
  }
  RisExport out;
  for (const auto& e : rs.entries()) {
    std::string record;
    if (mode == RisMode::kNegotiated) {
      try {
        auto parsed = ris_parse(client->negotiate_ris(e.work.doi));
        if (parsed.size() == 1) {
          record = ris_serialize(parsed.front());
        } else {
          log::warn("resolver returned " + std::to_string(parsed.size()) +
                    " RIS records for " + e.work.doi.str());
        }
      } catch (const Error& err) {
        log::warn("negotiation failed for " + e.work.doi.str() + ": " + err.what());
      }
      if (record.empty()) ++out.fallbacks;
    }
    if (record.empty()) record = ris_serialize(ris_from_work(e.work));
    if (out.records) out.text += '\n';
    out.text += record;
    ++out.records;
  }
  return out;
}

}  // namespace litfetch
