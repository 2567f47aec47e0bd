#include "litfetch/crossref.hpp"

#include <algorithm>
#include <unordered_set>

#include "litfetch/log.hpp"

namespace litfetch {

namespace {

std::string strip_trailing_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

std::string first_string(const nlohmann::json& item, const char* key) {
  if (!item.contains(key)) return {};
  const auto& v = item[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    for (const auto& e : v) {
      if (e.is_string() && !e.get<std::string>().empty()) {
        return e.get<std::string>();
      }
    }
  }
  return {};
}

std::optional<PartialDate> parse_date_parts(const nlohmann::json& item,
                                            const char* key) {
  if (!item.contains(key) || !item[key].is_object()) return std::nullopt;
  const auto& dp = item[key].value("date-parts", nlohmann::json::array());
  if (!dp.is_array() || dp.empty() || !dp[0].is_array() || dp[0].empty() ||
      !dp[0][0].is_number_integer()) {
    return std::nullopt;
  }
  const auto& parts = dp[0];
  PartialDate d;
  d.year = parts[0].get<int>();
  if (parts.size() > 1 && parts[1].is_number_integer()) {
    auto m = parts[1].get<int>();
    if (m >= 1 && m <= 12) {
      d.month = static_cast<unsigned>(m);
      if (parts.size() > 2 && parts[2].is_number_integer()) {
        auto day = parts[2].get<int>();
        if (day >= 1 &&
            static_cast<unsigned>(day) <= days_in_month(d.year, *d.month)) {
          d.day = static_cast<unsigned>(day);
        }
      }
    }
  }
  return d;
}

// Crossref's "published" is the earlier of print and online publication;
// when a response lacks it (it cannot be selected) derive it the same way.
std::optional<PartialDate> publication_date(const nlohmann::json& item) {
  if (auto d = parse_date_parts(item, "published")) return d;
  auto print = parse_date_parts(item, "published-print");
  auto online = parse_date_parts(item, "published-online");
  if (print && online) {
    return print->earliest() <= online->earliest() ? print : online;
  }
  if (print) return print;
  if (online) return online;
  return parse_date_parts(item, "issued");
}

Error not_found(ErrorKind kind, const std::string& what) {
  return Error(kind, what).with_status(404);
}

}  // namespace

const std::vector<std::string>& default_select_fields() {
  static const std::vector<std::string> kFields = {
      "DOI",       "title",           "author",           "container-title",
      "publisher", "ISSN",            "issued",           "published-print",
      "published-online", "abstract", "subject",          "URL",
      "reference", "references-count", "type"};
  return kFields;
}

std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_tag = false;
  for (char c : text) {
    if (in_tag) {
      if (c == '>') {
        in_tag = false;
        out.push_back(' ');
      }
      continue;
    }
    if (c == '<') {
      in_tag = true;
      continue;
    }
    out.push_back(c);
  }
  static const std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"},
      {"&apos;", "'"}, {"&nbsp;", " "}, {"&amp;", "&"}};
  for (auto [from, to] : kEntities) {
    std::size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  }
  std::string collapsed;
  bool space = false;
  for (char c : out) {
    bool is_ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (is_ws) {
      space = !collapsed.empty();
      continue;
    }
    if (space) collapsed.push_back(' ');
    space = false;
    collapsed.push_back(c);
  }
  return collapsed;
}

WorkMetadata parse_crossref_work(const nlohmann::json& item) {
  if (!item.is_object() || !item.contains("DOI") || !item["DOI"].is_string()) {
    throw Error(ErrorKind::kMalformedResponse, "work item without a DOI");
  }
  Doi doi = [&] {
    try {
      return normalize_doi(item["DOI"].get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorKind::kMalformedResponse, e.message());
    }
  }();
  WorkMetadata w(std::move(doi));
  try {
    w.title = first_string(item, "title");
    if (item.contains("author") && item["author"].is_array()) {
      for (const auto& a : item["author"]) {
        Author au{a.value("family", ""), a.value("given", "")};
        // Consortium authors carry only "name".
        if (au.family.empty() && au.given.empty()) au.family = a.value("name", "");
        if (!au.family.empty() || !au.given.empty()) {
          w.authors.push_back(std::move(au));
        }
      }
    }
    w.container_title = first_string(item, "container-title");
    w.publisher = item.value("publisher", "");
    if (item.contains("ISSN") && item["ISSN"].is_array()) {
      for (const auto& i : item["ISSN"]) {
        if (!i.is_string()) continue;
        try {
          auto issn = validate_issn(i.get<std::string>());
          if (std::find(w.issn_list.begin(), w.issn_list.end(), issn) ==
              w.issn_list.end()) {
            w.issn_list.push_back(issn);
          }
        } catch (const Error&) {
          // Deposited ISSNs occasionally fail the check digit; drop them.
        }
      }
    }
    w.published = publication_date(item);
    if (item.contains("abstract") && item["abstract"].is_string()) {
      auto plain = strip_markup(item["abstract"].get<std::string>());
      if (!plain.empty()) w.abstract = std::move(plain);
    }
    if (item.contains("subject") && item["subject"].is_array()) {
      for (const auto& s : item["subject"]) {
        if (s.is_string()) w.subject_keywords.push_back(s.get<std::string>());
      }
    }
    if (item.contains("URL") && item["URL"].is_string()) {
      w.url = item["URL"].get<std::string>();
    }
    std::unordered_set<Doi> seen;
    if (item.contains("reference") && item["reference"].is_array()) {
      for (const auto& r : item["reference"]) {
        if (!r.is_object() || !r.contains("DOI") || !r["DOI"].is_string()) {
          continue;
        }
        try {
          auto d = normalize_doi(r["DOI"].get<std::string>());
          if (seen.insert(d).second) w.reference_dois.push_back(std::move(d));
        } catch (const Error&) {
        }
      }
    }
    if (item.contains("references-count") &&
        item["references-count"].is_number_unsigned()) {
      w.reference_count_declared = item["references-count"].get<std::size_t>();
    } else if (item.contains("reference-count") &&
               item["reference-count"].is_number_unsigned()) {
      w.reference_count_declared = item["reference-count"].get<std::size_t>();
    }
    w.work_type = item.value("type", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                "bad work " + w.doi.str() + ": " + e.what());
  }
  return w;
}

PartialFetchError::PartialFetchError(const Error& cause,
                                     std::vector<WorkMetadata> partial,
                                     PageCursor resume_from,
                                     std::size_t page_index)
    : Error(cause.kind(), cause.message() + " (page " +
                              std::to_string(page_index) + ")"),
      cause_(cause),
      partial_(std::move(partial)),
      resume_(std::move(resume_from)) {
  with_page(page_index);
  if (cause.origin()) with_origin(*cause.origin());
  if (cause.http_status()) with_status(*cause.http_status());
}

CrossrefClient::CrossrefClient(std::string base_url, std::string resolver_url,
                               ClientPolicy policy,
                               std::shared_ptr<Transport> transport,
                               std::shared_ptr<Cache> cache)
    : base_url_(strip_trailing_slash(std::move(base_url))),
      resolver_url_(strip_trailing_slash(std::move(resolver_url))),
      http_(std::move(policy), std::move(transport), std::move(cache)) {}

void CrossrefClient::add_etiquette(
    std::vector<std::pair<std::string, std::string>>& q) const {
  if (http_.policy().contact_email) {
    q.emplace_back("mailto", *http_.policy().contact_email);
  }
}

std::string CrossrefClient::listing_url(
    const Issn& issn, const DateRange& range, const KeywordList& keywords,
    std::size_t rows, const std::string& cursor,
    const std::vector<std::string>& select) const {
  std::vector<std::pair<std::string, std::string>> q;
  q.emplace_back("filter", "from-pub-date:" + format_date(range.from()) +
                               ",until-pub-date:" + format_date(range.until()));
  q.emplace_back("rows", std::to_string(rows));
  if (!cursor.empty()) q.emplace_back("cursor", cursor);
  if (!keywords.empty()) q.emplace_back("query.bibliographic", keywords.joined());
  if (!select.empty()) {
    std::string s;
    for (const auto& f : select) s += (s.empty() ? "" : ",") + f;
    q.emplace_back("select", s);
  }
  add_etiquette(q);
  return base_url_ + "/journals/" + issn.str() + "/works" + build_query(q);
}

nlohmann::json CrossrefClient::get_message(const std::string& url) {
  auto response = http_.get(url, {{"Accept", "application/json"}});
  if (response.status == 404) {
    throw not_found(ErrorKind::kWorkNotFound, "not found: " + url);
  }
  if (response.status != 200) {
    throw Error(ErrorKind::kUpstreamError,
                "HTTP " + std::to_string(response.status) + " from " + url)
        .with_status(response.status);
  }
  try {
    auto doc = nlohmann::json::parse(response.body);
    if (!doc.is_object() || !doc.contains("message")) {
      throw Error(ErrorKind::kMalformedResponse, "no message in " + url);
    }
    return std::move(doc["message"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                "invalid JSON from " + url + ": " + e.what());
  }
}

WorksPage CrossrefClient::fetch_journal_works_page(
    const Issn& issn, const DateRange& range, const KeywordList& keywords,
    const PageCursor& cursor, const std::vector<std::string>& select) {
  if (cursor.exhausted) {
    throw Error(ErrorKind::kInvalidQuery, "cursor already exhausted");
  }
  std::size_t rows = http_.policy().max_page_size;
  auto url = listing_url(issn, range, keywords, rows, cursor.token, select);
  nlohmann::json message;
  try {
    message = get_message(url);
  } catch (Error& e) {
    e.with_origin(issn.str());
    if (e.kind() == ErrorKind::kWorkNotFound) {
      throw Error(ErrorKind::kUnknownJournal, "no journal with ISSN " + issn.str())
          .with_origin(issn.str())
          .with_token(issn.str())
          .with_status(404);
    }
    throw;
  }
  WorksPage page;
  try {
    page.total_results = message.value("total-results", std::size_t{0});
    const auto& items = message.at("items");
    if (!items.is_array()) {
      throw Error(ErrorKind::kMalformedResponse, "items is not an array");
    }
    for (const auto& item : items) page.works.push_back(parse_crossref_work(item));
    if (page.works.size() < rows) {
      page.next = PageCursor{cursor.token, true};
    } else {
      auto next = message.find("next-cursor");
      if (next == message.end() || !next->is_string()) {
        throw Error(ErrorKind::kMalformedResponse,
                    "full page without next-cursor");
      }
      page.next = PageCursor{next->get<std::string>(), false};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad works listing: ") + e.what())
        .with_origin(issn.str());
  } catch (Error& e) {
    e.with_origin(issn.str());
    throw;
  }
  return page;
}

std::vector<WorkMetadata> CrossrefClient::fetch_all_journal_works(
    const Issn& issn, const DateRange& range, const KeywordList& keywords,
    const DrainOptions& options) {
  std::vector<WorkMetadata> works;
  std::unordered_set<Doi> seen;
  for (const auto& w : options.already_fetched) {
    if (seen.insert(w.doi).second) works.push_back(w);
  }
  PageCursor cursor = options.start;
  std::size_t page_index = options.pages_done;
  std::size_t declared = 0;
  while (!cursor.exhausted) {
    WorksPage page;
    try {
      page = fetch_journal_works_page(issn, range, keywords, cursor,
                                      options.select);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kUnknownJournal) throw;
      throw PartialFetchError(e, std::move(works), cursor, page_index);
    }
    ++page_index;
    declared = page.total_results;
    for (auto& w : page.works) {
      if (seen.insert(w.doi).second) works.push_back(std::move(w));
    }
    cursor = page.next;
    if (options.on_page) {
      options.on_page(OriginProgress{cursor, page_index, works});
    }
    if (options.on_progress) {
      options.on_progress(
          ProgressEvent{issn.str(), works.size(), std::max(declared, works.size())});
    }
  }
  return works;
}

std::size_t CrossrefClient::declared_total(const Issn& issn,
                                           const DateRange& range,
                                           const KeywordList& keywords) {
  auto url = listing_url(issn, range, keywords, 0, "", {});
  try {
    auto message = get_message(url);
    return message.value("total-results", std::size_t{0});
  } catch (Error& e) {
    if (e.kind() == ErrorKind::kWorkNotFound) {
      throw Error(ErrorKind::kUnknownJournal, "no journal with ISSN " + issn.str())
          .with_origin(issn.str())
          .with_token(issn.str())
          .with_status(404);
    }
    e.with_origin(issn.str());
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse, e.what()).with_origin(issn.str());
  }
}

WorkMetadata CrossrefClient::fetch_work(const Doi& doi) {
  std::vector<std::pair<std::string, std::string>> q;
  add_etiquette(q);
  auto url = base_url_ + "/works/" + encode_doi_path(doi.str()) + build_query(q);
  try {
    auto w = parse_crossref_work(get_message(url));
    // Upstream may answer for an alias; keep the key the caller asked for.
    if (w.doi != doi) {
      log::debug("work " + doi.str() + " resolved as " + w.doi.str());
      w.doi = doi;
    }
    return w;
  } catch (Error& e) {
    e.with_origin(doi.str());
    throw;
  }
}

ReferenceList CrossrefClient::fetch_references(const Doi& doi) {
  std::vector<std::pair<std::string, std::string>> q;
  q.emplace_back("select", "DOI,reference,references-count");
  add_etiquette(q);
  auto url = base_url_ + "/works/" + encode_doi_path(doi.str()) + build_query(q);
  nlohmann::json message;
  try {
    message = get_message(url);
  } catch (Error& e) {
    e.with_origin(doi.str());
    throw;
  }
  ReferenceList out;
  std::unordered_set<Doi> seen;
  std::size_t deposited = 0;
  std::size_t without_doi = 0;
  if (message.contains("reference") && message["reference"].is_array()) {
    for (const auto& r : message["reference"]) {
      ++deposited;
      if (!r.is_object() || !r.contains("DOI") || !r["DOI"].is_string()) {
        ++without_doi;
        continue;
      }
      try {
        auto d = normalize_doi(r["DOI"].get<std::string>());
        if (d != doi && seen.insert(d).second) out.dois.push_back(std::move(d));
      } catch (const Error&) {
        ++without_doi;
      }
    }
  }
  if (message.contains("references-count") &&
      message["references-count"].is_number_unsigned()) {
    out.declared = message["references-count"].get<std::size_t>();
  } else if (message.contains("reference-count") &&
             message["reference-count"].is_number_unsigned()) {
    out.declared = message["reference-count"].get<std::size_t>();
  }
  // Declared references but none deposited: the publisher withholds them.
  out.unresolvable = deposited == 0 ? out.declared : without_doi;
  return out;
}

std::vector<JournalRecord> CrossrefClient::lookup_journal(
    std::string_view name_or_issn, std::size_t max_candidates) {
  std::string query = trim(name_or_issn);
  if (query.empty()) {
    throw Error(ErrorKind::kInvalidQuery, "empty journal query");
  }
  auto to_record = [](const nlohmann::json& j) {
    JournalRecord r;
    r.title = j.value("title", "");
    if (j.contains("ISSN") && j["ISSN"].is_array()) {
      for (const auto& i : j["ISSN"]) {
        if (!i.is_string()) continue;
        try {
          r.issns.push_back(validate_issn(i.get<std::string>()));
        } catch (const Error&) {
        }
      }
    }
    return r;
  };
  std::vector<std::pair<std::string, std::string>> q;
  std::optional<Issn> issn;
  try {
    issn = validate_issn(query);
  } catch (const Error&) {
  }
  try {
    if (issn) {
      add_etiquette(q);
      auto message =
          get_message(base_url_ + "/journals/" + issn->str() + build_query(q));
      return {to_record(message)};
    }
    q.emplace_back("query", query);
    q.emplace_back("rows", std::to_string(max_candidates));
    add_etiquette(q);
    auto message = get_message(base_url_ + "/journals" + build_query(q));
    std::vector<JournalRecord> out;
    for (const auto& item : message.value("items", nlohmann::json::array())) {
      if (out.size() >= max_candidates) break;
      out.push_back(to_record(item));
    }
    return out;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kWorkNotFound) {
      throw Error(ErrorKind::kUnknownJournal, "no journal matches " + query)
          .with_token(query)
          .with_status(404);
    }
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse, e.what());
  }
}

NegotiatedRis CrossrefClient::negotiate_ris_detailed(const Doi& doi) {
  auto url = resolver_url_ + "/" + encode_doi_path(doi.str());
  HttpResponse response;
  try {
    response = http_.get(url, {{"Accept", std::string(kRisMediaType)}}, 10);
  } catch (Error& e) {
    e.with_origin(doi.str());
    throw;
  }
  for (const auto& hop : response.redirect_chain) {
    log::debug("content negotiation for " + doi.str() + " redirected via " + hop);
  }
  if (response.status == 404) {
    throw not_found(ErrorKind::kWorkNotFound, "DOI not registered: " + doi.str())
        .with_origin(doi.str());
  }
  if (response.status == 406) {
    throw Error(ErrorKind::kContentTypeUnavailable,
                "resolver cannot produce RIS for " + doi.str())
        .with_origin(doi.str())
        .with_status(406);
  }
  if (response.status != 200) {
    throw Error(ErrorKind::kUpstreamError,
                "HTTP " + std::to_string(response.status) +
                    " negotiating RIS for " + doi.str())
        .with_origin(doi.str())
        .with_status(response.status);
  }
  return NegotiatedRis{std::move(response.body), response.redirect_chain.size()};
}

std::string CrossrefClient::negotiate_ris(const Doi& doi) {
  return negotiate_ris_detailed(doi).text;
}

}  // namespace litfetch
