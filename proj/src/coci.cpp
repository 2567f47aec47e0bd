#include "litfetch/coci.hpp"

#include <set>

#include "litfetch/error.hpp"
#include "litfetch/log.hpp"

namespace litfetch {

std::optional<PartialDate> parse_coci_date(std::string_view text) {
  std::string s = trim(text);
  auto digits = [&](std::size_t off, std::size_t len) -> std::optional<int> {
    if (off + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = off; i < off + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() != 4 && s.size() != 7 && s.size() != 10) return std::nullopt;
  auto y = digits(0, 4);
  if (!y) return std::nullopt;
  PartialDate d;
  d.year = *y;
  if (s.size() >= 7) {
    auto m = digits(5, 2);
    if (s[4] != '-' || !m || *m < 1 || *m > 12) return std::nullopt;
    d.month = static_cast<unsigned>(*m);
  }
  if (s.size() == 10) {
    auto day = digits(8, 2);
    if (s[7] != '-' || !day ||
        !is_valid_date(d.year, *d.month, static_cast<unsigned>(*day))) {
      return std::nullopt;
    }
    d.day = static_cast<unsigned>(*day);
  }
  return d;
}

std::optional<Doi> parse_coci_identifier(std::string_view text) {
  std::string s = trim(text);
  std::size_t start = 0;
  while (start < s.size()) {
    auto end = s.find(' ', start);
    std::string token = s.substr(start, end == std::string::npos ? end : end - start);
    if (token.rfind("coci =>", 0) == 0) token = trim(token.substr(7));
    if (token.rfind("doi:", 0) == 0 || token.rfind("10.", 0) == 0) {
      try {
        return normalize_doi(token);
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return std::nullopt;
}

CociClient::CociClient(std::string base_url, ClientPolicy policy,
                       std::shared_ptr<Transport> transport,
                       std::shared_ptr<Cache> cache)
    : base_url_(std::move(base_url)),
      http_(std::move(policy), std::move(transport), std::move(cache)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::vector<CitationEdge> CociClient::fetch_citing(const Doi& doi) {
  std::string url = base_url_ + "/citations/" + encode_doi_path(doi.str());
  Headers headers{{"Accept", "application/json"}};
  HttpResponse response;
  try {
    response = http_.get(url + "?format=json", headers);
  } catch (Error& e) {
    e.with_origin(doi.str());
    throw;
  }
  if (response.status == 404) return {};
  if (response.status != 200) {
    throw Error(ErrorKind::kUpstreamError,
                "HTTP " + std::to_string(response.status) + " from " + url)
        .with_origin(doi.str())
        .with_status(response.status);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                "invalid JSON from " + url + ": " + e.what())
        .with_origin(doi.str());
  }
  if (!doc.is_array()) {
    throw Error(ErrorKind::kMalformedResponse, "expected an array from " + url)
        .with_origin(doi.str());
  }
  std::vector<CitationEdge> edges;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rec : doc) {
    if (!rec.is_object() || !rec.contains("citing") ||
        !rec["citing"].is_string() || !rec.contains("cited") ||
        !rec["cited"].is_string()) {
      throw Error(ErrorKind::kMalformedResponse,
                  "citation record without citing/cited from " + url)
          .with_origin(doi.str());
    }
    auto citing = parse_coci_identifier(rec["citing"].get<std::string>());
    auto cited = parse_coci_identifier(rec["cited"].get<std::string>());
    if (!citing || !cited) {
      log::debug("skipping COCI record with unparseable DOI for " + doi.str());
      continue;
    }
    if (*cited != doi || *citing == *cited) continue;
    if (!seen.emplace(citing->str(), cited->str()).second) continue;
    std::optional<PartialDate> created;
    if (rec.contains("creation") && rec["creation"].is_string()) {
      created = parse_coci_date(rec["creation"].get<std::string>());
    }
    edges.push_back(CitationEdge{*citing, *cited, created});
  }
  return edges;
}

}  // namespace litfetch
