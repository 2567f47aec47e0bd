#include "litfetch/resultset.hpp"

#include <algorithm>

#include "litfetch/error.hpp"
#include "litfetch/log.hpp"

namespace litfetch {

std::string_view search_kind_name(SearchKind kind) {
  switch (kind) {
    case SearchKind::kHandsearch: return "handsearch";
    case SearchKind::kSnowballForward: return "snowball-forward";
    case SearchKind::kSnowballBackward: return "snowball-backward";
  }
  return "handsearch";
}

SearchKind parse_search_kind(std::string_view name) {
  if (name == "handsearch") return SearchKind::kHandsearch;
  if (name == "snowball-forward") return SearchKind::kSnowballForward;
  if (name == "snowball-backward") return SearchKind::kSnowballBackward;
  throw Error(ErrorKind::kInvalidQuery,
              "unknown source kind '" + std::string(name) + "'");
}

SourceTag SourceTag::handsearch(Issn journal, std::string query_id) {
  return SourceTag(SearchKind::kHandsearch, journal.str(), std::move(query_id));
}

SourceTag SourceTag::snowball(SearchKind kind, Doi seed, std::string query_id) {
  if (kind == SearchKind::kHandsearch) {
    throw Error(ErrorKind::kInvalidQuery, "snowball tag needs a snowball kind");
  }
  return SourceTag(kind, seed.str(), std::move(query_id));
}

bool ResultSet::add(WorkMetadata work, SourceTag tag) {
  return add(std::move(work), std::vector<SourceTag>{std::move(tag)});
}

bool ResultSet::add(WorkMetadata work, std::vector<SourceTag> tags) {
  if (tags.empty()) {
    throw Error(ErrorKind::kInvalidQuery,
                "result entry " + work.doi.str() + " has no provenance");
  }
  auto it = index_.find(work.doi);
  if (it == index_.end()) {
    std::vector<SourceTag> unique;
    for (auto& t : tags) {
      if (std::find(unique.begin(), unique.end(), t) == unique.end()) {
        unique.push_back(std::move(t));
      }
    }
    index_.emplace(work.doi, entries_.size());
    entries_.push_back(ResultEntry{std::move(work), std::move(unique)});
    return true;
  }
  auto& entry = entries_[it->second];
  if (!(entry.work == work) && !work.title.empty()) {
    log::debug("divergent metadata for " + work.doi.str() +
               "; keeping the first retrieval");
  }
  for (auto& t : tags) {
    if (std::find(entry.provenance.begin(), entry.provenance.end(), t) ==
        entry.provenance.end()) {
      entry.provenance.push_back(std::move(t));
    }
  }
  return false;
}

const ResultEntry* ResultSet::find(const Doi& doi) const {
  auto it = index_.find(doi);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void ResultSet::replace_work(const Doi& doi, WorkMetadata work) {
  auto it = index_.find(doi);
  if (it == index_.end() || work.doi != doi) {
    throw Error(ErrorKind::kInvalidQuery, "cannot replace " + doi.str());
  }
  entries_[it->second].work = std::move(work);
}

ResultSet merge(const ResultSet& a, const ResultSet& b) {
  ResultSet out(a.created_at());
  for (const auto& e : a.entries()) out.add(e.work, e.provenance);
  for (const auto& e : b.entries()) out.add(e.work, e.provenance);
  return out;
}

ResultSet filter_by_daterange(const ResultSet& rs, const DateRange& range) {
  ResultSet out(rs.created_at());
  for (const auto& e : rs.entries()) {
    if (!e.work.published || range.overlaps(*e.work.published)) {
      out.add(e.work, e.provenance);
    }
  }
  return out;
}

std::vector<Doi> doi_set(const ResultSet& rs) {
  std::vector<Doi> out;
  out.reserve(rs.size());
  for (const auto& e : rs.entries()) out.push_back(e.work.doi);
  return out;
}

nlohmann::json to_json(const ResultSet& rs) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : rs.entries()) {
    nlohmann::json prov = nlohmann::json::array();
    for (const auto& t : e.provenance) {
      prov.push_back({{"kind", search_kind_name(t.kind())},
                      {"origin", t.origin()},
                      {"query_id", t.query_id()}});
    }
    entries.push_back({{"work", to_json(e.work)}, {"provenance", prov}});
  }
  return {{"created_at", format_timestamp(rs.created_at())},
          {"entries", std::move(entries)}};
}

ResultSet resultset_from_json(const nlohmann::json& j) {
  try {
    ResultSet rs(parse_timestamp(j.at("created_at").get<std::string>()));
    for (const auto& e : j.at("entries")) {
      std::vector<SourceTag> tags;
      for (const auto& t : e.at("provenance")) {
        auto kind = parse_search_kind(t.at("kind").get<std::string>());
        auto origin = t.at("origin").get<std::string>();
        auto qid = t.at("query_id").get<std::string>();
        tags.push_back(kind == SearchKind::kHandsearch
                           ? SourceTag::handsearch(validate_issn(origin), qid)
                           : SourceTag::snowball(kind, normalize_doi(origin), qid));
      }
      rs.add(work_from_json(e.at("work")), std::move(tags));
    }
    return rs;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad result set document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad result set document: ") + e.what());
  }
}

}  // namespace litfetch
