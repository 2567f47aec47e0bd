#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/clock.hpp"
#include "litfetch/ids.hpp"
#include "litfetch/work.hpp"

namespace litfetch {

enum class SearchKind { kHandsearch, kSnowballForward, kSnowballBackward };

std::string_view search_kind_name(SearchKind kind);
SearchKind parse_search_kind(std::string_view name);

/// Where an entry came from: the journal searched or the seed chased.
class SourceTag {
 public:
  static SourceTag handsearch(Issn journal, std::string query_id);
  static SourceTag snowball(SearchKind kind, Doi seed, std::string query_id);

  SearchKind kind() const noexcept { return kind_; }
  const std::string& origin() const noexcept { return origin_; }
  const std::string& query_id() const noexcept { return query_id_; }

  friend bool operator==(const SourceTag&, const SourceTag&) = default;

 private:
  SourceTag(SearchKind kind, std::string origin, std::string query_id)
      : kind_(kind), origin_(std::move(origin)), query_id_(std::move(query_id)) {}

  SearchKind kind_;
  std::string origin_;
  std::string query_id_;
};

struct ResultEntry {
  WorkMetadata work;
  std::vector<SourceTag> provenance;
};

/// DOI-unique, insertion-ordered collection of works with provenance.
class ResultSet {
 public:
  explicit ResultSet(Timestamp created_at = {}) : created_at_(created_at) {}

  /// Adds a work, or extends provenance if the DOI is already present (the
  /// stored metadata is kept). Returns true when a new entry was created.
  bool add(WorkMetadata work, SourceTag tag);
  bool add(WorkMetadata work, std::vector<SourceTag> tags);

  const std::vector<ResultEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(const Doi& doi) const { return index_.count(doi) > 0; }
  const ResultEntry* find(const Doi& doi) const;
  Timestamp created_at() const noexcept { return created_at_; }

  // Replaces the metadata of an existing entry (hydration). DOI must match.
  void replace_work(const Doi& doi, WorkMetadata work);

 private:
  std::vector<ResultEntry> entries_;
  std::unordered_map<Doi, std::size_t> index_;
  Timestamp created_at_;
};

/// DOI-keyed union. Left metadata wins on collision; provenance lists are
/// concatenated and deduplicated. Order: all of `a`, then b-only entries.
ResultSet merge(const ResultSet& a, const ResultSet& b);

/// Keeps entries whose publication date may fall inside the range. Works
/// without a date are kept.
ResultSet filter_by_daterange(const ResultSet& rs, const DateRange& range);

std::vector<Doi> doi_set(const ResultSet& rs);

nlohmann::json to_json(const ResultSet& rs);
ResultSet resultset_from_json(const nlohmann::json& j);

}  // namespace litfetch
