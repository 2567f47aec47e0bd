#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/ids.hpp"

namespace litfetch {

enum class Direction { kForward, kBackward };

std::string_view direction_name(Direction d);
// Throws Error(kInvalidQuery) naming the value.
Direction parse_direction(std::string_view text);

/// A complete handsearch specification: journals, inclusive publication
/// date range, optional keyword refinement.
class HandsearchQuery {
 public:
  HandsearchQuery(std::vector<Issn> journals, DateRange range,
                  KeywordList keywords = {},
                  std::vector<std::string> requested_fields = {});

  const std::vector<Issn>& journals() const noexcept { return journals_; }
  const DateRange& range() const noexcept { return range_; }
  const KeywordList& keywords() const noexcept { return keywords_; }
  // Crossref "select" fields; empty means the default field set.
  const std::vector<std::string>& requested_fields() const noexcept {
    return requested_fields_;
  }
  const std::string& query_id() const noexcept { return query_id_; }

  /// Key-sorted canonical form (what reports and the service store).
  nlohmann::json canonical() const;
  static HandsearchQuery from_json(const nlohmann::json& j);

 private:
  std::vector<Issn> journals_;
  DateRange range_;
  KeywordList keywords_;
  std::vector<std::string> requested_fields_;
  std::string query_id_;
};

class SnowballQuery {
 public:
  SnowballQuery(std::vector<Doi> seeds, Direction direction, bool hydrate);

  const std::vector<Doi>& seeds() const noexcept { return seeds_; }
  Direction direction() const noexcept { return direction_; }
  bool hydrate() const noexcept { return hydrate_; }
  const std::string& query_id() const noexcept { return query_id_; }

  nlohmann::json canonical() const;
  static SnowballQuery from_json(const nlohmann::json& j);

 private:
  std::vector<Doi> seeds_;
  Direction direction_;
  bool hydrate_;
  std::string query_id_;
};

using AnyQuery = std::variant<HandsearchQuery, SnowballQuery>;

const std::string& query_id_of(const AnyQuery& q);
nlohmann::json canonical_of(const AnyQuery& q);
// Origins in query order: journal ISSNs or seed DOIs.
std::vector<std::string> origins_of(const AnyQuery& q);

/// First 16 hex digits of SHA-256 over the compact dump of `identity`.
std::string stable_query_id(const nlohmann::json& identity);

}  // namespace litfetch
