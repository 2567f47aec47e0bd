#include "litfetch/query.hpp"

#include <algorithm>
#include <unordered_set>

#include "litfetch/digest.hpp"
#include "litfetch/error.hpp"

namespace litfetch {

std::string_view direction_name(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}

Direction parse_direction(std::string_view text) {
  if (text == "forward") return Direction::kForward;
  if (text == "backward") return Direction::kBackward;
  throw Error(ErrorKind::kInvalidQuery,
              "direction must be forward or backward, got '" +
                  std::string(text) + "'")
      .with_token(std::string(text));
}

std::string stable_query_id(const nlohmann::json& identity) {
  return sha256_hex(identity.dump()).substr(0, 16);
}

HandsearchQuery::HandsearchQuery(std::vector<Issn> journals, DateRange range,
                                 KeywordList keywords,
                                 std::vector<std::string> requested_fields)
    : journals_(std::move(journals)),
      range_(range),
      keywords_(std::move(keywords)),
      requested_fields_(std::move(requested_fields)) {
  if (journals_.empty()) {
    throw Error(ErrorKind::kInvalidQuery, "journals: at least one ISSN is required");
  }
  std::unordered_set<Issn> seen;
  for (const auto& j : journals_) {
    if (!seen.insert(j).second) {
      throw Error(ErrorKind::kInvalidQuery, "journals: duplicate ISSN " + j.str())
          .with_token(j.str());
    }
  }
  std::vector<std::string> sorted;
  for (const auto& j : journals_) sorted.push_back(j.str());
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json identity = {
      {"type", "handsearch"},
      {"journals", sorted},
      {"range",
       {{"from", format_date(range_.from())},
        {"until", format_date(range_.until())}}},
      {"keywords", keywords_.terms()}};
  query_id_ = stable_query_id(identity);
}

nlohmann::json HandsearchQuery::canonical() const {
  std::vector<std::string> journals;
  for (const auto& j : journals_) journals.push_back(j.str());
  return {{"type", "handsearch"},
          {"query_id", query_id_},
          {"journals", journals},
          {"range",
           {{"from", format_date(range_.from())},
            {"until", format_date(range_.until())}}},
          {"keywords", keywords_.terms()},
          {"requested_fields", requested_fields_}};
}

namespace {

// Wraps a json access error into a field-named validation error.
template <typename F>
auto field(const char* name, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kInvalidQuery,
                std::string(name) + ": missing or wrong type")
        .with_token(name);
  }
}

}  // namespace

HandsearchQuery HandsearchQuery::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kInvalidQuery, "query document must be an object");
  }
  auto raw_journals = field("journals", [&] {
    return j.at("journals").get<std::vector<std::string>>();
  });
  std::vector<Issn> journals;
  for (std::size_t i = 0; i < raw_journals.size(); ++i) {
    try {
      journals.push_back(validate_issn(raw_journals[i]));
    } catch (Error& e) {
      e.with_position(i);
      throw;
    }
  }
  auto from = field("range", [&] { return j.at("range").at("from").get<std::string>(); });
  auto until = field("range", [&] { return j.at("range").at("until").get<std::string>(); });
  DateRange range = parse_date_range(from, until);
  std::vector<std::string> terms;
  if (j.contains("keywords") && !j["keywords"].is_null()) {
    terms = field("keywords", [&] {
      return j.at("keywords").get<std::vector<std::string>>();
    });
  }
  std::vector<std::string> fields;
  if (j.contains("requested_fields") && !j["requested_fields"].is_null()) {
    fields = field("requested_fields", [&] {
      return j.at("requested_fields").get<std::vector<std::string>>();
    });
  }
  return HandsearchQuery(std::move(journals), range, KeywordList(std::move(terms)),
                         std::move(fields));
}

SnowballQuery::SnowballQuery(std::vector<Doi> seeds, Direction direction,
                             bool hydrate)
    : direction_(direction), hydrate_(hydrate) {
  std::unordered_set<Doi> seen;
  for (auto& s : seeds) {
    if (seen.insert(s).second) seeds_.push_back(std::move(s));
  }
  if (seeds_.empty()) {
    throw Error(ErrorKind::kInvalidQuery, "seeds: at least one DOI is required");
  }
  std::vector<std::string> sorted;
  for (const auto& s : seeds_) sorted.push_back(s.str());
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json identity = {{"type", "snowball"},
                             {"direction", direction_name(direction_)},
                             {"seeds", sorted},
                             {"hydrate", hydrate_}};
  query_id_ = stable_query_id(identity);
}

nlohmann::json SnowballQuery::canonical() const {
  std::vector<std::string> seeds;
  for (const auto& s : seeds_) seeds.push_back(s.str());
  return {{"type", "snowball"},
          {"query_id", query_id_},
          {"direction", direction_name(direction_)},
          {"seeds", seeds},
          {"hydrate", hydrate_}};
}

SnowballQuery SnowballQuery::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kInvalidQuery, "query document must be an object");
  }
  std::vector<Doi> seeds;
  const auto& raw = j.contains("seeds") ? j["seeds"] : nlohmann::json();
  if (raw.is_string()) {
    seeds = parse_doi_list(raw.get<std::string>());
  } else if (raw.is_array()) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i].is_string()) {
        throw Error(ErrorKind::kInvalidQuery, "seeds: entries must be strings")
            .with_position(i);
      }
      try {
        seeds.push_back(normalize_doi(raw[i].get<std::string>()));
      } catch (Error& e) {
        e.with_position(i);
        throw;
      }
    }
  } else {
    throw Error(ErrorKind::kInvalidQuery, "seeds: missing or wrong type")
        .with_token("seeds");
  }
  auto dir = field("direction", [&] { return j.at("direction").get<std::string>(); });
  bool hydrate = false;
  if (j.contains("hydrate") && !j["hydrate"].is_null()) {
    hydrate = field("hydrate", [&] { return j.at("hydrate").get<bool>(); });
  }
  return SnowballQuery(std::move(seeds), parse_direction(dir), hydrate);
}

const std::string& query_id_of(const AnyQuery& q) {
  return std::visit([](const auto& x) -> const std::string& { return x.query_id(); },
                    q);
}

nlohmann::json canonical_of(const AnyQuery& q) {
  return std::visit([](const auto& x) { return x.canonical(); }, q);
}

std::vector<std::string> origins_of(const AnyQuery& q) {
  std::vector<std::string> out;
  if (auto* h = std::get_if<HandsearchQuery>(&q)) {
    for (const auto& j : h->journals()) out.push_back(j.str());
  } else {
    for (const auto& s : std::get<SnowballQuery>(q).seeds()) out.push_back(s.str());
  }
  return out;
}

}  // namespace litfetch
