#include "litfetch/report.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "litfetch/error.hpp"

namespace litfetch {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kPartial: return "partial";
    case Outcome::kAborted: return "aborted";
  }
  return "success";
}

namespace {

Outcome parse_outcome(const std::string& s) {
  if (s == "success") return Outcome::kSuccess;
  if (s == "partial") return Outcome::kPartial;
  if (s == "aborted") return Outcome::kAborted;
  throw Error(ErrorKind::kMalformedResponse, "unknown outcome " + s);
}

constexpr std::string_view kKeywordCaveat =
    "keyword filtering may miss studies: works whose Crossref records do not "
    "match the terms are excluded; terms used: ";
constexpr std::string_view kCociCaveat =
    "COCI is rebuilt periodically and trails Crossref; recently published "
    "citing works may be absent from forward results (index queried at ";
constexpr std::string_view kDepositCaveat =
    "only works whose DOIs are already deposited in Crossref can be found; "
    "newly published works may be missing";
constexpr std::string_view kReferenceCaveat =
    "backward results only follow references that publishers deposit with "
    "DOIs; withheld or DOI-less references are counted as unresolvable";
constexpr std::string_view kOrderNote =
    "entries are ordered by first retrieval: origins in query order, then "
    "upstream order within each origin";

}  // namespace

SearchReport build_report(const AnyQuery& query,
                          const std::vector<OriginResult>& per_origin,
                          std::size_t total_unique, const Clock& clock,
                          const ReportContext& context) {
  SearchReport r;
  r.query_id = query_id_of(query);
  r.query = canonical_of(query);
  r.generated_at = clock.now();
  r.data_sources = context.data_sources;
  r.config = context.config;
  r.seeds_excluded = context.seeds_excluded;
  r.hydration_failures = context.hydration_failures;

  auto origins = origins_of(query);
  std::multiset<std::string> expected(origins.begin(), origins.end());
  std::multiset<std::string> got;
  for (const auto& o : per_origin) got.insert(o.origin);
  if (expected != got) {
    throw Error(ErrorKind::kInconsistentCounts,
                "per-origin results do not cover the query's origins exactly once");
  }
  // Per-origin counts follow query order regardless of completion order.
  for (const auto& origin : origins) {
    for (const auto& o : per_origin) {
      if (o.origin == origin) {
        r.per_origin_counts.push_back(o);
        break;
      }
    }
  }

  std::size_t retrieved = std::accumulate(
      per_origin.begin(), per_origin.end(), std::size_t{0},
      [](std::size_t acc, const OriginResult& o) { return acc + o.retrieved; });
  if (total_unique > retrieved) {
    throw Error(ErrorKind::kInconsistentCounts,
                "total_unique " + std::to_string(total_unique) +
                    " exceeds the sum of retrieved counts " +
                    std::to_string(retrieved));
  }
  r.total_unique = total_unique;
  r.duplicates_removed = retrieved - total_unique;

  bool any_failure = std::any_of(per_origin.begin(), per_origin.end(),
                                 [](const OriginResult& o) {
                                   return o.failures > 0 || o.error.has_value();
                                 });
  r.outcome = context.aborted ? Outcome::kAborted
              : any_failure   ? Outcome::kPartial
                              : Outcome::kSuccess;

  if (const auto* h = std::get_if<HandsearchQuery>(&query)) {
    r.kind = "handsearch";
    r.caveats.emplace_back(kDepositCaveat);
    if (!h->keywords().empty()) {
      r.caveats.push_back(std::string(kKeywordCaveat) + h->keywords().joined(", "));
    }
    r.notes.push_back("date range filter: " + std::string("from-pub-date/until-pub-date") +
                      " (publication date, inclusive)");
  } else {
    const auto& s = std::get<SnowballQuery>(query);
    if (s.direction() == Direction::kForward) {
      r.kind = "snowball-forward";
      std::string when = "unknown time";
      for (const auto& d : r.data_sources) {
        if (d.name == "COCI") when = format_timestamp(d.queried_at);
      }
      r.caveats.push_back(std::string(kCociCaveat) + when + ")");
    } else {
      r.kind = "snowball-backward";
      r.caveats.emplace_back(kReferenceCaveat);
    }
    r.notes.emplace_back("seed DOIs are excluded from the results");
  }
  if (context.continue_on_error) {
    r.caveats.emplace_back(
        "continue-on-error was enabled: failed origins are listed under "
        "failures and the result set may be incomplete");
  }
  r.notes.emplace_back(kOrderNote);
  return r;
}

nlohmann::json report_to_json(const SearchReport& r) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& d : r.data_sources) {
    sources.push_back({{"name", d.name},
                       {"base_url", d.base_url},
                       {"queried_at", format_timestamp(d.queried_at)}});
  }
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& o : r.per_origin_counts) {
    counts.push_back({{"origin", o.origin},
                      {"retrieved", o.retrieved},
                      {"failures", o.failures},
                      {"unresolvable", o.unresolvable},
                      {"flags", o.flags}});
    if (o.error) failures.push_back({{"origin", o.origin}, {"error", *o.error}});
  }
  nlohmann::json j = {{"tool_version", r.tool_version},
                      {"kind", r.kind},
                      {"query_id", r.query_id},
                      {"query", r.query},
                      {"data_sources", sources},
                      {"per_origin_counts", counts},
                      {"failures", failures},
                      {"total_unique", r.total_unique},
                      {"duplicates_removed", r.duplicates_removed},
                      {"seeds_excluded", r.seeds_excluded},
                      {"hydration_failures", r.hydration_failures},
                      {"caveats", r.caveats},
                      {"notes", r.notes},
                      {"outcome", outcome_name(r.outcome)},
                      {"config", r.config},
                      {"generated_at", format_timestamp(r.generated_at)}};
  if (r.export_summary) {
    j["export"] = {{"format", r.export_summary->format},
                   {"mode", r.export_summary->mode},
                   {"records", r.export_summary->records},
                   {"fallbacks", r.export_summary->fallbacks}};
  } else {
    j["export"] = nullptr;
  }
  return j;
}

SearchReport report_from_json(const nlohmann::json& j) {
  try {
    SearchReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.query_id = j.at("query_id").get<std::string>();
    r.query = j.at("query");
    for (const auto& d : j.at("data_sources")) {
      r.data_sources.push_back(
          {d.at("name").get<std::string>(), d.at("base_url").get<std::string>(),
           parse_timestamp(d.at("queried_at").get<std::string>())});
    }
    std::map<std::string, std::string> errors;
    for (const auto& f : j.at("failures")) {
      errors[f.at("origin").get<std::string>()] = f.at("error").get<std::string>();
    }
    for (const auto& c : j.at("per_origin_counts")) {
      OriginResult o;
      o.origin = c.at("origin").get<std::string>();
      o.retrieved = c.at("retrieved").get<std::size_t>();
      o.failures = c.at("failures").get<std::size_t>();
      o.unresolvable = c.at("unresolvable").get<std::size_t>();
      o.flags = c.at("flags").get<std::vector<std::string>>();
      if (auto it = errors.find(o.origin); it != errors.end()) o.error = it->second;
      r.per_origin_counts.push_back(std::move(o));
    }
    r.total_unique = j.at("total_unique").get<std::size_t>();
    r.duplicates_removed = j.at("duplicates_removed").get<std::size_t>();
    r.seeds_excluded = j.at("seeds_excluded").get<std::size_t>();
    r.hydration_failures = j.at("hydration_failures").get<std::size_t>();
    r.caveats = j.at("caveats").get<std::vector<std::string>>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    r.generated_at = parse_timestamp(j.at("generated_at").get<std::string>());
    if (j.contains("export") && j["export"].is_object()) {
      const auto& e = j["export"];
      r.export_summary = ExportSummary{
          e.at("format").get<std::string>(), e.at("mode").get<std::string>(),
          e.at("records").get<std::size_t>(), e.at("fallbacks").get<std::size_t>()};
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad report document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad report document: ") + e.what());
  }
}

namespace {

std::string render_human(const SearchReport& r) {
  std::ostringstream out;
  out << "Search report\n";
  out << "  tool version:   litfetch " << r.tool_version << "\n";
  out << "  search type:    " << r.kind << "\n";
  out << "  query id:       " << r.query_id << "\n";
  out << "  generated at:   " << format_timestamp(r.generated_at) << "\n";
  out << "  outcome:        " << outcome_name(r.outcome) << "\n";
  out << "\nParameters\n";
  const auto& q = r.query;
  if (r.kind == "handsearch") {
    out << "  journals:       ";
    const auto& js = q.value("journals", nlohmann::json::array());
    for (std::size_t i = 0; i < js.size(); ++i) {
      out << (i ? ", " : "") << js[i].get<std::string>();
    }
    out << "\n";
    if (q.contains("range")) {
      out << "  date range:     " << q["range"].value("from", "") << " to "
          << q["range"].value("until", "") << " (inclusive)\n";
    }
    const auto& kw = q.value("keywords", nlohmann::json::array());
    out << "  keywords:       ";
    if (kw.empty()) out << "(none)";
    for (std::size_t i = 0; i < kw.size(); ++i) {
      out << (i ? ", " : "") << kw[i].get<std::string>();
    }
    out << "\n";
  } else {
    out << "  direction:      " << q.value("direction", "") << "\n";
    out << "  seeds:          ";
    const auto& seeds = q.value("seeds", nlohmann::json::array());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      out << (i ? ", " : "") << seeds[i].get<std::string>();
    }
    out << "\n";
    out << "  hydrate:        " << (q.value("hydrate", false) ? "yes" : "no") << "\n";
  }
  out << "\nData sources\n";
  for (const auto& d : r.data_sources) {
    out << "  " << d.name << " <" << d.base_url << "> queried at "
        << format_timestamp(d.queried_at) << "\n";
  }
  out << "\nCounts\n";
  for (const auto& o : r.per_origin_counts) {
    out << "  " << o.origin << ": " << o.retrieved << " retrieved";
    if (o.unresolvable) out << ", " << o.unresolvable << " unresolvable";
    if (o.failures) out << ", " << o.failures << " failed";
    for (const auto& f : o.flags) out << " [" << f << "]";
    out << "\n";
  }
  out << "  duplicates removed: " << r.duplicates_removed << "\n";
  if (r.seeds_excluded) out << "  seeds excluded:     " << r.seeds_excluded << "\n";
  if (r.hydration_failures) {
    out << "  hydration failures: " << r.hydration_failures << "\n";
  }
  out << "  total unique works: " << r.total_unique << "\n";
  if (r.export_summary) {
    out << "\nExport\n";
    out << "  format: " << r.export_summary->format;
    if (!r.export_summary->mode.empty()) out << " (" << r.export_summary->mode << ")";
    out << ", " << r.export_summary->records << " records";
    if (r.export_summary->fallbacks) {
      out << ", " << r.export_summary->fallbacks << " assembled fallbacks";
    }
    out << "\n";
  }
  bool has_failures = false;
  for (const auto& o : r.per_origin_counts) has_failures |= o.error.has_value();
  if (has_failures) {
    out << "\nFailures\n";
    for (const auto& o : r.per_origin_counts) {
      if (o.error) out << "  " << o.origin << ": " << *o.error << "\n";
    }
  }
  if (!r.caveats.empty()) {
    out << "\nCaveats\n";
    for (const auto& c : r.caveats) out << "  - " << c << "\n";
  }
  if (!r.notes.empty()) {
    out << "\nNotes\n";
    for (const auto& n : r.notes) out << "  - " << n << "\n";
  }
  if (!r.config.empty()) {
    out << "\nEffective configuration\n";
    for (const auto& [k, v] : r.config) out << "  " << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace

std::string render_report(const SearchReport& r, ReportFormat format) {
  if (format == ReportFormat::kStructured) {
    return report_to_json(r).dump(2) + "\n";
  }
  return render_human(r);
}

}  // namespace litfetch
