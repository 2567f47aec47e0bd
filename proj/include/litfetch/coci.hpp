#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/cache.hpp"
#include "litfetch/http.hpp"
#include "litfetch/ids.hpp"

namespace litfetch {

inline constexpr std::string_view kCociDefaultUrl =
    "https://opencitations.net/index/coci/api/v1";

struct CitationEdge {
  Doi citing;
  Doi cited;
  std::optional<PartialDate> creation_date;

  friend bool operator==(const CitationEdge&, const CitationEdge&) = default;
};

/// Reads "2019", "2019-03" or "2019-03-05". Returns nullopt for anything else.
std::optional<PartialDate> parse_coci_date(std::string_view text);

/// Extracts the DOI from a COCI identifier field. Accepts the bare DOI form
/// of the v1 API and the space-separated "omid:... doi:10.x/y" form.
std::optional<Doi> parse_coci_identifier(std::string_view text);

/// Client for the citations endpoint of the OpenCitations COCI index.
class CociClient {
 public:
  CociClient(std::string base_url, ClientPolicy policy,
             std::shared_ptr<Transport> transport = nullptr,
             std::shared_ptr<Cache> cache = nullptr);

  /// All edges whose cited side is `doi`, deduplicated by (citing, cited).
  /// An unknown DOI yields an empty list.
  std::vector<CitationEdge> fetch_citing(const Doi& doi);

  HttpStats stats() const { return http_.stats(); }
  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string base_url_;
  HttpExecutor http_;
};

}  // namespace litfetch
