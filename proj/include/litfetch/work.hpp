#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/ids.hpp"

namespace litfetch {

struct Author {
  std::string family;
  std::string given;

  friend bool operator==(const Author&, const Author&) = default;
};

/// One retrieved work. A DOI-only work (everything but `doi` empty) is what
/// snowballing produces without hydration.
struct WorkMetadata {
  explicit WorkMetadata(Doi doi) : doi(std::move(doi)) {}

  Doi doi;
  std::string title;
  std::vector<Author> authors;
  std::string container_title;
  std::string publisher;
  std::vector<Issn> issn_list;
  std::optional<PartialDate> published;
  std::optional<std::string> abstract;
  std::vector<std::string> subject_keywords;
  std::optional<std::string> url;
  std::vector<Doi> reference_dois;
  std::size_t reference_count_declared = 0;
  // Crossref work type, e.g. "journal-article". Empty when unknown.
  std::string work_type;

  friend bool operator==(const WorkMetadata&, const WorkMetadata&) = default;
};

/// Crossref deep-paging cursor. "*" requests the first page; exhausted is
/// set once a page came back shorter than requested.
struct PageCursor {
  std::string token = "*";
  bool exhausted = false;

  static PageCursor initial() { return PageCursor{}; }
  friend bool operator==(const PageCursor&, const PageCursor&) = default;
};

// Lossless internal form used by the cache, job store and results files.
nlohmann::json to_json(const WorkMetadata& w);
WorkMetadata work_from_json(const nlohmann::json& j);

}  // namespace litfetch
