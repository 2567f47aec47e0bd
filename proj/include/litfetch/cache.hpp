#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/clock.hpp"
#include "litfetch/work.hpp"

namespace litfetch {

/// Canonical request descriptor: method, URL with lowercased scheme/host and
/// sorted query parameters (the "mailto" etiquette parameter is dropped),
/// and the Accept header.
class CacheKey {
 public:
  static CacheKey for_request(std::string_view method, std::string_view url,
                              std::string_view accept = "");

  const std::string& descriptor() const noexcept { return descriptor_; }
  // True for listing-style requests whose upstream answer grows over time.
  bool is_listing() const noexcept { return listing_; }
  std::string digest() const;

  friend bool operator==(const CacheKey& a, const CacheKey& b) {
    return a.descriptor_ == b.descriptor_;
  }

 private:
  std::string descriptor_;
  bool listing_ = false;
};

struct CacheEntry {
  CacheKey key;
  std::string body;  // verbatim upstream bytes
  int status = 200;
  Timestamp stored_at;
};

struct CacheTtl {
  std::optional<std::chrono::seconds> listing = std::chrono::hours(24 * 7);
  // Per-DOI metadata; nullopt never expires.
  std::optional<std::chrono::seconds> immutable;
};

/// Per-origin resumable state for one query.
struct OriginProgress {
  PageCursor cursor;
  std::size_t pages = 0;
  // Works fetched so far for this origin, in retrieval order.
  std::vector<WorkMetadata> works;
};

/// On-disk store rooted at a directory:
///   entries/<2 hex>/<sha256>.entry   raw upstream responses
///   progress/<query_id>/<origin>.json resumable per-origin search progress
///   docs/<namespace>/<id>.json        opaque documents (job store)
/// Every write goes through a temp file and an atomic rename.
class Cache {
 public:
  Cache(std::filesystem::path root, CacheTtl ttl = {},
        std::shared_ptr<const Clock> clock = nullptr);

  std::optional<CacheEntry> get(const CacheKey& key) const;
  void put(const CacheEntry& entry);
  std::size_t entry_count() const;

  void record_progress(std::string_view query_id, std::string_view origin,
                       const OriginProgress& progress);
  std::map<std::string, OriginProgress> load_progress(
      std::string_view query_id) const;
  void clear_progress(std::string_view query_id);

  void put_document(std::string_view ns, std::string_view id,
                    std::string_view body);
  std::optional<std::string> get_document(std::string_view ns,
                                          std::string_view id) const;
  std::vector<std::string> list_documents(std::string_view ns) const;

  const std::filesystem::path& root() const noexcept { return root_; }
  Timestamp now() const;

 private:
  std::filesystem::path entry_path(const CacheKey& key) const;
  std::filesystem::path progress_path(std::string_view query_id) const;
  void atomic_write(const std::filesystem::path& path,
                    std::string_view bytes) const;

  std::filesystem::path root_;
  CacheTtl ttl_;
  std::shared_ptr<const Clock> clock_;
  mutable std::mutex progress_mu_;
};

}  // namespace litfetch
