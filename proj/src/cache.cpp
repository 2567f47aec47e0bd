#include "litfetch/cache.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "litfetch/digest.hpp"
#include "litfetch/error.hpp"
#include "litfetch/http.hpp"

namespace fs = std::filesystem;

namespace litfetch {

CacheKey CacheKey::for_request(std::string_view method, std::string_view url,
                               std::string_view accept) {
  ParsedUrl p = parse_url(url);
  auto query = p.query;
  std::erase_if(query, [](const auto& kv) { return kv.first == "mailto"; });
  std::sort(query.begin(), query.end());
  CacheKey key;
  key.descriptor_ = std::string(method) + " " + p.scheme + "://" + p.host +
                    ":" + std::to_string(p.port) + p.path + build_query(query) +
                    " accept=" + std::string(accept);
  key.listing_ = p.path.find("/journals") != std::string::npos ||
                 p.path.find("/citations/") != std::string::npos;
  return key;
}

std::string CacheKey::digest() const { return sha256_hex(descriptor_); }

Cache::Cache(fs::path root, CacheTtl ttl, std::shared_ptr<const Clock> clock)
    : root_(std::move(root)),
      ttl_(ttl),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()) {
  std::error_code ec;
  fs::create_directories(root_ / "entries", ec);
  fs::create_directories(root_ / "progress", ec);
  fs::create_directories(root_ / "docs", ec);
  if (ec) {
    throw Error(ErrorKind::kStorageError,
                "cannot create cache root " + root_.string() + ": " +
                    ec.message());
  }
}

Timestamp Cache::now() const { return clock_->now(); }

fs::path Cache::entry_path(const CacheKey& key) const {
  auto d = key.digest();
  return root_ / "entries" / d.substr(0, 2) / (d + ".entry");
}

fs::path Cache::progress_path(std::string_view query_id) const {
  return root_ / "progress" / std::string(query_id);
}

void Cache::atomic_write(const fs::path& path, std::string_view bytes) const {
  static std::atomic<unsigned long> counter{0};
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << ::getpid() << "."
           << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
           << counter++;
  fs::path tmp = path.parent_path() / tmp_name.str();
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) {
    throw Error(ErrorKind::kStorageError, "cannot open " + tmp.string());
  }
  std::size_t written = 0;
  while (written < bytes.size()) {
    auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      ::close(fd);
      throw Error(ErrorKind::kStorageError, "write failed for " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kStorageError,
                "cannot rename into " + path.string());
  }
}

namespace {

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// Entry file: one JSON header line, then the body bytes verbatim.
std::optional<CacheEntry> Cache::get(const CacheKey& key) const {
  auto bytes = read_file(entry_path(key));
  if (!bytes) return std::nullopt;
  auto nl = bytes->find('\n');
  if (nl == std::string::npos) {
    throw Error(ErrorKind::kStorageError, "corrupt cache entry (no header)");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes->substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kStorageError,
                std::string("corrupt cache entry header: ") + e.what());
  }
  std::string body = bytes->substr(nl + 1);
  if (!header.contains("size") ||
      header.at("size").get<std::size_t>() != body.size() ||
      header.value("key", "") != key.descriptor()) {
    throw Error(ErrorKind::kStorageError,
                "corrupt cache entry for " + key.descriptor());
  }
  CacheEntry entry{key, std::move(body), header.at("status").get<int>(),
                   parse_timestamp(header.at("stored_at").get<std::string>())};
  bool listing_class = key.is_listing() || entry.status != 200;
  auto ttl = listing_class ? ttl_.listing : ttl_.immutable;
  if (ttl && clock_->now() - entry.stored_at > *ttl) return std::nullopt;
  return entry;
}

void Cache::put(const CacheEntry& entry) {
  nlohmann::json header = {{"key", entry.key.descriptor()},
                           {"status", entry.status},
                           {"stored_at", format_timestamp(entry.stored_at)},
                           {"size", entry.body.size()}};
  std::string bytes = header.dump() + "\n" + entry.body;
  atomic_write(entry_path(entry.key), bytes);
}

std::size_t Cache::entry_count() const {
  std::size_t n = 0;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_ / "entries", ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".entry") ++n;
  }
  return n;
}

void Cache::record_progress(std::string_view query_id, std::string_view origin,
                            const OriginProgress& progress) {
  nlohmann::json works = nlohmann::json::array();
  for (const auto& w : progress.works) works.push_back(to_json(w));
  nlohmann::json doc = {{"origin", origin},
                        {"cursor", progress.cursor.token},
                        {"exhausted", progress.cursor.exhausted},
                        {"pages", progress.pages},
                        {"works", std::move(works)}};
  std::lock_guard lock(progress_mu_);
  atomic_write(progress_path(query_id) /
                   (sha256_hex(origin).substr(0, 24) + ".json"),
               doc.dump());
}

std::map<std::string, OriginProgress> Cache::load_progress(
    std::string_view query_id) const {
  std::lock_guard lock(progress_mu_);
  std::map<std::string, OriginProgress> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(progress_path(query_id), ec)) {
    if (e.path().extension() != ".json") continue;
    auto bytes = read_file(e.path());
    if (!bytes) continue;
    try {
      auto rec = nlohmann::json::parse(*bytes);
      OriginProgress p;
      p.cursor.token = rec.at("cursor").get<std::string>();
      p.cursor.exhausted = rec.at("exhausted").get<bool>();
      p.pages = rec.at("pages").get<std::size_t>();
      for (const auto& w : rec.at("works")) p.works.push_back(work_from_json(w));
      out.emplace(rec.at("origin").get<std::string>(), std::move(p));
    } catch (const std::exception& ex) {
      throw Error(ErrorKind::kStorageError,
                  "corrupt progress record " + e.path().string() + ": " +
                      ex.what());
    }
  }
  return out;
}

void Cache::clear_progress(std::string_view query_id) {
  std::lock_guard lock(progress_mu_);
  std::error_code ec;
  fs::remove_all(progress_path(query_id), ec);
}

void Cache::put_document(std::string_view ns, std::string_view id,
                         std::string_view body) {
  atomic_write(root_ / "docs" / std::string(ns) / (std::string(id) + ".json"),
               body);
}

std::optional<std::string> Cache::get_document(std::string_view ns,
                                               std::string_view id) const {
  return read_file(root_ / "docs" / std::string(ns) /
                   (std::string(id) + ".json"));
}

std::vector<std::string> Cache::list_documents(std::string_view ns) const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root_ / "docs" / std::string(ns), ec)) {
    if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace litfetch
