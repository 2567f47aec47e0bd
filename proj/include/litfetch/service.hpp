#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/cache.hpp"
#include "litfetch/coci.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/query.hpp"
#include "litfetch/search.hpp"

namespace httplib {
class Server;
}

namespace litfetch {

enum class JobState { kQueued, kRunning, kSucceeded, kFailed, kPartial };
std::string_view job_state_name(JobState s);
JobState parse_job_state(std::string_view s);
bool job_finished(JobState s);

struct JobProgress {
  std::string origin;
  std::size_t fetched = 0;
  std::size_t declared = 0;
};

struct JobRecord {
  std::string job_id;
  std::string kind;  // handsearch | snowball
  JobState state = JobState::kQueued;
  nlohmann::json query;
  std::vector<JobProgress> progress;
  std::optional<std::string> result_ref;
  std::optional<nlohmann::json> report;
  std::optional<std::string> error;
  bool continue_on_error = false;
  Timestamp submitted_at;
};

nlohmann::json to_json(const JobRecord& j);
JobRecord job_from_json(const nlohmann::json& j);

using JobRunner =
    std::function<SearchOutcome(const AnyQuery&, const SearchOptions&)>;

struct JobManagerConfig {
  std::size_t workers = 2;      // jobs running at once
  std::size_t queue_depth = 16;  // queued jobs beyond that are refused
  std::size_t parallelism = 4;  // per job
  std::map<std::string, std::string> config;  // echoed into reports
};

/// FIFO job queue with a fixed worker pool. Jobs and their result sets are
/// persisted in the store's "jobs" and "results" document namespaces.
/// On construction, stored jobs are reloaded: queued ones go back on the
/// queue, running ones (interrupted by a restart) are marked failed.
class JobManager {
 public:
  JobManager(std::shared_ptr<Cache> store, JobRunner runner,
             JobManagerConfig config = {},
             std::shared_ptr<const Clock> clock = nullptr);
  ~JobManager();

  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  /// Returns the new job id, or nullopt when the queue is full.
  std::optional<std::string> submit(const AnyQuery& query,
                                    bool continue_on_error = false);
  std::optional<JobRecord> get(const std::string& job_id) const;
  std::optional<ResultSet> results(const std::string& job_id) const;
  // Blocks until the job is finished or the timeout passes.
  bool wait(const std::string& job_id, std::chrono::milliseconds timeout) const;
  void shutdown();

 private:
  void worker_loop();
  void run_job(const std::string& job_id);
  void persist(const JobRecord& r) const;
  std::string new_job_id();

  std::shared_ptr<Cache> store_;
  JobRunner runner_;
  JobManagerConfig config_;
  std::shared_ptr<const Clock> clock_;

  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
  std::mt19937_64 rng_;
};

/// Runner backed by real (or mock-pointed) clients.
JobRunner make_job_runner(std::shared_ptr<CrossrefClient> crossref,
                          std::shared_ptr<CociClient> coci,
                          std::shared_ptr<const Clock> clock = nullptr);

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  std::size_t max_journal_candidates = 20;
};

/// HTTP front end over a JobManager:
///   POST /api/handsearch, POST /api/snowball
///   GET  /api/jobs/{id}, /api/jobs/{id}/results, /api/jobs/{id}/report,
///        /api/jobs/{id}/export?format=doi|ris
///   GET  /api/journals?q=...
///   GET  /api/health
class Service {
 public:
  Service(std::shared_ptr<JobManager> jobs,
          std::shared_ptr<CrossrefClient> crossref, ServiceConfig config = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread. Returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const noexcept { return port_; }

 private:
  void bind();
  void routes();

  std::shared_ptr<JobManager> jobs_;
  std::shared_ptr<CrossrefClient> crossref_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace litfetch
