#include "litfetch/service.hpp"

#include <httplib.h>

#include <cstdio>

#include "litfetch/error.hpp"
#include "litfetch/export.hpp"
#include "litfetch/handsearch.hpp"
#include "litfetch/log.hpp"
#include "litfetch/snowball.hpp"

namespace litfetch {

namespace {

constexpr std::string_view kJobsNs = "jobs";
constexpr std::string_view kResultsNs = "results";

}  // namespace

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kSucceeded: return "succeeded";
    case JobState::kFailed: return "failed";
    case JobState::kPartial: return "partial";
  }
  return "queued";
}

JobState parse_job_state(std::string_view s) {
  for (auto st : {JobState::kQueued, JobState::kRunning, JobState::kSucceeded,
                  JobState::kFailed, JobState::kPartial}) {
    if (job_state_name(st) == s) return st;
  }
  throw Error(ErrorKind::kMalformedResponse, "unknown job state " + std::string(s));
}

bool job_finished(JobState s) {
  return s == JobState::kSucceeded || s == JobState::kFailed ||
         s == JobState::kPartial;
}

nlohmann::json to_json(const JobRecord& j) {
  nlohmann::json progress = nlohmann::json::array();
  for (const auto& p : j.progress) {
    progress.push_back(
        {{"origin", p.origin}, {"fetched", p.fetched}, {"declared", p.declared}});
  }
  return {{"job_id", j.job_id},
          {"kind", j.kind},
          {"state", job_state_name(j.state)},
          {"query", j.query},
          {"progress", progress},
          {"result_ref", j.result_ref ? nlohmann::json(*j.result_ref) : nlohmann::json(nullptr)},
          {"report", j.report ? *j.report : nlohmann::json(nullptr)},
          {"error", j.error ? nlohmann::json(*j.error) : nlohmann::json(nullptr)},
          {"continue_on_error", j.continue_on_error},
          {"submitted_at", format_timestamp(j.submitted_at)}};
}

JobRecord job_from_json(const nlohmann::json& j) {
  try {
    JobRecord r;
    r.job_id = j.at("job_id").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.state = parse_job_state(j.at("state").get<std::string>());
    r.query = j.at("query");
    for (const auto& p : j.at("progress")) {
      r.progress.push_back({p.at("origin").get<std::string>(),
                            p.at("fetched").get<std::size_t>(),
                            p.at("declared").get<std::size_t>()});
    }
    if (!j.at("result_ref").is_null()) r.result_ref = j["result_ref"].get<std::string>();
    if (!j.at("report").is_null()) r.report = j["report"];
    if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
    r.continue_on_error = j.value("continue_on_error", false);
    r.submitted_at = parse_timestamp(j.at("submitted_at").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kStorageError, std::string("bad job record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kStorageError, std::string("bad job record: ") + e.what());
  }
}

namespace {

AnyQuery query_from_canonical(const nlohmann::json& q) {
  if (q.value("type", "") == "handsearch") return HandsearchQuery::from_json(q);
  return SnowballQuery::from_json(q);
}

}  // namespace

JobManager::JobManager(std::shared_ptr<Cache> store, JobRunner runner,
                       JobManagerConfig config, std::shared_ptr<const Clock> clock)
    : store_(std::move(store)),
      runner_(std::move(runner)),
      config_(std::move(config)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      rng_(std::random_device{}()) {
  if (!store_) throw Error(ErrorKind::kStorageError, "job manager needs a store");
  std::vector<JobRecord> queued;
  for (const auto& id : store_->list_documents(kJobsNs)) {
    auto doc = store_->get_document(kJobsNs, id);
    if (!doc) continue;
    JobRecord r;
    try {
      r = job_from_json(nlohmann::json::parse(*doc));
    } catch (const std::exception& e) {
      log::warn("skipping unreadable job record " + id + ": " + e.what());
      continue;
    }
    if (r.state == JobState::kRunning) {
      r.state = JobState::kFailed;
      r.error = "interrupted: the service stopped while the job was running";
      persist(r);
    } else if (r.state == JobState::kQueued) {
      queued.push_back(r);
    }
    jobs_.emplace(r.job_id, std::move(r));
  }
  // Requeue in submission order.
  std::stable_sort(queued.begin(), queued.end(), [](const auto& a, const auto& b) {
    return a.submitted_at < b.submitted_at;
  });
  for (const auto& r : queued) queue_.push_back(r.job_id);
  for (std::size_t i = 0; i < std::max<std::size_t>(config_.workers, 1); ++i) {
    threads_.emplace_back([this] { worker_loop(); });
  }
}

JobManager::~JobManager() { shutdown(); }

void JobManager::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  changed_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
}

std::string JobManager::new_job_id() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(rng_()));
  return buf;
}

void JobManager::persist(const JobRecord& r) const {
  store_->put_document(kJobsNs, r.job_id, to_json(r).dump());
}

std::optional<std::string> JobManager::submit(const AnyQuery& query,
                                              bool continue_on_error) {
  std::lock_guard lock(mu_);
  if (stopping_ || queue_.size() >= config_.queue_depth) return std::nullopt;
  JobRecord r;
  do {
    r.job_id = new_job_id();
  } while (jobs_.count(r.job_id));
  r.kind = std::holds_alternative<HandsearchQuery>(query) ? "handsearch" : "snowball";
  r.query = canonical_of(query);
  for (const auto& origin : origins_of(query)) r.progress.push_back({origin, 0, 0});
  r.continue_on_error = continue_on_error;
  r.submitted_at = clock_->now();
  persist(r);
  queue_.push_back(r.job_id);
  std::string id = r.job_id;
  jobs_.emplace(id, std::move(r));
  changed_.notify_all();
  return id;
}

std::optional<JobRecord> JobManager::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::optional<ResultSet> JobManager::results(const std::string& job_id) const {
  std::optional<std::string> ref;
  {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end() || !it->second.result_ref) return std::nullopt;
    ref = it->second.result_ref;
  }
  auto doc = store_->get_document(kResultsNs, job_id);
  if (!doc) {
    throw Error(ErrorKind::kStorageError, "missing stored results for job " + job_id);
  }
  return resultset_from_json(nlohmann::json::parse(*doc));
}

bool JobManager::wait(const std::string& job_id,
                      std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return changed_.wait_for(lock, timeout, [&] {
    auto it = jobs_.find(job_id);
    return it != jobs_.end() && job_finished(it->second.state);
  });
}

void JobManager::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mu_);
      changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      auto& r = jobs_.at(id);
      r.state = JobState::kRunning;
      persist(r);
    }
    changed_.notify_all();
    run_job(id);
    changed_.notify_all();
  }
}

void JobManager::run_job(const std::string& id) {
  nlohmann::json canonical;
  bool continue_on_error = false;
  {
    std::lock_guard lock(mu_);
    canonical = jobs_.at(id).query;
    continue_on_error = jobs_.at(id).continue_on_error;
  }
  SearchOptions options;
  options.parallelism = config_.parallelism;
  options.continue_on_error = continue_on_error;
  options.clock = clock_;
  options.config = config_.config;
  options.on_progress = [this, id](const ProgressEvent& ev) {
    std::lock_guard lock(mu_);
    for (auto& p : jobs_.at(id).progress) {
      if (p.origin != ev.origin) continue;
      p.fetched = std::max(p.fetched, ev.fetched);
      p.declared = std::max(p.declared, ev.declared);
    }
  };
  try {
    auto outcome = runner_(query_from_canonical(canonical), options);
    store_->put_document(kResultsNs, id, to_json(outcome.results).dump());
    std::lock_guard lock(mu_);
    auto& r = jobs_.at(id);
    r.report = report_to_json(outcome.report);
    r.result_ref = std::string(kResultsNs) + "/" + id;
    r.state = outcome.report.outcome == Outcome::kSuccess ? JobState::kSucceeded
                                                          : JobState::kPartial;
    persist(r);
  } catch (const std::exception& e) {
    log::warn("job " + id + " failed: " + e.what());
    std::lock_guard lock(mu_);
    auto& r = jobs_.at(id);
    r.state = JobState::kFailed;
    r.error = e.what();
    persist(r);
  }
}

JobRunner make_job_runner(std::shared_ptr<CrossrefClient> crossref,
                          std::shared_ptr<CociClient> coci,
                          std::shared_ptr<const Clock> clock) {
  return [crossref, coci, clock](const AnyQuery& query, SearchOptions options) {
    if (clock) options.clock = clock;
    if (const auto* h = std::get_if<HandsearchQuery>(&query)) {
      return run_handsearch(*h, *crossref, options);
    }
    return run_snowball(std::get<SnowballQuery>(query), *coci, *crossref, options);
  };
}

// --- HTTP front end ------------------------------------------------------

namespace {

constexpr std::string_view kJsonType = "application/json";

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", std::string(kJsonType));
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}, {"fields", nlohmann::json::array()}});
}

// Which request field a validation error belongs to.
std::string field_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kMalformedIssn:
    case ErrorKind::kIssnChecksumFailed: return "journals";
    case ErrorKind::kInvalidDateRange: return "range";
    case ErrorKind::kInvalidKeyword: return "keywords";
    case ErrorKind::kMalformedDoi: return "seeds";
    default: break;
  }
  static const char* const kFields[] = {"journals", "range",    "keywords",
                                        "requested_fields", "seeds", "direction",
                                        "hydrate",  "format", "continue_on_error"};
  for (const char* f : kFields) {
    if (e.message().rfind(f, 0) == 0) return f;
  }
  return "";
}

void send_validation_error(httplib::Response& res, const Error& e) {
  nlohmann::json field = {{"field", field_of(e)},
                          {"kind", error_kind_name(e.kind())},
                          {"message", e.message()}};
  if (e.token()) field["token"] = *e.token();
  if (e.position()) field["position"] = *e.position();
  send_json(res, 400, {{"error", e.what()}, {"fields", {field}}});
}

std::optional<nlohmann::json> parse_body(const httplib::Request& req,
                                         httplib::Response& res) {
  try {
    auto body = nlohmann::json::parse(req.body);
    if (!body.is_object()) {
      send_error(res, 400, "request body must be a JSON object");
      return std::nullopt;
    }
    return body;
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("request body is not valid JSON: ") + e.what());
    return std::nullopt;
  }
}

bool read_continue_flag(const nlohmann::json& body, bool& out) {
  if (!body.contains("continue_on_error") || body["continue_on_error"].is_null()) {
    out = false;
    return true;
  }
  if (!body["continue_on_error"].is_boolean()) return false;
  out = body["continue_on_error"].get<bool>();
  return true;
}

}  // namespace

Service::Service(std::shared_ptr<JobManager> jobs,
                 std::shared_ptr<CrossrefClient> crossref, ServiceConfig config)
    : jobs_(std::move(jobs)),
      crossref_(std::move(crossref)),
      config_(std::move(config)),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() { stop(); }

void Service::routes() {
  auto& s = *server_;
  const std::string origin = config_.cors_origin;
  s.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
  });
  s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  });

  s.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", kToolVersion}});
  });

  auto submit = [this](const AnyQuery& q, bool continue_on_error,
                       httplib::Response& res) {
    auto id = jobs_->submit(q, continue_on_error);
    if (!id) {
      send_error(res, 429, "job queue is full; retry later");
      return;
    }
    send_json(res, 202, {{"job_id", *id}, {"query_id", query_id_of(q)}});
  };

  s.Post("/api/handsearch", [submit](const httplib::Request& req,
                                     httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    bool coe = false;
    if (!read_continue_flag(*body, coe)) {
      send_validation_error(
          res, Error(ErrorKind::kInvalidQuery, "continue_on_error: must be a boolean"));
      return;
    }
    try {
      submit(HandsearchQuery::from_json(*body), coe, res);
    } catch (const Error& e) {
      send_validation_error(res, e);
    }
  });

  s.Post("/api/snowball", [submit](const httplib::Request& req,
                                   httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    bool coe = false;
    if (!read_continue_flag(*body, coe)) {
      send_validation_error(
          res, Error(ErrorKind::kInvalidQuery, "continue_on_error: must be a boolean"));
      return;
    }
    // Without an explicit choice, hydrate when the caller wants RIS.
    if (!body->contains("hydrate") || (*body)["hydrate"].is_null()) {
      (*body)["hydrate"] = body->value("format", std::string("doi")) == "ris";
    }
    try {
      submit(SnowballQuery::from_json(*body), coe, res);
    } catch (const Error& e) {
      send_validation_error(res, e);
    }
  });

  s.Get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    auto job = jobs_->get(req.matches[1]);
    if (!job) return send_error(res, 404, "no such job");
    send_json(res, 200, to_json(*job));
  });

  // Looks up a finished job that has results, or answers with the error.
  auto finished = [this](const httplib::Request& req,
                         httplib::Response& res) -> std::optional<JobRecord> {
    auto job = jobs_->get(req.matches[1]);
    if (!job) {
      send_error(res, 404, "no such job");
      return std::nullopt;
    }
    if (!job_finished(job->state)) {
      send_error(res, 409, "job is " + std::string(job_state_name(job->state)));
      return std::nullopt;
    }
    if (!job->result_ref) {
      send_error(res, 409, "job failed: " + job->error.value_or("unknown error"));
      return std::nullopt;
    }
    return job;
  };

  s.Get(R"(/api/jobs/([^/]+)/results)",
        [this, finished](const httplib::Request& req, httplib::Response& res) {
          if (!finished(req, res)) return;
          send_json(res, 200, to_json(*jobs_->results(req.matches[1])));
        });

  s.Get(R"(/api/jobs/([^/]+)/report)",
        [finished](const httplib::Request& req, httplib::Response& res) {
          auto job = finished(req, res);
          if (!job) return;
          res.status = 200;
          res.set_content(render_report(report_from_json(*job->report),
                                        ReportFormat::kStructured),
                          std::string(kJsonType));
        });

  s.Get(R"(/api/jobs/([^/]+)/export)", [this, finished](const httplib::Request& req,
                                                        httplib::Response& res) {
    std::string format = req.has_param("format") ? req.get_param_value("format") : "";
    if (format != "doi" && format != "ris") {
      return send_error(res, 400, "format must be doi or ris");
    }
    std::string mode = req.has_param("mode") ? req.get_param_value("mode") : "assembled";
    if (mode != "assembled" && mode != "negotiated") {
      return send_error(res, 400, "mode must be assembled or negotiated");
    }
    auto job = finished(req, res);
    if (!job) return;
    auto rs = jobs_->results(job->job_id);
    const std::string qid = job->query.value("query_id", job->job_id);
    std::string body;
    std::string type;
    std::string ext;
    if (format == "doi") {
      body = to_doi_text(*rs);
      type = "text/plain; charset=utf-8";
      ext = "txt";
    } else {
      auto ris = to_ris(*rs, mode == "negotiated" ? RisMode::kNegotiated
                                                  : RisMode::kAssembled,
                        crossref_.get());
      body = std::move(ris.text);
      type = std::string(kRisMediaType) + "; charset=utf-8";
      ext = "ris";
      res.set_header("X-Litfetch-Ris-Fallbacks", std::to_string(ris.fallbacks));
    }
    res.status = 200;
    res.set_header("Content-Disposition",
                   "attachment; filename=\"" + qid + "." + ext + "\"");
    res.set_content(body, type);
  });

  s.Get("/api/journals", [this](const httplib::Request& req, httplib::Response& res) {
    std::string q = req.has_param("q") ? trim(req.get_param_value("q")) : "";
    if (q.empty()) return send_error(res, 400, "q must not be empty");
    nlohmann::json out = nlohmann::json::array();
    try {
      for (const auto& j : crossref_->lookup_journal(q, config_.max_journal_candidates)) {
        std::vector<std::string> issns;
        for (const auto& i : j.issns) issns.push_back(i.str());
        out.push_back({{"title", j.title}, {"issns", issns}});
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kUnknownJournal) {
        return send_error(res, 502, e.what());
      }
    }
    send_json(res, 200, {{"journals", out}});
  });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                             std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_error(res, 500, what);
  });
}

void Service::bind() {
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.bind_address);
  } else if (server_->bind_to_port(config_.bind_address, config_.port)) {
    port_ = config_.port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorKind::kNetworkError,
                "cannot bind " + config_.bind_address + ":" +
                    std::to_string(config_.port));
  }
}

int Service::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Service::run() {
  bind();
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace litfetch
