#include "litfetch/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "litfetch/cache.hpp"
#include "litfetch/coci.hpp"
#include "litfetch/config.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/error.hpp"
#include "litfetch/export.hpp"
#include "litfetch/handsearch.hpp"
#include "litfetch/log.hpp"
#include "litfetch/service.hpp"
#include "litfetch/snowball.hpp"

namespace litfetch {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kKeywordWarning =
    "warning: keyword filtering relies on upstream relevance matching and can "
    "miss relevant studies; a systematic review should normally run the "
    "handsearch without keywords";

// A bad flag value. Carries the flag so the message can name it.
struct UsageError {
  std::string flag;
  std::string message;
};

struct GlobalFlags {
  std::string config_path;
  std::optional<std::string> email, cache_dir, crossref_url, resolver_url, coci_url;
  std::optional<std::string> out, now;
  std::optional<std::size_t> parallelism, page_size, max_retries;
  bool no_cache = false;
  bool continue_on_error = false;
  bool replay = false;
  bool quiet = false;
  int verbose = 0;
};

struct ExportFlags {
  std::string format = "doi";
  std::string ris_mode = "assembled";
  bool crlf = false;
};

std::string ext_for(const std::string& format) {
  if (format == "doi") return "txt";
  return format;
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) {
    throw Error(ErrorKind::kStorageError, "cannot write " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kStorageError, "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Everything a command needs once flags and config are merged.
struct Context {
  CliConfig config;
  std::shared_ptr<const Clock> clock;
  std::shared_ptr<Cache> cache;
  std::shared_ptr<CrossrefClient> crossref;
  std::shared_ptr<CociClient> coci;
};

Context make_context(const GlobalFlags& g, const CliEnvironment& env) {
  fs::path config_path =
      g.config_path.empty() ? env.default_config : fs::path(g.config_path);
  if (!g.config_path.empty() && !fs::exists(config_path)) {
    throw UsageError{"--config", "no such file " + config_path.string()};
  }
  Context ctx;
  try {
    ctx.config = load_config(config_path, env.getenv);
  } catch (const Error& e) {
    throw UsageError{"config", e.what()};
  }
  auto& c = ctx.config;
  auto apply = [&](const char* flag, const char* key, const auto& value) {
    if (!value) return;
    std::string text;
    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
      text = *value;
    } else {
      text = std::to_string(*value);
    }
    try {
      c.set(key, text);
    } catch (const Error& e) {
      throw UsageError{flag, e.message()};
    }
  };
  apply("--email", "email", g.email);
  apply("--cache-dir", "cache_dir", g.cache_dir);
  apply("--crossref-url", "crossref_url", g.crossref_url);
  apply("--resolver-url", "resolver_url", g.resolver_url);
  apply("--coci-url", "coci_url", g.coci_url);
  apply("--out", "output_dir", g.out);
  apply("--now", "now", g.now);
  apply("--parallelism", "parallelism", g.parallelism);
  apply("--page-size", "page_size", g.page_size);
  apply("--max-retries", "max_retries", g.max_retries);
  if (g.continue_on_error) c.continue_on_error = true;
  if (g.replay) c.replay_only = true;
  if (g.no_cache) c.cache_dir.clear();
  if (c.replay_only && c.cache_dir.empty()) {
    throw UsageError{"--replay", "replay needs a cache directory"};
  }

  if (c.now.empty()) {
    ctx.clock = std::make_shared<SystemClock>();
  } else {
    ctx.clock = std::make_shared<FixedClock>(parse_timestamp(c.now));
  }
  if (!c.cache_dir.empty()) ctx.cache = std::make_shared<Cache>(c.cache_dir);

  ClientPolicy policy = ClientPolicy::defaults(c.contact_email);
  policy.max_page_size = c.page_size;
  policy.max_retries = c.max_retries;
  policy.replay_only = c.replay_only;
  if (env.adjust_policy) env.adjust_policy(policy);
  ctx.crossref = std::make_shared<CrossrefClient>(c.crossref_url, c.resolver_url,
                                                  policy, env.transport, ctx.cache);
  ctx.coci = std::make_shared<CociClient>(c.coci_url, policy, env.transport, ctx.cache);
  return ctx;
}

SearchOptions search_options(const Context& ctx, std::ostream& err, bool quiet) {
  SearchOptions o;
  o.parallelism = ctx.config.parallelism;
  o.continue_on_error = ctx.config.continue_on_error;
  o.clock = ctx.clock;
  o.progress_store = ctx.cache;
  o.config = ctx.config.echo();
  if (!quiet) {
    o.on_progress = [&err](const ProgressEvent& ev) {
      err << "PROGRESS " << ev.origin << " " << ev.fetched << "/" << ev.declared
          << "\n";
      err.flush();
    };
  }
  return o;
}

// Serializes the results in the requested format and fills the summary.
std::string render_export(const ResultSet& rs, const ExportFlags& x,
                          CrossrefClient& crossref, ExportSummary& summary) {
  summary.format = x.format;
  summary.records = rs.size();
  if (x.format == "doi") return to_doi_text(rs);
  if (x.format == "csv") return to_csv(rs, CsvOptions{x.crlf});
  auto mode = x.ris_mode == "negotiated" ? RisMode::kNegotiated : RisMode::kAssembled;
  auto ris = to_ris(rs, mode, &crossref);
  summary.mode = std::string(ris_mode_name(mode));
  summary.fallbacks = ris.fallbacks;
  summary.records = ris.records;
  return std::move(ris.text);
}

int finish_search(SearchOutcome& outcome, const ExportFlags& x, const Context& ctx,
                  std::ostream& out, std::ostream& err, bool quiet) {
  const auto& qid = outcome.report.query_id;
  fs::path dir = ctx.config.output_dir;
  ExportSummary summary;
  std::string data = render_export(outcome.results, x, *ctx.crossref, summary);
  outcome.report.export_summary = summary;

  fs::path data_path = dir / (qid + "." + ext_for(x.format));
  fs::path report_path = dir / (qid + ".report");
  fs::path results_path = dir / (qid + ".results.json");
  write_file(data_path, data);
  write_file(report_path, render_report(outcome.report, ReportFormat::kStructured));
  write_file(results_path, to_json(outcome.results).dump(2) + "\n");
  out << data_path.string() << "\n" << report_path.string() << "\n"
      << results_path.string() << "\n";
  if (!quiet) err << render_report(outcome.report, ReportFormat::kHuman);
  return outcome.report.outcome == Outcome::kSuccess ? kExitOk : kExitPartial;
}

void add_export_flags(CLI::App* sub, ExportFlags& x) {
  sub->add_option("--format", x.format, "Output format")
      ->check(CLI::IsMember({"doi", "ris", "csv"}))
      ->default_str("doi");
  sub->add_option("--ris-mode", x.ris_mode,
                  "RIS from local metadata or from DOI content negotiation")
      ->check(CLI::IsMember({"assembled", "negotiated"}))
      ->default_str("assembled");
  sub->add_flag("--crlf", x.crlf, "CRLF line endings for CSV");
}

std::vector<Doi> read_seeds(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg[0] == '@') {
    try {
      text = read_file(arg.substr(1));
    } catch (const Error& e) {
      throw UsageError{"--seeds", e.message()};
    }
  }
  try {
    return parse_doi_list(text);
  } catch (const Error& e) {
    std::string where;
    if (e.token()) where += " '" + *e.token() + "'";
    if (e.position()) where += " (item " + std::to_string(*e.position()) + ")";
    throw UsageError{"--seeds", e.what() + where};
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const CliEnvironment& env) {
  CLI::App app{"litfetch: journal handsearch and citation snowballing against "
               "Crossref and COCI"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config_path, "Key/value config file (default ./litfetch.toml)");
  app.add_option("--email", g.email, "Contact address for the polite pool");
  app.add_option("--cache-dir", g.cache_dir, "Response and progress cache root");
  app.add_flag("--no-cache", g.no_cache, "Disable the cache");
  app.add_option("--crossref-url", g.crossref_url, "Crossref API base URL");
  app.add_option("--resolver-url", g.resolver_url, "DOI resolver base URL");
  app.add_option("--coci-url", g.coci_url, "COCI API base URL");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--parallelism", g.parallelism, "Origins fetched concurrently");
  app.add_option("--page-size", g.page_size, "Rows per listing page");
  app.add_option("--max-retries", g.max_retries, "Retries per request");
  app.add_flag("--continue-on-error", g.continue_on_error,
               "Report failed origins instead of aborting");
  app.add_flag("--replay", g.replay, "Serve every request from the cache");
  app.add_option("--now", g.now, "Fixed report time, YYYY-MM-DDTHH:MM:SSZ");
  app.add_flag("-q,--quiet", g.quiet, "No progress or report on stderr");
  app.add_flag("-v,--verbose", g.verbose, "More logging; repeat for debug");

  // handsearch
  auto* hs = app.add_subcommand("handsearch", "All works of journals in a date range");
  std::vector<std::string> issns;
  std::string from, until;
  std::optional<std::string> keywords;
  bool fresh = false, estimate = false;
  ExportFlags hx;
  hs->add_option("--issn", issns, "Journal ISSN; repeat or comma-separate")->required();
  hs->add_option("--from", from, "First publication date, YYYY-MM-DD")->required();
  hs->add_option("--until", until, "Last publication date, YYYY-MM-DD")->required();
  hs->add_option("--keywords", keywords, "Comma-separated terms (not recommended)");
  hs->add_flag("--fresh", fresh, "Ignore stored progress for this query");
  hs->add_flag("--estimate", estimate, "Only print each journal's declared total");
  add_export_flags(hs, hx);

  // snowball
  auto* sb = app.add_subcommand("snowball", "Forward or backward citation chasing");
  std::string seeds_arg, direction;
  std::optional<bool> hydrate_flag;
  ExportFlags sx;
  sb->add_option("--seeds", seeds_arg, "Comma-separated DOIs or @file")->required();
  sb->add_option("--direction", direction, "forward or backward")->required();
  sb->add_flag("--hydrate,!--no-hydrate", hydrate_flag,
               "Fetch full metadata for found DOIs (default: on for ris/csv)");
  add_export_flags(sb, sx);

  // export
  auto* ex = app.add_subcommand("export", "Re-export a saved <query_id>.results.json");
  std::string results_file;
  ExportFlags xx;
  ex->add_option("results", results_file, "Results file written by a search")
      ->required();
  add_export_flags(ex, xx);

  // lookup
  auto* lk = app.add_subcommand("lookup", "Find journals by name or ISSN");
  std::string lookup_q;
  std::size_t max_candidates = 20;
  lk->add_option("query", lookup_q, "Journal title words or an ISSN")->required();
  lk->add_option("--max", max_candidates, "Candidate limit")->default_val(20);

  // serve
  auto* sv = app.add_subcommand("serve", "Run the HTTP job service");
  ServiceConfig service_config;
  JobManagerConfig jobs_config;
  sv->add_option("--bind", service_config.bind_address, "Bind address")
      ->default_str("127.0.0.1");
  sv->add_option("--port", service_config.port, "Port")->default_val(8080);
  sv->add_option("--workers", jobs_config.workers, "Jobs run at once")->default_val(2);
  sv->add_option("--queue-depth", jobs_config.queue_depth, "Queued jobs accepted")
      ->default_val(16);
  sv->add_option("--cors-origin", service_config.cors_origin, "Allowed UI origin")
      ->default_str("*");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "litfetch: " << e.what() << "\n";
    return kExitUsage;
  }
  if (g.verbose >= 2) {
    log::set_level(log::Level::kDebug);
  } else if (g.verbose == 1) {
    log::set_level(log::Level::kInfo);
  }

  try {
    Context ctx = make_context(g, env);

    if (*hs) {
      std::vector<Issn> journals;
      std::size_t position = 0;
      for (const auto& arg : issns) {
        std::stringstream parts(arg);
        std::string piece;
        while (std::getline(parts, piece, ',')) {
          piece = trim(piece);
          if (piece.empty()) continue;
          try {
            journals.push_back(validate_issn(piece));
          } catch (const Error& e) {
            throw UsageError{"--issn", std::string(e.what()) + " (item " +
                                           std::to_string(position) + ")"};
          }
          ++position;
        }
      }
      std::optional<DateRange> range;
      try {
        range = parse_date_range(from, until);
      } catch (const Error& e) {
        throw UsageError{"--from/--until", e.what()};
      }
      KeywordList kw;
      if (keywords) {
        try {
          kw = parse_keywords(*keywords);
        } catch (const Error& e) {
          throw UsageError{"--keywords", e.what()};
        }
      }
      std::optional<HandsearchQuery> query;
      try {
        query.emplace(std::move(journals), *range, kw);
      } catch (const Error& e) {
        throw UsageError{"--issn", e.what()};
      }
      if (!kw.empty()) err << kKeywordWarning << "\n";
      if (estimate) {
        for (const auto& [issn, total] : estimate_workload(*query, *ctx.crossref)) {
          out << issn.str() << "\t" << total << "\n";
        }
        return kExitOk;
      }
      auto options = search_options(ctx, err, g.quiet);
      options.resume = !fresh;
      auto outcome = run_handsearch(*query, *ctx.crossref, options);
      return finish_search(outcome, hx, ctx, out, err, g.quiet);
    }

    if (*sb) {
      auto seeds = read_seeds(seeds_arg);
      Direction dir;
      try {
        dir = parse_direction(direction);
      } catch (const Error& e) {
        throw UsageError{"--direction", e.what()};
      }
      bool hydrate = hydrate_flag.value_or(sx.format != "doi");
      std::optional<SnowballQuery> query;
      try {
        query.emplace(std::move(seeds), dir, hydrate);
      } catch (const Error& e) {
        throw UsageError{"--seeds", e.what()};
      }
      auto outcome = run_snowball(*query, *ctx.coci, *ctx.crossref,
                                  search_options(ctx, err, g.quiet));
      return finish_search(outcome, sx, ctx, out, err, g.quiet);
    }

    if (*ex) {
      ResultSet rs;
      try {
        rs = resultset_from_json(nlohmann::json::parse(read_file(results_file)));
      } catch (const nlohmann::json::exception& e) {
        throw UsageError{"results", results_file + " is not a results file: " + e.what()};
      } catch (const Error& e) {
        throw UsageError{"results", e.what()};
      }
      std::string stem = fs::path(results_file).filename().string();
      if (auto pos = stem.find(".results.json"); pos != std::string::npos) {
        stem = stem.substr(0, pos);
      }
      ExportSummary summary;
      auto data = render_export(rs, xx, *ctx.crossref, summary);
      fs::path path = fs::path(ctx.config.output_dir) / (stem + "." + ext_for(xx.format));
      write_file(path, data);
      out << path.string() << "\n";
      if (summary.fallbacks) {
        err << summary.fallbacks << " of " << summary.records
            << " records assembled locally after negotiation failed\n";
      }
      return kExitOk;
    }

    if (*lk) {
      std::vector<JournalRecord> found;
      try {
        found = ctx.crossref->lookup_journal(lookup_q, max_candidates);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kUnknownJournal) throw;
      }
      for (const auto& j : found) {
        out << j.title << "\t";
        for (std::size_t i = 0; i < j.issns.size(); ++i) {
          out << (i ? ", " : "") << j.issns[i].str();
        }
        out << "\n";
      }
      if (found.empty()) {
        err << "no journal matches '" << lookup_q << "'\n";
        return kExitPartial;
      }
      return kExitOk;
    }

    if (*sv) {
      if (!ctx.cache) throw UsageError{"--cache-dir", "serve needs a cache directory"};
      jobs_config.parallelism = ctx.config.parallelism;
      jobs_config.config = ctx.config.echo();
      auto jobs = std::make_shared<JobManager>(
          ctx.cache, make_job_runner(ctx.crossref, ctx.coci, ctx.clock), jobs_config,
          ctx.clock);
      Service service(jobs, ctx.crossref, service_config);
      err << "litfetch service on http://" << service_config.bind_address << ":"
          << service_config.port << "\n";
      service.run();
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "litfetch: " << e.flag << ": " << e.message << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "litfetch: aborted: " << e.what();
    if (e.origin()) err << " [origin " << *e.origin() << "]";
    err << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    err << "litfetch: aborted: " << e.what() << "\n";
    return kExitAbort;
  }
  return kExitUsage;
}

}  // namespace litfetch
