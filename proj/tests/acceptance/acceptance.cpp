// Prints one PASS/FAIL line per acceptance criterion. Exit status is 0 only
// when every criterion passes. Everything runs against in-process mocks or
// a localhost mock server; no live network.
//
//   acceptance                     run all criteria
//   acceptance --emit-report PATH  write the reproducibility report and exit

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "litfetch/cli.hpp"
#include "litfetch/error.hpp"
#include "litfetch/export.hpp"
#include "litfetch/handsearch.hpp"
#include "litfetch/log.hpp"
#include "litfetch/service.hpp"
#include "litfetch/snowball.hpp"
#include "support/fixtures.hpp"

using namespace litfetch;
using namespace litfetch::testing;
using nlohmann::json;
using Steady = std::chrono::steady_clock;

namespace {

// Pinned tolerances. Every count comparison is exact.
constexpr std::size_t kCountTolerance = 0;
constexpr double kPaginationBudgetSeconds = 10.0;  // per property run
constexpr double kSnowballBudgetSeconds = 30.0;
constexpr std::size_t kMaxCorpus = 2000;
constexpr std::size_t kMaxGraphNodes = 500;
constexpr int kMergeFixtures = 1000;
constexpr int kRisRecords = 1000;
constexpr int kReproRuns = 10;
constexpr int kPolls = 100;

const Timestamp kAt = parse_timestamp("2024-03-01T12:00:00Z");

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    if (!detail.empty()) detail += "; ";
    detail += why;
    pass = false;
  }
  void note(const std::string& s) {
    if (pass) detail = s;
  }
};

bool within(std::size_t a, std::size_t b) {
  return (a > b ? a - b : b - a) <= kCountTolerance;
}

double seconds_since(Steady::time_point t) {
  return std::chrono::duration<double>(Steady::now() - t).count();
}

SearchOptions fixed_options() {
  SearchOptions o;
  o.clock = std::make_shared<FixedClock>(kAt);
  return o;
}

// --- pagination ----------------------------------------------------------

Verdict pagination() {
  Verdict v;
  std::mt19937_64 rng(1001);
  const Issn j = issn("0028-0836");
  const auto year = range("2020-01-01", "2020-12-31");
  double worst = 0;
  int runs = 0;
  for (std::size_t page : {std::size_t{1}, std::size_t{7}, std::size_t{100}}) {
    auto start = Steady::now();
    std::size_t cap = page == 1 ? 150 : kMaxCorpus;
    std::vector<std::size_t> sizes = {0, 1, page, page + 1, cap};
    for (int i = 0; i < 4; ++i) sizes.push_back(rng() % (cap + 1));
    for (auto n : sizes) {
      auto up = std::make_shared<MockUpstream>();
      up->add_journal(j, "J");
      for (const auto& w : journal_works("p", n, j)) up->add_work(j, w);
      auto client = mock_crossref(up, page);
      auto works = client->fetch_all_journal_works(j, year, {});
      std::set<std::string> unique;
      for (const auto& w : works) unique.insert(w.doi.str());
      if (!within(works.size(), n) || !within(unique.size(), n)) {
        v.fail("page " + std::to_string(page) + ", N=" + std::to_string(n) + ": got " +
               std::to_string(works.size()) + " (" + std::to_string(unique.size()) +
               " unique)");
      }
      ++runs;
    }
    double t = seconds_since(start);
    worst = std::max(worst, t);
    if (t > kPaginationBudgetSeconds) {
      v.fail("page size " + std::to_string(page) + " took " + std::to_string(t) + " s");
    }
  }
  v.note(std::to_string(runs) + " corpora over page sizes 1/7/100, slowest property run " +
         std::to_string(worst).substr(0, 5) + " s");
  return v;
}

// --- three-input contract ------------------------------------------------

Verdict three_inputs() {
  Verdict v;
  const Issn j = issn("0028-0836");
  auto expect_throw = [&](const char* what, const std::function<void()>& f) {
    try {
      f();
      v.fail(std::string(what) + " was accepted");
    } catch (const Error&) {
    }
  };
  expect_throw("empty journal list",
               [] { HandsearchQuery({}, range("2020-01-01", "2020-12-31")); });
  expect_throw("inverted range", [] { parse_date_range("2021-01-01", "2020-01-01"); });
  expect_throw("missing date", [] { parse_date_range("", "2020-01-01"); });
  expect_throw("bad ISSN", [] { validate_issn("0028-0837"); });

  // Boundary dates are inclusive.
  auto up = std::make_shared<MockUpstream>();
  up->add_journal(j, "J");
  up->add_work(j, article("10.5555/before", ymd(2019, 12, 31)));
  up->add_work(j, article("10.5555/first", ymd(2020, 1, 1)));
  up->add_work(j, article("10.5555/last", ymd(2020, 12, 31)));
  up->add_work(j, article("10.5555/after", ymd(2021, 1, 1)));
  auto client = mock_crossref(up);
  auto out = run_handsearch(HandsearchQuery({j}, range("2020-01-01", "2020-12-31")), *client,
                            fixed_options());
  if (doi_strings(out.results) != std::set<std::string>{"10.5555/first", "10.5555/last"}) {
    v.fail("boundary works not exactly {first, last}");
  }
  bool filter_ok = false;
  for (const auto& r : up->log()) {
    for (const auto& [k, val] : r.parsed.query) {
      if (k == "filter" && val.find("from-pub-date:2020-01-01") != std::string::npos &&
          val.find("until-pub-date:2020-12-31") != std::string::npos) {
        filter_ok = true;
      }
    }
  }
  if (!filter_ok) v.fail("listing filter did not carry both inclusive bounds");

  // Keyword runs are membership subsets of keywordless runs.
  std::mt19937_64 rng(2002);
  const std::vector<std::string> vocab = {"screening", "cohort", "trial", "survey",
                                          "review",    "study",  "zebra"};
  int subset_checks = 0;
  for (int round = 0; round < 50; ++round) {
    auto up2 = std::make_shared<MockUpstream>();
    up2->add_journal(j, "J");
    for (const auto& w : journal_works("k" + std::to_string(round), rng() % 120, j)) {
      up2->add_work(j, w);
    }
    auto c2 = mock_crossref(up2, 1 + rng() % 50);
    auto base = run_handsearch(HandsearchQuery({j}, range("2020-01-01", "2020-12-31")), *c2,
                               fixed_options());
    std::vector<std::string> terms = {vocab[rng() % vocab.size()]};
    if (rng() % 2) terms.push_back(vocab[rng() % vocab.size()]);
    if (terms.size() == 2 && terms[0] == terms[1]) terms.pop_back();
    auto keyed = run_handsearch(
        HandsearchQuery({j}, range("2020-01-01", "2020-12-31"), KeywordList(terms)), *c2,
        fixed_options());
    auto all = doi_strings(base.results);
    for (const auto& d : doi_strings(keyed.results)) {
      if (!all.count(d)) v.fail("keyword run found " + d + " absent from keywordless run");
    }
    ++subset_checks;
  }
  v.note("required/optional inputs enforced, inclusive boundaries, " +
         std::to_string(subset_checks) + " keyword subset checks");
  return v;
}

// --- multi-journal merge -------------------------------------------------

Verdict merge_union() {
  Verdict v;
  std::mt19937_64 rng(3003);
  const Issn j1 = issn("0028-0836"), j2 = issn("1476-4687");
  const auto year = range("2020-01-01", "2020-12-31");
  std::vector<WorkMetadata> pool = journal_works("m", 60, j1);
  for (int f = 0; f < kMergeFixtures; ++f) {
    auto up = std::make_shared<MockUpstream>();
    up->add_journal(j1, "A");
    up->add_journal(j2, "B");
    std::vector<WorkMetadata> a, b;
    for (const auto& w : pool) {
      if (rng() % 3 == 0) a.push_back(w);
      if (rng() % 3 == 0) b.push_back(w);
    }
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    for (const auto& w : a) up->add_work(j1, w);
    for (const auto& w : b) up->add_work(j2, w);
    std::set<std::string> oracle;
    for (const auto& w : a) oracle.insert(w.doi.str());
    for (const auto& w : b) oracle.insert(w.doi.str());

    auto client = mock_crossref(up, 1 + rng() % 40);
    auto out = run_handsearch(HandsearchQuery({j1, j2}, year), *client, fixed_options());
    if (!within(out.results.size(), oracle.size()) || doi_strings(out.results) != oracle) {
      v.fail("fixture " + std::to_string(f) + ": " + std::to_string(out.results.size()) +
             " entries vs union " + std::to_string(oracle.size()));
      break;
    }
    if (out.report.duplicates_removed != a.size() + b.size() - oracle.size()) {
      v.fail("fixture " + std::to_string(f) + ": duplicates_removed wrong");
      break;
    }

    // Algebraic laws on the per-journal sets.
    ResultSet ra, rb;
    for (const auto& w : a) ra.add(w, SourceTag::handsearch(j1, "q"));
    for (const auto& w : b) rb.add(w, SourceTag::handsearch(j2, "q"));
    auto ids = [](const ResultSet& rs) { return doi_set(rs); };
    if (ids(merge(ra, ResultSet{})) != ids(ra) || ids(merge(ResultSet{}, ra)) != ids(ra)) {
      v.fail("identity law broken at fixture " + std::to_string(f));
      break;
    }
    if (ids(merge(ra, ra)) != ids(ra)) {
      v.fail("idempotence broken at fixture " + std::to_string(f));
      break;
    }
    if (doi_strings(merge(ra, rb)) != doi_strings(merge(rb, ra))) {
      v.fail("membership differs by merge order at fixture " + std::to_string(f));
      break;
    }
  }
  v.note(std::to_string(kMergeFixtures) +
         " journal-pair fixtures equal brute-force union; identity and idempotence hold");
  return v;
}

// --- snowball union ------------------------------------------------------

Verdict snowball_union() {
  Verdict v;
  std::mt19937_64 rng(4004);
  auto start = Steady::now();
  int graphs = 0, duality_pairs = 0;
  for (std::size_t n : {std::size_t{60}, std::size_t{200}, kMaxGraphNodes}) {
    for (int g = 0; g < 3; ++g) {
      auto graph = random_graph(rng, n, 6.0 / static_cast<double>(n));
      auto up = std::make_shared<MockUpstream>();
      load_graph(*up, graph);
      auto crossref = mock_crossref(up);
      auto coci = mock_coci(up);
      std::vector<std::vector<std::size_t>> cited_by(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (auto k : graph.cites[i]) cited_by[k].push_back(i);
      }
      std::set<std::size_t> seed_idx;
      std::size_t want = 1 + rng() % 10;
      while (seed_idx.size() < want) seed_idx.insert(rng() % n);
      std::vector<Doi> seeds;
      std::set<std::string> seed_names;
      for (auto s : seed_idx) {
        seeds.push_back(graph.nodes[s]);
        seed_names.insert(graph.nodes[s].str());
      }
      std::set<std::string> back_oracle, fwd_oracle;
      for (auto s : seed_idx) {
        for (auto k : graph.cites[s]) back_oracle.insert(graph.nodes[k].str());
        for (auto k : cited_by[s]) fwd_oracle.insert(graph.nodes[k].str());
      }
      for (const auto& s : seed_names) {
        back_oracle.erase(s);
        fwd_oracle.erase(s);
      }
      auto back = run_snowball(SnowballQuery(seeds, Direction::kBackward, false), *coci,
                               *crossref, fixed_options());
      auto fwd = run_snowball(SnowballQuery(seeds, Direction::kForward, false), *coci,
                              *crossref, fixed_options());
      if (doi_strings(back.results) != back_oracle) {
        v.fail("backward union mismatch on " + std::to_string(n) + "-node graph");
      }
      if (doi_strings(fwd.results) != fwd_oracle) {
        v.fail("forward union mismatch on " + std::to_string(n) + "-node graph");
      }

      // Duality: b in backward({a}) iff a in forward({b}).
      for (int p = 0; p < 20; ++p) {
        std::size_t a = rng() % n, b = rng() % n;
        if (p % 2 == 0 && !graph.cites[a].empty()) {
          b = graph.cites[a][rng() % graph.cites[a].size()];
        }
        if (a == b) continue;
        auto ba = run_snowball(SnowballQuery({graph.nodes[a]}, Direction::kBackward, false), *coci,
                               *crossref, fixed_options());
        auto fb = run_snowball(SnowballQuery({graph.nodes[b]}, Direction::kForward, false), *coci,
                               *crossref, fixed_options());
        bool left = ba.results.contains(graph.nodes[b]);
        bool right = fb.results.contains(graph.nodes[a]);
        if (left != right) v.fail("duality broken for " + graph.nodes[a].str() + " / " +
                                  graph.nodes[b].str());
        ++duality_pairs;
      }
      ++graphs;
    }
  }
  double t = seconds_since(start);
  if (t > kSnowballBudgetSeconds) v.fail("took " + std::to_string(t) + " s");
  v.note(std::to_string(graphs) + " graphs up to " + std::to_string(kMaxGraphNodes) +
         " nodes, " + std::to_string(duality_pairs) + " duality pairs, " +
         std::to_string(t).substr(0, 5) + " s");
  return v;
}

// --- export fidelity -----------------------------------------------------

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,.;:\"'-()/&%?";
  std::string s(rng() % (max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

std::string two(unsigned x) { return (x < 10 ? "0" : "") + std::to_string(x); }

Verdict export_fidelity() {
  Verdict v;
  std::mt19937_64 rng(5005);
  int sets = 0;
  for (int round = 0; round < 100; ++round) {
    ResultSet rs;
    std::size_t n = rng() % 25;
    for (std::size_t i = 0; i < n; ++i) {
      WorkMetadata w(doi("10.5555/x" + std::to_string(round) + "-" + std::to_string(i)));
      w.title = random_text(rng, 50);
      if (rng() % 4 == 0) w.title += "\r\nline";
      for (std::size_t k = rng() % 4; k > 0; --k) {
        w.authors.push_back({random_text(rng, 8), random_text(rng, 8)});
      }
      w.container_title = random_text(rng, 20);
      w.publisher = random_text(rng, 20);
      if (rng() % 2) w.published = ymd(1990 + rng() % 30, 1 + rng() % 12, 1 + rng() % 28);
      if (rng() % 2) w.abstract = random_text(rng, 120);
      if (rng() % 2) w.url = "https://doi.org/" + w.doi.str();
      w.work_type = rng() % 3 ? "journal-article" : "book-chapter";
      rs.add(w, SourceTag::handsearch(issn("0028-0836"), "q"));
    }
    // DOI text.
    auto back = parse_doi_list(to_doi_text(rs));
    if (back != doi_set(rs)) v.fail("DOI text round trip differs in set " + std::to_string(round));
    // CSV against an independent reader and a directly built cell matrix.
    auto rows = rfc4180_parse(to_csv(rs, CsvOptions{rng() % 2 == 0}));
    if (!within(rows.size(), n + 1)) {
      v.fail("CSV row count " + std::to_string(rows.size()) + " for " + std::to_string(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& w = rs.entries()[i].work;
        std::string authors;
        for (std::size_t k = 0; k < w.authors.size(); ++k) {
          const auto& a = w.authors[k];
          std::string name = a.family.empty()  ? a.given
                             : a.given.empty() ? a.family
                                               : a.family + ", " + a.given;
          authors += (k ? "; " : "") + name;
        }
        std::vector<std::string> expect = {
            w.doi.str(),
            w.title,
            authors,
            w.container_title,
            w.publisher,
            w.published ? std::to_string(w.published->year) : "",
            w.published && w.published->month ? two(*w.published->month) : "",
            w.published && w.published->day ? two(*w.published->day) : "",
            w.abstract.value_or(""),
            w.url.value_or("")};
        if (rows[i + 1] != expect) {
          v.fail("CSV cells differ for " + w.doi.str());
          break;
        }
      }
    }
    // RIS record count.
    auto ris = to_ris(rs);
    if (!within(ris_parse(ris.text).size(), n) || !within(ris.records, n)) {
      v.fail("RIS record count differs in set " + std::to_string(round));
    }
    ++sets;
  }
  // parse . serialize identity on random records.
  static const char* tags[] = {"TI", "AU", "JO", "PY", "DA", "AB", "DO", "UR", "PB", "SN", "KW", "N1"};
  for (int i = 0; i < kRisRecords; ++i) {
    RisRecord r;
    std::string ty = random_text(rng, 6);
    r.fields.push_back({"TY", ty.empty() ? "JOUR" : ty});
    for (std::size_t k = rng() % 10; k > 0; --k) {
      r.fields.push_back({tags[rng() % std::size(tags)], random_text(rng, 60)});
    }
    r.fields.push_back({"ER", ""});
    auto parsed = ris_parse(ris_serialize(r));
    if (parsed.size() != 1 || parsed[0] != r) {
      v.fail("RIS round trip changed record " + std::to_string(i));
      break;
    }
  }
  v.note(std::to_string(sets) + " random sets in DOI/CSV/RIS, " + std::to_string(kRisRecords) +
         " random RIS records round-tripped");
  return v;
}

// --- report reproducibility ----------------------------------------------

std::shared_ptr<MockUpstream> repro_corpus() {
  auto up = std::make_shared<MockUpstream>();
  up->add_journal(issn("0028-0836"), "Nature");
  up->add_journal(issn("1476-4687"), "Nature Online");
  for (const auto& w : journal_works("r", 130, issn("0028-0836"))) up->add_work(issn("0028-0836"), w);
  for (const auto& w : journal_works("r", 45, issn("1476-4687"))) up->add_work(issn("1476-4687"), w);
  for (const auto& w : journal_works("s", 30, issn("1476-4687"))) up->add_work(issn("1476-4687"), w);
  return up;
}

SearchOutcome repro_run() {
  auto client = mock_crossref(repro_corpus(), 40);
  auto opts = fixed_options();
  opts.config = {{"page_size", "40"}};
  return run_handsearch(
      HandsearchQuery({issn("1476-4687"), issn("0028-0836")}, range("2020-01-01", "2020-12-31")),
      *client, opts);
}

std::string self_exe;

Verdict report_reproducibility() {
  Verdict v;
  auto first = repro_run();
  auto reference = render_report(first.report, ReportFormat::kStructured);
  for (int i = 1; i < kReproRuns; ++i) {
    if (render_report(repro_run().report, ReportFormat::kStructured) != reference) {
      v.fail("run " + std::to_string(i) + " differs");
    }
  }
  // Across process restarts: two fresh processes write the same bytes.
  TempDir dir;
  for (int p = 0; p < 2; ++p) {
    auto path = dir / ("child" + std::to_string(p) + ".report");
    std::string cmd = "'" + self_exe + "' --emit-report '" + path.string() + "'";
    if (std::system(cmd.c_str()) != 0) {
      v.fail("child process failed");
    } else if (read_text(path) != reference) {
      v.fail("report from process " + std::to_string(p) + " differs");
    }
  }
  // Count consistency.
  const auto& r = first.report;
  std::size_t retrieved = 0;
  for (const auto& o : r.per_origin_counts) retrieved += o.retrieved;
  if (retrieved != r.total_unique + r.duplicates_removed) v.fail("counts do not add up");
  if (!within(r.total_unique, first.results.size())) v.fail("total_unique != result size");
  if (r.total_unique != 160 || r.duplicates_removed != 45) {
    v.fail("expected 160 unique / 45 duplicates, got " + std::to_string(r.total_unique) + " / " +
           std::to_string(r.duplicates_removed));
  }
  v.note(std::to_string(kReproRuns) + " in-process runs and 2 fresh processes byte-identical; " +
         std::to_string(retrieved) + " retrieved = " + std::to_string(r.total_unique) +
         " unique + " + std::to_string(r.duplicates_removed) + " duplicates");
  return v;
}

// --- resumability --------------------------------------------------------

Verdict resumability() {
  Verdict v;
  const Issn j1 = issn("0028-0836"), j2 = issn("1476-4687");
  auto corpus = [&] {
    auto up = std::make_shared<MockUpstream>();
    up->add_journal(j1, "A");
    up->add_journal(j2, "B");
    for (const auto& w : journal_works("a", 120, j1)) up->add_work(j1, w);
    for (const auto& w : journal_works("b", 80, j2)) up->add_work(j2, w);
    return up;
  };
  HandsearchQuery q({j1, j2}, range("2020-01-01", "2020-12-31"));
  auto uninterrupted = run_handsearch(q, *mock_crossref(corpus(), 25), fixed_options());

  TempDir dir;
  auto store = std::make_shared<Cache>(dir.path());
  auto up = corpus();
  auto client = mock_crossref(up, 25);
  struct Interrupt {};
  auto opts = fixed_options();
  opts.parallelism = 1;
  opts.progress_store = store;
  opts.on_progress = [&](const ProgressEvent& e) {
    if (e.origin == j2.str()) throw Interrupt{};
  };
  bool interrupted = false;
  try {
    run_handsearch(q, *client, opts);
  } catch (const Interrupt&) {
    interrupted = true;
  }
  if (!interrupted) v.fail("run was not interrupted");
  std::size_t j1_first = up->count("/journals/" + j1.str() + "/works");

  up->clear_log();
  opts.on_progress = nullptr;
  auto resumed = run_handsearch(q, *client, opts);
  std::size_t j1_pages = up->count("/journals/" + j1.str() + "/works");
  std::size_t j2_pages = up->count("/journals/" + j2.str() + "/works");
  if (j1_pages != 0) v.fail(std::to_string(j1_pages) + " journal-1 pages re-fetched");
  if (j2_pages == 0) v.fail("journal 2 was not fetched on resume");
  if (doi_set(resumed.results) != doi_set(uninterrupted.results)) {
    v.fail("resumed DOI set differs from the uninterrupted run");
  }
  v.note("journal 1 took " + std::to_string(j1_first) + " pages before the interrupt, 0 on resume; " +
         std::to_string(resumed.results.size()) + " DOIs equal the uninterrupted run");
  return v;
}

// --- degraded data -------------------------------------------------------

Verdict degraded_data() {
  Verdict v;
  // Withheld references: declared but not deposited.
  auto up = std::make_shared<MockUpstream>();
  auto seed = article("10.5555/withheld", ymd(2019, 5, 5), "References withheld");
  up->add_standalone_work(seed);
  up->set_references(seed.doi, {}, 0, 40);
  auto crossref = mock_crossref(up);
  auto coci = mock_coci(up);
  try {
    auto out = run_snowball(SnowballQuery({seed.doi}, Direction::kBackward, false), *coci,
                            *crossref, fixed_options());
    if (!out.results.empty()) v.fail("backward results not empty");
    const auto& o = out.report.per_origin_counts.at(0);
    if (o.unresolvable != 40) v.fail("declared count not reported (" +
                                     std::to_string(o.unresolvable) + ")");
    bool flagged = std::any_of(o.flags.begin(), o.flags.end(), [](const std::string& f) {
      return f.find("40 declared") != std::string::npos;
    });
    if (!flagged) v.fail("no withheld-references flag");
  } catch (const std::exception& e) {
    v.fail(std::string("backward snowball threw: ") + e.what());
  }

  // Missing abstracts: negotiated RIS through the CLI, resolver answers for
  // only some DOIs; the rest are assembled and counted in the report.
  auto up2 = std::make_shared<MockUpstream>();
  const Issn j = issn("0028-0836");
  up2->add_journal(j, "J");
  auto works = journal_works("d", 20, j);
  for (std::size_t i = 0; i < works.size(); ++i) {
    works[i].abstract.reset();
    up2->add_work(j, works[i]);
    if (i % 2 == 0) {
      up2->set_ris(works[i].doi, "TY  - JOUR\nDO  - " + works[i].doi.str() + "\nER  - \n");
    } else {
      up2->set_ris_status(works[i].doi, 404);
    }
  }
  TempDir dir;
  std::vector<std::string> args = {"litfetch", "--no-cache", "-q",
                                   "--crossref-url", kMockCrossref,
                                   "--resolver-url", kMockResolver,
                                   "--coci-url", kMockCoci,
                                   "--out", dir.path().string(),
                                   "--now", "2024-03-01T12:00:00Z",
                                   "handsearch", "--issn", j.str(),
                                   "--from", "2020-01-01", "--until", "2020-12-31",
                                   "--format", "ris", "--ris-mode", "negotiated"};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  CliEnvironment env;
  env.getenv = [](const char*) { return std::optional<std::string>(); };
  env.default_config = dir / "none.toml";
  env.transport = up2;
  env.adjust_policy = [](ClientPolicy& p) { p.min_request_interval = std::chrono::microseconds(1); };
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, env);
  if (code != kExitOk) {
    v.fail("CLI exit " + std::to_string(code) + ": " + err.str());
  } else {
    HandsearchQuery q({j}, range("2020-01-01", "2020-12-31"));
    auto report = json::parse(read_text(dir / (q.query_id() + ".report")));
    auto records = ris_parse(read_text(dir / (q.query_id() + ".ris")));
    if (records.size() != 20) v.fail(std::to_string(records.size()) + " RIS records, want 20");
    if (report["export"]["fallbacks"] != 10) {
      v.fail("report counts " + report["export"]["fallbacks"].dump() + " fallbacks, want 10");
    }
    if (report["export"]["records"] != report["total_unique"]) v.fail("export records != total");
  }
  v.note("withheld references: empty result, 40 declared reported; 20 abstract-less works "
         "exported with 10 fallbacks counted");
  return v;
}

// --- service consistency -------------------------------------------------

Verdict service_consistency() {
  Verdict v;
  auto up = std::make_shared<MockUpstream>();
  for (const auto& [i, n] : std::vector<std::pair<std::string, std::size_t>>{
           {"0028-0836", 60}, {"1476-4687", 35}, {"0036-8075", 20}}) {
    up->add_journal(issn(i), "J" + i);
    for (const auto& w : journal_works(i == "0036-8075" ? "j0028-0836" : "j" + i, n, issn(i))) {
      up->add_work(issn(i), w);
    }
  }
  std::mt19937_64 rng(9009);
  auto graph = random_graph(rng, 80, 0.08);
  load_graph(*up, graph);
  up->set_latency(std::chrono::milliseconds(4));

  TempDir dir;
  auto store = std::make_shared<Cache>(dir.path());
  std::shared_ptr<CrossrefClient> crossref = mock_crossref(up, 10);
  std::shared_ptr<CociClient> coci = mock_coci(up);
  auto clock = std::make_shared<FixedClock>(kAt);
  auto jobs = std::make_shared<JobManager>(store, make_job_runner(crossref, coci, clock),
                                           JobManagerConfig{}, clock);
  ServiceConfig sc;
  sc.port = 0;
  Service service(jobs, crossref, sc);
  httplib::Client http("127.0.0.1", service.start());
  http.set_read_timeout(30, 0);

  auto range_body = json{{"from", "2020-01-01"}, {"until", "2020-12-31"}};
  std::vector<std::pair<std::string, json>> submissions = {
      {"/api/handsearch", {{"journals", {"0028-0836", "1476-4687", "0036-8075"}}, {"range", range_body}}},
      {"/api/handsearch", {{"journals", {"0028-0836", "0000-0019"}}, {"range", range_body},
                           {"continue_on_error", true}}},
      {"/api/snowball", {{"seeds", {graph.nodes[0].str(), graph.nodes[1].str()}},
                         {"direction", "forward"}}},
      {"/api/snowball", {{"seeds", graph.nodes[2].str() + "," + graph.nodes[3].str()},
                         {"direction", "backward"}, {"format", "ris"}}},
  };
  std::vector<std::string> ids;
  for (const auto& [path, body] : submissions) {
    auto res = http.Post(path.c_str(), body.dump(), "application/json");
    if (!res || res->status != 202) {
      v.fail("submission to " + path + " refused");
      continue;
    }
    ids.push_back(json::parse(res->body)["job_id"].get<std::string>());
  }

  // Poll the first job 100 times: state and progress never go backwards.
  std::map<std::string, std::size_t> last;
  int last_state = 0;
  for (int p = 0; p < kPolls && !ids.empty(); ++p) {
    auto res = http.Get(("/api/jobs/" + ids[0]).c_str());
    if (!res || res->status != 200) {
      v.fail("poll failed");
      break;
    }
    json job = json::parse(res->body);
    std::string s = job["state"];
    int rank = s == "queued" ? 0 : s == "running" ? 1 : 2;
    if (rank < last_state) v.fail("state regressed to " + s);
    last_state = rank;
    for (const auto& pr : job["progress"]) {
      auto o = pr["origin"].get<std::string>();
      auto f = pr["fetched"].get<std::size_t>();
      if (f < last[o]) v.fail("progress of " + o + " decreased");
      last[o] = f;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  int checked = 0;
  for (const auto& id : ids) {
    if (!jobs->wait(id, std::chrono::seconds(60))) {
      v.fail("job " + id + " did not finish");
      continue;
    }
    json job = json::parse(http.Get(("/api/jobs/" + id).c_str())->body);
    if (job["state"] == "failed") {
      v.fail("job " + id + " failed: " + job["error"].dump());
      continue;
    }
    std::size_t total = job["report"]["total_unique"];
    auto doi = http.Get(("/api/jobs/" + id + "/export?format=doi").c_str());
    auto ris = http.Get(("/api/jobs/" + id + "/export?format=ris").c_str());
    std::size_t doi_lines = std::count(doi->body.begin(), doi->body.end(), '\n');
    std::size_t ris_records = ris_parse(ris->body).size();
    if (!within(doi_lines, total) || !within(ris_records, total)) {
      v.fail("job " + id + ": total " + std::to_string(total) + ", DOI lines " +
             std::to_string(doi_lines) + ", RIS records " + std::to_string(ris_records));
    }
    ++checked;
  }
  service.stop();
  jobs->shutdown();
  v.note(std::to_string(checked) + " finished jobs with export counts equal to total_unique; " +
         std::to_string(kPolls) + " polls monotone");
  return v;
}

int emit_report(const std::string& path) {
  write_text(path, render_report(repro_run().report, ReportFormat::kStructured));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  log::set_level(log::Level::kError);
  if (argc == 3 && std::string(argv[1]) == "--emit-report") return emit_report(argv[2]);
  std::error_code ec;
  self_exe = std::filesystem::read_symlink("/proc/self/exe", ec).string();
  if (ec) self_exe = argv[0];

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"pagination-completeness", pagination},
      {"handsearch-three-inputs", three_inputs},
      {"multi-journal-merge", merge_union},
      {"snowball-union", snowball_union},
      {"export-fidelity", export_fidelity},
      {"report-reproducibility", report_reproducibility},
      {"resumability", resumability},
      {"degraded-data", degraded_data},
      {"service-consistency", service_consistency},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.fail(std::string("threw: ") + e.what());
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    if (!v.pass) ++failures;
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - failures << "/"
            << criteria.size() << std::endl;
  return failures ? 1 : 0;
}
