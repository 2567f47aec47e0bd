#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace litfetch::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() /
                     ("litfetch-test-" + std::to_string(rng() % 1000000000ULL));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

char oracle_issn_check(const std::string& seven_digits) {
  int sum = 0;
  for (int i = 0; i < 7; ++i) sum += (seven_digits[i] - '0') * (8 - i);
  for (int c = 0; c <= 10; ++c) {
    if ((sum + c) % 11 == 0) return c == 10 ? 'X' : static_cast<char>('0' + c);
  }
  return '?';
}

std::string oracle_issn(const std::string& seven_digits) {
  return seven_digits.substr(0, 4) + "-" + seven_digits.substr(4) +
         oracle_issn_check(seven_digits);
}

std::string random_issn(std::mt19937_64& rng) {
  std::string body;
  for (int i = 0; i < 7; ++i) body += static_cast<char>('0' + rng() % 10);
  return oracle_issn(body);
}

Doi doi(const std::string& text) { return normalize_doi(text); }
Issn issn(const std::string& text) { return validate_issn(text); }
DateRange range(const std::string& from, const std::string& until) {
  return parse_date_range(from, until);
}
PartialDate ymd(int y, unsigned m, unsigned d) { return PartialDate{y, m, d}; }

WorkMetadata article(const std::string& doi_text, PartialDate published,
                     const std::string& title) {
  WorkMetadata w(normalize_doi(doi_text));
  w.title = title.empty() ? "On " + w.doi.str() : title;
  w.authors = {{"Lovelace", "Ada"}, {"Babbage", "Charles"}};
  w.container_title = "Journal of Tests";
  w.publisher = "Test Press";
  w.published = published;
  w.url = "https://doi.org/" + w.doi.str();
  w.work_type = "journal-article";
  return w;
}

std::vector<WorkMetadata> journal_works(const std::string& prefix, std::size_t n,
                                        const Issn& journal) {
  static const char* topics[] = {"screening", "cohort", "trial", "survey", "review"};
  std::vector<WorkMetadata> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto w = article("10.5555/" + prefix + "." + std::to_string(i),
                     ymd(2020, static_cast<unsigned>(i % 12 + 1),
                         static_cast<unsigned>(i % 28 + 1)),
                     "A " + std::string(topics[i % 5]) + " study number " +
                         std::to_string(i));
    w.issn_list = {journal};
    out.push_back(std::move(w));
  }
  return out;
}

std::set<std::string> doi_strings(const ResultSet& rs) {
  std::set<std::string> out;
  for (const auto& e : rs.entries()) out.insert(e.work.doi.str());
  return out;
}

std::set<std::string> doi_strings(const std::vector<WorkMetadata>& works) {
  std::set<std::string> out;
  for (const auto& w : works) out.insert(w.doi.str());
  return out;
}

std::unique_ptr<CrossrefClient> mock_crossref(std::shared_ptr<MockUpstream> up,
                                              std::size_t page_size,
                                              std::shared_ptr<Cache> cache) {
  return std::make_unique<CrossrefClient>(kMockCrossref, kMockResolver,
                                          fast_policy(page_size), std::move(up),
                                          std::move(cache));
}

std::unique_ptr<CociClient> mock_coci(std::shared_ptr<MockUpstream> up,
                                      std::shared_ptr<Cache> cache) {
  return std::make_unique<CociClient>(kMockCoci, fast_policy(), std::move(up),
                                      std::move(cache));
}

CitationGraph random_graph(std::mt19937_64& rng, std::size_t nodes, double density) {
  CitationGraph g;
  for (std::size_t i = 0; i < nodes; ++i) {
    g.nodes.push_back(normalize_doi("10.7777/g." + std::to_string(i)));
  }
  std::bernoulli_distribution edge(density);
  g.cites.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = 0; j < nodes; ++j) {
      if (i != j && edge(rng)) g.cites[i].push_back(j);
    }
  }
  return g;
}

void load_graph(MockUpstream& up, const CitationGraph& g) {
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto w = article(g.nodes[i].str(), ymd(2015, 1, 1));
    for (auto j : g.cites[i]) w.reference_dois.push_back(g.nodes[j]);
    w.reference_count_declared = w.reference_dois.size();
    up.add_standalone_work(w);
    for (auto j : g.cites[i]) up.add_citation(g.nodes[i], g.nodes[j]);
  }
}

std::vector<std::vector<std::string>> rfc4180_parse(const std::string& text) {
  // file = record *(CRLF record) [CRLF]; field = escaped / non-escaped.
  // LF alone is accepted as a line break as well.
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n == 0) return rows;
  while (true) {
    field.clear();
    if (i < n && text[i] == '"') {
      ++i;
      while (true) {
        if (i >= n) throw std::runtime_error("unterminated quoted field");
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          field += text[i++];
        }
      }
    } else {
      while (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n') {
        if (text[i] == '"') throw std::runtime_error("quote in unquoted field");
        field += text[i++];
      }
    }
    row.push_back(field);
    if (i >= n) {
      rows.push_back(row);
      break;
    }
    if (text[i] == ',') {
      ++i;
      continue;
    }
    if (text[i] == '\r') {
      if (i + 1 >= n || text[i + 1] != '\n') throw std::runtime_error("bare CR");
      ++i;
    }
    if (text[i] != '\n') throw std::runtime_error("junk after quoted field");
    ++i;
    rows.push_back(row);
    row.clear();
    if (i >= n) break;
  }
  return rows;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << s;
}

}  // namespace litfetch::testing

namespace litfetch::testing {

std::vector<WorkMetadata> golden_works() {
  WorkMetadata a(normalize_doi("10.1038/nature12373"));
  a.title = "Nanometre-scale thermometry in a living cell";
  a.authors = {{"Kucsko", "G."}, {"Maurer", "P. C."}};
  a.container_title = "Nature";
  a.publisher = "Springer Science and Business Media LLC";
  a.issn_list = {validate_issn("0028-0836"), validate_issn("1476-4687")};
  a.published = PartialDate{2013, 8u, 1u};
  a.abstract = "Sensitive probing of temperature variations on nanometre scales, \"in vivo\"";
  a.url = "http://dx.doi.org/10.1038/nature12373";
  a.work_type = "journal-article";

  WorkMetadata b(normalize_doi("10.5555/comma"));
  b.title = "Sleep, shift work, and health";
  b.authors = {{"Doe", "Jane"}, {"", "Plato"}};
  b.container_title = "Occupational Medicine";
  b.publisher = "OUP";
  b.published = PartialDate{2021, 3u, std::nullopt};
  b.work_type = "journal-article";

  WorkMetadata c(normalize_doi("10.5555/bare-dataset"));
  c.published = PartialDate{1999, std::nullopt, std::nullopt};
  c.work_type = "dataset";
  return {a, b, c};
}

ResultSet golden_resultset() {
  ResultSet rs(parse_timestamp("2024-03-01T12:00:00Z"));
  for (auto& w : golden_works()) {
    rs.add(w, SourceTag::handsearch(validate_issn("0028-0836"), "golden"));
  }
  return rs;
}

}  // namespace litfetch::testing
