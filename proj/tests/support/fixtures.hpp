#pragma once

// Corpus builders and small utilities shared by the suites.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "litfetch/clock.hpp"
#include "litfetch/coci.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/ids.hpp"
#include "litfetch/resultset.hpp"
#include "litfetch/work.hpp"
#include "support/mock_upstream.hpp"

namespace litfetch::testing {

// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// ISSN check value by brute force: the c in 0..10 making the weighted sum
// divisible by 11. Deliberately not the library's arithmetic.
char oracle_issn_check(const std::string& seven_digits);
std::string oracle_issn(const std::string& seven_digits);
std::string random_issn(std::mt19937_64& rng);

Doi doi(const std::string& text);
Issn issn(const std::string& text);
DateRange range(const std::string& from, const std::string& until);
PartialDate ymd(int y, unsigned m, unsigned d);

// A journal article with predictable metadata derived from the DOI.
WorkMetadata article(const std::string& doi_text, PartialDate published,
                     const std::string& title = "");

// `n` works with DOIs "10.5555/<prefix>.<i>", dated inside 2020.
std::vector<WorkMetadata> journal_works(const std::string& prefix, std::size_t n,
                                        const Issn& journal);

std::set<std::string> doi_strings(const ResultSet& rs);
std::set<std::string> doi_strings(const std::vector<WorkMetadata>& works);

// Clients pointed at an in-process mock.
std::unique_ptr<CrossrefClient> mock_crossref(std::shared_ptr<MockUpstream> up,
                                              std::size_t page_size = 100,
                                              std::shared_ptr<Cache> cache = nullptr);
std::unique_ptr<CociClient> mock_coci(std::shared_ptr<MockUpstream> up,
                                      std::shared_ptr<Cache> cache = nullptr);

// A random directed citation graph over `nodes` works. edges[i] lists the
// works that node i cites. No self-citations.
struct CitationGraph {
  std::vector<Doi> nodes;
  std::vector<std::vector<std::size_t>> cites;
};
CitationGraph random_graph(std::mt19937_64& rng, std::size_t nodes, double density);

// Loads the graph so Crossref reference lists and COCI edges agree.
void load_graph(MockUpstream& up, const CitationGraph& g);

// Minimal RFC 4180 reader, written from the RFC grammar.
std::vector<std::vector<std::string>> rfc4180_parse(const std::string& text);

std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& s);

}  // namespace litfetch::testing

namespace litfetch::testing {

// The three works behind the golden export files: a full journal article,
// one with a comma in its title and a partial date, and a bare dataset.
std::vector<WorkMetadata> golden_works();
ResultSet golden_resultset();

}  // namespace litfetch::testing
