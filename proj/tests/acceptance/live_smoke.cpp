// Minimal checks against the real Crossref, COCI and doi.org. Skipped (exit
// 77) unless LITFETCH_LIVE=1. Set LITFETCH_EMAIL to use the polite pool.

#include <cstdlib>
#include <iostream>
#include <string>

#include "litfetch/coci.hpp"
#include "litfetch/crossref.hpp"
#include "litfetch/error.hpp"
#include "litfetch/export.hpp"

using namespace litfetch;

int main() {
  const char* live = std::getenv("LITFETCH_LIVE");
  if (!live || std::string(live) != "1") {
    std::cout << "SKIP live smoke (set LITFETCH_LIVE=1)\n";
    return 77;
  }
  std::optional<std::string> email;
  if (const char* e = std::getenv("LITFETCH_EMAIL")) email = e;
  auto policy = ClientPolicy::defaults(email);
  CrossrefClient crossref(std::string(kCrossrefDefaultUrl), std::string(kResolverDefaultUrl),
                          policy);
  CociClient coci(std::string(kCociDefaultUrl), policy);
  int failures = 0;
  auto check = [&](const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  };
  const Doi known = normalize_doi("10.1038/nature12373");
  try {
    auto works = crossref.fetch_all_journal_works(
        validate_issn("0028-0836"), parse_date_range("2013-08-01", "2013-08-01"), {});
    check("crossref-listing", !works.empty(), std::to_string(works.size()) + " works");
  } catch (const Error& e) {
    check("crossref-listing", false, e.what());
  }
  try {
    auto w = crossref.fetch_work(known);
    check("crossref-work", w.doi == known, w.title);
  } catch (const Error& e) {
    check("crossref-work", false, e.what());
  }
  try {
    auto edges = coci.fetch_citing(known);
    check("coci-citations", !edges.empty(), std::to_string(edges.size()) + " citing works");
  } catch (const Error& e) {
    check("coci-citations", false, e.what());
  }
  try {
    auto records = ris_parse(crossref.negotiate_ris(known));
    check("ris-negotiation", records.size() == 1, std::to_string(records.size()) + " records");
  } catch (const Error& e) {
    check("ris-negotiation", false, e.what());
  }
  return failures ? 1 : 0;
}
