#include "litfetch/work.hpp"

#include "litfetch/error.hpp"

namespace litfetch {

nlohmann::json to_json(const WorkMetadata& w) {
  nlohmann::json j;
  j["doi"] = w.doi.str();
  j["title"] = w.title;
  j["authors"] = nlohmann::json::array();
  for (const auto& a : w.authors) {
    j["authors"].push_back({{"family", a.family}, {"given", a.given}});
  }
  j["container_title"] = w.container_title;
  j["publisher"] = w.publisher;
  j["issn"] = nlohmann::json::array();
  for (const auto& i : w.issn_list) j["issn"].push_back(i.str());
  if (w.published) {
    nlohmann::json parts = nlohmann::json::array({w.published->year});
    if (w.published->month) {
      parts.push_back(*w.published->month);
      if (w.published->day) parts.push_back(*w.published->day);
    }
    j["published"] = parts;
  } else {
    j["published"] = nullptr;
  }
  j["abstract"] = w.abstract ? nlohmann::json(*w.abstract) : nlohmann::json(nullptr);
  j["subjects"] = w.subject_keywords;
  j["url"] = w.url ? nlohmann::json(*w.url) : nlohmann::json(nullptr);
  j["references"] = nlohmann::json::array();
  for (const auto& d : w.reference_dois) j["references"].push_back(d.str());
  j["reference_count"] = w.reference_count_declared;
  j["type"] = w.work_type;
  return j;
}

WorkMetadata work_from_json(const nlohmann::json& j) {
  try {
    WorkMetadata w(normalize_doi(j.at("doi").get<std::string>()));
    w.title = j.value("title", "");
    for (const auto& a : j.value("authors", nlohmann::json::array())) {
      w.authors.push_back({a.value("family", ""), a.value("given", "")});
    }
    w.container_title = j.value("container_title", "");
    w.publisher = j.value("publisher", "");
    for (const auto& i : j.value("issn", nlohmann::json::array())) {
      w.issn_list.push_back(validate_issn(i.get<std::string>()));
    }
    if (j.contains("published") && j["published"].is_array() &&
        !j["published"].empty()) {
      const auto& parts = j["published"];
      PartialDate d;
      d.year = parts[0].get<int>();
      if (parts.size() > 1) d.month = parts[1].get<unsigned>();
      if (parts.size() > 2) d.day = parts[2].get<unsigned>();
      w.published = d;
    }
    if (j.contains("abstract") && j["abstract"].is_string()) {
      w.abstract = j["abstract"].get<std::string>();
    }
    w.subject_keywords =
        j.value("subjects", std::vector<std::string>{});
    if (j.contains("url") && j["url"].is_string()) {
      w.url = j["url"].get<std::string>();
    }
    for (const auto& d : j.value("references", nlohmann::json::array())) {
      w.reference_dois.push_back(normalize_doi(d.get<std::string>()));
    }
    w.reference_count_declared = j.value("reference_count", std::size_t{0});
    w.work_type = j.value("type", "");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedResponse,
                std::string("bad work document: ") + e.what());
  }
}

}  // namespace litfetch
