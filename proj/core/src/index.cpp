#include "snaptag/index.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace snaptag {

namespace {
constexpr int kIndexVersion = 1;
using nlohmann::json;
}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::PartiallyPass: return "PartiallyPass";
    case Verdict::Fail: return "Fail";
  }
  return "Fail";
}

CoverageVerdict tag_coverage(const std::vector<std::string>& generated,
                             const std::vector<std::string>& ground_truth) {
  std::set<std::string> truth;
  for (const auto& t : ground_truth) {
    auto n = normalize_tag_name(t);
    if (!n.empty()) truth.insert(n);
  }
  if (truth.empty())
    throw std::invalid_argument("tag_coverage: empty ground truth");
  std::set<std::string> gen;
  for (const auto& t : generated) {
    auto n = normalize_tag_name(t);
    if (!n.empty()) gen.insert(n);
  }
  int covered = 0;
  for (const auto& t : truth)
    if (gen.count(t)) ++covered;
  CoverageVerdict result;
  result.coverage = 100.0 * covered / static_cast<double>(truth.size());
  // strict thresholds: 75 exactly is PartiallyPass, 25 exactly is Fail
  if (result.coverage > 75.0)
    result.verdict = Verdict::Pass;
  else if (result.coverage > 25.0)
    result.verdict = Verdict::PartiallyPass;
  else
    result.verdict = Verdict::Fail;
  return result;
}

void TagIndex::index_image(const ImageRecord& rec) {
  if (rec.image_id.empty())
    throw std::invalid_argument("index_image: empty image id");
  // replace semantics: drop any prior postings for this id first
  auto old = records_.find(rec.image_id);
  if (old != records_.end()) {
    for (const auto& tag : old->second.tags) {
      auto p = postings_.find(tag.name);
      if (p != postings_.end()) {
        p->second.erase(rec.image_id);
        if (p->second.empty()) postings_.erase(p);
      }
    }
  }
  records_[rec.image_id] = rec;
  for (const auto& tag : rec.tags)
    postings_[tag.name][rec.image_id] = tag.score;
}

std::vector<SearchHit> TagIndex::search(const std::string& query, int k) const {
  if (k < 1) throw std::invalid_argument("search: k must be >= 1");
  std::istringstream in(normalize_tag_name(query));
  std::string term;
  std::map<std::string, double> scores;
  while (in >> term) {
    // exact tag match at full weight
    auto exact = postings_.find(term);
    if (exact != postings_.end())
      for (const auto& [id, s] : exact->second) scores[id] += s;
    // prefix matches at half weight
    for (auto it = postings_.lower_bound(term); it != postings_.end(); ++it) {
      if (it->first.compare(0, term.size(), term) != 0) break;
      if (it->first == term) continue;
      for (const auto& [id, s] : it->second) scores[id] += 0.5 * s;
    }
  }
  std::vector<SearchHit> hits;
  hits.reserve(scores.size());
  for (const auto& [id, s] : scores) hits.push_back({id, s});
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.image_id < b.image_id;
  });
  if (static_cast<int>(hits.size()) > k) hits.resize(k);
  return hits;
}

const ImageRecord* TagIndex::find(const std::string& image_id) const {
  auto it = records_.find(image_id);
  return it == records_.end() ? nullptr : &it->second;
}

void TagIndex::persist(const std::filesystem::path& path) const {
  json doc;
  doc["version"] = kIndexVersion;
  json records = json::array();
  for (const auto& [id, rec] : records_) {
    json tags = json::array();
    for (const auto& t : rec.tags) {
      json contribs = json::array();
      for (const auto& c : t.contributions)
        contribs.push_back({{"source", std::string(to_string(c.source))},
                            {"value", c.value}});
      tags.push_back({{"name", t.name},
                      {"score", t.score},
                      {"contributions", contribs}});
    }
    records.push_back({{"image_id", rec.image_id},
                       {"path", rec.path},
                       {"ingested_at", rec.ingested_at},
                       {"tags", tags}});
  }
  doc["records"] = std::move(records);

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IndexError("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IndexError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TagIndex TagIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IndexError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IndexError("index file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw IndexError("index file missing version field");
  int version = doc["version"];
  if (version != kIndexVersion)
    throw IndexError("index version mismatch: file has " +
                     std::to_string(version) + ", expected " +
                     std::to_string(kIndexVersion));
  TagIndex idx;
  try {
    for (const auto& jr : doc.at("records")) {
      ImageRecord rec;
      rec.image_id = jr.at("image_id");
      rec.path = jr.at("path");
      rec.ingested_at = jr.at("ingested_at");
      for (const auto& jt : jr.at("tags")) {
        RankedTag t;
        t.name = jt.at("name");
        t.score = jt.at("score");
        for (const auto& jc : jt.at("contributions")) {
          std::string src = jc.at("source");
          TagSource source = src == "scene"   ? TagSource::Scene
                             : src == "related" ? TagSource::Related
                                                : TagSource::Ocr;
          t.contributions.push_back({source, jc.at("value")});
        }
        rec.tags.push_back(std::move(t));
      }
      idx.index_image(rec);
    }
  } catch (const json::exception& e) {
    throw IndexError("malformed index file: " + std::string(e.what()));
  }
  return idx;
}

std::map<std::string, std::vector<std::string>> read_ground_truth(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IndexError("cannot open " + path.string());
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IndexError("ground truth line " + std::to_string(lineno) +
                       ": expected image_id<TAB>tags");
    std::vector<std::string> tags;
    std::istringstream taglist(line.substr(tab + 1));
    std::string tag;
    while (std::getline(taglist, tag, ','))
      if (!tag.empty()) tags.push_back(tag);
    out[line.substr(0, tab)] = std::move(tags);
  }
  return out;
}

CoverageSummary evaluate_coverage(
    const TagIndex& idx,
    const std::map<std::string, std::vector<std::string>>& ground_truth) {
  CoverageSummary summary;
  for (const auto& [image_id, truth] : ground_truth) {
    std::vector<std::string> generated;
    if (const ImageRecord* rec = idx.find(image_id))
      for (const auto& t : rec->tags) generated.push_back(t.name);
    CoverageVerdict v = tag_coverage(generated, truth);
    switch (v.verdict) {
      case Verdict::Pass: ++summary.pass; break;
      case Verdict::PartiallyPass: ++summary.partially_pass; break;
      case Verdict::Fail: ++summary.fail; break;
    }
    summary.per_image.emplace_back(image_id, v);
  }
  return summary;
}

std::string format_coverage_summary(const CoverageSummary& s) {
  std::ostringstream os;
  os << "Verdict          Threshold   Images\n";
  os << "Pass             >75%        " << s.pass << "\n";
  os << "Partially Pass   >25%        " << s.partially_pass << "\n";
  os << "Fail             <=25%       " << s.fail << "\n";
  return os.str();
}

}  // namespace snaptag
