#include "snaptag/tagrank.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace snaptag {

std::string_view to_string(TagSource s) {
  switch (s) {
    case TagSource::Scene: return "scene";
    case TagSource::Ocr: return "ocr";
    case TagSource::Related: return "related";
  }
  return "ocr";
}

std::string normalize_tag_name(const std::string& raw) {
  std::size_t b = raw.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = raw.find_last_not_of(" \t\r\n");
  std::string out = raw.substr(b, e - b + 1);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

TagCandidate make_scene_candidate(const std::string& name, double prob) {
  return {normalize_tag_name(name), TagSource::Scene, prob, std::nullopt};
}

TagCandidate make_ocr_candidate(const std::string& name, double prob) {
  return {normalize_tag_name(name), TagSource::Ocr, prob, std::nullopt};
}

TagCandidate make_related_candidate(const std::string& name, double model_score,
                                    double parent_prob) {
  return {normalize_tag_name(name), TagSource::Related, model_score, parent_prob};
}

RankedTag tag_score(const std::vector<TagCandidate>& candidates_for_name) {
  if (candidates_for_name.empty())
    throw std::invalid_argument("tag_score: empty candidate list");
  RankedTag out;
  out.name = candidates_for_name.front().name;
  for (const auto& c : candidates_for_name) {
    if (c.name != out.name)
      throw std::invalid_argument("tag_score: mixed tag names in one group");
    double term = 0.0;
    switch (c.source) {
      case TagSource::Scene:
        term = c.prob;
        break;
      case TagSource::Ocr:
        term = 0.8 * c.prob;
        break;
      case TagSource::Related:
        if (!c.parent_prob)
          throw std::invalid_argument("tag_score: related candidate without parent");
        term = *c.parent_prob * std::exp(-c.prob);
        break;
    }
    out.contributions.push_back({c.source, term});
    out.score += term;
  }
  return out;
}

std::vector<RankedTag> rank_tags(const std::vector<TagCandidate>& all_candidates) {
  // std::map keys give a canonical grouping order, so the result is a
  // function of the candidate multiset only
  std::map<std::string, std::vector<TagCandidate>> groups;
  for (const auto& c : all_candidates) groups[c.name].push_back(c);
  std::vector<RankedTag> out;
  out.reserve(groups.size());
  for (auto& [name, group] : groups) {
    // canonical contribution order inside a group: scene, ocr, related,
    // then by probability
    std::sort(group.begin(), group.end(),
              [](const TagCandidate& a, const TagCandidate& b) {
                if (a.source != b.source)
                  return static_cast<int>(a.source) < static_cast<int>(b.source);
                if (a.prob != b.prob) return a.prob > b.prob;
                return a.parent_prob.value_or(0.0) > b.parent_prob.value_or(0.0);
              });
    out.push_back(tag_score(group));
  }
  std::sort(out.begin(), out.end(), [](const RankedTag& a, const RankedTag& b) {
    return a.score != b.score ? a.score > b.score : a.name < b.name;
  });
  return out;
}

}  // namespace snaptag
