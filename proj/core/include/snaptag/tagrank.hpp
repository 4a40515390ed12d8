#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace snaptag {

enum class TagSource { Scene, Ocr, Related };

std::string_view to_string(TagSource s);

struct TagCandidate {
  std::string name;  // normalized: trimmed + lowercased
  TagSource source = TagSource::Ocr;
  double prob = 1.0;
  // present iff source == Related: probability of the spawning scene/ocr tag
  std::optional<double> parent_prob;
};

std::string normalize_tag_name(const std::string& raw);

TagCandidate make_scene_candidate(const std::string& name, double prob);
TagCandidate make_ocr_candidate(const std::string& name, double prob);
TagCandidate make_related_candidate(const std::string& name, double model_score,
                                    double parent_prob);

struct TagContribution {
  TagSource source;
  double value;
};

struct RankedTag {
  std::string name;
  double score = 0.0;
  std::vector<TagContribution> contributions;
};

/// score = sum(scene probs) + 0.8 * sum(ocr probs)
///       + sum(parent_prob * exp(-model_score)) over related candidates.
RankedTag tag_score(const std::vector<TagCandidate>& candidates_for_name);

/// Group candidates by normalized name, score each group, sort by score
/// descending then name ascending.
std::vector<RankedTag> rank_tags(const std::vector<TagCandidate>& all_candidates);

}  // namespace snaptag
