#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "snaptag/tagrank.hpp"

namespace snaptag {

class IndexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageRecord {
  std::string image_id;
  std::string path;
  std::vector<RankedTag> tags;  // sorted by score desc, name asc
  std::int64_t ingested_at = 0;  // unix seconds
};

enum class Verdict { Pass, PartiallyPass, Fail };

std::string_view to_string(Verdict v);

struct CoverageVerdict {
  double coverage = 0.0;  // percentage
  Verdict verdict = Verdict::Fail;
};

/// coverage = 100 * |generated ∩ ground_truth| / |ground_truth| over
/// normalized names. Pass iff coverage > 75, PartiallyPass iff 25 < c <= 75.
CoverageVerdict tag_coverage(const std::vector<std::string>& generated,
                             const std::vector<std::string>& ground_truth);

struct SearchHit {
  std::string image_id;
  double score = 0.0;
};

/// Inverted tag index. Single writer, concurrent readers.
class TagIndex {
 public:
  void index_image(const ImageRecord& rec);
  std::vector<SearchHit> search(const std::string& query, int k) const;

  const ImageRecord* find(const std::string& image_id) const;
  std::size_t size() const { return records_.size(); }
  const std::map<std::string, ImageRecord>& records() const { return records_; }

  /// Atomic via write-to-temp-then-rename.
  void persist(const std::filesystem::path& path) const;
  static TagIndex load(const std::filesystem::path& path);

 private:
  std::map<std::string, ImageRecord> records_;
  // tag name -> image_id -> stored tag score
  std::map<std::string, std::map<std::string, double>> postings_;
};

struct CoverageSummary {
  int pass = 0;
  int partially_pass = 0;
  int fail = 0;
  std::vector<std::pair<std::string, CoverageVerdict>> per_image;
};

/// Ground-truth file: image_id<TAB>tag1,tag2,...
std::map<std::string, std::vector<std::string>> read_ground_truth(
    const std::filesystem::path& path);

CoverageSummary evaluate_coverage(
    const TagIndex& idx,
    const std::map<std::string, std::vector<std::string>>& ground_truth);

std::string format_coverage_summary(const CoverageSummary& s);

}  // namespace snaptag
