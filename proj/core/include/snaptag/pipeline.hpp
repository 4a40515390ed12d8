#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snaptag/config.hpp"
#include "snaptag/imgproc.hpp"
#include "snaptag/index.hpp"
#include "snaptag/kg.hpp"
#include "snaptag/keywords.hpp"
#include "snaptag/langdetect.hpp"
#include "snaptag/ocr.hpp"
#include "snaptag/tagrank.hpp"
#include "snaptag/textregion.hpp"

namespace snaptag {

struct EngineSpec {
  std::string kind = "fixture";  // fixture | external
  std::string command;           // for external engines
};

struct PipelineConfig {
  PreprocessParams preprocess;
  TextLineParams text_lines;
  EngineRouting routing{"latin-ocr", "nonlatin-ocr", "latin-ocr"};
  std::map<std::string, EngineSpec> engines;  // id -> spec

  std::optional<std::filesystem::path> clm_dir;
  std::optional<std::filesystem::path> keywords_dir;  // <lang>.rules/<lang>.lex
  std::optional<std::filesystem::path> stopwords_dir;
  std::optional<std::filesystem::path> kg_model;
  int related_k = 10;
  bool related_both_directions = false;
  int scene_top_k = 5;

  std::optional<std::filesystem::path> index_path;
  std::optional<std::filesystem::path> debug_artifacts;

  /// Checks that every referenced file exists; throws ConfigError otherwise.
  void validate() const;
};

PipelineConfig load_pipeline_config(const Config& cfg);

enum class StageStatus { Ok, RanEmpty, Skipped, Failed };

std::string_view to_string(StageStatus s);

struct StageRecord {
  std::string stage;
  StageStatus status = StageStatus::Ok;
  std::string detail;
  double millis = 0.0;
};

struct TagReport {
  std::string image_id;
  std::string script = "Unknown";
  std::string language;
  std::vector<RankedTag> tags;
  std::vector<StageRecord> stages;
  bool ok = true;
};

/// Loaded long-lived pipeline state (CLMs, keyword resources, KG model).
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  TagReport run(const std::filesystem::path& image_path, TagIndex* index) const;

  const PipelineConfig& config() const { return cfg_; }

 private:
  std::unique_ptr<OcrEngine> make_engine(const std::string& id,
                                         const std::filesystem::path& image) const;

  PipelineConfig cfg_;
  std::vector<CharLanguageModel> clms_;
  std::map<std::string, TaggingResources> keyword_resources_;
  std::optional<TripletModel> kg_model_;
  KnowledgeGraph empty_graph_;
};

struct BatchSummary {
  std::vector<TagReport> reports;
  int ok = 0;
  int failed = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

BatchSummary batch_run(const std::filesystem::path& dir,
                       const PipelineConfig& cfg, TagIndex* index);

std::string report_to_jsonl(const TagReport& report, bool include_timings = true);

}  // namespace snaptag
