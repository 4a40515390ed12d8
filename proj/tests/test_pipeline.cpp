#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "snaptag/pipeline.hpp"

using namespace snaptag;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SNAPTAG_DATA_DIR;

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "snaptag-pipeline-tests";
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_corpus(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// models are slow enough to build that every suite run shares one copy
const fs::path& model_dir() {
  static fs::path dir = [] {
    fs::path d = temp_dir() / "models";
    fs::create_directories(d / "clm");
    for (const std::string lang : {"en", "es", "it", "fr", "de"}) {
      auto out = d / "clm" / (lang + ".clm");
      if (!fs::exists(out))
        save_clm(build_clm(read_corpus(kData / "corpora" / (lang + ".txt")),
                           lang),
                 out);
    }
    auto kg_path = d / "kg.bin";
    if (!fs::exists(kg_path)) {
      auto g = load_and_collapse(kData / "kg" / "toy.tsv");
      KgHyperParams hp;
      hp.dim = 16;
      hp.filters = 8;
      hp.epochs = 30;
      save_model(train(g, hp).model, kg_path);
    }
    return d;
  }();
  return dir;
}

PipelineConfig fixture_config() {
  PipelineConfig cfg;
  cfg.clm_dir = model_dir() / "clm";
  cfg.keywords_dir = kData / "scrdr";
  cfg.stopwords_dir = kData / "stopwords";
  cfg.kg_model = model_dir() / "kg.bin";
  cfg.related_k = 20;
  return cfg;
}

const StageRecord* find_stage(const TagReport& r, const std::string& name) {
  for (const auto& s : r.stages)
    if (s.stage == name) return &s;
  return nullptr;
}

const RankedTag* find_tag(const TagReport& r, const std::string& name) {
  for (const auto& t : r.tags)
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace

TEST_CASE("config: ini parsing basics") {
  auto cfg = Config::parse(
      "# comment\n"
      "[preprocess]\n"
      "tile_count = 8\n"
      "threshold_bias = 0.15\n"
      "; another comment\n"
      "[engines]\n"
      "default = \"latin-ocr\"\n");
  CHECK(cfg.get_int("preprocess", "tile_count", 4) == 8);
  CHECK(cfg.get_double("preprocess", "threshold_bias", 0.1) ==
        doctest::Approx(0.15));
  CHECK(cfg.get_or("engines", "default", "x") == "latin-ocr");
  CHECK(cfg.get_or("engines", "missing", "fallback") == "fallback");
  CHECK_FALSE(cfg.get("nosection", "nokey").has_value());
  CHECK_THROWS_AS(Config::parse("key_without_section = 1\n"), ConfigError);
}

TEST_CASE("config: pipeline sections map onto PipelineConfig") {
  auto cfg = Config::parse(
      "[preprocess]\n"
      "tile_count = 2\n"
      "[engines]\n"
      "latin = my-latin\n"
      "nonlatin = my-nonlatin\n"
      "default = my-latin\n"
      "[langdetect]\n"
      "models = /tmp/clm\n"
      "[keywords]\n"
      "resources = /tmp/kw\n"
      "stopwords = /tmp/sw\n"
      "[kg]\n"
      "model = /tmp/kg.bin\n"
      "related_k = 7\n"
      "[index]\n"
      "path = /tmp/index.json\n");
  auto pc = load_pipeline_config(cfg);
  CHECK(pc.preprocess.tile_count == 2);
  CHECK(pc.routing.latin == "my-latin");
  CHECK(pc.routing.nonlatin == "my-nonlatin");
  CHECK(pc.clm_dir == fs::path("/tmp/clm"));
  CHECK(pc.keywords_dir == fs::path("/tmp/kw"));
  CHECK(pc.kg_model == fs::path("/tmp/kg.bin"));
  CHECK(pc.related_k == 7);
  CHECK(pc.index_path == fs::path("/tmp/index.json"));
}

TEST_CASE("pipeline: missing CLM directory fails validation up front") {
  auto cfg = fixture_config();
  cfg.clm_dir = temp_dir() / "does-not-exist";
  CHECK_THROWS_AS(Pipeline{cfg}, ConfigError);
}

TEST_CASE("pipeline: tokyo fixture produces the expected tag set") {
  Pipeline pipeline(fixture_config());
  TagIndex index;
  auto report = pipeline.run(kData / "fixtures" / "img01.pgm", &index);
  CHECK(report.ok);
  CHECK(report.image_id == "img01");

  REQUIRE(find_tag(report, "tokyo") != nullptr);
  REQUIRE(find_tag(report, "document") != nullptr);
  const auto* japan = find_tag(report, "japan");
  REQUIRE(japan != nullptr);
  bool has_related_contrib = false;
  for (const auto& c : japan->contributions)
    if (c.source == TagSource::Related) has_related_contrib = true;
  CHECK(has_related_contrib);

  // ranked scores are non-increasing
  for (std::size_t i = 1; i < report.tags.size(); ++i)
    CHECK(report.tags[i - 1].score >= report.tags[i].score);

  auto hits = index.search("tokyo", 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].image_id == "img01");
}

TEST_CASE("pipeline: empty sidecars degrade to a zero-tag report") {
  auto dir = temp_dir() / "empty-case";
  fs::create_directories(dir);
  fs::copy_file(kData / "fixtures" / "img01.pgm", dir / "blank.pgm",
                fs::copy_options::overwrite_existing);
  std::ofstream(dir / "blank.ocr.txt") << "";
  std::ofstream(dir / "blank.scene.tsv") << "";

  Pipeline pipeline(fixture_config());
  auto report = pipeline.run(dir / "blank.pgm", nullptr);
  CHECK(report.ok);
  CHECK(report.tags.empty());
  REQUIRE(find_stage(report, "ocr") != nullptr);
  CHECK(find_stage(report, "ocr")->status == StageStatus::RanEmpty);
  CHECK(find_stage(report, "keywords")->status == StageStatus::RanEmpty);
  CHECK(find_stage(report, "rank")->status == StageStatus::RanEmpty);
}

TEST_CASE("pipeline: optional stages are skipped, never fatal") {
  PipelineConfig cfg;  // no CLMs, no keywords, no KG
  Pipeline pipeline(cfg);
  auto report = pipeline.run(kData / "fixtures" / "img02.pgm", nullptr);
  CHECK(report.ok);
  CHECK(find_stage(report, "langdetect")->status == StageStatus::Skipped);
  CHECK(find_stage(report, "keywords")->status == StageStatus::Skipped);
  CHECK(find_stage(report, "related")->status == StageStatus::Skipped);
  // the scene sidecar still contributes
  CHECK(find_tag(report, "food") != nullptr);
}

TEST_CASE("pipeline: unreadable image reports a load failure") {
  auto bad = temp_dir() / "broken.pgm";
  std::ofstream(bad) << "not an image";
  Pipeline pipeline(fixture_config());
  auto report = pipeline.run(bad, nullptr);
  CHECK_FALSE(report.ok);
  REQUIRE_FALSE(report.stages.empty());
  CHECK(report.stages[0].status == StageStatus::Failed);
}

TEST_CASE("pipeline: stage order matches the processing chain") {
  Pipeline pipeline(fixture_config());
  auto report = pipeline.run(kData / "fixtures" / "img03.pgm", nullptr);
  std::vector<std::string> expected = {"preprocess", "localize", "ocr",
                                       "langdetect", "keywords", "scene",
                                       "related",    "rank",     "index"};
  REQUIRE(report.stages.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(report.stages[i].stage == expected[i]);
    CHECK(report.stages[i].millis >= 0.0);
  }
}

TEST_CASE("batch: three fixtures, all ok") {
  auto dir = temp_dir() / "batch3";
  fs::create_directories(dir);
  for (const std::string stem : {"img01", "img02", "img03"})
    for (const std::string ext : {".pgm", ".ocr.txt", ".scene.tsv"})
      fs::copy_file(kData / "fixtures" / (stem + ext), dir / (stem + ext),
                    fs::copy_options::overwrite_existing);
  auto summary = batch_run(dir, fixture_config(), nullptr);
  CHECK(summary.reports.size() == 3);
  CHECK(summary.ok == 3);
  CHECK(summary.failed == 0);
  CHECK(summary.p50_ms >= 0.0);
  CHECK(summary.p95_ms >= summary.p50_ms);
}

TEST_CASE("batch: one corrupt image among three is a partial failure") {
  auto dir = temp_dir() / "batch-partial";
  fs::create_directories(dir);
  for (const std::string stem : {"img01", "img02"})
    for (const std::string ext : {".pgm", ".ocr.txt", ".scene.tsv"})
      fs::copy_file(kData / "fixtures" / (stem + ext), dir / (stem + ext),
                    fs::copy_options::overwrite_existing);
  std::ofstream(dir / "bad.pgm") << "garbage";
  auto summary = batch_run(dir, fixture_config(), nullptr);
  CHECK(summary.ok == 2);
  CHECK(summary.failed == 1);
}

TEST_CASE("batch: empty directory is invalid input") {
  auto dir = temp_dir() / "batch-empty";
  fs::create_directories(dir);
  CHECK_THROWS_AS(batch_run(dir, fixture_config(), nullptr),
                  std::invalid_argument);
}

TEST_CASE("pipeline runs are deterministic modulo timings") {
  Pipeline pipeline(fixture_config());
  auto a = pipeline.run(kData / "fixtures" / "img04.pgm", nullptr);
  auto b = pipeline.run(kData / "fixtures" / "img04.pgm", nullptr);
  CHECK(report_to_jsonl(a, false) == report_to_jsonl(b, false));
}

TEST_CASE("report jsonl carries tags and stages") {
  Pipeline pipeline(fixture_config());
  auto report = pipeline.run(kData / "fixtures" / "img05.pgm", nullptr);
  auto line = report_to_jsonl(report);
  CHECK(line.find("\"image_id\":\"img05\"") != std::string::npos);
  CHECK(line.find("\"beach\"") != std::string::npos);
  CHECK(line.find("\"stages\"") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);  // one line per report
}
