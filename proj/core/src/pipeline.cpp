#include "snaptag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "json.hpp"

namespace snaptag {

namespace {
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}
}  // namespace

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Ok: return "ok";
    case StageStatus::RanEmpty: return "ran-empty";
    case StageStatus::Skipped: return "skipped";
    case StageStatus::Failed: return "failed";
  }
  return "ok";
}

void PipelineConfig::validate() const {
  auto check_dir = [](const std::optional<std::filesystem::path>& p,
                      const char* what) {
    if (p && !std::filesystem::is_directory(*p))
      throw ConfigError(std::string(what) + " directory not found: " + p->string());
  };
  check_dir(clm_dir, "CLM model");
  check_dir(keywords_dir, "keyword resources");
  check_dir(stopwords_dir, "stopword");
  if (kg_model && !std::filesystem::is_regular_file(*kg_model))
    throw ConfigError("KG model file not found: " + kg_model->string());
  if (routing.fallback.empty())
    throw ConfigError("engine routing: default engine must be set");
}

PipelineConfig load_pipeline_config(const Config& cfg) {
  PipelineConfig pc;
  pc.preprocess.bilateral_diameter =
      cfg.get_int("preprocess", "bilateral_diameter", pc.preprocess.bilateral_diameter);
  pc.preprocess.sigma_color =
      cfg.get_double("preprocess", "sigma_color", pc.preprocess.sigma_color);
  pc.preprocess.sigma_space =
      cfg.get_double("preprocess", "sigma_space", pc.preprocess.sigma_space);
  pc.preprocess.canny_low =
      cfg.get_double("preprocess", "canny_low", pc.preprocess.canny_low);
  pc.preprocess.canny_high =
      cfg.get_double("preprocess", "canny_high", pc.preprocess.canny_high);
  pc.preprocess.neighborhood_radius =
      cfg.get_int("preprocess", "neighborhood_radius", pc.preprocess.neighborhood_radius);
  pc.preprocess.threshold_bias =
      cfg.get_double("preprocess", "threshold_bias", pc.preprocess.threshold_bias);
  pc.preprocess.tile_count =
      cfg.get_int("preprocess", "tile_count", pc.preprocess.tile_count);
  pc.preprocess.min_component_area =
      cfg.get_int("preprocess", "min_component_area", pc.preprocess.min_component_area);

  pc.routing.latin = cfg.get_or("engines", "latin", pc.routing.latin);
  pc.routing.nonlatin = cfg.get_or("engines", "nonlatin", pc.routing.nonlatin);
  pc.routing.fallback = cfg.get_or("engines", "default", pc.routing.latin);
  for (const auto& id : {pc.routing.latin, pc.routing.nonlatin, pc.routing.fallback}) {
    if (id.empty()) continue;
    EngineSpec spec;
    spec.kind = cfg.get_or("engines", id + ".kind", "fixture");
    spec.command = cfg.get_or("engines", id + ".command", "");
    pc.engines[id] = spec;
  }

  if (auto v = cfg.get("langdetect", "models")) pc.clm_dir = *v;
  if (auto v = cfg.get("keywords", "resources")) pc.keywords_dir = *v;
  if (auto v = cfg.get("keywords", "stopwords")) pc.stopwords_dir = *v;
  if (auto v = cfg.get("kg", "model")) pc.kg_model = *v;
  pc.related_k = cfg.get_int("kg", "related_k", pc.related_k);
  pc.related_both_directions = cfg.get_or("kg", "both_directions", "false") == "true";
  pc.scene_top_k = cfg.get_int("engines", "scene_top_k", pc.scene_top_k);
  if (auto v = cfg.get("index", "path")) pc.index_path = *v;
  return pc;
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.clm_dir) {
    for (const auto& entry : std::filesystem::directory_iterator(*cfg_.clm_dir))
      if (entry.path().extension() == ".clm")
        clms_.push_back(load_clm(entry.path().string()));
    std::sort(clms_.begin(), clms_.end(),
              [](const CharLanguageModel& a, const CharLanguageModel& b) {
                return a.language() < b.language();
              });
  }
  if (cfg_.keywords_dir) {
    for (const auto& entry : std::filesystem::directory_iterator(*cfg_.keywords_dir)) {
      if (entry.path().extension() != ".rules") continue;
      std::string lang = entry.path().stem().string();
      auto lex_path = entry.path().parent_path() / (lang + ".lex");
      if (!std::filesystem::exists(lex_path)) continue;
      TaggingResources res;
      res.scrdr_tree = std::shared_ptr<const ScrdrNode>(read_scrdr_rules(entry.path()));
      res.lexicon = std::make_shared<const Lexicon>(read_lexicon(lex_path));
      if (cfg_.stopwords_dir) {
        auto sw = *cfg_.stopwords_dir / (lang + ".txt");
        if (std::filesystem::exists(sw)) res.stopwords = read_stopwords(sw);
      }
      keyword_resources_.emplace(lang, std::move(res));
    }
  }
  if (cfg_.kg_model) kg_model_ = load_model(*cfg_.kg_model);
}

std::unique_ptr<OcrEngine> Pipeline::make_engine(
    const std::string& id, const std::filesystem::path& image) const {
  auto it = cfg_.engines.find(id);
  EngineSpec spec = it == cfg_.engines.end() ? EngineSpec{} : it->second;
  if (spec.kind == "external" && !spec.command.empty())
    return std::make_unique<ExternalOcrEngine>(id, spec.command);
  return std::make_unique<FixtureOcrEngine>(id, image);
}

TagReport Pipeline::run(const std::filesystem::path& image_path,
                        TagIndex* index) const {
  TagReport report;
  report.image_id = image_path.stem().string();

  auto stage = [&](const std::string& name, auto&& fn) {
    StageRecord rec;
    rec.stage = name;
    auto t0 = Clock::now();
    try {
      rec.status = fn(rec);
    } catch (const std::exception& e) {
      rec.status = StageStatus::Failed;
      rec.detail = e.what();
      report.ok = false;
    }
    rec.millis = ms_since(t0);
    report.stages.push_back(rec);
    return report.stages.back().status;
  };

  RasterImage raw;
  try {
    raw = read_image(image_path);
  } catch (const ImageError& e) {
    report.ok = false;
    report.stages.push_back({"load", StageStatus::Failed, e.what(), 0.0});
    return report;
  }

  RasterImage gray;
  BinaryImage binary;
  stage("preprocess", [&](StageRecord&) {
    gray = to_grayscale(raw);
    RasterImage smoothed = bilateral_filter(gray, cfg_.preprocess);
    binary = binarize(smoothed, cfg_.preprocess);
    if (cfg_.debug_artifacts) {
      std::filesystem::create_directories(*cfg_.debug_artifacts);
      write_pgm(gray, *cfg_.debug_artifacts / (report.image_id + ".gray.pgm"));
      write_pgm(binary, *cfg_.debug_artifacts / (report.image_id + ".bin.pgm"));
    }
    return StageStatus::Ok;
  });
  if (!report.ok) return report;

  std::vector<TextBox> lines;
  stage("localize", [&](StageRecord& rec) {
    // text is black after binarization; components run on foreground=255
    BinaryImage inverted(binary.width, binary.height, 0);
    for (std::size_t i = 0; i < binary.data.size(); ++i)
      inverted.data[i] = binary.data[i] == 0 ? 255 : 0;
    lines = locate_text_lines(inverted, cfg_.text_lines);
    rec.detail = std::to_string(lines.size()) + " text lines";
    return lines.empty() ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  OcrDocument doc;
  stage("ocr", [&](StageRecord& rec) {
    auto engine = make_engine(cfg_.routing.fallback, image_path);
    doc = recognize(*engine, binary, {});
    ScriptLabel script = identify_script(doc.full_text);
    report.script = std::string(to_string(script));
    std::string routed = route_engine(script, cfg_.routing);
    if (routed != engine->id()) {
      // non-Latin majority: one extra pass through the other engine
      auto rerouted = make_engine(routed, image_path);
      doc = recognize(*rerouted, binary, {});
      rec.detail = "re-routed to " + routed;
    }
    return doc.full_text.empty() ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  stage("langdetect", [&](StageRecord& rec) {
    if (clms_.empty()) {
      rec.detail = "no CLM models configured";
      return StageStatus::Skipped;
    }
    if (doc.full_text.empty()) return StageStatus::RanEmpty;
    auto result = detect_language(doc.full_text, clms_);
    report.language = result.language;
    rec.detail = result.language;
    return StageStatus::Ok;
  });

  std::vector<TagCandidate> candidates;
  stage("keywords", [&](StageRecord& rec) {
    if (doc.full_text.empty()) return StageStatus::RanEmpty;
    std::string lang = report.language.empty() ? "en" : report.language;
    auto it = keyword_resources_.find(lang);
    if (it == keyword_resources_.end()) it = keyword_resources_.find("en");
    if (it == keyword_resources_.end()) {
      rec.detail = "no tagging resources for " + lang;
      return StageStatus::Skipped;
    }
    auto kws = extract_keywords(doc.full_text, it->first, it->second);
    for (const auto& kw : kws)
      candidates.push_back(make_ocr_candidate(kw.text, kw.confidence));
    rec.detail = std::to_string(kws.size()) + " keywords";
    return kws.empty() ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  stage("scene", [&](StageRecord& rec) {
    if (!std::filesystem::exists(scene_sidecar_path(image_path))) {
      rec.detail = "no scene classifier output";
      return StageStatus::Skipped;
    }
    FixtureSceneClassifier classifier(image_path);
    auto labels = classify_scene(classifier, raw, cfg_.scene_top_k);
    for (const auto& l : labels)
      candidates.push_back(make_scene_candidate(l.label, l.prob));
    return labels.empty() ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  stage("related", [&](StageRecord& rec) {
    if (!kg_model_) {
      rec.detail = "no KG model configured";
      return StageStatus::Skipped;
    }
    std::vector<TagCandidate> parents = candidates;
    int added = 0;
    for (const auto& parent : parents) {
      auto related = related_tags(*kg_model_, empty_graph_, parent.name,
                                  cfg_.related_k, cfg_.related_both_directions);
      if (!related) continue;  // unknown entity: zero related tags, not a failure
      for (const auto& r : *related) {
        candidates.push_back(
            make_related_candidate(r.entity, r.score, parent.prob));
        ++added;
      }
    }
    rec.detail = std::to_string(added) + " related tags";
    return added == 0 ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  stage("rank", [&](StageRecord&) {
    report.tags = rank_tags(candidates);
    return report.tags.empty() ? StageStatus::RanEmpty : StageStatus::Ok;
  });

  stage("index", [&](StageRecord& rec) {
    if (!index) {
      rec.detail = "no index configured";
      return StageStatus::Skipped;
    }
    ImageRecord record;
    record.image_id = report.image_id;
    record.path = image_path.string();
    record.tags = report.tags;
    record.ingested_at = static_cast<std::int64_t>(std::time(nullptr));
    index->index_image(record);
    return StageStatus::Ok;
  });

  return report;
}

BatchSummary batch_run(const std::filesystem::path& dir,
                       const PipelineConfig& cfg, TagIndex* index) {
  std::vector<std::filesystem::path> images;
  if (std::filesystem::is_directory(dir))
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && is_image_file(entry.path()))
        images.push_back(entry.path());
  std::sort(images.begin(), images.end());
  if (images.empty())
    throw std::invalid_argument("batch_run: no images in " + dir.string());

  Pipeline pipeline(cfg);
  BatchSummary summary;
  std::vector<double> durations;
  for (const auto& path : images) {
    auto t0 = Clock::now();
    TagReport report = pipeline.run(path, index);
    durations.push_back(ms_since(t0));
    report.ok ? ++summary.ok : ++summary.failed;
    summary.reports.push_back(std::move(report));
  }
  std::sort(durations.begin(), durations.end());
  summary.p50_ms = durations[durations.size() / 2];
  summary.p95_ms = durations[std::min(durations.size() - 1,
                                      durations.size() * 95 / 100)];
  return summary;
}

std::string report_to_jsonl(const TagReport& report, bool include_timings) {
  nlohmann::json j;
  j["image_id"] = report.image_id;
  j["script"] = report.script;
  j["language"] = report.language;
  j["ok"] = report.ok;
  nlohmann::json tags = nlohmann::json::array();
  for (const auto& t : report.tags) {
    nlohmann::json contribs = nlohmann::json::array();
    for (const auto& c : t.contributions)
      contribs.push_back({{"source", std::string(to_string(c.source))},
                          {"value", c.value}});
    tags.push_back({{"name", t.name}, {"score", t.score}, {"contributions", contribs}});
  }
  j["tags"] = std::move(tags);
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : report.stages) {
    nlohmann::json js = {{"stage", s.stage},
                         {"status", std::string(to_string(s.status))},
                         {"detail", s.detail}};
    if (include_timings) js["ms"] = s.millis;
    stages.push_back(std::move(js));
  }
  j["stages"] = std::move(stages);
  return j.dump();
}

}  // namespace snaptag
