#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "snaptag/numkernel.hpp"
#include "snaptag/pipeline.hpp"

namespace fs = std::filesystem;
using namespace snaptag;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<unsigned> seed;
  std::string debug_artifacts;
};

PipelineConfig load_config(const GlobalOpts& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty())
    cfg = load_pipeline_config(Config::read_file(g.config_path));
  if (!g.debug_artifacts.empty()) cfg.debug_artifacts = g.debug_artifacts;
  return cfg;
}

TagIndex load_index_if_any(const PipelineConfig& cfg) {
  if (cfg.index_path && fs::exists(*cfg.index_path))
    return TagIndex::load(*cfg.index_path);
  return {};
}

void persist_index_if_any(const TagIndex& idx, const PipelineConfig& cfg) {
  if (cfg.index_path) idx.persist(*cfg.index_path);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_all(std::istream& in) {
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline screenshot tagging engine"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "pipeline config file (INI)");
  app.add_option("--seed", g.seed, "seed for stochastic subcommands");
  app.add_option("--debug-artifacts", g.debug_artifacts,
                 "directory for intermediate-stage image dumps");

  // tag ----------------------------------------------------------------
  std::string tag_image;
  auto* cmd_tag = app.add_subcommand("tag", "run the pipeline on one image");
  cmd_tag->add_option("image", tag_image, "image path")->required();

  // batch --------------------------------------------------------------
  std::string batch_dir;
  auto* cmd_batch = app.add_subcommand("batch", "run the pipeline on a directory");
  cmd_batch->add_option("dir", batch_dir, "image directory")->required();

  // build-clm ----------------------------------------------------------
  std::string clm_corpus, clm_lang, clm_out;
  int clm_ngram = 3;
  double clm_alpha = 0.1;
  auto* cmd_clm = app.add_subcommand("build-clm", "build a character language model");
  cmd_clm->add_option("--corpus", clm_corpus, "training text, one sentence per line")
      ->required();
  cmd_clm->add_option("--lang", clm_lang, "language code")->required();
  cmd_clm->add_option("--out", clm_out, "output .clm file")->required();
  cmd_clm->add_option("--ngram", clm_ngram, "max n-gram order");
  cmd_clm->add_option("--alpha", clm_alpha, "additive smoothing");

  // detect-lang --------------------------------------------------------
  std::string dl_models, dl_text;
  auto* cmd_dl = app.add_subcommand("detect-lang", "identify the language of text");
  cmd_dl->add_option("--models", dl_models, "directory of .clm files")->required();
  cmd_dl->add_option("--text", dl_text, "text to classify (default: stdin)");

  // train-kg -----------------------------------------------------------
  std::string kg_triplets, kg_out;
  KgHyperParams hyper;
  auto* cmd_train = app.add_subcommand("train-kg", "train the triplet scorer");
  cmd_train->add_option("--triplets", kg_triplets, "head<TAB>rel<TAB>tail file")
      ->required();
  cmd_train->add_option("--out", kg_out, "output model file")->required();
  cmd_train->add_option("--dim", hyper.dim, "embedding width");
  cmd_train->add_option("--filters", hyper.filters, "conv filters");
  cmd_train->add_option("--epochs", hyper.epochs, "training epochs");
  cmd_train->add_option("--lr", hyper.learning_rate, "learning rate");

  // eval-kg ------------------------------------------------------------
  std::string ev_model, ev_graph, ev_test;
  auto* cmd_evkg = app.add_subcommand("eval-kg", "link-prediction evaluation");
  cmd_evkg->add_option("--model", ev_model, "trained model")->required();
  cmd_evkg->add_option("--graph", ev_graph, "training triplets (entity space)")
      ->required();
  cmd_evkg->add_option("--test", ev_test, "held-out triplets")->required();

  // related ------------------------------------------------------------
  std::string rel_entity, rel_model, rel_graph;
  int rel_k = 10;
  bool rel_both = false;
  auto* cmd_rel = app.add_subcommand("related", "top related entities for a tag");
  cmd_rel->add_option("entity", rel_entity, "entity name")->required();
  cmd_rel->add_option("--model", rel_model, "trained model")->required();
  cmd_rel->add_option("--graph", rel_graph, "triplet file for name resolution");
  cmd_rel->add_option("-k", rel_k, "result count");
  cmd_rel->add_flag("--both", rel_both, "score both triplet directions");

  // index --------------------------------------------------------------
  std::string index_dir;
  auto* cmd_index = app.add_subcommand("index", "tag and index a directory");
  cmd_index->add_option("--dir", index_dir, "image directory")->required();

  // search -------------------------------------------------------------
  std::string search_query;
  int search_k = 10;
  auto* cmd_search = app.add_subcommand("search", "query the tag index");
  cmd_search->add_option("query", search_query, "search terms")->required();
  cmd_search->add_option("-k", search_k, "max results");

  // eval ---------------------------------------------------------------
  std::string eval_truth;
  auto* cmd_eval = app.add_subcommand("eval", "tag coverage against ground truth");
  cmd_eval->add_option("--ground-truth", eval_truth, "image_id<TAB>tags file")
      ->required();

  // bench-kernel -------------------------------------------------------
  std::vector<std::size_t> bench_sizes = {256, 4096, 65536};
  int bench_repeats = 50;
  auto* cmd_bench = app.add_subcommand("bench-kernel", "dot kernel micro-benchmark");
  cmd_bench->add_option("--sizes", bench_sizes, "vector lengths");
  cmd_bench->add_option("--repeats", bench_repeats, "timing repeats");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_tag) {
      auto cfg = load_config(g);
      Pipeline pipeline(cfg);
      TagIndex idx = load_index_if_any(cfg);
      auto report = pipeline.run(tag_image, cfg.index_path ? &idx : nullptr);
      persist_index_if_any(idx, cfg);
      std::cout << report_to_jsonl(report) << "\n";
      return report.ok ? 0 : 1;
    }

    if (*cmd_batch || *cmd_index) {
      auto cfg = load_config(g);
      TagIndex idx = load_index_if_any(cfg);
      bool want_index = *cmd_index || cfg.index_path.has_value();
      auto summary = batch_run(*cmd_index ? index_dir : batch_dir, cfg,
                               want_index ? &idx : nullptr);
      persist_index_if_any(idx, cfg);
      for (const auto& report : summary.reports)
        std::cout << report_to_jsonl(report) << "\n";
      std::fprintf(stderr, "%d ok, %d failed, p50 %.1f ms, p95 %.1f ms\n",
                   summary.ok, summary.failed, summary.p50_ms, summary.p95_ms);
      return summary.failed == 0 ? 0 : 1;
    }

    if (*cmd_clm) {
      auto model = build_clm(read_lines(clm_corpus), clm_lang, clm_ngram, clm_alpha);
      save_clm(model, clm_out);
      std::fprintf(stderr, "wrote %s (%zu bytes, alphabet %zu)\n",
                   clm_out.c_str(), fs::file_size(clm_out),
                   model.alphabet().size());
      return 0;
    }

    if (*cmd_dl) {
      std::vector<CharLanguageModel> models;
      for (const auto& entry : fs::directory_iterator(dl_models))
        if (entry.path().extension() == ".clm")
          models.push_back(load_clm(entry.path()));
      std::string text = dl_text.empty() ? read_all(std::cin) : dl_text;
      auto result = detect_language(text, models);
      std::cout << result.language << "\n";
      for (const auto& [lang, score] : result.per_language_scores)
        std::fprintf(stderr, "  %s  %.3f\n", lang.c_str(), score);
      return 0;
    }

    if (*cmd_train) {
      if (g.seed) hyper.seed = *g.seed;
      auto graph = load_and_collapse(fs::path(kg_triplets));
      auto result = train(graph, hyper);
      save_model(result.model, kg_out);
      std::fprintf(stderr, "trained %d entities, final loss %.4f\n",
                   graph.entity_count(),
                   result.loss_trace.empty() ? 0.0 : result.loss_trace.back());
      return 0;
    }

    if (*cmd_evkg) {
      auto model = load_model(ev_model);
      auto graph = load_and_collapse(fs::path(ev_graph));
      auto test = load_triplets(ev_test, graph);
      auto report = link_prediction_eval(model, test, graph);
      std::printf("queries %d  mean_rank %.2f  hits@10 %.1f%%\n",
                  report.ranked_queries, report.mean_rank, report.hits_at_10);
      return 0;
    }

    if (*cmd_rel) {
      auto model = load_model(rel_model);
      KnowledgeGraph graph;
      if (!rel_graph.empty()) graph = load_and_collapse(fs::path(rel_graph));
      auto related = related_tags(model, graph, rel_entity, rel_k, rel_both);
      if (!related) {
        std::fprintf(stderr, "unknown entity: %s\n", rel_entity.c_str());
        return 1;
      }
      for (const auto& r : *related)
        std::printf("%s\t%.4f\n", r.entity.c_str(), r.score);
      return 0;
    }

    if (*cmd_search) {
      auto cfg = load_config(g);
      if (!cfg.index_path)
        throw ConfigError("search requires [index] path in the config");
      auto idx = TagIndex::load(*cfg.index_path);
      for (const auto& hit : idx.search(search_query, search_k))
        std::printf("%s\t%.4f\n", hit.image_id.c_str(), hit.score);
      return 0;
    }

    if (*cmd_eval) {
      auto cfg = load_config(g);
      if (!cfg.index_path)
        throw ConfigError("eval requires [index] path in the config");
      auto idx = TagIndex::load(*cfg.index_path);
      auto truth = read_ground_truth(eval_truth);
      std::cout << format_coverage_summary(evaluate_coverage(idx, truth));
      return 0;
    }

    if (*cmd_bench) {
      auto rows = bench_kernels(bench_sizes, bench_repeats);
      std::fprintf(stderr, "backend: %s\n", simd_backend());
      std::cout << format_bench_table(rows);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
