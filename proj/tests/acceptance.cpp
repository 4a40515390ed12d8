// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Run via ctest or directly; prints supporting detail to stdout.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "snaptag/imgproc.hpp"
#include "snaptag/index.hpp"
#include "snaptag/keywords.hpp"
#include "snaptag/kg.hpp"
#include "snaptag/langdetect.hpp"
#include "snaptag/numkernel.hpp"
#include "snaptag/pipeline.hpp"
#include "snaptag/tagrank.hpp"

using namespace snaptag;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = SNAPTAG_DATA_DIR;
int g_failures = 0;

void verdict(int criterion, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// ---------------------------------------------------------------- criterion 1

double lattice_path_score(const LatticeScores& s, const std::vector<int>& path) {
  double score = s.emissions[0][path[0]];
  for (std::size_t t = 1; t < path.size(); ++t)
    score += s.transitions[path[t - 1]][path[t]] + s.emissions[t][path[t]];
  return score;
}

double brute_force_best(const LatticeScores& s) {
  const std::size_t T = s.steps(), K = s.labels();
  std::vector<int> path(T, 0);
  double best = -1e300;
  for (;;) {
    best = std::max(best, lattice_path_score(s, path));
    std::size_t pos = T;
    while (pos > 0) {
      if (++path[pos - 1] < static_cast<int>(K)) break;
      path[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return best;
}

void criterion_1() {
  auto t0 = Clock::now();
  std::mt19937 rng(1001);
  std::uniform_int_distribution<std::size_t> Ts(1, 6), Ks(1, 5);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    LatticeScores s;
    std::size_t T = Ts(rng), K = Ks(rng);
    s.emissions.assign(T, std::vector<double>(K));
    s.transitions.assign(K, std::vector<double>(K));
    for (auto& row : s.emissions)
      for (auto& v : row) v = val(rng);
    for (auto& row : s.transitions)
      for (auto& v : row) v = val(rng);
    auto fast = viterbi_decode(s);
    double oracle = brute_force_best(s);
    if (std::abs(fast.score - oracle) > 1e-9 ||
        std::abs(lattice_path_score(s, fast.path) - fast.score) > 1e-12)
      ++mismatches;
  }
  double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "Viterbi vs brute force: %d/1000 mismatches, %.2f s",
                mismatches, secs);
  verdict(1, mismatches == 0 && secs < 5.0, buf);
}

// ------------------------------------------------------------ criteria 2 & 3

struct LangBundle {
  std::vector<std::string> langs;
  std::vector<CharLanguageModel> models;
  std::vector<std::pair<std::string, std::string>> heldout;  // (lang, text)
};

LangBundle build_lang_bundle() {
  LangBundle b;
  b.langs = {"de", "en", "es", "fr", "it"};
  for (const auto& lang : b.langs)
    b.models.push_back(
        build_clm(read_lines(kData / "corpora" / (lang + ".txt")), lang));
  for (const auto& line : read_lines(kData / "corpora" / "heldout.tsv")) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    b.heldout.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return b;
}

std::vector<std::string> classify_all(const LangBundle& b,
                                      const std::vector<CharLanguageModel>& models) {
  std::vector<std::string> out;
  out.reserve(b.heldout.size());
  for (const auto& [truth, text] : b.heldout)
    out.push_back(detect_language(text, models).language);
  return out;
}

void criterion_2(const LangBundle& b, const std::vector<std::string>& predicted,
                 double build_secs) {
  auto t0 = Clock::now();
  std::map<std::string, std::map<std::string, int>> confusion;
  int correct = 0;
  for (std::size_t i = 0; i < b.heldout.size(); ++i) {
    confusion[b.heldout[i].first][predicted[i]]++;
    if (predicted[i] == b.heldout[i].first) ++correct;
  }
  double accuracy = 100.0 * correct / b.heldout.size();
  double secs = build_secs + seconds_since(t0);

  std::printf("      language confusion matrix (rows true, cols predicted):\n");
  std::printf("            ");
  for (const auto& l : b.langs) std::printf("%6s", l.c_str());
  std::printf("\n");
  for (const auto& truth : b.langs) {
    std::printf("      %6s", truth.c_str());
    for (const auto& pred : b.langs)
      std::printf("%6d", confusion[truth][pred]);
    std::printf("\n");
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "language detection: %.1f%% on %zu held-out sentences, %.1f s",
                accuracy, b.heldout.size(), secs);
  verdict(2, accuracy >= 95.0 && b.heldout.size() >= 500 && secs < 60.0, buf);
}

void criterion_3(const LangBundle& b, const std::vector<std::string>& predicted) {
  std::size_t max_bytes = 0, max_alphabet = 0;
  std::vector<CharLanguageModel> quantized;
  for (const auto& m : b.models) {
    auto bytes = serialize_clm(m);
    max_bytes = std::max(max_bytes, bytes.size());
    max_alphabet = std::max(max_alphabet, m.alphabet().size());
    quantized.push_back(deserialize_clm(bytes));
  }
  auto requantized = classify_all(b, quantized);
  int verdict_changes = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != requantized[i]) ++verdict_changes;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "CLM budget: max %zu bytes, alphabet %zu, %d verdicts changed "
                "by quantization",
                max_bytes, max_alphabet, verdict_changes);
  verdict(3, max_bytes <= 40 * 1024 && max_alphabet <= 40 && verdict_changes == 0,
          buf);
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  bool ok =
      near(tag_score({make_scene_candidate("x", 0.9)}).score, 0.9) &&
      near(tag_score({make_ocr_candidate("x", 1.0)}).score, 0.8) &&
      near(tag_score({make_related_candidate("x", 0.0, 1.0)}).score, 1.0) &&
      near(tag_score({make_related_candidate("x", 1.0, 0.5)}).score,
           0.5 * std::exp(-1.0));
  verdict(4, ok, "tag score arithmetic at 1e-9");
}

// ---------------------------------------------------------------- criterion 5

struct ToyKg {
  KnowledgeGraph graph;
  std::vector<Triplet> test;
};

// 5 clusters of 10 entities; edges only within clusters so the link structure
// is learnable at desk scale
ToyKg clustered_graph() {
  ToyKg kg;
  std::mt19937 rng(555);
  for (int c = 0; c < 5; ++c)
    for (int e = 0; e < 10; ++e)
      kg.graph.intern_entity("c" + std::to_string(c) + "e" + std::to_string(e));
  kg.graph.relation_names = {"related_to"};

  std::vector<Triplet> edges;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        if (i != j) edges.push_back({c * 10 + i, 0, c * 10 + j});
  std::shuffle(edges.begin(), edges.end(), rng);
  edges.resize(220);
  kg.test.assign(edges.begin(), edges.begin() + 20);
  for (std::size_t i = 20; i < edges.size(); ++i) {
    kg.graph.triplets.push_back(edges[i]);
    kg.graph.triplet_set.insert(edges[i]);
  }
  return kg;
}

void criterion_5() {
  auto t0 = Clock::now();
  auto kg = clustered_graph();

  KgHyperParams hyper;
  hyper.dim = 8;
  hyper.filters = 8;
  hyper.learning_rate = 0.08;
  hyper.epochs = 600;
  hyper.seed = 42;

  // random baseline: untrained models averaged over several seeds
  double baseline_hits = 0.0;
  for (unsigned s : {101u, 102u, 103u, 104u, 105u}) {
    KgHyperParams bh = hyper;
    bh.seed = s;
    baseline_hits +=
        link_prediction_eval(init_model(kg.graph, bh), kg.test, kg.graph)
            .hits_at_10;
  }
  baseline_hits /= 5.0;

  auto run1 = train(kg.graph, hyper);
  auto run2 = train(kg.graph, hyper);
  bool reproducible = run1.loss_trace == run2.loss_trace &&
                      run1.model.entity_emb == run2.model.entity_emb;
  bool converged = std::isfinite(run1.loss_trace.back());
  auto trained = link_prediction_eval(run1.model, kg.test, kg.graph);

  // finite differences on a micro-model, relative error over the whole
  // gradient vector
  KgHyperParams micro;
  micro.dim = 6;
  micro.filters = 3;
  micro.seed = 7;
  auto m = init_model(kg.graph, micro);
  Triplet probe{3, 0, 17};
  TripletGradients grads;
  bce_loss_and_grad(m, probe, 1.0, grads);
  std::vector<std::pair<float*, float>> params;  // (param, analytic)
  for (int i = 0; i < micro.dim; ++i) {
    params.push_back({&m.entity_emb[probe.head * micro.dim + i], grads.head[i]});
    params.push_back({&m.entity_emb[probe.tail * micro.dim + i], grads.tail[i]});
    params.push_back({&m.relation_emb[i], grads.rel[i]});
  }
  for (std::size_t i = 0; i < m.conv_w.size(); ++i)
    params.push_back({&m.conv_w[i], grads.conv_w[i]});
  for (std::size_t i = 0; i < m.conv_b.size(); ++i)
    params.push_back({&m.conv_b[i], grads.conv_b[i]});
  for (std::size_t i = 0; i < m.fc_w.size(); ++i)
    params.push_back({&m.fc_w[i], grads.fc_w[i]});
  params.push_back({&m.fc_b, grads.fc_b});

  double err_sq = 0.0, norm_sq = 0.0;
  TripletGradients scratch;
  for (auto& [param, analytic] : params) {
    float saved = *param;
    float hi = saved + 1e-4f, lo = saved - 1e-4f;
    *param = hi;
    double loss_hi = bce_loss_and_grad(m, probe, 1.0, scratch);
    *param = lo;
    double loss_lo = bce_loss_and_grad(m, probe, 1.0, scratch);
    *param = saved;
    double numeric = (loss_hi - loss_lo) / (static_cast<double>(hi) - lo);
    err_sq += (numeric - analytic) * (numeric - analytic);
    norm_sq += static_cast<double>(analytic) * analytic;
  }
  double grad_rel_err = std::sqrt(err_sq) / std::max(std::sqrt(norm_sq), 1e-12);

  double secs = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "KG: hits@10 %.1f%% (baseline %.1f%%), mean rank %.1f "
                "(limit 25.5), grad err %.2e, %s, %.1f s",
                trained.hits_at_10, baseline_hits, trained.mean_rank,
                grad_rel_err, reproducible ? "reproducible" : "NONDETERMINISTIC",
                secs);
  verdict(5,
          trained.hits_at_10 >= 3.0 * baseline_hits && converged &&
              trained.mean_rank < 25.5 && grad_rel_err < 1e-4 && reproducible &&
              secs < 120.0,
          buf);
}

// ---------------------------------------------------------------- criterion 6

void criterion_6() {
  std::istringstream toy_src([] {
    std::ostringstream s;
    for (int i = 0; i + 1 < 40; ++i) s << 'e' << i << "\tr\te" << (i + 1) << '\n';
    return s.str();
  }());
  auto g = load_and_collapse(toy_src);
  std::mt19937 rng(66);
  const Triplet pos = g.triplets[7];
  int bad = 0, heads = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto neg = negative_sample(pos, g, rng);
    bool head_changed = neg.head != pos.head;
    bool tail_changed = neg.tail != pos.tail;
    if (neg.relation != pos.relation || head_changed == tail_changed) ++bad;
    if (head_changed) ++heads;
  }
  double frac = static_cast<double>(heads) / draws;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "negative sampling: %d malformed, head fraction %.3f", bad, frac);
  verdict(6, bad == 0 && frac >= 0.45 && frac <= 0.55, buf);
}

// ---------------------------------------------------------------- criterion 7

BinaryImage binarize_reference(const RasterImage& gray, const PreprocessParams& p) {
  BinaryImage edges = canny_edges(gray, p.canny_low, p.canny_high);
  auto comps = connected_components(edges);
  const int w = gray.width, h = gray.height;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (const auto& c : comps) {
    if (c.pixel_count < p.min_component_area) continue;
    for (int y = std::max(0, c.y - p.region_dilation);
         y <= std::min(h - 1, c.y + c.height - 1 + p.region_dilation); ++y)
      for (int x = std::max(0, c.x - p.region_dilation);
           x <= std::min(w - 1, c.x + c.width - 1 + p.region_dilation); ++x)
        mask[static_cast<std::size_t>(y) * w + x] = 1;
  }
  BinaryImage out(w, h, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
      double sum = 0;
      int count = 0;
      for (int dy = -p.neighborhood_radius; dy <= p.neighborhood_radius; ++dy)
        for (int dx = -p.neighborhood_radius; dx <= p.neighborhood_radius; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          sum += gray.at(xx, yy);
          ++count;
        }
      out.at(x, y) = gray.at(x, y) < (sum / count) * (1.0 - p.threshold_bias)
                         ? 0 : 255;
    }
  return out;
}

void criterion_7() {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> pix(0, 255);
  int nondeterministic = 0, nonbinary = 0;
  for (int trial = 0; trial < 50; ++trial) {
    RasterImage img(48 + trial % 17, 36 + trial % 11, 1);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(pix(rng));
    PreprocessParams p;
    p.tile_count = 1;
    auto reference = binarize(img, p);
    for (auto v : reference.data)
      if (v != 0 && v != 255) ++nonbinary;
    for (int tiles : {2, 4, 8}) {
      p.tile_count = tiles;
      if (binarize(img, p).data != reference.data) ++nondeterministic;
    }
  }

  RasterImage glyph(48, 48, 1, 230);
  for (int y = 16; y < 32; ++y)
    for (int x = 16; x < 32; ++x) glyph.at(x, y) = 20;
  PreprocessParams p;
  auto got = binarize(glyph, p);
  auto ref = binarize_reference(glyph, p);
  bool glyph_ok = got.data == ref.data && got.at(16, 24) == 0;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "binarization: %d tiling mismatches, %d non-binary pixels, "
                "glyph oracle %s",
                nondeterministic, nonbinary, glyph_ok ? "match" : "MISMATCH");
  verdict(7, nondeterministic == 0 && nonbinary == 0 && glyph_ok, buf);
}

// ---------------------------------------------------------------- criterion 8

void criterion_8() {
  std::mt19937 rng(88);
  std::uniform_int_distribution<std::size_t> len(0, 1025);
  std::uniform_real_distribution<float> val(-2.0f, 2.0f);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::size_t n = len(rng);
    std::vector<float> a(n), b(n);
    float mag = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = val(rng);
      b[i] = val(rng);
      mag += std::fabs(a[i] * b[i]);
    }
    float ref = dot_scalar(a, b);
    float got = dot_simd(a, b);
    if (std::fabs(got - ref) > 1e-5f * (1.0f + mag)) ++violations;
  }
  auto rows = bench_kernels({256, 4096, 65536}, 20);
  std::printf("      dot kernel benchmark (%s backend):\n%s",
              simd_backend(), format_bench_table(rows).c_str());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "SIMD kernel: %d tolerance violations over 10^4 pairs",
                violations);
  verdict(8, violations == 0 && rows.size() == 3, buf);
}

// ----------------------------------------------------------- criteria 9 & 10

PipelineConfig fixture_pipeline_config(const fs::path& work) {
  fs::create_directories(work / "clm");
  for (const std::string lang : {"en", "es", "it", "fr", "de"}) {
    auto out = work / "clm" / (lang + ".clm");
    if (!fs::exists(out))
      save_clm(build_clm(read_lines(kData / "corpora" / (lang + ".txt")), lang),
               out);
  }
  auto kg_path = work / "kg.bin";
  if (!fs::exists(kg_path)) {
    KgHyperParams hp;
    hp.dim = 16;
    hp.filters = 8;
    hp.epochs = 30;
    save_model(train(load_and_collapse(kData / "kg" / "toy.tsv"), hp).model,
               kg_path);
  }
  PipelineConfig cfg;
  cfg.clm_dir = work / "clm";
  cfg.keywords_dir = kData / "scrdr";
  cfg.stopwords_dir = kData / "stopwords";
  cfg.kg_model = kg_path;
  cfg.related_k = 20;
  return cfg;
}

void criteria_9_and_10() {
  auto work = fs::temp_directory_path() / "snaptag-acceptance";
  fs::create_directories(work);
  auto cfg = fixture_pipeline_config(work);

  TagIndex index;
  auto t0 = Clock::now();
  auto summary = batch_run(kData / "fixtures", cfg, &index);
  double per_image_secs = seconds_since(t0) / summary.reports.size();

  // criterion 9: boundary checks + hand-computed verdict counts
  bool boundary_ok =
      tag_coverage({"a"}, {"a", "b", "c", "d"}).verdict == Verdict::Fail &&
      tag_coverage({"a", "b", "c"}, {"a", "b", "c", "d"}).verdict ==
          Verdict::PartiallyPass;
  auto truth = read_ground_truth(kData / "fixtures" / "truth.tsv");
  auto coverage = evaluate_coverage(index, truth);
  std::printf("%s", format_coverage_summary(coverage).c_str());
  char buf9[160];
  std::snprintf(buf9, sizeof(buf9),
                "coverage: boundaries %s, verdicts %d/%d/%d (expected 6/2/2)",
                boundary_ok ? "ok" : "WRONG", coverage.pass,
                coverage.partially_pass, coverage.fail);
  verdict(9,
          boundary_ok && coverage.pass == 6 && coverage.partially_pass == 2 &&
              coverage.fail == 2,
          buf9);

  // criterion 10: the tokyo fixture end to end
  const TagReport* tokyo_report = nullptr;
  for (const auto& r : summary.reports)
    if (r.image_id == "img01") tokyo_report = &r;
  bool tags_ok = false, related_ok = false;
  if (tokyo_report) {
    std::set<std::string> names;
    for (const auto& t : tokyo_report->tags) names.insert(t.name);
    tags_ok = names.count("tokyo") && names.count("document") &&
              names.count("japan");
    for (const auto& t : tokyo_report->tags)
      if (t.name == "japan")
        for (const auto& c : t.contributions)
          if (c.source == TagSource::Related) related_ok = true;
  }
  auto hits = index.search("tokyo", 5);
  bool search_ok = !hits.empty() && hits[0].image_id == "img01";
  char buf10[200];
  std::snprintf(buf10, sizeof(buf10),
                "end-to-end: %d/%d images ok, tags %s, related source %s, "
                "search %s, %.2f s/image",
                summary.ok, summary.ok + summary.failed,
                tags_ok ? "ok" : "MISSING", related_ok ? "ok" : "MISSING",
                search_ok ? "ok" : "MISS", per_image_secs);
  verdict(10,
          summary.failed == 0 && summary.reports.size() == 10 && tags_ok &&
              related_ok && search_ok && per_image_secs < 2.0,
          buf10);
}

}  // namespace

int main() {
  criterion_1();

  auto t0 = Clock::now();
  auto bundle = build_lang_bundle();
  auto predicted = classify_all(bundle, bundle.models);
  criterion_2(bundle, predicted, seconds_since(t0));
  criterion_3(bundle, predicted);

  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criteria_9_and_10();

  if (g_failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
