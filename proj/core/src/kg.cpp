#include "snaptag/kg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <sstream>

namespace snaptag {

namespace {
constexpr const char* kRelation = "related_to";

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}
}  // namespace

int KnowledgeGraph::intern_entity(const std::string& name) {
  auto it = entity_ids.find(name);
  if (it != entity_ids.end()) return it->second;
  int id = static_cast<int>(entity_names.size());
  entity_names.push_back(name);
  entity_ids.emplace(name, id);
  return id;
}

std::optional<int> KnowledgeGraph::resolve_entity(const std::string& name) const {
  auto it = entity_ids.find(name);
  if (it != entity_ids.end()) return it->second;
  std::string target = lower_ascii(name);
  for (int i = 0; i < entity_count(); ++i)
    if (lower_ascii(entity_names[i]) == target) return i;
  return std::nullopt;
}

KnowledgeGraph load_and_collapse(std::istream& source) {
  KnowledgeGraph g;
  g.relation_names = {kRelation};
  std::string line;
  int lineno = 0;
  while (std::getline(source, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw KgError("triplet parse error at line " + std::to_string(lineno) +
                    ": expected head<TAB>relation<TAB>tail");
    std::string head = line.substr(0, t1);
    std::string tail = line.substr(t2 + 1);
    if (head.empty() || tail.empty())
      throw KgError("triplet parse error at line " + std::to_string(lineno) +
                    ": empty entity");
    Triplet t{g.intern_entity(head), 0, g.intern_entity(tail)};
    if (g.triplet_set.insert(t).second) g.triplets.push_back(t);
  }
  if (g.triplets.empty()) throw KgError("triplet source contains no triplets");
  return g;
}

KnowledgeGraph load_and_collapse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw KgError("cannot open " + path.string());
  return load_and_collapse(in);
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path,
                                   KnowledgeGraph& g) {
  std::ifstream in(path);
  if (!in) throw KgError("cannot open " + path.string());
  std::vector<Triplet> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw KgError("triplet parse error at line " + std::to_string(lineno));
    out.push_back({g.intern_entity(line.substr(0, t1)), 0,
                   g.intern_entity(line.substr(t2 + 1))});
  }
  return out;
}

Triplet negative_sample(const Triplet& s, const KnowledgeGraph& g,
                        std::mt19937& rng) {
  const int n = g.entity_count();
  if (n < 2) throw KgError("negative_sample: need at least two entities");
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> pick(0, n - 2);
  Triplet neg = s;
  for (int attempt = 0; attempt < 10; ++attempt) {
    neg = s;
    bool corrupt_head = coin(rng) == 0;
    int original = corrupt_head ? s.head : s.tail;
    int replacement = pick(rng);
    if (replacement >= original) ++replacement;  // uniform over E \ {original}
    (corrupt_head ? neg.head : neg.tail) = replacement;
    if (!g.contains(neg)) return neg;
  }
  return neg;  // bounded retries exhausted: accept the collision
}

// ---------------------------------------------------------------------------
// model

TripletModel init_model(const KnowledgeGraph& g, const KgHyperParams& hyper) {
  if (hyper.dim < 3 || hyper.filters < 1)
    throw ConfigError("kg: dim must be >= 3 and filters >= 1");
  TripletModel m;
  m.dim = hyper.dim;
  m.filters = hyper.filters;
  m.entity_names = g.entity_names;
  std::mt19937 rng(hyper.seed);
  const float bound = 0.5f / std::sqrt(static_cast<float>(hyper.dim));
  std::uniform_real_distribution<float> dist(-bound, bound);
  auto fill = [&](std::vector<float>& v, std::size_t n) {
    v.resize(n);
    for (auto& x : v) x = dist(rng);
  };
  fill(m.entity_emb, static_cast<std::size_t>(g.entity_count()) * m.dim);
  fill(m.relation_emb, m.dim);
  fill(m.conv_w, static_cast<std::size_t>(m.filters) * 9);
  fill(m.conv_b, m.filters);
  fill(m.fc_w, m.filters);
  m.fc_b = dist(rng);
  return m;
}

namespace {

struct Forward {
  double score = 0.0;
  double logit = 0.0;
  std::vector<double> pooled;  // f
  std::vector<int> pool_argmax;  // f
};

Forward forward_pass(const TripletModel& m, const Triplet& t) {
  const int d = m.dim, f = m.filters;
  if (t.head < 0 || t.head >= m.entity_count() || t.tail < 0 ||
      t.tail >= m.entity_count())
    throw KgError("score_triplet: entity id out of range");
  const float* rows[3] = {m.entity_emb.data() + static_cast<std::size_t>(t.head) * d,
                          m.relation_emb.data(),
                          m.entity_emb.data() + static_cast<std::size_t>(t.tail) * d};
  Forward fw;
  fw.pooled.resize(f);
  fw.pool_argmax.resize(f);
  const int positions = d - 2;
  for (int j = 0; j < f; ++j) {
    const float* w = m.conv_w.data() + static_cast<std::size_t>(j) * 9;
    double best = -std::numeric_limits<double>::infinity();
    int best_p = 0;
    for (int p = 0; p < positions; ++p) {
      double z = m.conv_b[j];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          z += static_cast<double>(w[r * 3 + c]) * rows[r][p + c];
      if (z > best) {
        best = z;
        best_p = p;
      }
    }
    fw.pooled[j] = best;
    fw.pool_argmax[j] = best_p;
  }
  double logit = m.fc_b;
  for (int j = 0; j < f; ++j) logit += static_cast<double>(m.fc_w[j]) * fw.pooled[j];
  fw.logit = logit;
  fw.score = 1.0 / (1.0 + std::exp(-logit));
  return fw;
}

}  // namespace

double score_triplet(const TripletModel& m, const Triplet& t) {
  return forward_pass(m, t).score;
}

double bce_loss_and_grad(const TripletModel& m, const Triplet& t, double label,
                         TripletGradients& grads) {
  const int d = m.dim, f = m.filters;
  Forward fw = forward_pass(m, t);
  const double eps = 1e-12;
  double loss = -(label * std::log(fw.score + eps) +
                  (1.0 - label) * std::log(1.0 - fw.score + eps));
  double g_logit = fw.score - label;

  grads.head.assign(d, 0.f);
  grads.rel.assign(d, 0.f);
  grads.tail.assign(d, 0.f);
  grads.conv_w.assign(static_cast<std::size_t>(f) * 9, 0.f);
  grads.conv_b.assign(f, 0.f);
  grads.fc_w.assign(f, 0.f);
  grads.fc_b = static_cast<float>(g_logit);

  const float* rows[3] = {m.entity_emb.data() + static_cast<std::size_t>(t.head) * d,
                          m.relation_emb.data(),
                          m.entity_emb.data() + static_cast<std::size_t>(t.tail) * d};
  float* grad_rows[3] = {grads.head.data(), grads.rel.data(), grads.tail.data()};
  for (int j = 0; j < f; ++j) {
    grads.fc_w[j] = static_cast<float>(g_logit * fw.pooled[j]);
    // gradient flows only through the pooled position
    double gz = g_logit * m.fc_w[j];
    int p = fw.pool_argmax[j];
    grads.conv_b[j] += static_cast<float>(gz);
    float* gw = grads.conv_w.data() + static_cast<std::size_t>(j) * 9;
    const float* w = m.conv_w.data() + static_cast<std::size_t>(j) * 9;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        gw[r * 3 + c] += static_cast<float>(gz * rows[r][p + c]);
        grad_rows[r][p + c] += static_cast<float>(gz * w[r * 3 + c]);
      }
  }
  // self-loops share the embedding row: caller applies head and tail grads
  // separately, which accumulates correctly
  return loss;
}

TrainResult train(const KnowledgeGraph& g, const KgHyperParams& hyper) {
  if (hyper.learning_rate <= 0 || hyper.epochs < 0)
    throw ConfigError("kg: learning rate must be positive, epochs >= 0");
  if (g.triplets.empty()) throw KgError("train: graph has no triplets");

  TrainResult result;
  result.model = init_model(g, hyper);
  TripletModel& m = result.model;
  std::mt19937 rng(hyper.seed ^ 0x9E3779B9u);
  TripletGradients grads;
  const float lr = static_cast<float>(hyper.learning_rate);

  auto apply = [&](const Triplet& t) {
    float* h = m.entity_emb.data() + static_cast<std::size_t>(t.head) * m.dim;
    float* tl = m.entity_emb.data() + static_cast<std::size_t>(t.tail) * m.dim;
    for (int i = 0; i < m.dim; ++i) {
      h[i] -= lr * grads.head[i];
      tl[i] -= lr * grads.tail[i];
      m.relation_emb[i] -= lr * grads.rel[i];
    }
    for (std::size_t i = 0; i < m.conv_w.size(); ++i) m.conv_w[i] -= lr * grads.conv_w[i];
    for (int j = 0; j < m.filters; ++j) {
      m.conv_b[j] -= lr * grads.conv_b[j];
      m.fc_w[j] -= lr * grads.fc_w[j];
    }
    m.fc_b -= lr * grads.fc_b;
  };

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    double total = 0.0;
    for (const Triplet& pos : g.triplets) {
      total += bce_loss_and_grad(m, pos, 1.0, grads);
      apply(pos);
      Triplet neg = negative_sample(pos, g, rng);
      total += bce_loss_and_grad(m, neg, 0.0, grads);
      apply(neg);
    }
    result.loss_trace.push_back(total / (2.0 * g.triplets.size()));
  }
  return result;
}

LinkPredictionReport link_prediction_eval(const TripletModel& m,
                                          const std::vector<Triplet>& test,
                                          const KnowledgeGraph& g) {
  if (test.empty()) throw std::invalid_argument("link_prediction_eval: empty test set");
  const int n = m.entity_count();
  LinkPredictionReport report;
  double rank_sum = 0.0;
  int hits = 0, queries = 0;

  auto rank_of = [&](const Triplet& t, bool substitute_tail) {
    Triplet probe = t;
    double true_score = score_triplet(m, t);
    if (std::isnan(true_score)) return n;  // diverged model: worst rank
    int true_id = substitute_tail ? t.tail : t.head;
    int rank = 1;
    for (int x = 0; x < n; ++x) {
      if (x == true_id) continue;
      (substitute_tail ? probe.tail : probe.head) = x;
      double s = score_triplet(m, probe);
      // pessimistic ties; NaN competitors also count against the true entity
      if (!(s < true_score)) ++rank;
    }
    return rank;
  };

  for (const Triplet& t : test) {
    if (t.head < 0 || t.head >= n || t.tail < 0 || t.tail >= n)
      throw KgError("link_prediction_eval: test entity missing from model");
    for (bool tail_side : {true, false}) {
      int r = rank_of(t, tail_side);
      rank_sum += r;
      if (r <= 10) ++hits;
      ++queries;
    }
  }
  (void)g;  // raw protocol: no filtering against known positives
  report.mean_rank = rank_sum / queries;
  report.hits_at_10 = 100.0 * hits / queries;
  report.ranked_queries = queries;
  return report;
}

std::optional<std::vector<RelatedTag>> related_tags(const TripletModel& m,
                                                    const KnowledgeGraph& g,
                                                    const std::string& entity,
                                                    int k,
                                                    bool both_directions) {
  std::optional<int> id = g.entity_count() > 0 ? g.resolve_entity(entity)
                                               : std::nullopt;
  if (!id) {
    // fall back to the entity table embedded in the model
    auto it = std::find(m.entity_names.begin(), m.entity_names.end(), entity);
    if (it == m.entity_names.end()) {
      std::string target = lower_ascii(entity);
      it = std::find_if(m.entity_names.begin(), m.entity_names.end(),
                        [&](const std::string& n) { return lower_ascii(n) == target; });
    }
    if (it == m.entity_names.end()) return std::nullopt;
    id = static_cast<int>(it - m.entity_names.begin());
  }
  if (k <= 0) return std::vector<RelatedTag>{};

  std::vector<RelatedTag> scored;
  for (int x = 0; x < m.entity_count(); ++x) {
    if (x == *id) continue;
    double s = score_triplet(m, {*id, 0, x});
    if (both_directions)
      s = std::max(s, score_triplet(m, {x, 0, *id}));
    scored.push_back({m.entity_names[x], s});
  }
  std::sort(scored.begin(), scored.end(), [](const RelatedTag& a, const RelatedTag& b) {
    return a.score != b.score ? a.score > b.score : a.entity < b.entity;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  return scored;
}

// ---------------------------------------------------------------------------
// model file

namespace {
constexpr char kModelMagic[4] = {'K', 'G', 'M', '1'};

void write_f32s(std::ofstream& out, const std::vector<float>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

void read_f32s(std::ifstream& in, std::vector<float>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw KgError("model file truncated in parameter block");
}
}  // namespace

void save_model(const TripletModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw KgError("cannot write " + path.string());
  out.write(kModelMagic, 4);
  std::uint32_t vals[3] = {static_cast<std::uint32_t>(m.dim),
                           static_cast<std::uint32_t>(m.filters),
                           static_cast<std::uint32_t>(m.entity_count())};
  out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  for (const auto& name : m.entity_names) {
    std::uint16_t len = static_cast<std::uint16_t>(name.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out.write(name.data(), len);
  }
  write_f32s(out, m.entity_emb);
  write_f32s(out, m.relation_emb);
  write_f32s(out, m.conv_w);
  write_f32s(out, m.conv_b);
  write_f32s(out, m.fc_w);
  out.write(reinterpret_cast<const char*>(&m.fc_b), sizeof(float));
  if (!out) throw KgError("write failed: " + path.string());
}

TripletModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KgError("cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw KgError("bad model magic in " + path.string());
  std::uint32_t vals[3];
  in.read(reinterpret_cast<char*>(vals), sizeof(vals));
  if (!in) throw KgError("model file truncated in header");
  TripletModel m;
  m.dim = static_cast<int>(vals[0]);
  m.filters = static_cast<int>(vals[1]);
  std::uint32_t n = vals[2];
  if (m.dim < 3 || m.filters < 1 || n == 0)
    throw KgError("model file has invalid dimensions");
  m.entity_names.resize(n);
  for (auto& name : m.entity_names) {
    std::uint16_t len;
    in.read(reinterpret_cast<char*>(&len), 2);
    if (!in) throw KgError("model file truncated in entity table");
    name.resize(len);
    in.read(name.data(), len);
    if (!in) throw KgError("model file truncated in entity table");
  }
  read_f32s(in, m.entity_emb, static_cast<std::size_t>(n) * m.dim);
  read_f32s(in, m.relation_emb, m.dim);
  read_f32s(in, m.conv_w, static_cast<std::size_t>(m.filters) * 9);
  read_f32s(in, m.conv_b, m.filters);
  read_f32s(in, m.fc_w, m.filters);
  in.read(reinterpret_cast<char*>(&m.fc_b), sizeof(float));
  if (!in) throw KgError("model file truncated at bias");
  return m;
}

}  // namespace snaptag
