#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "snaptag/errors.hpp"

namespace snaptag {

class KgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int head = 0;
  int relation = 0;
  int tail = 0;

  bool operator==(const Triplet&) const = default;
};

struct TripletHash {
  std::size_t operator()(const Triplet& t) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(t.head) << 32) ^
        (static_cast<std::uint64_t>(t.relation) << 20) ^
        static_cast<std::uint64_t>(t.tail));
  }
};

/// Directed graph with all relations collapsed to a single `related_to`.
struct KnowledgeGraph {
  std::vector<std::string> entity_names;
  std::unordered_map<std::string, int> entity_ids;
  std::vector<std::string> relation_names;  // always {"related_to"}
  std::vector<Triplet> triplets;
  std::unordered_set<Triplet, TripletHash> triplet_set;

  int entity_count() const { return static_cast<int>(entity_names.size()); }
  bool contains(const Triplet& t) const { return triplet_set.count(t) > 0; }

  int intern_entity(const std::string& name);
  /// Case-insensitive lookup, exact match wins.
  std::optional<int> resolve_entity(const std::string& name) const;
};

/// Parse `head<TAB>relation<TAB>tail` rows and collapse every relation to
/// `related_to`, deduplicating and preserving direction.
KnowledgeGraph load_and_collapse(std::istream& source);
KnowledgeGraph load_and_collapse(const std::filesystem::path& path);

/// Also parse a triplet file against an existing entity table (held-out sets).
std::vector<Triplet> load_triplets(const std::filesystem::path& path,
                                   KnowledgeGraph& g);

/// Corrupt exactly one endpoint, relation fixed; resampled while the result
/// is a known positive, up to 10 tries.
Triplet negative_sample(const Triplet& s, const KnowledgeGraph& g,
                        std::mt19937& rng);

struct KgHyperParams {
  int dim = 50;      // embedding width d (>= 3)
  int filters = 32;  // conv filters f
  double learning_rate = 0.05;
  int epochs = 100;
  std::uint32_t seed = 42;
};

/// Embeddings + conv(3x3 over the stacked h/l/t rows) + max pool + fully
/// connected + logistic output.
struct TripletModel {
  int dim = 0;
  int filters = 0;
  std::vector<std::string> entity_names;
  std::vector<float> entity_emb;    // |E| x d
  std::vector<float> relation_emb;  // 1 x d
  std::vector<float> conv_w;        // f x 3 x 3
  std::vector<float> conv_b;        // f
  std::vector<float> fc_w;          // f
  float fc_b = 0.f;

  int entity_count() const { return static_cast<int>(entity_names.size()); }
};

struct TripletGradients {
  // head/relation/tail embedding rows plus the shared layer parameters
  std::vector<float> head, rel, tail;  // d each
  std::vector<float> conv_w, conv_b, fc_w;
  float fc_b = 0.f;
};

double score_triplet(const TripletModel& m, const Triplet& t);

/// Binary cross-entropy of one example and its parameter gradients; used by
/// training and by the finite-difference checks.
double bce_loss_and_grad(const TripletModel& m, const Triplet& t, double label,
                         TripletGradients& grads);

TripletModel init_model(const KnowledgeGraph& g, const KgHyperParams& hyper);

struct TrainResult {
  TripletModel model;
  std::vector<double> loss_trace;  // mean example loss per epoch
};

TrainResult train(const KnowledgeGraph& g, const KgHyperParams& hyper);

struct LinkPredictionReport {
  double mean_rank = 0.0;
  double hits_at_10 = 0.0;  // percentage
  int ranked_queries = 0;
};

/// Raw (unfiltered) protocol, both head and tail substitution; ties rank the
/// true entity after all equal scores.
LinkPredictionReport link_prediction_eval(const TripletModel& m,
                                          const std::vector<Triplet>& test,
                                          const KnowledgeGraph& g);

struct RelatedTag {
  std::string entity;
  double score = 0.0;
};

/// Top-k entities scored as tails of (entity, related_to, x); nullopt when
/// the entity is unknown. `both_directions` adds the head-position query.
std::optional<std::vector<RelatedTag>> related_tags(
    const TripletModel& m, const KnowledgeGraph& g, const std::string& entity,
    int k, bool both_directions = false);

void save_model(const TripletModel& m, const std::filesystem::path& path);
TripletModel load_model(const std::filesystem::path& path);

}  // namespace snaptag
