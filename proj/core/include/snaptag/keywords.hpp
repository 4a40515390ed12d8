#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "snaptag/errors.hpp"

namespace snaptag {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

// ---------------------------------------------------------------------------
// linear-chain CRF decoding

struct LatticeScores {
  // emissions[t][k]: score of label k at step t; transitions[i][j]: i -> j
  std::vector<std::vector<double>> emissions;
  std::vector<std::vector<double>> transitions;

  std::size_t steps() const { return emissions.size(); }
  std::size_t labels() const { return emissions.empty() ? 0 : emissions[0].size(); }
};

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

/// Best path under emission + transition scores; ties resolve to the smallest
/// label index at each backtrack step.
ViterbiResult viterbi_decode(const LatticeScores& s);

LatticeScores read_lattice_file(const std::filesystem::path& path);
LatticeScores parse_lattice(const std::string& content);

// ---------------------------------------------------------------------------
// SCRDR part-of-speech tagging

/// Condition: equality test on word or tag at a token offset in -2..+2.
struct ScrdrCondition {
  enum class Attr { Always, Word, Tag } attr = Attr::Always;
  int offset = 0;
  std::string value;
};

struct ScrdrNode {
  ScrdrCondition condition;
  std::string conclusion;
  std::unique_ptr<ScrdrNode> except_child;
  std::unique_ptr<ScrdrNode> else_sibling;
};

struct Lexicon {
  std::unordered_map<std::string, std::string> tags;
  std::string default_tag = "NOUN";
};

/// Rule file: one node per line, `if <word|tag>@<offset> == "<value>" then TAG`;
/// indentation depth = except-chain depth. Root is the always-true default.
std::unique_ptr<ScrdrNode> parse_scrdr_rules(const std::string& content);
std::unique_ptr<ScrdrNode> read_scrdr_rules(const std::filesystem::path& path);
Lexicon read_lexicon(const std::filesystem::path& path);

std::vector<std::string> scrdr_tag(const std::vector<std::string>& tokens,
                                   const ScrdrNode& tree, const Lexicon& lex);

// ---------------------------------------------------------------------------
// keyword extraction

struct Keyword {
  std::string text;
  std::string label;  // entity category or PoS
  double confidence = 1.0;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;  // exclusive token index
};

/// CRF route: labels are BIO tags over the token sequence; the provider maps
/// tokens to a lattice. SCRDR route: rule tree + lexicon, keywords are noun
/// spans. Exactly one route must be present per language.
struct TaggingResources {
  // CRF route
  std::vector<std::string> crf_labels;  // e.g. O, B-PER, I-PER
  std::function<LatticeScores(const std::vector<std::string>&)> lattice_provider;
  // SCRDR route
  std::shared_ptr<const ScrdrNode> scrdr_tree;
  std::shared_ptr<const Lexicon> lexicon;
  std::set<std::string> keyword_tags = {"NOUN", "PROPN"};

  std::set<std::string> stopwords;

  bool has_crf() const { return lattice_provider && !crf_labels.empty(); }
  bool has_scrdr() const { return scrdr_tree && lexicon; }
};

std::vector<std::string> tokenize_words(const std::string& text);

std::vector<Keyword> extract_keywords(const std::string& text,
                                      const std::string& lang,
                                      const TaggingResources& resources);

std::set<std::string> read_stopwords(const std::filesystem::path& path);

}  // namespace snaptag
