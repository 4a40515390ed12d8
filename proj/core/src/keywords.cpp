#include "snaptag/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace snaptag {

// ---------------------------------------------------------------------------
// Viterbi

ViterbiResult viterbi_decode(const LatticeScores& s) {
  const std::size_t T = s.steps();
  const std::size_t K = s.labels();
  if (T == 0 || K == 0)
    throw std::invalid_argument("viterbi_decode: empty lattice");
  for (const auto& row : s.emissions)
    if (row.size() != K)
      throw std::invalid_argument("viterbi_decode: ragged emissions");
  if (s.transitions.size() != K)
    throw std::invalid_argument("viterbi_decode: transitions must be KxK");
  for (const auto& row : s.transitions)
    if (row.size() != K)
      throw std::invalid_argument("viterbi_decode: transitions must be KxK");

  std::vector<std::vector<double>> dp(T, std::vector<double>(K));
  std::vector<std::vector<int>> back(T, std::vector<int>(K, 0));
  dp[0] = s.emissions[0];
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) {
      int best_j = 0;
      double best = dp[t - 1][0] + s.transitions[0][k];
      for (std::size_t j = 1; j < K; ++j) {
        double v = dp[t - 1][j] + s.transitions[j][k];
        if (v > best) {  // strict: ties keep the smallest label index
          best = v;
          best_j = static_cast<int>(j);
        }
      }
      dp[t][k] = best + s.emissions[t][k];
      back[t][k] = best_j;
    }

  int last = 0;
  for (std::size_t k = 1; k < K; ++k)
    if (dp[T - 1][k] > dp[T - 1][last]) last = static_cast<int>(k);

  ViterbiResult result;
  result.path.resize(T);
  result.path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t)
    result.path[t - 1] = back[t][result.path[t]];

  // report the recomputed path score so it matches re-scoring exactly
  result.score = s.emissions[0][result.path[0]];
  for (std::size_t t = 1; t < T; ++t)
    result.score += s.transitions[result.path[t - 1]][result.path[t]] +
                    s.emissions[t][result.path[t]];
  return result;
}

LatticeScores parse_lattice(const std::string& content) {
  std::istringstream in(content);
  std::size_t T, K;
  if (!(in >> T >> K) || T < 1 || K < 1)
    throw ParseError("lattice: expected header 'T K'", 1);
  LatticeScores s;
  s.emissions.assign(T, std::vector<double>(K));
  s.transitions.assign(K, std::vector<double>(K));
  for (auto& row : s.emissions)
    for (auto& v : row)
      if (!(in >> v)) throw ParseError("lattice: truncated emissions", 0);
  for (auto& row : s.transitions)
    for (auto& v : row)
      if (!(in >> v)) throw ParseError("lattice: truncated transitions", 0);
  return s;
}

LatticeScores read_lattice_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream content;
  content << in.rdbuf();
  return parse_lattice(content.str());
}

// ---------------------------------------------------------------------------
// SCRDR

namespace {

int indent_depth(const std::string& line) {
  int depth = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '\t') {
      ++depth;
      ++i;
    } else if (line.compare(i, 4, "    ") == 0) {
      ++depth;
      i += 4;
    } else {
      break;
    }
  }
  return depth;
}

// `if word@1 == "value" then TAG` or `if always then TAG`
ScrdrNode parse_rule_line(const std::string& text, int lineno) {
  std::istringstream in(text);
  std::string kw;
  in >> kw;
  if (kw != "if") throw ParseError("scrdr: expected 'if'", lineno);
  std::string attr_spec;
  in >> attr_spec;
  ScrdrNode node;
  if (attr_spec == "always" || attr_spec == "true") {
    node.condition.attr = ScrdrCondition::Attr::Always;
  } else {
    auto at = attr_spec.find('@');
    if (at == std::string::npos)
      throw ParseError("scrdr: expected attr@offset", lineno);
    std::string attr = attr_spec.substr(0, at);
    if (attr == "word")
      node.condition.attr = ScrdrCondition::Attr::Word;
    else if (attr == "tag")
      node.condition.attr = ScrdrCondition::Attr::Tag;
    else
      throw ParseError("scrdr: unknown attribute '" + attr + "'", lineno);
    try {
      node.condition.offset = std::stoi(attr_spec.substr(at + 1));
    } catch (const std::exception&) {
      throw ParseError("scrdr: bad offset in '" + attr_spec + "'", lineno);
    }
    if (node.condition.offset < -2 || node.condition.offset > 2)
      throw ParseError("scrdr: offset outside -2..+2", lineno);
    std::string eq;
    in >> eq;
    if (eq != "==") throw ParseError("scrdr: expected '=='", lineno);
    std::string rest;
    std::getline(in, rest);
    auto q1 = rest.find('"');
    auto q2 = rest.rfind('"');
    if (q1 == std::string::npos || q2 <= q1)
      throw ParseError("scrdr: expected quoted value", lineno);
    node.condition.value = rest.substr(q1 + 1, q2 - q1 - 1);
    // re-parse the tail after the closing quote
    std::istringstream tail(rest.substr(q2 + 1));
    std::string then;
    tail >> then >> node.conclusion;
    if (then != "then" || node.conclusion.empty())
      throw ParseError("scrdr: expected 'then <TAG>'", lineno);
    return node;
  }
  std::string then;
  in >> then >> node.conclusion;
  if (then != "then" || node.conclusion.empty())
    throw ParseError("scrdr: expected 'then <TAG>'", lineno);
  return node;
}

}  // namespace

std::unique_ptr<ScrdrNode> parse_scrdr_rules(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  std::unique_ptr<ScrdrNode> root;
  std::vector<ScrdrNode*> chain;  // chain[d]: last node at depth d
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = line;
    if (!stripped.empty() && stripped.back() == '\r') stripped.pop_back();
    if (stripped.find_first_not_of(" \t") == std::string::npos) continue;
    if (stripped[stripped.find_first_not_of(" \t")] == '#') continue;
    int depth = indent_depth(stripped);
    auto node = std::make_unique<ScrdrNode>(
        parse_rule_line(stripped.substr(stripped.find_first_not_of(" \t")), lineno));
    if (!root) {
      if (depth != 0)
        throw ParseError("scrdr: first rule must be unindented", lineno);
      if (node->condition.attr != ScrdrCondition::Attr::Always)
        throw ParseError("scrdr: root rule must be 'if always'", lineno);
      root = std::move(node);
      chain = {root.get()};
      continue;
    }
    if (depth < 1 || depth > static_cast<int>(chain.size()))
      throw ParseError("scrdr: bad indentation depth", lineno);
    ScrdrNode* raw = node.get();
    if (depth == static_cast<int>(chain.size())) {
      chain[depth - 1]->except_child = std::move(node);
    } else {
      // sibling at existing depth: walk to the end of the else chain
      chain.resize(depth + 1);
      ScrdrNode* sib = chain[depth];
      while (sib->else_sibling) sib = sib->else_sibling.get();
      sib->else_sibling = std::move(node);
    }
    if (depth == static_cast<int>(chain.size()))
      chain.push_back(raw);
    else
      chain[depth] = raw;
  }
  if (!root) throw ParseError("scrdr: empty rule file", lineno);
  return root;
}

std::unique_ptr<ScrdrNode> read_scrdr_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream content;
  content << in.rdbuf();
  return parse_scrdr_rules(content.str());
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  Lexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("lexicon: expected word<TAB>tag", lineno);
    lex.tags[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return lex;
}

namespace {

bool condition_holds(const ScrdrCondition& c, const std::vector<std::string>& tokens,
                     const std::vector<std::string>& initial_tags, std::size_t i) {
  if (c.attr == ScrdrCondition::Attr::Always) return true;
  long pos = static_cast<long>(i) + c.offset;
  if (pos < 0 || pos >= static_cast<long>(tokens.size())) return false;
  const std::string& actual = c.attr == ScrdrCondition::Attr::Word
                                  ? tokens[pos]
                                  : initial_tags[pos];
  return actual == c.value;
}

}  // namespace

std::vector<std::string> scrdr_tag(const std::vector<std::string>& tokens,
                                   const ScrdrNode& tree, const Lexicon& lex) {
  std::vector<std::string> initial(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lex.tags.find(tokens[i]);
    if (it == lex.tags.end()) {
      std::string lower = tokens[i];
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      it = lex.tags.find(lower);
    }
    initial[i] = it == lex.tags.end() ? lex.default_tag : it->second;
  }

  // conditions see the lexicon tags, so per-token results are order-free
  std::vector<std::string> out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    // the root's LEXICON conclusion keeps the lexicon-assigned tag
    std::string conclusion =
        tree.conclusion == "LEXICON" ? initial[i] : tree.conclusion;
    const ScrdrNode* node = tree.except_child.get();
    while (node) {
      if (condition_holds(node->condition, tokens, initial, i)) {
        conclusion = node->conclusion;
        node = node->except_child.get();
      } else {
        node = node->else_sibling.get();
      }
    }
    out[i] = conclusion;
  }
  return out;
}

// ---------------------------------------------------------------------------
// keyword extraction

std::vector<std::string> tokenize_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string tok;
  const std::string punct = ".,!?;:\"'()[]{}<>";
  while (in >> tok) {
    std::size_t b = tok.find_first_not_of(punct);
    if (b == std::string::npos) continue;
    std::size_t e = tok.find_last_not_of(punct);
    tokens.push_back(tok.substr(b, e - b + 1));
  }
  return tokens;
}

std::set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') words.insert(line);
  }
  return words;
}

namespace {

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void push_span(std::vector<Keyword>& out, const std::vector<std::string>& tokens,
               std::size_t begin, std::size_t end, const std::string& label,
               double confidence) {
  std::string text;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) text += ' ';
    text += tokens[i];
  }
  out.push_back({text, label, confidence, begin, end});
}

}  // namespace

std::vector<Keyword> extract_keywords(const std::string& text,
                                      const std::string& lang,
                                      const TaggingResources& resources) {
  auto tokens = tokenize_words(text);
  if (tokens.empty()) return {};
  if (!resources.has_crf() && !resources.has_scrdr())
    throw ConfigError("no tagging resources for language '" + lang + "'");

  std::vector<Keyword> raw;
  if (resources.has_crf()) {
    LatticeScores lattice = resources.lattice_provider(tokens);
    if (lattice.steps() != tokens.size() ||
        lattice.labels() != resources.crf_labels.size())
      throw ConfigError("lattice shape does not match tokens/labels for '" +
                        lang + "'");
    auto decoded = viterbi_decode(lattice);
    // BIO spans
    std::size_t begin = 0;
    std::string entity;
    for (std::size_t t = 0; t <= tokens.size(); ++t) {
      std::string label =
          t < tokens.size() ? resources.crf_labels[decoded.path[t]] : "O";
      bool continues = !entity.empty() && label == "I-" + entity;
      if (continues) continue;
      if (!entity.empty()) push_span(raw, tokens, begin, t, entity, 1.0);
      entity.clear();
      if (label.rfind("B-", 0) == 0) {
        entity = label.substr(2);
        begin = t;
      } else if (label.rfind("I-", 0) == 0) {
        // dangling I- treated as span start
        entity = label.substr(2);
        begin = t;
      }
    }
  } else {
    auto tags = scrdr_tag(tokens, *resources.scrdr_tree, *resources.lexicon);
    std::size_t begin = 0;
    bool in_span = false;
    std::string span_tag;
    for (std::size_t t = 0; t <= tokens.size(); ++t) {
      bool is_kw = t < tokens.size() &&
                   resources.keyword_tags.count(tags[t]) > 0 &&
                   resources.stopwords.count(lower_ascii(tokens[t])) == 0;
      if (is_kw && !in_span) {
        begin = t;
        in_span = true;
        span_tag = tags[t];
      } else if (!is_kw && in_span) {
        push_span(raw, tokens, begin, t, span_tag, 1.0);
        in_span = false;
      }
    }
  }

  // drop stopwords and case-insensitive duplicates, keeping first occurrence
  std::vector<Keyword> out;
  std::set<std::string> seen;
  for (auto& kw : raw) {
    std::string key = lower_ascii(kw.text);
    if (resources.stopwords.count(key)) continue;
    if (!seen.insert(key).second) continue;
    out.push_back(std::move(kw));
  }
  return out;
}

}  // namespace snaptag
