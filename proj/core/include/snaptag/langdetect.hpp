#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace snaptag {

class LangModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

/// Boundary pseudo-character padding word starts and ends.
inline constexpr char32_t kBoundary = U'_';

/// Per-language character n-gram model. Contexts are stored only when
/// observed in the corpus; unseen contexts score uniform 1/|alphabet|.
/// All log-probabilities are base 10.
class CharLanguageModel {
 public:
  CharLanguageModel() = default;

  const std::string& language() const { return language_; }
  int max_n() const { return max_n_; }
  double alpha() const { return alpha_; }
  const std::vector<char32_t>& alphabet() const { return alphabet_; }

  /// log10 P(next | context); context uses at most max_n-1 trailing chars.
  double cond_logprob(const std::u32string& context, char32_t next) const;

  double uniform_logprob() const;

  // build access
  struct Table {
    // context string (n-1 chars) -> dense row of log-probs over the alphabet
    std::map<std::u32string, std::vector<double>> rows;
  };
  const Table& table(int n) const { return tables_[n - 1]; }

  friend CharLanguageModel build_clm(const std::vector<std::string>& corpus,
                                     const std::string& language, int max_n,
                                     double alpha);
  friend std::vector<std::uint8_t> serialize_clm(const CharLanguageModel& m);
  friend CharLanguageModel deserialize_clm(const std::vector<std::uint8_t>& bytes);

 private:
  int alphabet_index(char32_t c) const;

  std::string language_;
  int max_n_ = 3;
  double alpha_ = 0.1;
  std::vector<char32_t> alphabet_;        // ordered, includes kBoundary
  std::map<char32_t, int> alphabet_pos_;  // char -> index
  std::vector<Table> tables_;             // tables_[n-1] holds order-n rows
};

struct DetectionResult {
  std::string language;
  double log_prob = 0.0;
  bool no_signal = false;
  std::map<std::string, double> per_language_scores;
};

/// Pad `word` with one boundary marker each side and emit all length-n
/// windows in order, duplicates retained. Word must be non-empty and free of
/// internal whitespace.
std::vector<std::u32string> word_ngrams(const std::u32string& word, int n);
std::vector<std::string> word_ngrams(const std::string& word_utf8, int n);

/// Lowercase and keep only alphabetic characters; digits and punctuation
/// split words. Returns the normalized word list.
std::vector<std::u32string> normalize_words(const std::string& text_utf8);

CharLanguageModel build_clm(const std::vector<std::string>& corpus,
                            const std::string& language, int max_n = 3,
                            double alpha = 0.1);

double word_logprob(const std::u32string& word, const CharLanguageModel& m);
double word_logprob(const std::string& word_utf8, const CharLanguageModel& m);

struct TextScore {
  double log_prob = 0.0;
  bool no_signal = false;  // empty word list after normalization
};
TextScore text_logprob(const std::string& text_utf8, const CharLanguageModel& m);

DetectionResult detect_language(const std::string& text_utf8,
                                const std::vector<CharLanguageModel>& models);

// Model file: magic "CLM1", version, language, max_n, alphabet, then
// per-order tables with 8-bit quantized log-probs (per-table f32 scale and
// offset), little-endian.
std::vector<std::uint8_t> serialize_clm(const CharLanguageModel& m);
CharLanguageModel deserialize_clm(const std::vector<std::uint8_t>& bytes);

void save_clm(const CharLanguageModel& m, const std::string& path);
CharLanguageModel load_clm(const std::string& path);

// utf8 <-> utf32 helpers shared with tests
std::u32string utf8_to_u32(const std::string& s);
std::string u32_to_utf8(const std::u32string& s);

}  // namespace snaptag
