#include "snaptag/langdetect.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace snaptag {

// ---------------------------------------------------------------------------
// utf8 helpers

std::u32string utf8_to_u32(const std::string& s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint8_t b = s[i];
    if (b < 0x80) {
      out.push_back(b);
      ++i;
      continue;
    }
    int extra = (b >= 0xF0) ? 3 : (b >= 0xE0) ? 2 : (b >= 0xC0) ? 1 : 0;
    if (extra == 0 || i + extra >= s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = b & (0x3F >> extra);
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      std::uint8_t cont = s[i + k];
      if ((cont & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
    } else {
      out.push_back(cp);
      i += extra + 1;
    }
  }
  return out;
}

std::string u32_to_utf8(const std::u32string& s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

namespace {

char32_t to_lower_latin(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A: upper/lower interleaved in even/odd pairs
  if (cp >= 0x100 && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
  if (cp >= 0x179 && cp <= 0x17E && (cp % 2) == 1) return cp + 1;
  return cp;
}

bool is_letter(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return true;
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x24F) return true;
  // other scripts are word-forming (OOV in Latin models); punctuation,
  // symbol and emoji blocks are separators
  if (cp >= 0x370) {
    if (cp >= 0x2000 && cp <= 0x2E7F) return false;  // punctuation, symbols
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp >= 0x1F000) return false;                 // emoji planes
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::u32string> normalize_words(const std::string& text_utf8) {
  std::u32string text = utf8_to_u32(text_utf8);
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t cp : text) {
    if (is_letter(cp)) {
      current.push_back(to_lower_latin(cp));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

// ---------------------------------------------------------------------------
// n-grams

std::vector<std::u32string> word_ngrams(const std::u32string& word, int n) {
  if (n < 1) throw std::invalid_argument("word_ngrams: n must be >= 1");
  if (word.empty()) throw std::invalid_argument("word_ngrams: empty word");
  for (char32_t cp : word)
    if (cp == U' ' || cp == U'\t' || cp == U'\n')
      throw std::invalid_argument("word_ngrams: word contains whitespace");
  std::u32string padded;
  padded.reserve(word.size() + 2);
  padded.push_back(kBoundary);
  padded += word;
  padded.push_back(kBoundary);
  std::vector<std::u32string> grams;
  if (static_cast<int>(padded.size()) < n) return grams;
  for (std::size_t i = 0; i + n <= padded.size(); ++i)
    grams.push_back(padded.substr(i, n));
  return grams;
}

std::vector<std::string> word_ngrams(const std::string& word_utf8, int n) {
  auto grams = word_ngrams(utf8_to_u32(word_utf8), n);
  std::vector<std::string> out;
  out.reserve(grams.size());
  for (const auto& g : grams) out.push_back(u32_to_utf8(g));
  return out;
}

// ---------------------------------------------------------------------------
// model

int CharLanguageModel::alphabet_index(char32_t c) const {
  auto it = alphabet_pos_.find(c);
  return it == alphabet_pos_.end() ? -1 : it->second;
}

double CharLanguageModel::uniform_logprob() const {
  return -std::log10(static_cast<double>(alphabet_.size()));
}

double CharLanguageModel::cond_logprob(const std::u32string& context,
                                       char32_t next) const {
  std::u32string ctx = context;
  if (static_cast<int>(ctx.size()) > max_n_ - 1)
    ctx = ctx.substr(ctx.size() - (max_n_ - 1));
  int idx = alphabet_index(next);
  if (idx < 0) return uniform_logprob();
  const Table& t = tables_[ctx.size()];
  auto it = t.rows.find(ctx);
  if (it == t.rows.end()) return uniform_logprob();
  return it->second[idx];
}

CharLanguageModel build_clm(const std::vector<std::string>& corpus,
                            const std::string& language, int max_n,
                            double alpha) {
  if (alpha <= 0) throw LangModelError("build_clm: alpha must be positive");
  if (max_n < 1) throw LangModelError("build_clm: max_n must be >= 1");

  std::vector<std::u32string> words;
  for (const auto& sentence : corpus) {
    auto w = normalize_words(sentence);
    words.insert(words.end(), w.begin(), w.end());
  }
  if (words.empty()) throw LangModelError("build_clm: empty effective corpus");

  // alphabet: boundary plus the most frequent corpus characters, capped so a
  // trigram model stays inside the serialized size budget
  constexpr std::size_t kMaxAlphabet = 40;
  std::unordered_map<char32_t, std::uint64_t> freq;
  for (const auto& w : words)
    for (char32_t c : w) ++freq[c];
  std::vector<std::pair<char32_t, std::uint64_t>> by_freq(freq.begin(), freq.end());
  std::sort(by_freq.begin(), by_freq.end(), [](auto& a, auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (by_freq.size() > kMaxAlphabet - 1) by_freq.resize(kMaxAlphabet - 1);

  CharLanguageModel m;
  m.language_ = language;
  m.max_n_ = max_n;
  m.alpha_ = alpha;
  m.alphabet_.push_back(kBoundary);
  for (const auto& [c, n] : by_freq) m.alphabet_.push_back(c);
  std::sort(m.alphabet_.begin(), m.alphabet_.end());
  for (std::size_t i = 0; i < m.alphabet_.size(); ++i)
    m.alphabet_pos_[m.alphabet_[i]] = static_cast<int>(i);

  // count n-grams over alphabet-filtered words
  std::vector<std::unordered_map<std::u32string, std::uint64_t>> counts(max_n);
  for (const auto& raw : words) {
    std::u32string w;
    for (char32_t c : raw)
      if (m.alphabet_pos_.count(c)) w.push_back(c);
    if (w.empty()) continue;
    for (int n = 1; n <= max_n; ++n)
      for (auto& g : word_ngrams(w, n)) ++counts[n - 1][g];
  }
  if (counts[0].empty()) throw LangModelError("build_clm: empty effective corpus");

  const double A = static_cast<double>(m.alphabet_.size());
  m.tables_.resize(max_n);
  for (int n = 1; n <= max_n; ++n) {
    // context total = sum of continuations, so each stored row normalizes to 1
    std::unordered_map<std::u32string, std::uint64_t> ctx_total;
    for (const auto& [gram, c] : counts[n - 1])
      ctx_total[gram.substr(0, n - 1)] += c;
    for (const auto& [ctx, total] : ctx_total) {
      std::vector<double> row(m.alphabet_.size());
      for (std::size_t i = 0; i < m.alphabet_.size(); ++i) {
        std::u32string gram = ctx;
        gram.push_back(m.alphabet_[i]);
        auto it = counts[n - 1].find(gram);
        double c = it == counts[n - 1].end() ? 0.0
                                            : static_cast<double>(it->second);
        row[i] = std::log10((c + m.alpha_) /
                            (static_cast<double>(total) + m.alpha_ * A));
      }
      m.tables_[n - 1].rows.emplace(ctx, std::move(row));
    }
  }
  return m;
}

double word_logprob(const std::u32string& word, const CharLanguageModel& m) {
  if (word.empty()) throw std::invalid_argument("word_logprob: empty word");
  std::u32string padded;
  padded.push_back(kBoundary);
  padded += word;
  padded.push_back(kBoundary);
  double total = 0.0;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    std::size_t ctx_len = std::min<std::size_t>(i, m.max_n() - 1);
    total += m.cond_logprob(padded.substr(i - ctx_len, ctx_len), padded[i]);
  }
  return total;
}

double word_logprob(const std::string& word_utf8, const CharLanguageModel& m) {
  return word_logprob(utf8_to_u32(word_utf8), m);
}

TextScore text_logprob(const std::string& text_utf8, const CharLanguageModel& m) {
  auto words = normalize_words(text_utf8);
  if (words.empty()) return {0.0, true};
  double total = 0.0;
  for (const auto& w : words) total += word_logprob(w, m);
  return {total, false};
}

DetectionResult detect_language(const std::string& text_utf8,
                                const std::vector<CharLanguageModel>& models) {
  if (models.empty())
    throw LangModelError("detect_language: no models configured");
  auto words = normalize_words(text_utf8);
  if (words.empty())
    throw LangModelError("detect_language: no alphabetic content in text");

  DetectionResult result;
  bool first = true;
  for (const auto& m : models) {
    double score = 0.0;
    for (const auto& w : words) score += word_logprob(w, m);
    result.per_language_scores[m.language()] = score;
    // ties break toward the lexicographically smaller language code
    if (first || score > result.log_prob ||
        (score == result.log_prob && m.language() < result.language)) {
      result.language = m.language();
      result.log_prob = score;
      first = false;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kMagic[4] = {'C', 'L', 'M', '1'};
constexpr std::uint8_t kVersion = 1;

struct Writer {
  std::vector<std::uint8_t> buf;
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    buf.push_back(v & 0xFF);
    buf.push_back(v >> 8);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xFF);
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
};

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;
  void need(std::size_t n, const char* what) {
    if (pos + n > buf.size()) throw FormatError(std::string("truncated ") + what, pos);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return buf[pos++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = buf[pos] | (buf[pos + 1] << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  float f32(const char* what) {
    std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_clm(const CharLanguageModel& m) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(m.language_.size()));
  w.bytes(m.language_.data(), m.language_.size());
  w.u8(static_cast<std::uint8_t>(m.max_n_));
  w.f32(static_cast<float>(m.alpha_));
  std::string alpha_utf8 = u32_to_utf8(std::u32string(m.alphabet_.begin(), m.alphabet_.end()));
  w.u16(static_cast<std::uint16_t>(m.alphabet_.size()));
  w.u16(static_cast<std::uint16_t>(alpha_utf8.size()));
  w.bytes(alpha_utf8.data(), alpha_utf8.size());

  for (int n = 1; n <= m.max_n_; ++n) {
    const auto& rows = m.tables_[n - 1].rows;
    double lo = 0.0, hi = -1e30;
    for (const auto& [ctx, row] : rows)
      for (double v : row) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (rows.empty()) {
      lo = -1.0;
      hi = 0.0;
    }
    float offset = static_cast<float>(lo);
    float scale = static_cast<float>(hi > lo ? (hi - lo) / 255.0 : 1.0);
    w.u32(static_cast<std::uint32_t>(rows.size()));
    w.f32(scale);
    w.f32(offset);
    for (const auto& [ctx, row] : rows) {  // std::map: context-sorted
      for (char32_t c : ctx) {
        auto it = m.alphabet_pos_.find(c);
        w.u8(static_cast<std::uint8_t>(it->second));
      }
      for (double v : row) {
        double q = std::round((v - offset) / scale);
        w.u8(static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0)));
      }
    }
  }
  return w.buf;
}

CharLanguageModel deserialize_clm(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic", 0);
  r.pos = 4;
  std::uint8_t version = r.u8("version");
  if (version != kVersion)
    throw FormatError("unsupported version " + std::to_string(version), 4);

  CharLanguageModel m;
  std::uint8_t lang_len = r.u8("language length");
  r.need(lang_len, "language");
  m.language_.assign(reinterpret_cast<const char*>(bytes.data() + r.pos), lang_len);
  r.pos += lang_len;
  m.max_n_ = r.u8("max_n");
  if (m.max_n_ < 1 || m.max_n_ > 8) throw FormatError("bad max_n", r.pos - 1);
  m.alpha_ = r.f32("alpha");
  std::uint16_t alpha_count = r.u16("alphabet count");
  std::uint16_t alpha_bytes = r.u16("alphabet byte length");
  r.need(alpha_bytes, "alphabet");
  std::string alpha_utf8(reinterpret_cast<const char*>(bytes.data() + r.pos), alpha_bytes);
  r.pos += alpha_bytes;
  auto alpha32 = utf8_to_u32(alpha_utf8);
  if (alpha32.size() != alpha_count)
    throw FormatError("alphabet count mismatch", r.pos);
  m.alphabet_.assign(alpha32.begin(), alpha32.end());
  for (std::size_t i = 0; i < m.alphabet_.size(); ++i)
    m.alphabet_pos_[m.alphabet_[i]] = static_cast<int>(i);

  const std::size_t A = m.alphabet_.size();
  m.tables_.resize(m.max_n_);
  for (int n = 1; n <= m.max_n_; ++n) {
    std::uint32_t nrows = r.u32("row count");
    float scale = r.f32("scale");
    float offset = r.f32("offset");
    for (std::uint32_t i = 0; i < nrows; ++i) {
      std::u32string ctx;
      for (int k = 0; k < n - 1; ++k) {
        std::uint8_t idx = r.u8("context index");
        if (idx >= A) throw FormatError("context index out of range", r.pos - 1);
        ctx.push_back(m.alphabet_[idx]);
      }
      std::vector<double> row(A);
      r.need(A, "probability row");
      for (std::size_t k = 0; k < A; ++k)
        row[k] = offset + scale * static_cast<double>(bytes[r.pos + k]);
      r.pos += A;
      m.tables_[n - 1].rows.emplace(std::move(ctx), std::move(row));
    }
  }
  return m;
}

void save_clm(const CharLanguageModel& m, const std::string& path) {
  auto bytes = serialize_clm(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LangModelError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

CharLanguageModel load_clm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LangModelError("cannot read " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_clm(bytes);
}

}  // namespace snaptag
