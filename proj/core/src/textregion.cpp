#include "snaptag/textregion.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

#include "snaptag/imgproc.hpp"

namespace snaptag {

std::string_view to_string(ScriptLabel s) {
  switch (s) {
    case ScriptLabel::Latin: return "Latin";
    case ScriptLabel::Hangul: return "Hangul";
    case ScriptLabel::Chinese: return "Chinese";
    case ScriptLabel::Arabic: return "Arabic";
    case ScriptLabel::Devanagari: return "Devanagari";
    case ScriptLabel::Bengali: return "Bengali";
    case ScriptLabel::Telugu: return "Telugu";
    case ScriptLabel::Tamil: return "Tamil";
    case ScriptLabel::Gujarati: return "Gujarati";
    case ScriptLabel::Kannada: return "Kannada";
    case ScriptLabel::Malayalam: return "Malayalam";
    case ScriptLabel::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

struct LineCluster {
  int x0, y0, x1, y1;  // inclusive box
  int count = 0;
  int right = 0;       // rightmost x seen, for gap tests
};

bool heights_compatible(int h1, int h2, double ratio) {
  int lo = std::min(h1, h2), hi = std::max(h1, h2);
  if (lo <= 0) return false;
  return static_cast<double>(hi) / lo <= ratio;
}

}  // namespace

std::vector<TextBox> locate_text_lines(const BinaryImage& bin,
                                       const TextLineParams& p) {
  auto comps = connected_components(bin);
  std::erase_if(comps, [&](const Component& c) {
    return c.pixel_count < p.min_component_area;
  });
  if (comps.empty()) return {};

  double max_gap = p.max_gap;
  if (max_gap <= 0) {
    std::vector<int> heights;
    heights.reserve(comps.size());
    for (const auto& c : comps) heights.push_back(c.height);
    std::nth_element(heights.begin(), heights.begin() + heights.size() / 2,
                     heights.end());
    max_gap = 1.5 * heights[heights.size() / 2];
  }

  std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });

  std::vector<LineCluster> lines;
  for (const auto& c : comps) {
    int cx1 = c.x + c.width - 1, cy1 = c.y + c.height - 1;
    LineCluster* best = nullptr;
    for (auto& ln : lines) {
      bool v_overlap = c.y <= ln.y1 && cy1 >= ln.y0;
      bool near = c.x - ln.right - 1 <= max_gap;
      if (v_overlap && near &&
          heights_compatible(c.height, ln.y1 - ln.y0 + 1, p.height_ratio)) {
        best = &ln;
        break;
      }
    }
    if (best) {
      best->x0 = std::min(best->x0, c.x);
      best->y0 = std::min(best->y0, c.y);
      best->x1 = std::max(best->x1, cx1);
      best->y1 = std::max(best->y1, cy1);
      best->right = std::max(best->right, cx1);
      ++best->count;
    } else {
      lines.push_back({c.x, c.y, cx1, cy1, 1, cx1});
    }
  }

  std::vector<TextBox> boxes;
  boxes.reserve(lines.size());
  for (const auto& ln : lines)
    boxes.push_back({ln.x0, ln.y0, ln.x1 - ln.x0 + 1, ln.y1 - ln.y0 + 1, ln.count});
  std::sort(boxes.begin(), boxes.end(), [](const TextBox& a, const TextBox& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return boxes;
}

namespace {

ScriptLabel script_of(char32_t cp) {
  struct Range {
    char32_t lo, hi;
    ScriptLabel script;
  };
  static constexpr std::array<Range, 16> ranges{{
      {0x0041, 0x005A, ScriptLabel::Latin},
      {0x0061, 0x007A, ScriptLabel::Latin},
      {0x00C0, 0x024F, ScriptLabel::Latin},  // Latin-1 supplement + extended
      {0x0600, 0x06FF, ScriptLabel::Arabic},
      {0x0750, 0x077F, ScriptLabel::Arabic},
      {0x0900, 0x097F, ScriptLabel::Devanagari},
      {0x0980, 0x09FF, ScriptLabel::Bengali},
      {0x0A80, 0x0AFF, ScriptLabel::Gujarati},
      {0x0B80, 0x0BFF, ScriptLabel::Tamil},
      {0x0C00, 0x0C7F, ScriptLabel::Telugu},
      {0x0C80, 0x0CFF, ScriptLabel::Kannada},
      {0x0D00, 0x0D7F, ScriptLabel::Malayalam},
      {0x1100, 0x11FF, ScriptLabel::Hangul},
      {0x3130, 0x318F, ScriptLabel::Hangul},
      {0x3400, 0x9FFF, ScriptLabel::Chinese},  // CJK ext A + unified
      {0xAC00, 0xD7AF, ScriptLabel::Hangul},
  }};
  if (cp == 0x00D7 || cp == 0x00F7) return ScriptLabel::Unknown;  // x and / signs
  for (const auto& r : ranges)
    if (cp >= r.lo && cp <= r.hi) return r.script;
  return ScriptLabel::Unknown;
}

// minimal UTF-8 decode; invalid bytes are treated as neutral
char32_t next_codepoint(std::string_view s, std::size_t& i) {
  std::uint8_t b = s[i];
  if (b < 0x80) {
    ++i;
    return b;
  }
  int extra = (b >= 0xF0) ? 3 : (b >= 0xE0) ? 2 : (b >= 0xC0) ? 1 : 0;
  if (extra == 0 || i + extra >= s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = b & (0x3F >> extra);
  for (int k = 1; k <= extra; ++k) {
    std::uint8_t cont = s[i + k];
    if ((cont & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += extra + 1;
  return cp;
}

}  // namespace

ScriptLabel identify_script(std::string_view text) {
  std::array<int, 11> counts{};
  std::size_t i = 0;
  while (i < text.size()) {
    ScriptLabel s = script_of(next_codepoint(text, i));
    if (s != ScriptLabel::Unknown) ++counts[static_cast<int>(s)];
  }
  int best = -1, best_count = 0;
  for (int s = 0; s < 11; ++s)
    if (counts[s] > best_count) {
      best = s;
      best_count = counts[s];
    }
  return best < 0 ? ScriptLabel::Unknown : static_cast<ScriptLabel>(best);
}

std::string route_engine(ScriptLabel script, const EngineRouting& cfg) {
  if (cfg.fallback.empty())
    throw ConfigError("engine routing: no default engine configured");
  if (script == ScriptLabel::Unknown) return cfg.fallback;
  if (script == ScriptLabel::Latin)
    return cfg.latin.empty() ? cfg.fallback : cfg.latin;
  return cfg.nonlatin.empty() ? cfg.fallback : cfg.nonlatin;
}

}  // namespace snaptag
