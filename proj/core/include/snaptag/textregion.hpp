#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "snaptag/errors.hpp"
#include "snaptag/image.hpp"

namespace snaptag {

struct TextBox {
  int x = 0, y = 0, width = 1, height = 1;
  int component_count = 0;

  bool operator==(const TextBox&) const = default;
};

enum class ScriptLabel {
  Latin,
  Hangul,
  Chinese,
  Arabic,
  Devanagari,
  Bengali,
  Telugu,
  Tamil,
  Gujarati,
  Kannada,
  Malayalam,
  Unknown,
};

std::string_view to_string(ScriptLabel s);

struct TextLineParams {
  // max_gap <= 0 means "1.5 x median component height"
  double max_gap = -1.0;
  double height_ratio = 2.5;
  int min_component_area = 4;
};

/// Cluster connected components into horizontal text lines.
std::vector<TextBox> locate_text_lines(const BinaryImage& bin,
                                       const TextLineParams& p = {});

/// Majority script of the text by Unicode block; digits, punctuation and
/// whitespace are neutral. Input is UTF-8.
ScriptLabel identify_script(std::string_view text);

struct EngineRouting {
  std::string latin;
  std::string nonlatin;
  std::string fallback;  // used for Unknown
};

std::string route_engine(ScriptLabel script, const EngineRouting& cfg);

}  // namespace snaptag
