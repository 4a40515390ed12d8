#include "snaptag/ocr.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace snaptag {

std::string flatten_text(const OcrDocument& doc) {
  std::string out;
  for (std::size_t b = 0; b < doc.blocks.size(); ++b) {
    if (b > 0) out += "\n\n";
    const auto& block = doc.blocks[b];
    for (std::size_t l = 0; l < block.lines.size(); ++l) {
      if (l > 0) out += '\n';
      const auto& line = block.lines[l];
      for (std::size_t e = 0; e < line.elements.size(); ++e) {
        if (e > 0) out += ' ';
        out += line.elements[e].text;
      }
    }
  }
  return out;
}

std::filesystem::path ocr_sidecar_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".ocr.txt");
  return p;
}

std::filesystem::path scene_sidecar_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".scene.tsv");
  return p;
}

OcrDocument parse_ocr_fixture(const std::string& content, int image_w,
                              int image_h) {
  // split into blocks on blank lines, lines on newlines
  std::vector<std::vector<std::string>> blocks;
  std::vector<std::string> current;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (blank) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(line);
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));

  OcrDocument doc;
  int total_lines = 0;
  std::size_t max_chars = 1;
  for (const auto& b : blocks) {
    total_lines += static_cast<int>(b.size());
    for (const auto& l : b) max_chars = std::max(max_chars, l.size());
  }
  if (total_lines == 0) return doc;

  // synthesize geometry: lines stacked top-down, element widths by text length
  int line_h = std::max(1, image_h / total_lines);
  int char_w = std::max(1, static_cast<int>(image_w / max_chars));
  int y = 0;
  for (const auto& b : blocks) {
    OcrBlock block;
    int block_y0 = std::min(y, image_h - 1);
    int block_x1 = 0, block_y1 = block_y0;
    for (const auto& text : b) {
      OcrLine ol;
      int ly = std::min(y, image_h - 1);
      int lh = std::min(line_h, image_h - ly);
      std::istringstream ws(text);
      std::string word;
      int x = 0;
      while (ws >> word) {
        int wpx = std::min(static_cast<int>(word.size()) * char_w,
                           std::max(1, image_w - x));
        if (x >= image_w) break;
        ol.elements.push_back({word, {x, ly, wpx, lh, 0}, 1.0});
        x += wpx + char_w;
      }
      int lw = ol.elements.empty()
                   ? 1
                   : ol.elements.back().box.x + ol.elements.back().box.width;
      ol.box = {0, ly, std::min(lw, image_w), lh, 0};
      block_x1 = std::max(block_x1, ol.box.x + ol.box.width);
      block_y1 = std::max(block_y1, ol.box.y + ol.box.height);
      block.lines.push_back(std::move(ol));
      y += line_h;
    }
    block.box = {0, block_y0, std::max(1, block_x1), block_y1 - block_y0, 0};
    doc.blocks.push_back(std::move(block));
  }
  doc.full_text = flatten_text(doc);
  return doc;
}

OcrDocument recognize(const OcrEngine& engine, const BinaryImage& img,
                      const std::vector<TextBox>& regions) {
  for (const auto& r : regions) {
    if (r.x < 0 || r.y < 0 || r.width < 1 || r.height < 1 ||
        r.x + r.width > img.width || r.y + r.height > img.height)
      throw std::invalid_argument("recognize: region out of image bounds");
    // §16px glyph guidance: warn when a region is too short for legible text
    if (r.height < 16)
      std::fprintf(stderr,
                   "warning: region %dx%d at (%d,%d) implies glyphs below "
                   "16x16 px; recognition quality may suffer\n",
                   r.width, r.height, r.x, r.y);
  }
  return engine.recognize(img, regions);
}

std::vector<SceneLabel> classify_scene(const SceneClassifier& classifier,
                                       const RasterImage& img, int top_k) {
  if (top_k < 1) throw std::invalid_argument("classify_scene: top_k must be >= 1");
  auto labels = classifier.classify(img, top_k);
  std::sort(labels.begin(), labels.end(),
            [](const SceneLabel& a, const SceneLabel& b) {
              return a.prob != b.prob ? a.prob > b.prob : a.label < b.label;
            });
  if (static_cast<int>(labels.size()) > top_k) labels.resize(top_k);
  return labels;
}

FixtureOcrEngine::FixtureOcrEngine(std::string id,
                                   std::filesystem::path image_path)
    : id_(std::move(id)), sidecar_(ocr_sidecar_path(image_path)) {}

OcrDocument FixtureOcrEngine::recognize(const BinaryImage& img,
                                        const std::vector<TextBox>&) const {
  std::ifstream in(sidecar_);
  if (!in) throw EngineError(id_, "missing OCR fixture " + sidecar_.string());
  std::ostringstream content;
  content << in.rdbuf();
  return parse_ocr_fixture(content.str(), img.width, img.height);
}

FixtureSceneClassifier::FixtureSceneClassifier(std::filesystem::path image_path)
    : sidecar_(scene_sidecar_path(image_path)) {}

std::vector<SceneLabel> FixtureSceneClassifier::classify(const RasterImage&,
                                                         int) const {
  std::ifstream in(sidecar_);
  if (!in)
    throw EngineError("scene-fixture", "missing scene fixture " + sidecar_.string());
  std::vector<SceneLabel> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw EngineError("scene-fixture", "line " + std::to_string(lineno) +
                                             ": expected label<TAB>prob");
    labels.push_back({line.substr(0, tab), std::stod(line.substr(tab + 1))});
  }
  return labels;
}

ExternalOcrEngine::ExternalOcrEngine(std::string id, std::string command_template)
    : id_(std::move(id)), command_template_(std::move(command_template)) {}

OcrDocument ExternalOcrEngine::recognize(const BinaryImage& img,
                                         const std::vector<TextBox>&) const {
  auto tmp = std::filesystem::temp_directory_path() /
             ("snaptag-ocr-" + std::to_string(::getpid()) + ".pgm");
  write_pgm(img, tmp);
  std::string cmd = command_template_;
  if (auto pos = cmd.find("{image}"); pos != std::string::npos)
    cmd.replace(pos, 7, tmp.string());
  std::string output;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = ::pclose(pipe);
    std::filesystem::remove(tmp);
    if (status != 0)
      throw EngineError(id_, "command exited with status " + std::to_string(status));
  } else {
    std::filesystem::remove(tmp);
    throw EngineError(id_, "failed to launch: " + cmd);
  }
  return parse_ocr_fixture(output, img.width, img.height);
}

}  // namespace snaptag
