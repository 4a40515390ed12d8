#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snaptag/image.hpp"
#include "snaptag/textregion.hpp"

namespace snaptag {

class EngineError : public std::runtime_error {
 public:
  EngineError(std::string engine_id, const std::string& what)
      : std::runtime_error("engine '" + engine_id + "': " + what),
        engine_id_(std::move(engine_id)) {}
  const std::string& engine_id() const { return engine_id_; }

 private:
  std::string engine_id_;
};

struct OcrElement {
  std::string text;  // non-empty
  TextBox box;
  double confidence = 1.0;
};

struct OcrLine {
  std::vector<OcrElement> elements;
  TextBox box;
};

struct OcrBlock {
  std::vector<OcrLine> lines;
  TextBox box;
};

struct OcrDocument {
  std::vector<OcrBlock> blocks;
  std::string full_text;
};

/// Elements joined by space, lines by newline, blocks by blank line.
std::string flatten_text(const OcrDocument& doc);

struct SceneLabel {
  std::string label;
  double prob = 0.0;
};

class OcrEngine {
 public:
  virtual ~OcrEngine() = default;
  virtual const std::string& id() const = 0;
  virtual OcrDocument recognize(const BinaryImage& img,
                                const std::vector<TextBox>& regions) const = 0;
};

class SceneClassifier {
 public:
  virtual ~SceneClassifier() = default;
  virtual std::vector<SceneLabel> classify(const RasterImage& img,
                                           int top_k) const = 0;
};

/// Bounds-checks regions, delegates to the engine and warns (via the returned
/// document's structure) when implied glyph sizes fall below 16x16 px.
OcrDocument recognize(const OcrEngine& engine, const BinaryImage& img,
                      const std::vector<TextBox>& regions);

std::vector<SceneLabel> classify_scene(const SceneClassifier& classifier,
                                       const RasterImage& img, int top_k);

/// Fixture engine: for image x.png reads sidecar x.ocr.txt
/// (blank-line-separated blocks, newline-separated lines).
class FixtureOcrEngine : public OcrEngine {
 public:
  FixtureOcrEngine(std::string id, std::filesystem::path image_path);
  const std::string& id() const override { return id_; }
  OcrDocument recognize(const BinaryImage& img,
                        const std::vector<TextBox>& regions) const override;

 private:
  std::string id_;
  std::filesystem::path sidecar_;
};

/// Fixture classifier: reads sidecar x.scene.tsv (label TAB prob per line).
class FixtureSceneClassifier : public SceneClassifier {
 public:
  explicit FixtureSceneClassifier(std::filesystem::path image_path);
  std::vector<SceneLabel> classify(const RasterImage& img,
                                   int top_k) const override;

 private:
  std::filesystem::path sidecar_;
};

/// Adapter that shells out to an external OCR executable. The command template
/// substitutes {image} with a temp PGM path; stdout is taken as plain text.
/// Excluded from the acceptance suite; offline environments use fixtures.
class ExternalOcrEngine : public OcrEngine {
 public:
  ExternalOcrEngine(std::string id, std::string command_template);
  const std::string& id() const override { return id_; }
  OcrDocument recognize(const BinaryImage& img,
                        const std::vector<TextBox>& regions) const override;

 private:
  std::string id_;
  std::string command_template_;
};

std::filesystem::path ocr_sidecar_path(const std::filesystem::path& image_path);
std::filesystem::path scene_sidecar_path(const std::filesystem::path& image_path);

/// Parse fixture OCR text (already loaded) into a block/line/element document.
OcrDocument parse_ocr_fixture(const std::string& content, int image_w, int image_h);

}  // namespace snaptag
