#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "snaptag/imgproc.hpp"

using namespace snaptag;

namespace {

RasterImage solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RasterImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

RasterImage random_gray(int w, int h, std::mt19937& rng) {
  RasterImage img(w, h, 1);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(dist(rng));
  return img;
}

// independent double-loop bilateral reference, no tables
RasterImage bilateral_reference(const RasterImage& gray, const PreprocessParams& p) {
  const int w = gray.width, h = gray.height;
  const int radius = std::max(1, p.bilateral_diameter / 2);
  RasterImage out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double num = 0, den = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          int xx = std::clamp(x + dx, 0, w - 1);
          int yy = std::clamp(y + dy, 0, h - 1);
          double dv = gray.at(xx, yy) - gray.at(x, y);
          double wgt = std::exp(-(dx * dx + dy * dy) /
                                (2 * p.sigma_space * p.sigma_space)) *
                       std::exp(-(dv * dv) / (2 * p.sigma_color * p.sigma_color));
          num += wgt * gray.at(xx, yy);
          den += wgt;
        }
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(num / den));
    }
  return out;
}

// single-threaded adaptive-threshold oracle mirroring the documented rule
BinaryImage binarize_reference(const RasterImage& gray, const PreprocessParams& p) {
  BinaryImage edges = canny_edges(gray, p.canny_low, p.canny_high);
  auto comps = connected_components(edges);
  const int w = gray.width, h = gray.height;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (const auto& c : comps) {
    if (c.pixel_count < p.min_component_area) continue;
    for (int y = std::max(0, c.y - p.region_dilation);
         y <= std::min(h - 1, c.y + c.height - 1 + p.region_dilation); ++y)
      for (int x = std::max(0, c.x - p.region_dilation);
           x <= std::min(w - 1, c.x + c.width - 1 + p.region_dilation); ++x)
        mask[static_cast<std::size_t>(y) * w + x] = 1;
  }
  BinaryImage out(w, h, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
      double sum = 0;
      int count = 0;
      for (int dy = -p.neighborhood_radius; dy <= p.neighborhood_radius; ++dy)
        for (int dx = -p.neighborhood_radius; dx <= p.neighborhood_radius; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          sum += gray.at(xx, yy);
          ++count;
        }
      double mean = sum / count;
      out.at(x, y) = gray.at(x, y) < mean * (1.0 - p.threshold_bias) ? 0 : 255;
    }
  return out;
}

// dark glyph on light background fixture
RasterImage glyph_fixture() {
  RasterImage img(48, 48, 1, 230);
  for (int y = 16; y < 32; ++y)
    for (int x = 16; x < 32; ++x) img.at(x, y) = 20;
  return img;
}

}  // namespace

TEST_CASE("to_grayscale maps pure colors by BT.601 luma") {
  CHECK(to_grayscale(solid_rgb(2, 2, 0, 0, 0)).at(0, 0) == 0);
  CHECK(to_grayscale(solid_rgb(2, 2, 255, 255, 255)).at(0, 0) == 255);
  CHECK(to_grayscale(solid_rgb(2, 2, 255, 0, 0)).at(0, 0) == 76);
}

TEST_CASE("to_grayscale drops alpha and is idempotent on gray input") {
  RasterImage rgba(3, 3, 4, 0);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) {
      rgba.at(x, y, 0) = 100;
      rgba.at(x, y, 1) = 100;
      rgba.at(x, y, 2) = 100;
      rgba.at(x, y, 3) = 7;  // alpha must be ignored
    }
  auto gray = to_grayscale(rgba);
  CHECK(gray.channels == 1);
  CHECK(gray.at(1, 1) == 100);
  auto again = to_grayscale(gray);
  CHECK(again.data == gray.data);
}

TEST_CASE("to_grayscale rejects invalid input") {
  RasterImage broken;
  CHECK_THROWS_AS(to_grayscale(broken), ImageError);
}

TEST_CASE("bilateral filter leaves a constant image untouched") {
  RasterImage img(16, 16, 1, 128);
  auto out = bilateral_filter(img, {});
  CHECK(out.data == img.data);
}

TEST_CASE("bilateral filter strictly reduces an isolated impulse") {
  RasterImage img(15, 15, 1, 0);
  img.at(7, 7) = 255;
  auto out = bilateral_filter(img, {});
  CHECK(out.at(7, 7) < 255);
}

TEST_CASE("bilateral filter preserves a hard edge when sigma_color is small") {
  RasterImage img(16, 16, 1, 0);
  for (int y = 0; y < 16; ++y)
    for (int x = 8; x < 16; ++x) img.at(x, y) = 255;
  PreprocessParams p;
  p.sigma_color = 10.0;  // far below the 255 step
  auto out = bilateral_filter(img, p);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      CHECK(std::abs(int(out.at(x, y)) - int(img.at(x, y))) < 1);
}

TEST_CASE("bilateral filter matches the double-loop reference") {
  std::mt19937 rng(1);
  auto img = random_gray(20, 14, rng);
  PreprocessParams p;
  auto fast = bilateral_filter(img, p);
  auto ref = bilateral_reference(img, p);
  for (std::size_t i = 0; i < fast.data.size(); ++i)
    CHECK(std::abs(int(fast.data[i]) - int(ref.data[i])) <= 1);
}

TEST_CASE("bilateral filter output stays inside the input range") {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    auto img = random_gray(12, 12, rng);
    auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    auto out = bilateral_filter(img, {});
    for (auto v : out.data) {
      CHECK(v >= *mn);
      CHECK(v <= *mx);
    }
  }
}

TEST_CASE("bilateral filter rejects multi-channel input") {
  CHECK_THROWS_AS(bilateral_filter(solid_rgb(4, 4, 1, 2, 3), {}), ImageError);
}

TEST_CASE("canny on a uniform image finds no edges") {
  RasterImage img(32, 32, 1, 77);
  auto edges = canny_edges(img, 50, 150);
  for (auto v : edges.data) CHECK(v == 0);
}

TEST_CASE("canny on a vertical step produces one edge column") {
  RasterImage img(32, 32, 1, 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) img.at(x, y) = 255;
  auto edges = canny_edges(img, 50, 150);
  // every edge pixel must sit in a narrow band at the boundary
  int edge_pixels = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if (edges.at(x, y) == 255) {
        ++edge_pixels;
        CHECK(x >= 14);
        CHECK(x <= 17);
      }
  CHECK(edge_pixels >= 28);  // essentially one column
  for (auto v : edges.data) CHECK((v == 0 || v == 255));
}

TEST_CASE("canny ignores steps below the low threshold") {
  RasterImage img(32, 32, 1, 100);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) img.at(x, y) = 104;  // tiny step
  auto edges = canny_edges(img, 50, 150);
  for (auto v : edges.data) CHECK(v == 0);
}

TEST_CASE("canny rejects low >= high") {
  RasterImage img(8, 8, 1, 0);
  CHECK_THROWS_AS(canny_edges(img, 150, 150), ImageError);
}

TEST_CASE("connected components: disjoint squares, diagonal touch, empty") {
  BinaryImage img(16, 16, 0);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) img.at(x, y) = 255;
  for (int y = 10; y < 13; ++y)
    for (int x = 10; x < 13; ++x) img.at(x, y) = 255;
  auto comps = connected_components(img);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].label == 1);
  CHECK(comps[1].label == 2);
  CHECK(comps[0].pixel_count == 9);
  CHECK(comps[0].x == 1);
  CHECK(comps[0].width == 3);

  BinaryImage diag(4, 4, 0);
  diag.at(1, 1) = 255;
  diag.at(2, 2) = 255;  // touching only diagonally
  CHECK(connected_components(diag).size() == 1);

  BinaryImage blank(5, 5, 0);
  CHECK(connected_components(blank).empty());
}

TEST_CASE("binarize: pure white image stays all white") {
  RasterImage img(32, 32, 1, 255);
  auto out = binarize(img, {});
  for (auto v : out.data) CHECK(v == 255);
}

TEST_CASE("binarize: dark glyph on light background matches the oracle") {
  auto img = glyph_fixture();
  PreprocessParams p;
  auto out = binarize(img, p);
  auto ref = binarize_reference(img, p);
  CHECK(out.data == ref.data);
  // glyph border pixels see a bright local mean and go black; the far
  // background stays white
  CHECK(out.at(16, 24) == 0);
  CHECK(out.at(24, 16) == 0);
  CHECK(out.at(4, 4) == 255);
  CHECK(out.at(44, 44) == 255);
}

TEST_CASE("binarize output dimensions always equal input dimensions") {
  std::mt19937 rng(7);
  auto img = random_gray(37, 23, rng);
  auto out = binarize(img, {});
  CHECK(out.width == img.width);
  CHECK(out.height == img.height);
}

TEST_CASE("binarize is byte-identical across tile counts and strictly binary") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto img = random_gray(40 + trial, 30 + trial, rng);
    PreprocessParams p;
    p.tile_count = 1;
    auto base = binarize(img, p);
    for (auto v : base.data) CHECK((v == 0 || v == 255));
    for (int tiles : {2, 3, 4, 8}) {
      p.tile_count = tiles;
      CHECK(binarize(img, p).data == base.data);
    }
  }
}

TEST_CASE("binarize rejects non-grayscale input") {
  CHECK_THROWS_AS(binarize(solid_rgb(8, 8, 0, 0, 0), {}), ImageError);
}
