#include "snaptag/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <thread>

namespace snaptag {

namespace {

void require_gray(const RasterImage& img, const char* op) {
  if (!img.valid()) throw ImageError(std::string(op) + ": invalid image");
  if (img.channels != 1)
    throw ImageError(std::string(op) + ": grayscale input required");
}

std::vector<float> gaussian_kernel(double sigma) {
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

// Separable Gaussian with clamped borders, float output.
std::vector<float> gaussian_smooth(const RasterImage& gray, double sigma) {
  const int w = gray.width, h = gray.height;
  auto k = gaussian_kernel(sigma);
  int radius = (static_cast<int>(k.size()) - 1) / 2;
  std::vector<float> tmp(static_cast<std::size_t>(w) * h);
  std::vector<float> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) {
        int xx = std::clamp(x + i, 0, w - 1);
        acc += k[i + radius] * gray.at(xx, y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) {
        int yy = std::clamp(y + i, 0, h - 1);
        acc += k[i + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace

RasterImage to_grayscale(const RasterImage& img) {
  if (!img.valid()) throw ImageError("to_grayscale: invalid image");
  if (img.channels == 1) return img;
  RasterImage out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      // alpha, if present, is dropped
      double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
      double luma = 0.299 * r + 0.587 * g + 0.114 * b;
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(luma));
    }
  return out;
}

RasterImage bilateral_filter(const RasterImage& gray, const PreprocessParams& p) {
  require_gray(gray, "bilateral_filter");
  const int w = gray.width, h = gray.height;
  const int radius = std::max(1, p.bilateral_diameter / 2);
  const double inv2sc = 1.0 / (2.0 * p.sigma_color * p.sigma_color);
  const double inv2ss = 1.0 / (2.0 * p.sigma_space * p.sigma_space);

  // precomputed tables for the spatial window and the 0..255 range deltas
  std::vector<double> space((2 * radius + 1) * (2 * radius + 1));
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      space[(dy + radius) * (2 * radius + 1) + (dx + radius)] =
          std::exp(-(dx * dx + dy * dy) * inv2ss);
  std::array<double, 256> range;
  for (int d = 0; d < 256; ++d) range[d] = std::exp(-(d * d) * inv2sc);

  RasterImage out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int center = gray.at(x, y);
      double num = 0.0, den = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          int xx = std::clamp(x + dx, 0, w - 1);
          int v = gray.at(xx, yy);
          double wgt = space[(dy + radius) * (2 * radius + 1) + (dx + radius)] *
                       range[std::abs(v - center)];
          num += wgt * v;
          den += wgt;
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(num / den));
    }
  return out;
}

BinaryImage canny_edges(const RasterImage& gray, double low, double high) {
  require_gray(gray, "canny_edges");
  if (low >= high)
    throw ImageError("canny_edges: low threshold must be below high");
  const int w = gray.width, h = gray.height;

  auto smooth = gaussian_smooth(gray, 1.4);
  auto S = [&](int x, int y) -> float {
    return smooth[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w +
                  std::clamp(x, 0, w - 1)];
  };

  std::vector<float> mag(static_cast<std::size_t>(w) * h, 0.f);
  std::vector<float> gxv(mag.size()), gyv(mag.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float gx = (S(x + 1, y - 1) + 2 * S(x + 1, y) + S(x + 1, y + 1)) -
                 (S(x - 1, y - 1) + 2 * S(x - 1, y) + S(x - 1, y + 1));
      float gy = (S(x - 1, y + 1) + 2 * S(x, y + 1) + S(x + 1, y + 1)) -
                 (S(x - 1, y - 1) + 2 * S(x, y - 1) + S(x + 1, y - 1));
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxv[i] = gx;
      gyv[i] = gy;
      mag[i] = std::hypot(gx, gy);
    }

  // non-maximum suppression along the quantized gradient direction
  std::vector<std::uint8_t> state(mag.size(), 0);  // 0 none, 1 weak, 2 strong
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      float m = mag[i];
      if (m < low) continue;
      float angle = std::atan2(gyv[i], gxv[i]);
      double deg = angle * 180.0 / M_PI;
      if (deg < 0) deg += 180.0;
      int dx1, dy1;
      if (deg < 22.5 || deg >= 157.5) {
        dx1 = 1; dy1 = 0;
      } else if (deg < 67.5) {
        dx1 = 1; dy1 = 1;
      } else if (deg < 112.5) {
        dx1 = 0; dy1 = 1;
      } else {
        dx1 = -1; dy1 = 1;
      }
      auto M = [&](int xx, int yy) -> float {
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) return 0.f;
        return mag[static_cast<std::size_t>(yy) * w + xx];
      };
      if (m >= M(x + dx1, y + dy1) && m >= M(x - dx1, y - dy1))
        state[i] = m >= high ? 2 : 1;
    }

  // hysteresis: keep weak pixels 8-connected to a strong one
  BinaryImage out(w, h, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state[i] == 2) {
      out.data[i] = 255;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int xx = x + dx, yy = y + dy;
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
        std::size_t j = static_cast<std::size_t>(yy) * w + xx;
        if (state[j] == 1 && out.data[j] == 0) {
          out.data[j] = 255;
          stack.push_back(j);
        }
      }
  }
  return out;
}

std::vector<Component> connected_components(const BinaryImage& bin) {
  const int w = bin.width, h = bin.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<Component> comps;
  std::vector<std::size_t> stack;
  int next = 0;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (bin.data[i0] != 255 || labels[i0] != 0) continue;
      Component c;
      c.label = ++next;
      c.x = x0;
      c.y = y0;
      int maxx = x0, maxy = y0;
      labels[i0] = next;
      stack.assign(1, i0);
      while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        ++c.pixel_count;
        c.x = std::min(c.x, x);
        c.y = std::min(c.y, y);
        maxx = std::max(maxx, x);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int xx = x + dx, yy = y + dy;
            if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
            std::size_t j = static_cast<std::size_t>(yy) * w + xx;
            if (bin.data[j] == 255 && labels[j] == 0) {
              labels[j] = next;
              stack.push_back(j);
            }
          }
      }
      c.width = maxx - c.x + 1;
      c.height = maxy - c.y + 1;
      comps.push_back(c);
    }
  return comps;
}

BinaryImage binarize(const RasterImage& gray, const PreprocessParams& p) {
  require_gray(gray, "binarize");
  const int w = gray.width, h = gray.height;

  BinaryImage edges = canny_edges(gray, p.canny_low, p.canny_high);
  auto comps = connected_components(edges);

  // candidate mask: dilated bounding boxes of components worth processing
  std::vector<std::uint8_t> candidate(static_cast<std::size_t>(w) * h, 0);
  for (const auto& c : comps) {
    if (c.pixel_count < p.min_component_area) continue;
    int x0 = std::max(0, c.x - p.region_dilation);
    int y0 = std::max(0, c.y - p.region_dilation);
    int x1 = std::min(w - 1, c.x + c.width - 1 + p.region_dilation);
    int y1 = std::min(h - 1, c.y + c.height - 1 + p.region_dilation);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        candidate[static_cast<std::size_t>(y) * w + x] = 1;
  }

  // integral image for O(1) window means
  std::vector<std::uint64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  for (int y = 0; y < h; ++y) {
    std::uint64_t rowsum = 0;
    for (int x = 0; x < w; ++x) {
      rowsum += gray.at(x, y);
      integral[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
          integral[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + rowsum;
    }
  }

  BinaryImage out(w, h, 255);
  const int r = p.neighborhood_radius;
  auto classify_rows = [&](int y_begin, int y_end) {
    for (int y = y_begin; y < y_end; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!candidate[i]) continue;
        int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
        int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
        std::uint64_t sum =
            integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
            integral[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
            integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
            integral[static_cast<std::size_t>(y0) * (w + 1) + x0];
        double mean = static_cast<double>(sum) /
                      (static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1));
        out.data[i] = gray.data[i] < mean * (1.0 - p.threshold_bias) ? 0 : 255;
      }
  };

  int tiles = std::max(1, std::min(p.tile_count, h));
  if (tiles == 1) {
    classify_rows(0, h);
  } else {
    // horizontal bands; each band owns its row range, shared read-only inputs
    std::vector<std::thread> workers;
    workers.reserve(tiles);
    for (int t = 0; t < tiles; ++t) {
      int y_begin = static_cast<int>(static_cast<std::int64_t>(h) * t / tiles);
      int y_end = static_cast<int>(static_cast<std::int64_t>(h) * (t + 1) / tiles);
      workers.emplace_back(classify_rows, y_begin, y_end);
    }
    for (auto& th : workers) th.join();
  }
  return out;
}

}  // namespace snaptag
