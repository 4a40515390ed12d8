#pragma once

#include <vector>

#include "snaptag/image.hpp"

namespace snaptag {

struct PreprocessParams {
  int bilateral_diameter = 9;
  double sigma_color = 75.0;
  double sigma_space = 75.0;
  double canny_low = 50.0;
  double canny_high = 150.0;
  int neighborhood_radius = 7;
  double threshold_bias = 0.10;
  int tile_count = 4;
  int min_component_area = 4;
  int region_dilation = 2;
};

struct Component {
  int label = 0;
  int x = 0, y = 0, width = 0, height = 0;  // tight bounding box
  int pixel_count = 0;
};

RasterImage to_grayscale(const RasterImage& img);

RasterImage bilateral_filter(const RasterImage& gray, const PreprocessParams& p);

BinaryImage canny_edges(const RasterImage& gray, double low, double high);

std::vector<Component> connected_components(const BinaryImage& bin);

/// Full binarization chain: canny -> component contours -> candidate regions
/// -> local-mean adaptive threshold inside regions, white elsewhere.
/// Output is identical for every tile_count >= 1.
BinaryImage binarize(const RasterImage& gray, const PreprocessParams& p);

}  // namespace snaptag
