#pragma once

#include <cstdint>
#include <vector>

#include "advkit/dataset.hpp"
#include "advkit/tensor.hpp"

namespace advkit {

enum class MixMethod { kMixup, kMixcut };

struct VirtualSampleSpec {
  MixMethod method = MixMethod::kMixup;
  int n_mix = 10;
  uint64_t seed = 0;
};

// Horizontal strip of the mixcut partition: rows [row, row + rows) at
// full width. Strips over i = 1..n_mix are disjoint and cover the image.
struct StripMask {
  int row = 0;
  int rows = 0;
  int width = 0;
};

// Classification: one seeded-random image from each of the first n_mix
// classes in sorted class-name order. Segmentation: n_mix distinct images
// chosen uniformly. Deterministic given the seed.
std::vector<Tensor> pick_category_representatives(const Dataset& dataset,
                                                  int n_mix, uint64_t seed);

// Elementwise mean of the images (weight 1/n_mix each).
Tensor make_mixup(const std::vector<Tensor>& images);

// Floor-boundary horizontal strip partition; strip i starts at row
// floor((i-1)*h/n_mix), the last strip absorbs the remainder.
std::vector<StripMask> mixcut_masks(int h, int w, int n_mix);

// Strip i of the output copied verbatim from image i.
Tensor make_mixcut(const std::vector<Tensor>& images);

// Resize to target dims with bilinear interpolation (up or down).
Tensor bilinear_resize(const Tensor& image, int out_h, int out_w);

// Builds the virtual image for an attack run: picks representatives,
// resizes them to (h, w), and combines per the spec's method.
Tensor build_virtual_sample(const Dataset& dataset, const VirtualSampleSpec& spec,
                            int h, int w);

}  // namespace advkit
