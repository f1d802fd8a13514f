#pragma once

#include <vector>

#include "advkit/model.hpp"
#include "advkit/tensor.hpp"

namespace advkit {

// Negative KL divergence between the two feature maps after eps-flooring
// and normalization to unit sum over all (r, c, k). Always <= 0, and 0
// exactly when the normalized maps coincide.
double mix_loss(const Tensor& f_x, const Tensor& f_virtual,
                double eps_floor = 1e-12);

// d(mix_loss)/d(f_x). Entries below the floor get zero gradient.
Tensor mix_loss_grad(const Tensor& f_x, const Tensor& f_virtual,
                     double eps_floor = 1e-12);

// -log softmax(logits)[true_class], natural log.
double cross_entropy(const std::vector<double>& logits, int true_class,
                     double eps_floor = 1e-12);

// d(cross_entropy)/d(logits) = softmax(logits) - onehot(true_class).
std::vector<double> cross_entropy_grad(const std::vector<double>& logits,
                                       int true_class);

// Bilinear upsampling with half-pixel-center mapping
// src = (dst + 0.5) * scale - 0.5, edge-clamped. Target must not be
// smaller than the source.
Tensor bilinear_upsample(const Tensor& map, int out_h, int out_w);

// Adjoint of bilinear_upsample: scatters an out_h x out_w cotangent back
// onto the source grid with the same interpolation weights.
Tensor bilinear_upsample_adjoint(const Tensor& grad_out, int src_h, int src_w);

// Pixel-summed cross entropy of an (upsampled, softmaxed) logit map
// against a dense label map, restricted to valid pixels.
double seg_cross_entropy(const Tensor& logit_map, const Label& label,
                         double eps_floor = 1e-12);

// d(seg_cross_entropy)/d(logit_map) at the map's native resolution
// (gradient flows back through the bilinear upsampling).
Tensor seg_cross_entropy_grad(const Tensor& logit_map, const Label& label);

inline double total_loss(double mix, double ce, double beta) {
  return mix + beta * ce;
}

}  // namespace advkit
