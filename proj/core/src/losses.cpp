#include "advkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advkit {

namespace {

// Floors to eps and normalizes to unit sum; returns the floored sum so
// gradients can undo the normalization.
struct NormalizedMap {
  std::vector<double> p;
  double sum = 0.0;
};

NormalizedMap normalize(const Tensor& f, double eps_floor) {
  NormalizedMap n;
  n.p.resize(f.size());
  for (size_t i = 0; i < f.size(); ++i) {
    n.p[i] = std::max(f[i], eps_floor);
    n.sum += n.p[i];
  }
  for (double& v : n.p) v /= n.sum;
  return n;
}

}  // namespace

double mix_loss(const Tensor& f_x, const Tensor& f_virtual, double eps_floor) {
  f_x.require_same_shape(f_virtual);
  NormalizedMap p = normalize(f_x, eps_floor);
  NormalizedMap q = normalize(f_virtual, eps_floor);
  double kl = 0.0;
  for (size_t i = 0; i < p.p.size(); ++i)
    kl += p.p[i] * std::log(p.p[i] / q.p[i]);
  return -kl;
}

Tensor mix_loss_grad(const Tensor& f_x, const Tensor& f_virtual,
                     double eps_floor) {
  f_x.require_same_shape(f_virtual);
  NormalizedMap p = normalize(f_x, eps_floor);
  NormalizedMap q = normalize(f_virtual, eps_floor);
  double kl = 0.0;
  for (size_t i = 0; i < p.p.size(); ++i)
    kl += p.p[i] * std::log(p.p[i] / q.p[i]);
  // With P_i = fi / s: dKL/dfi = (log(P_i/Q_i) - KL) / s; floored entries
  // are flat in fi.
  Tensor g(f_x.height(), f_x.width(), f_x.channels());
  for (size_t i = 0; i < f_x.size(); ++i) {
    if (f_x[i] < eps_floor) continue;
    g[i] = -(std::log(p.p[i] / q.p[i]) - kl) / p.sum;
  }
  return g;
}

double cross_entropy(const std::vector<double>& logits, int true_class,
                     double eps_floor) {
  if (true_class < 0 || true_class >= static_cast<int>(logits.size()))
    throw std::invalid_argument("cross_entropy: class id out of range");
  double m = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - m);
  double p = std::exp(logits[true_class] - m) / lse;
  return -std::log(std::max(p, eps_floor));
}

std::vector<double> cross_entropy_grad(const std::vector<double>& logits,
                                       int true_class) {
  if (true_class < 0 || true_class >= static_cast<int>(logits.size()))
    throw std::invalid_argument("cross_entropy_grad: class id out of range");
  double m = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - m);
  std::vector<double> g(logits.size());
  for (size_t k = 0; k < logits.size(); ++k)
    g[k] = std::exp(logits[k] - m) / lse;
  g[true_class] -= 1.0;
  return g;
}

namespace {

struct LerpWeights {
  int lo, hi;
  double w_lo, w_hi;
};

LerpWeights axis_weights(int dst, int dst_size, int src_size) {
  double scale = static_cast<double>(src_size) / dst_size;
  double src = (dst + 0.5) * scale - 0.5;
  src = std::clamp(src, 0.0, static_cast<double>(src_size - 1));
  int lo = static_cast<int>(std::floor(src));
  int hi = std::min(lo + 1, src_size - 1);
  double frac = src - lo;
  return {lo, hi, 1.0 - frac, frac};
}

}  // namespace

Tensor bilinear_upsample(const Tensor& map, int out_h, int out_w) {
  if (out_h < map.height() || out_w < map.width())
    throw std::invalid_argument("bilinear_upsample: target smaller than source");
  Tensor out(out_h, out_w, map.channels());
  for (int r = 0; r < out_h; ++r) {
    LerpWeights wr = axis_weights(r, out_h, map.height());
    for (int c = 0; c < out_w; ++c) {
      LerpWeights wc = axis_weights(c, out_w, map.width());
      for (int k = 0; k < map.channels(); ++k) {
        out.at(r, c, k) = wr.w_lo * (wc.w_lo * map.at(wr.lo, wc.lo, k) +
                                     wc.w_hi * map.at(wr.lo, wc.hi, k)) +
                          wr.w_hi * (wc.w_lo * map.at(wr.hi, wc.lo, k) +
                                     wc.w_hi * map.at(wr.hi, wc.hi, k));
      }
    }
  }
  return out;
}

Tensor bilinear_upsample_adjoint(const Tensor& grad_out, int src_h, int src_w) {
  Tensor g(src_h, src_w, grad_out.channels());
  for (int r = 0; r < grad_out.height(); ++r) {
    LerpWeights wr = axis_weights(r, grad_out.height(), src_h);
    for (int c = 0; c < grad_out.width(); ++c) {
      LerpWeights wc = axis_weights(c, grad_out.width(), src_w);
      for (int k = 0; k < grad_out.channels(); ++k) {
        double v = grad_out.at(r, c, k);
        g.at(wr.lo, wc.lo, k) += wr.w_lo * wc.w_lo * v;
        g.at(wr.lo, wc.hi, k) += wr.w_lo * wc.w_hi * v;
        g.at(wr.hi, wc.lo, k) += wr.w_hi * wc.w_lo * v;
        g.at(wr.hi, wc.hi, k) += wr.w_hi * wc.w_hi * v;
      }
    }
  }
  return g;
}

namespace {

void check_seg_label(const Tensor& logit_map, const Label& label) {
  if (label.map_h <= 0 || label.map_w <= 0 ||
      label.map.size() != static_cast<size_t>(label.map_h) * label.map_w ||
      label.valid.size() != label.map.size())
    throw std::invalid_argument("seg_cross_entropy: malformed label map");
  for (size_t i = 0; i < label.map.size(); ++i)
    if (label.valid[i] && (label.map[i] < 0 || label.map[i] >= logit_map.channels()))
      throw std::invalid_argument("seg_cross_entropy: label id out of range");
}

}  // namespace

double seg_cross_entropy(const Tensor& logit_map, const Label& label,
                         double eps_floor) {
  check_seg_label(logit_map, label);
  Tensor up = bilinear_upsample(logit_map, label.map_h, label.map_w);
  int nv = up.channels();
  std::vector<double> scores(nv);
  double loss = 0.0;
  for (int r = 0; r < label.map_h; ++r)
    for (int c = 0; c < label.map_w; ++c) {
      if (!label.valid[static_cast<size_t>(r) * label.map_w + c]) continue;
      for (int k = 0; k < nv; ++k) scores[k] = up.at(r, c, k);
      loss += cross_entropy(scores, label.map[static_cast<size_t>(r) * label.map_w + c],
                            eps_floor);
    }
  return loss;
}

Tensor seg_cross_entropy_grad(const Tensor& logit_map, const Label& label) {
  check_seg_label(logit_map, label);
  Tensor up = bilinear_upsample(logit_map, label.map_h, label.map_w);
  int nv = up.channels();
  Tensor grad_up(label.map_h, label.map_w, nv);
  std::vector<double> scores(nv);
  for (int r = 0; r < label.map_h; ++r)
    for (int c = 0; c < label.map_w; ++c) {
      size_t idx = static_cast<size_t>(r) * label.map_w + c;
      if (!label.valid[idx]) continue;
      for (int k = 0; k < nv; ++k) scores[k] = up.at(r, c, k);
      std::vector<double> g = cross_entropy_grad(scores, label.map[idx]);
      for (int k = 0; k < nv; ++k) grad_up.at(r, c, k) = g[k];
    }
  return bilinear_upsample_adjoint(grad_up, logit_map.height(), logit_map.width());
}

}  // namespace advkit
