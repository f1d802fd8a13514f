#include "advkit/virtual_sample.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace advkit {

std::vector<Tensor> pick_category_representatives(const Dataset& dataset,
                                                  int n_mix, uint64_t seed) {
  if (n_mix < 2) throw std::invalid_argument("n_mix must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Tensor> picks;
  picks.reserve(n_mix);

  if (dataset.task == Task::kClassification) {
    if (dataset.num_classes() < n_mix)
      throw std::invalid_argument("dataset has fewer classes than n_mix");
    // class ids already follow sorted class-name order
    for (int cls = 0; cls < n_mix; ++cls) {
      std::vector<const Sample*> members;
      for (const Sample& s : dataset.samples)
        if (s.label.class_id == cls) members.push_back(&s);
      if (members.empty())
        throw std::invalid_argument("class " + dataset.class_names[cls] +
                                    " has no samples");
      size_t idx = rng() % members.size();
      picks.push_back(members[idx]->image);
    }
  } else {
    if (static_cast<int>(dataset.samples.size()) < n_mix)
      throw std::invalid_argument("dataset has fewer images than n_mix");
    std::vector<size_t> order(dataset.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < n_mix; ++i)
      picks.push_back(dataset.samples[order[i]].image);
  }
  return picks;
}

Tensor make_mixup(const std::vector<Tensor>& images) {
  if (images.size() < 2) throw std::invalid_argument("mixup needs >= 2 images");
  Tensor out(images[0].height(), images[0].width(), images[0].channels());
  for (const Tensor& img : images) {
    out.require_same_shape(img);
    out += img;
  }
  out *= 1.0 / images.size();
  return out;
}

std::vector<StripMask> mixcut_masks(int h, int w, int n_mix) {
  if (n_mix < 2) throw std::invalid_argument("n_mix must be >= 2");
  if (h < n_mix) throw std::invalid_argument("image height smaller than n_mix");
  std::vector<StripMask> masks(n_mix);
  for (int i = 0; i < n_mix; ++i) {
    int top = static_cast<int>(static_cast<int64_t>(i) * h / n_mix);
    int bottom = static_cast<int>(static_cast<int64_t>(i + 1) * h / n_mix);
    masks[i] = {top, bottom - top, w};
  }
  return masks;
}

Tensor make_mixcut(const std::vector<Tensor>& images) {
  if (images.size() < 2) throw std::invalid_argument("mixcut needs >= 2 images");
  int h = images[0].height(), w = images[0].width(), c = images[0].channels();
  std::vector<StripMask> masks = mixcut_masks(h, w, static_cast<int>(images.size()));
  Tensor out(h, w, c);
  for (size_t i = 0; i < images.size(); ++i) {
    out.require_same_shape(images[i]);
    const StripMask& m = masks[i];
    for (int r = m.row; r < m.row + m.rows; ++r)
      for (int cc = 0; cc < w; ++cc)
        for (int k = 0; k < c; ++k)
          out.at(r, cc, k) = images[i].at(r, cc, k);
  }
  return out;
}

Tensor bilinear_resize(const Tensor& image, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("bilinear_resize: bad target size");
  if (out_h == image.height() && out_w == image.width()) return image;
  Tensor out(out_h, out_w, image.channels());
  double sr = static_cast<double>(image.height()) / out_h;
  double sc = static_cast<double>(image.width()) / out_w;
  for (int r = 0; r < out_h; ++r) {
    double fr = std::clamp((r + 0.5) * sr - 0.5, 0.0, image.height() - 1.0);
    int r0 = static_cast<int>(std::floor(fr));
    int r1 = std::min(r0 + 1, image.height() - 1);
    double wr = fr - r0;
    for (int c = 0; c < out_w; ++c) {
      double fc = std::clamp((c + 0.5) * sc - 0.5, 0.0, image.width() - 1.0);
      int c0 = static_cast<int>(std::floor(fc));
      int c1 = std::min(c0 + 1, image.width() - 1);
      double wc = fc - c0;
      for (int k = 0; k < image.channels(); ++k) {
        out.at(r, c, k) =
            (1 - wr) * ((1 - wc) * image.at(r0, c0, k) + wc * image.at(r0, c1, k)) +
            wr * ((1 - wc) * image.at(r1, c0, k) + wc * image.at(r1, c1, k));
      }
    }
  }
  return out;
}

Tensor build_virtual_sample(const Dataset& dataset, const VirtualSampleSpec& spec,
                            int h, int w) {
  std::vector<Tensor> picks =
      pick_category_representatives(dataset, spec.n_mix, spec.seed);
  for (Tensor& img : picks) img = bilinear_resize(img, h, w);
  return spec.method == MixMethod::kMixup ? make_mixup(picks) : make_mixcut(picks);
}

}  // namespace advkit
