#include "advkit/toy_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "advkit/losses.hpp"

namespace advkit {

namespace {

void init_conv(ConvLayer& l, int in_c, int out_c, int k, std::mt19937_64& rng) {
  l.in_c = in_c;
  l.out_c = out_c;
  l.k = k;
  double bound = 1.0 / std::sqrt(static_cast<double>(k) * k * in_c);
  std::uniform_real_distribution<double> dist(-bound, bound);
  l.w.resize(static_cast<size_t>(out_c) * k * k * in_c);
  l.b.resize(out_c);
  for (double& v : l.w) v = dist(rng);
  for (double& v : l.b) v = dist(rng);
}

void init_dense(DenseLayer& l, int in_dim, int out_dim, std::mt19937_64& rng) {
  l.in_dim = in_dim;
  l.out_dim = out_dim;
  double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  l.w.resize(static_cast<size_t>(out_dim) * in_dim);
  l.b.resize(out_dim);
  for (double& v : l.w) v = dist(rng);
  for (double& v : l.b) v = dist(rng);
}

Tensor conv_forward(const Tensor& x, const ConvLayer& l) {
  int h = x.height(), w = x.width(), p = l.k / 2;
  Tensor y(h, w, l.out_c);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int o = 0; o < l.out_c; ++o) {
        double acc = l.b[o];
        for (int dr = 0; dr < l.k; ++dr) {
          int rr = r + dr - p;
          if (rr < 0 || rr >= h) continue;
          for (int dc = 0; dc < l.k; ++dc) {
            int cc = c + dc - p;
            if (cc < 0 || cc >= w) continue;
            const double* wk =
                &l.w[((static_cast<size_t>(o) * l.k + dr) * l.k + dc) * l.in_c];
            for (int i = 0; i < l.in_c; ++i) acc += wk[i] * x.at(rr, cc, i);
          }
        }
        y.at(r, c, o) = acc;
      }
  return y;
}

Tensor conv_backward_input(const Tensor& dy, const ConvLayer& l) {
  int h = dy.height(), w = dy.width(), p = l.k / 2;
  Tensor dx(h, w, l.in_c);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int o = 0; o < l.out_c; ++o) {
        double g = dy.at(r, c, o);
        if (g == 0.0) continue;
        for (int dr = 0; dr < l.k; ++dr) {
          int rr = r + dr - p;
          if (rr < 0 || rr >= h) continue;
          for (int dc = 0; dc < l.k; ++dc) {
            int cc = c + dc - p;
            if (cc < 0 || cc >= w) continue;
            const double* wk =
                &l.w[((static_cast<size_t>(o) * l.k + dr) * l.k + dc) * l.in_c];
            for (int i = 0; i < l.in_c; ++i) dx.at(rr, cc, i) += wk[i] * g;
          }
        }
      }
  return dx;
}

void conv_sgd_step(ConvLayer& l, const Tensor& x, const Tensor& dy, double lr) {
  int h = dy.height(), w = dy.width(), p = l.k / 2;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int o = 0; o < l.out_c; ++o) {
        double g = dy.at(r, c, o);
        if (g == 0.0) continue;
        l.b[o] -= lr * g;
        for (int dr = 0; dr < l.k; ++dr) {
          int rr = r + dr - p;
          if (rr < 0 || rr >= h) continue;
          for (int dc = 0; dc < l.k; ++dc) {
            int cc = c + dc - p;
            if (cc < 0 || cc >= w) continue;
            double* wk =
                &l.w[((static_cast<size_t>(o) * l.k + dr) * l.k + dc) * l.in_c];
            for (int i = 0; i < l.in_c; ++i) wk[i] -= lr * g * x.at(rr, cc, i);
          }
        }
      }
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = std::max(v, 0.0);
  return y;
}

Tensor relu_backward(const Tensor& dy, const Tensor& pre) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.size(); ++i)
    if (pre[i] <= 0.0) dx[i] = 0.0;
  return dx;
}

Tensor avgpool(const Tensor& x, int f) {
  Tensor y(x.height() / f, x.width() / f, x.channels());
  double inv = 1.0 / (f * f);
  for (int r = 0; r < y.height(); ++r)
    for (int c = 0; c < y.width(); ++c)
      for (int k = 0; k < x.channels(); ++k) {
        double acc = 0.0;
        for (int dr = 0; dr < f; ++dr)
          for (int dc = 0; dc < f; ++dc) acc += x.at(f * r + dr, f * c + dc, k);
        y.at(r, c, k) = acc * inv;
      }
  return y;
}

Tensor avgpool_backward(const Tensor& dy, int f) {
  Tensor dx(dy.height() * f, dy.width() * f, dy.channels());
  double inv = 1.0 / (f * f);
  for (int r = 0; r < dy.height(); ++r)
    for (int c = 0; c < dy.width(); ++c)
      for (int k = 0; k < dy.channels(); ++k) {
        double g = inv * dy.at(r, c, k);
        for (int dr = 0; dr < f; ++dr)
          for (int dc = 0; dc < f; ++dc) dx.at(f * r + dr, f * c + dc, k) = g;
      }
  return dx;
}

Tensor avgpool2(const Tensor& x) { return avgpool(x, 2); }
Tensor avgpool2_backward(const Tensor& dy) { return avgpool_backward(dy, 2); }

Tensor scale_input(const Tensor& image, const InputSpec& spec) {
  Tensor x = image;
  x *= spec.scale;
  for (double& v : x.data()) v -= spec.shift;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// ToyClassifier

struct ToyClassifier::Cache {
  Tensor x, z1, a1, p1, z2, a2, p2;
  std::vector<double> logits;
};

ToyClassifier::ToyClassifier(uint64_t seed, int width, int n_classes)
    : n_classes_(n_classes), width_(width) {
  if (width < 1 || n_classes < 2)
    throw std::invalid_argument("ToyClassifier: bad width or class count");
  id_ = "toy:cls:" + std::to_string(seed) + ":" + std::to_string(width);
  std::mt19937_64 rng(seed);
  init_conv(c1_, spec_.channels, width, 3, rng);
  init_conv(c2_, width, width, 3, rng);
  int flat = (spec_.height / 8) * (spec_.width / 8) * width;
  init_dense(fc_, flat, n_classes, rng);
}

void ToyClassifier::forward(const Tensor& image, Cache& cache) const {
  check_input(image);
  cache.x = scale_input(image, spec_);
  cache.z1 = conv_forward(cache.x, c1_);
  cache.a1 = relu(cache.z1);
  cache.p1 = avgpool(cache.a1, 4);
  cache.z2 = conv_forward(cache.p1, c2_);
  cache.a2 = relu(cache.z2);
  cache.p2 = avgpool2(cache.a2);
  cache.logits.assign(n_classes_, 0.0);
  for (int j = 0; j < n_classes_; ++j) {
    double acc = fc_.b[j];
    const double* wj = &fc_.w[static_cast<size_t>(j) * fc_.in_dim];
    for (int i = 0; i < fc_.in_dim; ++i) acc += wj[i] * cache.p2[i];
    cache.logits[j] = acc;
  }
}

Tensor ToyClassifier::predict_logits(const Tensor& image) const {
  Cache cache;
  forward(image, cache);
  Tensor out(1, 1, n_classes_);
  for (int j = 0; j < n_classes_; ++j) out[j] = cache.logits[j];
  return out;
}

Tensor ToyClassifier::extract_features(const Tensor& image) const {
  Cache cache;
  forward(image, cache);
  return cache.p1;
}

double ToyClassifier::loss_value(const LossSpec& loss, const Tensor& image,
                                 const Label& label,
                                 const Tensor* virtual_features) const {
  if (loss.kind == LossKind::kSegCrossEntropy || loss.kind == LossKind::kTotalSeg)
    throw std::invalid_argument("classifier: segmentation loss not applicable");
  Cache cache;
  forward(image, cache);
  double mix = 0.0, ce = 0.0;
  if (loss_uses_mix(loss.kind)) {
    if (!virtual_features)
      throw std::invalid_argument("mix loss requires virtual features");
    mix = mix_loss(cache.p1, *virtual_features, loss.eps_floor);
  }
  if (loss_uses_ce(loss.kind))
    ce = cross_entropy(cache.logits, label.class_id, loss.eps_floor);
  switch (loss.kind) {
    case LossKind::kMix:
      return mix;
    case LossKind::kCrossEntropy:
      return ce;
    default:
      return total_loss(mix, ce, loss.beta);
  }
}

Tensor ToyClassifier::input_gradient(const LossSpec& loss, const Tensor& image,
                                     const Label& label,
                                     const Tensor* virtual_features) const {
  if (loss.kind == LossKind::kSegCrossEntropy || loss.kind == LossKind::kTotalSeg)
    throw std::invalid_argument("classifier: segmentation loss not applicable");
  Cache cache;
  forward(image, cache);

  double ce_weight = 0.0;
  if (loss.kind == LossKind::kCrossEntropy) ce_weight = 1.0;
  if (loss.kind == LossKind::kTotal) ce_weight = loss.beta;

  // gradient arriving at pool1, from the mix term plus conv2 branch
  Tensor d_p1(cache.p1.height(), cache.p1.width(), cache.p1.channels());
  if (loss_uses_mix(loss.kind)) {
    if (!virtual_features)
      throw std::invalid_argument("mix loss requires virtual features");
    d_p1 = mix_loss_grad(cache.p1, *virtual_features, loss.eps_floor);
  }

  if (ce_weight != 0.0) {
    std::vector<double> d_logits = cross_entropy_grad(cache.logits, label.class_id);
    Tensor d_p2(cache.p2.height(), cache.p2.width(), cache.p2.channels());
    for (int j = 0; j < n_classes_; ++j) {
      const double* wj = &fc_.w[static_cast<size_t>(j) * fc_.in_dim];
      double g = ce_weight * d_logits[j];
      for (int i = 0; i < fc_.in_dim; ++i) d_p2[i] += wj[i] * g;
    }
    Tensor d_z2 = relu_backward(avgpool2_backward(d_p2), cache.z2);
    d_p1 += conv_backward_input(d_z2, c2_);
  }

  Tensor d_z1 = relu_backward(avgpool_backward(d_p1, 4), cache.z1);
  Tensor d_x = conv_backward_input(d_z1, c1_);
  d_x *= spec_.scale;
  return d_x;
}

void ToyClassifier::train_step(const Tensor& image, int class_id, double lr) {
  Cache cache;
  forward(image, cache);
  for (double v : cache.logits)
    if (!std::isfinite(v)) throw std::runtime_error("training diverged");

  std::vector<double> d_logits = cross_entropy_grad(cache.logits, class_id);
  Tensor d_p2(cache.p2.height(), cache.p2.width(), cache.p2.channels());
  for (int j = 0; j < n_classes_; ++j) {
    const double* wj = &fc_.w[static_cast<size_t>(j) * fc_.in_dim];
    for (int i = 0; i < fc_.in_dim; ++i) d_p2[i] += wj[i] * d_logits[j];
  }
  // dense update after its input gradient is taken
  for (int j = 0; j < n_classes_; ++j) {
    double* wj = &fc_.w[static_cast<size_t>(j) * fc_.in_dim];
    for (int i = 0; i < fc_.in_dim; ++i) wj[i] -= lr * d_logits[j] * cache.p2[i];
    fc_.b[j] -= lr * d_logits[j];
  }

  Tensor d_z2 = relu_backward(avgpool2_backward(d_p2), cache.z2);
  Tensor d_p1 = conv_backward_input(d_z2, c2_);
  conv_sgd_step(c2_, cache.p1, d_z2, lr);

  Tensor d_z1 = relu_backward(avgpool_backward(d_p1, 4), cache.z1);
  conv_sgd_step(c1_, cache.x, d_z1, lr);
}

// ---------------------------------------------------------------------------
// ToySegmenter

struct ToySegmenter::Cache {
  Tensor x, z1, a1, p1, z2, a2, p2, logits;
};

ToySegmenter::ToySegmenter(uint64_t seed, int width, int n_classes)
    : n_classes_(n_classes), width_(width) {
  if (width < 1 || n_classes < 2)
    throw std::invalid_argument("ToySegmenter: bad width or class count");
  id_ = "toy:seg:" + std::to_string(seed) + ":" + std::to_string(width);
  std::mt19937_64 rng(seed);
  init_conv(c1_, spec_.channels, width, 3, rng);
  init_conv(c2_, width, width, 3, rng);
  init_conv(head_, width, n_classes, 1, rng);
}

void ToySegmenter::forward(const Tensor& image, Cache& cache) const {
  check_input(image);
  cache.x = scale_input(image, spec_);
  cache.z1 = conv_forward(cache.x, c1_);
  cache.a1 = relu(cache.z1);
  cache.p1 = avgpool2(cache.a1);
  cache.z2 = conv_forward(cache.p1, c2_);
  cache.a2 = relu(cache.z2);
  cache.p2 = avgpool2(cache.a2);
  cache.logits = conv_forward(cache.p2, head_);
}

Tensor ToySegmenter::predict_logits(const Tensor& image) const {
  Cache cache;
  forward(image, cache);
  return cache.logits;
}

Tensor ToySegmenter::extract_features(const Tensor& image) const {
  Cache cache;
  forward(image, cache);
  return cache.p1;
}

double ToySegmenter::loss_value(const LossSpec& loss, const Tensor& image,
                                const Label& label,
                                const Tensor* virtual_features) const {
  if (loss.kind == LossKind::kCrossEntropy || loss.kind == LossKind::kTotal)
    throw std::invalid_argument("segmenter: use the segmentation CE losses");
  Cache cache;
  forward(image, cache);
  double mix = 0.0, ce = 0.0;
  if (loss_uses_mix(loss.kind)) {
    if (!virtual_features)
      throw std::invalid_argument("mix loss requires virtual features");
    mix = mix_loss(cache.p1, *virtual_features, loss.eps_floor);
  }
  if (loss.kind == LossKind::kSegCrossEntropy || loss.kind == LossKind::kTotalSeg)
    ce = seg_cross_entropy(cache.logits, label, loss.eps_floor);
  switch (loss.kind) {
    case LossKind::kMix:
      return mix;
    case LossKind::kSegCrossEntropy:
      return ce;
    default:
      return total_loss(mix, ce, loss.beta);
  }
}

Tensor ToySegmenter::input_gradient(const LossSpec& loss, const Tensor& image,
                                    const Label& label,
                                    const Tensor* virtual_features) const {
  if (loss.kind == LossKind::kCrossEntropy || loss.kind == LossKind::kTotal)
    throw std::invalid_argument("segmenter: use the segmentation CE losses");
  Cache cache;
  forward(image, cache);

  double ce_weight = 0.0;
  if (loss.kind == LossKind::kSegCrossEntropy) ce_weight = 1.0;
  if (loss.kind == LossKind::kTotalSeg) ce_weight = loss.beta;

  Tensor d_p1(cache.p1.height(), cache.p1.width(), cache.p1.channels());
  if (loss_uses_mix(loss.kind)) {
    if (!virtual_features)
      throw std::invalid_argument("mix loss requires virtual features");
    d_p1 = mix_loss_grad(cache.p1, *virtual_features, loss.eps_floor);
  }

  if (ce_weight != 0.0) {
    Tensor d_logits = seg_cross_entropy_grad(cache.logits, label);
    d_logits *= ce_weight;
    Tensor d_p2 = conv_backward_input(d_logits, head_);
    Tensor d_z2 = relu_backward(avgpool2_backward(d_p2), cache.z2);
    d_p1 += conv_backward_input(d_z2, c2_);
  }

  Tensor d_z1 = relu_backward(avgpool2_backward(d_p1), cache.z1);
  Tensor d_x = conv_backward_input(d_z1, c1_);
  d_x *= spec_.scale;
  return d_x;
}

void ToySegmenter::train_step(const Tensor& image, const Label& label, double lr) {
  Cache cache;
  forward(image, cache);
  if (!cache.logits.all_finite()) throw std::runtime_error("training diverged");

  Tensor d_logits = seg_cross_entropy_grad(cache.logits, label);
  Tensor d_p2 = conv_backward_input(d_logits, head_);
  conv_sgd_step(head_, cache.p2, d_logits, lr);

  Tensor d_z2 = relu_backward(avgpool2_backward(d_p2), cache.z2);
  conv_sgd_step(c2_, cache.p1, d_z2, lr);
  Tensor d_z1 = relu_backward(avgpool2_backward(conv_backward_input(d_z2, c2_)),
                              cache.z1);
  conv_sgd_step(c1_, cache.x, d_z1, lr);
}

// ---------------------------------------------------------------------------

std::shared_ptr<ToyClassifier> make_toy_classifier(uint64_t seed, int width,
                                                   int n_classes) {
  return std::make_shared<ToyClassifier>(seed, width, n_classes);
}

std::shared_ptr<ToySegmenter> make_toy_segmenter(uint64_t seed, int width,
                                                 int n_classes) {
  return std::make_shared<ToySegmenter>(seed, width, n_classes);
}

namespace {

void decay_weights(std::vector<double>& w, double factor) {
  for (double& v : w) v *= factor;
}

template <typename M, typename StepFn, typename DecayFn>
void train_loop(M& model, const Dataset& dataset, const TrainRecipe& recipe,
                StepFn step, DecayFn decay) {
  std::mt19937_64 rng(recipe.seed);
  std::vector<size_t> order(dataset.samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double factor = 1.0 - recipe.lr * recipe.weight_decay;
  for (int e = 0; e < recipe.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t idx : order) {
      step(model, dataset.samples[idx]);
      if (recipe.weight_decay > 0.0) decay(model, factor);
    }
  }
}

}  // namespace

void train_toy(ToyClassifier& model, const Dataset& dataset,
               const TrainRecipe& recipe) {
  train_loop(
      model, dataset, recipe,
      [&](ToyClassifier& m, const Sample& s) {
        m.train_step(s.image, s.label.class_id, recipe.lr);
      },
      [](ToyClassifier& m, double f) {
        decay_weights(m.conv1().w, f);
        decay_weights(m.conv2().w, f);
        decay_weights(m.dense().w, f);
      });
}

void train_toy(ToySegmenter& model, const Dataset& dataset,
               const TrainRecipe& recipe) {
  train_loop(
      model, dataset, recipe,
      [&](ToySegmenter& m, const Sample& s) {
        m.train_step(s.image, s.label, recipe.lr);
      },
      [](ToySegmenter& m, double f) {
        decay_weights(m.conv1().w, f);
        decay_weights(m.conv2().w, f);
        decay_weights(m.head().w, f);
      });
}

namespace {

double grating(double theta, double freq, double phase, int r, int c, int size) {
  double u = std::cos(theta) * c + std::sin(theta) * r;
  return std::sin(2.0 * std::numbers::pi * freq * u / size + phase);
}

// Oriented grating for class k; `jitter` shifts the phase per image so
// intra-class variation is structural, not just additive noise.
double class_pattern(int cls, int n_classes, int r, int c, int k, int size,
                     double jitter = 0.0) {
  double theta = std::numbers::pi * cls / n_classes;
  double freq = 3.0 + (cls % 3);
  double phase = 0.7 * cls + 0.5 * k + jitter;
  return grating(theta, freq, phase, r, c, size);
}

}  // namespace

Dataset make_synthetic(int n_classes, int n_per_class, int size, uint64_t seed,
                       double amplitude, double noise_sigma) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
  Dataset ds;
  ds.task = Task::kClassification;
  for (int k = 0; k < n_classes; ++k)
    ds.class_names.push_back("class" + (k < 10 ? std::string("0") : std::string()) +
                             std::to_string(k));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> orient(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> freq(3.0, 6.0);
  std::uniform_real_distribution<double> strength(0.0, 1.25 * amplitude);
  const int n_clutter = 3;
  for (int cls = 0; cls < n_classes; ++cls)
    for (int n = 0; n < n_per_class; ++n) {
      Sample s;
      s.name = ds.class_names[cls] + "_" + std::to_string(n);
      s.label = Label::of_class(cls);
      s.image = Tensor(size, size, 3);
      double jitter = phase(rng);
      // random-orientation distractor gratings: structured clutter the
      // pooling layers cannot average away, so class margins stay graded
      double ct[n_clutter], cf[n_clutter], cp[n_clutter], cb[n_clutter];
      for (int j = 0; j < n_clutter; ++j) {
        ct[j] = orient(rng);
        cf[j] = freq(rng);
        cp[j] = phase(rng);
        cb[j] = strength(rng);
      }
      for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
          for (int k = 0; k < 3; ++k) {
            double v = 127.5 +
                       amplitude * class_pattern(cls, n_classes, r, c, k, size,
                                                 jitter) +
                       noise(rng);
            for (int j = 0; j < n_clutter; ++j)
              v += cb[j] * grating(ct[j], cf[j], cp[j] + 0.5 * k, r, c, size);
            s.image.at(r, c, k) = std::clamp(v, 0.0, 255.0);
          }
      ds.samples.push_back(std::move(s));
    }
  return ds;
}

Dataset make_synthetic_segmentation(int n_classes, int n_images, int size,
                                    uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
  Dataset ds;
  ds.task = Task::kSegmentation;
  for (int k = 0; k < n_classes; ++k)
    ds.class_names.push_back("region" + std::to_string(k));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 25.0);
  const double amplitude = 24.0;
  for (int n = 0; n < n_images; ++n) {
    Sample s;
    s.name = "seg_" + std::to_string(n);
    s.image = Tensor(size, size, 3);
    std::vector<int> map(static_cast<size_t>(size) * size, 0);
    std::vector<uint8_t> valid(map.size(), 1);
    int quad[4];
    for (int& q : quad) q = static_cast<int>(rng() % n_classes);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        int q = (r >= size / 2 ? 2 : 0) + (c >= size / 2 ? 1 : 0);
        int cls = quad[q];
        size_t idx = static_cast<size_t>(r) * size + c;
        map[idx] = cls;
        if (r == 0 || c == 0 || r == size - 1 || c == size - 1) valid[idx] = 0;
        for (int k = 0; k < 3; ++k) {
          double v = 127.5 +
                     amplitude * class_pattern(cls, n_classes, r, c, k, size) +
                     noise(rng);
          s.image.at(r, c, k) = std::clamp(v, 0.0, 255.0);
        }
      }
    s.label = Label::of_map(std::move(map), std::move(valid), size, size);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Tensor finite_diff_gradient(const Model& model, const LossSpec& loss,
                            const Tensor& image, const Label& label,
                            const Tensor* virtual_features, double step,
                            const std::vector<size_t>& coords) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_gradient: step <= 0");
  Tensor g(image.height(), image.width(), image.channels());
  Tensor probe = image;
  auto eval_at = [&](size_t i, double v) {
    double keep = probe[i];
    probe[i] = v;
    double out = model.loss_value(loss, probe, label, virtual_features);
    probe[i] = keep;
    return out;
  };
  auto central = [&](size_t i) {
    double v = image[i];
    return (eval_at(i, v + step) - eval_at(i, v - step)) / (2.0 * step);
  };
  if (coords.empty()) {
    for (size_t i = 0; i < image.size(); ++i) g[i] = central(i);
  } else {
    for (size_t i : coords) g[i] = central(i);
  }
  return g;
}

double clean_accuracy(const Model& model, const Dataset& dataset) {
  if (dataset.samples.empty()) return 0.0;
  if (dataset.task == Task::kClassification) {
    int correct = 0;
    for (const Sample& s : dataset.samples)
      if (argmax_class(model.predict_logits(s.image)) == s.label.class_id)
        ++correct;
    return static_cast<double>(correct) / dataset.samples.size();
  }
  size_t correct = 0, total = 0;
  for (const Sample& s : dataset.samples) {
    Tensor up = bilinear_upsample(model.predict_logits(s.image), s.label.map_h,
                                  s.label.map_w);
    std::vector<int> pred = argmax_map(up);
    for (size_t i = 0; i < pred.size(); ++i) {
      if (!s.label.valid[i]) continue;
      ++total;
      if (pred[i] == s.label.map[i]) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

}  // namespace advkit
