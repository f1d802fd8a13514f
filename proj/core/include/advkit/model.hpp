#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advkit/tensor.hpp"

namespace advkit {

enum class Task { kClassification, kSegmentation };

// Input contract of a model: spatial size, channel count, and the affine
// normalization x*scale - shift applied internally before the first
// layer (pixels arrive in [0, 255]).
struct InputSpec {
  int height = 32;
  int width = 32;
  int channels = 3;
  double scale = 1.0 / 32.0;
  double shift = 127.5 / 32.0;
};

enum class LossKind { kMix, kCrossEntropy, kSegCrossEntropy, kTotal, kTotalSeg };

// Scalar objective selector. beta weights the cross-entropy term of the
// combined losses; eps_floor guards every logarithm.
struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  double beta = 0.0;
  double eps_floor = 1e-12;
};

inline bool loss_uses_mix(LossKind k) {
  return k == LossKind::kMix || k == LossKind::kTotal || k == LossKind::kTotalSeg;
}
inline bool loss_uses_ce(LossKind k) {
  return k != LossKind::kMix;
}

// Ground truth fed to a loss: a class id for classification, a dense
// label map plus validity mask (background/clutter excluded) for
// segmentation. Maps are h x w; valid entries are nonzero.
struct Label {
  int class_id = -1;
  std::vector<int> map;
  std::vector<uint8_t> valid;
  int map_h = 0, map_w = 0;

  static Label of_class(int id) {
    Label l;
    l.class_id = id;
    return l;
  }
  static Label of_map(std::vector<int> m, std::vector<uint8_t> v, int h, int w) {
    Label l;
    l.map = std::move(m);
    l.valid = std::move(v);
    l.map_h = h;
    l.map_w = w;
    return l;
  }
};

// Abstract surrogate/victim model: prediction, shallow-feature extraction
// at the configured tap, and analytic input gradients of the attack
// losses. All three are pure for fixed weights; implementations must be
// safe to call from concurrent workers or trivially cloneable.
class Model {
 public:
  virtual ~Model() = default;

  virtual const std::string& id() const = 0;
  virtual Task task() const = 0;
  virtual const InputSpec& input_spec() const = 0;
  virtual int num_classes() const = 0;
  virtual const std::string& feature_tap() const = 0;

  // Classification: 1 x 1 x n_v scores. Segmentation: score map at the
  // model's output resolution, n_v channels.
  virtual Tensor predict_logits(const Tensor& image) const = 0;

  // Activations at the feature tap (first pooling layer by default).
  virtual Tensor extract_features(const Tensor& image) const = 0;

  // d(loss)/d(image), same shape as the image. virtual_features is
  // required whenever the loss includes the mix term.
  virtual Tensor input_gradient(const LossSpec& loss, const Tensor& image,
                                const Label& label,
                                const Tensor* virtual_features) const = 0;

  // Scalar value of the same loss; used by traces and oracles.
  virtual double loss_value(const LossSpec& loss, const Tensor& image,
                            const Label& label,
                            const Tensor* virtual_features) const = 0;

  void check_input(const Tensor& image) const {
    const InputSpec& s = input_spec();
    if (image.height() != s.height || image.width() != s.width ||
        image.channels() != s.channels)
      throw std::invalid_argument("model " + id() + ": input shape mismatch");
  }
};

using ModelPtr = std::shared_ptr<const Model>;

// argmax class of a classification logit vector.
int argmax_class(const Tensor& logits);

// Per-pixel argmax of an n_v-channel score map.
std::vector<int> argmax_map(const Tensor& logit_map);

}  // namespace advkit
