#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "advkit/dataset.hpp"
#include "advkit/model.hpp"
#include "advkit/tensor.hpp"

namespace advkit {

// Square conv, stride 1, zero padding k/2. Weights laid out
// [out_c][ky][kx][in_c].
struct ConvLayer {
  int in_c = 0, out_c = 0, k = 3;
  std::vector<double> w;
  std::vector<double> b;
};

struct DenseLayer {
  int in_dim = 0, out_dim = 0;
  std::vector<double> w;  // [out][in]
  std::vector<double> b;
};

// conv3x3 -> ReLU -> avgpool4 (feature tap) -> conv3x3 -> ReLU ->
// avgpool2 -> dense -> logits. Input 32x32x3, pixels in [0, 255],
// standardized internally per InputSpec. The wide first pool keeps the
// tapped features low-noise so feature-space losses track the class
// signal rather than pixel noise.
class ToyClassifier : public Model {
 public:
  ToyClassifier(uint64_t seed, int width, int n_classes = 4);

  const std::string& id() const override { return id_; }
  Task task() const override { return Task::kClassification; }
  const InputSpec& input_spec() const override { return spec_; }
  int num_classes() const override { return n_classes_; }
  const std::string& feature_tap() const override { return tap_; }

  Tensor predict_logits(const Tensor& image) const override;
  Tensor extract_features(const Tensor& image) const override;
  Tensor input_gradient(const LossSpec& loss, const Tensor& image,
                        const Label& label,
                        const Tensor* virtual_features) const override;
  double loss_value(const LossSpec& loss, const Tensor& image,
                    const Label& label,
                    const Tensor* virtual_features) const override;

  // One SGD step on the classification CE of (image, class_id).
  void train_step(const Tensor& image, int class_id, double lr);

  int width() const { return width_; }
  ConvLayer& conv1() { return c1_; }
  ConvLayer& conv2() { return c2_; }
  DenseLayer& dense() { return fc_; }
  const ConvLayer& conv1() const { return c1_; }
  const ConvLayer& conv2() const { return c2_; }
  const DenseLayer& dense() const { return fc_; }
  void set_id(std::string id) { id_ = std::move(id); }

 private:
  struct Cache;
  void forward(const Tensor& image, Cache& cache) const;

  std::string id_;
  std::string tap_ = "pool1";
  InputSpec spec_;
  int n_classes_;
  int width_;
  ConvLayer c1_, c2_;
  DenseLayer fc_;
};

// conv3x3 -> ReLU -> avgpool2 (feature tap) -> conv3x3 -> ReLU ->
// avgpool2 -> conv1x1 head. 32x32 input yields an 8x8 x n_v logit map,
// exercising the bilinear-upsampling loss path.
class ToySegmenter : public Model {
 public:
  explicit ToySegmenter(uint64_t seed, int width = 8, int n_classes = 6);

  const std::string& id() const override { return id_; }
  Task task() const override { return Task::kSegmentation; }
  const InputSpec& input_spec() const override { return spec_; }
  int num_classes() const override { return n_classes_; }
  const std::string& feature_tap() const override { return tap_; }

  Tensor predict_logits(const Tensor& image) const override;
  Tensor extract_features(const Tensor& image) const override;
  Tensor input_gradient(const LossSpec& loss, const Tensor& image,
                        const Label& label,
                        const Tensor* virtual_features) const override;
  double loss_value(const LossSpec& loss, const Tensor& image,
                    const Label& label,
                    const Tensor* virtual_features) const override;

  void train_step(const Tensor& image, const Label& label, double lr);

  int width() const { return width_; }
  ConvLayer& conv1() { return c1_; }
  ConvLayer& conv2() { return c2_; }
  ConvLayer& head() { return head_; }
  const ConvLayer& conv1() const { return c1_; }
  const ConvLayer& conv2() const { return c2_; }
  const ConvLayer& head() const { return head_; }
  void set_id(std::string id) { id_ = std::move(id); }

 private:
  struct Cache;
  void forward(const Tensor& image, Cache& cache) const;

  std::string id_;
  std::string tap_ = "pool1";
  InputSpec spec_;
  int n_classes_;
  int width_;
  ConvLayer c1_, c2_, head_;
};

std::shared_ptr<ToyClassifier> make_toy_classifier(uint64_t seed, int width = 8,
                                                   int n_classes = 4);
std::shared_ptr<ToySegmenter> make_toy_segmenter(uint64_t seed, int width = 8,
                                                 int n_classes = 6);

struct TrainRecipe {
  int epochs = 200;
  double lr = 0.01;
  double weight_decay = 0.0;  // L2 coupling; biases exempt
  uint64_t seed = 0;
};

// Plain per-sample SGD on CE with a seeded shuffle per epoch; throws on
// divergence (non-finite loss). Deterministic given (model, recipe).
void train_toy(ToyClassifier& model, const Dataset& dataset,
               const TrainRecipe& recipe);
void train_toy(ToySegmenter& model, const Dataset& dataset,
               const TrainRecipe& recipe);

// Balanced class-conditional gratings with per-image phase jitter,
// random-orientation clutter gratings, and seeded Gaussian noise;
// bit-reproducible from the seed.
Dataset make_synthetic(int n_classes, int n_per_class, int size, uint64_t seed,
                       double amplitude = 1.5, double noise_sigma = 4.5);

// Quadrant-textured segmentation images with dense label maps; a one
// pixel border is flagged invalid to exercise the valid-pixel masking.
Dataset make_synthetic_segmentation(int n_classes, int n_images, int size,
                                    uint64_t seed);

// Central-difference gradient of model.loss_value over every coordinate
// (or the subset `coords` when nonempty). Independent oracle for the
// analytic input_gradient path.
Tensor finite_diff_gradient(const Model& model, const LossSpec& loss,
                            const Tensor& image, const Label& label,
                            const Tensor* virtual_features, double step,
                            const std::vector<size_t>& coords = {});

// Fraction of dataset samples the classifier labels correctly.
double clean_accuracy(const Model& model, const Dataset& dataset);

}  // namespace advkit
