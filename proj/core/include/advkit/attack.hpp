#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advkit/dataset.hpp"
#include "advkit/model.hpp"
#include "advkit/tensor.hpp"
#include "advkit/virtual_sample.hpp"

namespace advkit {

enum class AttackMethod {
  kFgsm,      // sign step
  kFgsmL2,    // l2-normalized step
  kFgsmLinf,  // linf-normalized step
  kIfgsm,
  kCw,
  kMixup,
  kMixcut,
};

AttackMethod attack_method_from_string(const std::string& name);
std::string to_string(AttackMethod m);

struct AttackConfig {
  AttackMethod method = AttackMethod::kMixup;
  double epsilon = 1.0;   // pixel units
  double alpha = 1.0;     // pixel units
  int iterations = 5;     // T
  double beta = 0.0005;   // CE weight in the combined loss
  int n_mix = 10;
  bool momentum = true;
  bool scale_augment = true;
  int scale_copies = 3;  // m
  double mu = 1.0;       // CE weight in the C&W objective
  uint64_t seed = 0;

  void validate() const;
  // 0.0005 for mixup, 0.005 for mixcut
  static double default_beta(AttackMethod m);
};

struct IterationTrace {
  double loss = 0.0;
  double ce = 0.0;
  double grad_l1 = 0.0;
  bool skipped = false;
};

struct AttackResult {
  Tensor adversarial;
  Tensor perturbation;
  std::vector<IterationTrace> trace;
  AttackConfig config;
  bool degenerate = false;  // a zero-gradient step was hit
  bool failed = false;
  std::string error;
};

// Elementwise clamp to the canonical [0, 255] pixel range.
Tensor clip_valid(const Tensor& image);

// Single-step attack on the CE loss; norm selects sign / l2 / linf
// scaling of the gradient.
AttackResult fgsm(const Model& model, const Tensor& image, const Label& label,
                  double epsilon, AttackMethod norm = AttackMethod::kFgsm);

// T sign-steps of size alpha with clipping each iteration.
AttackResult ifgsm(const Model& model, const Tensor& image, const Label& label,
                   double alpha, int iterations);

// T linf-normalized descent steps on |delta|_inf - mu * CE.
AttackResult cw_attack(const Model& model, const Tensor& image, const Label& label,
                       double mu, double alpha, int iterations);

// Mean over i = 0..m-1 of the input gradient at image / 2^i, with the
// 1/2^i chain factor mapping each back to the unscaled input.
Tensor scale_augmented_gradient(const Model& model, const LossSpec& loss,
                                const Tensor& image, const Label& label,
                                const Tensor* virtual_features, int copies);

// Momentum feature-space attack: accumulates l1-normalized gradients of
// the combined loss and steps by the linf-normalized accumulator.
AttackResult mix_attack(const Model& model, const Tensor& image, const Label& label,
                        const Tensor& virtual_image, const AttackConfig& config);

// Dispatches on config.method; virtual_image is required for the mix
// methods and ignored otherwise.
AttackResult run_attack(const Model& model, const Tensor& image, const Label& label,
                        const AttackConfig& config,
                        const Tensor* virtual_image = nullptr);

// Independent per-image attacks in input order; per-image failures are
// recorded in the result and the batch continues. `jobs` > 1 runs
// images on a thread pool (results are order- and value-identical).
std::vector<AttackResult> attack_batch(const Model& model, const Dataset& dataset,
                                       const AttackConfig& config,
                                       const Tensor* virtual_image = nullptr,
                                       int jobs = 1);

}  // namespace advkit
