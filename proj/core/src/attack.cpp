#include "advkit/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "advkit/losses.hpp"

namespace advkit {

AttackMethod attack_method_from_string(const std::string& name) {
  if (name == "fgsm") return AttackMethod::kFgsm;
  if (name == "fgsm_l2") return AttackMethod::kFgsmL2;
  if (name == "fgsm_linf") return AttackMethod::kFgsmLinf;
  if (name == "ifgsm") return AttackMethod::kIfgsm;
  if (name == "cw") return AttackMethod::kCw;
  if (name == "mixup") return AttackMethod::kMixup;
  if (name == "mixcut") return AttackMethod::kMixcut;
  throw std::invalid_argument("unknown attack method: " + name);
}

std::string to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::kFgsm: return "fgsm";
    case AttackMethod::kFgsmL2: return "fgsm_l2";
    case AttackMethod::kFgsmLinf: return "fgsm_linf";
    case AttackMethod::kIfgsm: return "ifgsm";
    case AttackMethod::kCw: return "cw";
    case AttackMethod::kMixup: return "mixup";
    case AttackMethod::kMixcut: return "mixcut";
  }
  return "?";
}

void AttackConfig::validate() const {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (scale_copies < 1) throw std::invalid_argument("scale_copies must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
  if (n_mix < 2) throw std::invalid_argument("n_mix must be >= 2");
}

double AttackConfig::default_beta(AttackMethod m) {
  return m == AttackMethod::kMixcut ? 0.005 : 0.0005;
}

Tensor clip_valid(const Tensor& image) {
  Tensor out = image;
  for (double& v : out.data()) v = std::clamp(v, 0.0, 255.0);
  return out;
}

namespace {

LossSpec ce_loss_for(const Model& model) {
  LossSpec loss;
  loss.kind = model.task() == Task::kClassification ? LossKind::kCrossEntropy
                                                    : LossKind::kSegCrossEntropy;
  return loss;
}

AttackResult finish(const Model& /*model*/, const Tensor& clean, Tensor adv,
                    std::vector<IterationTrace> trace, AttackConfig config,
                    bool degenerate) {
  AttackResult res;
  res.adversarial = std::move(adv);
  res.perturbation = res.adversarial - clean;
  res.trace = std::move(trace);
  res.config = std::move(config);
  res.degenerate = degenerate;
  return res;
}

// Subgradient of |delta|_inf: sign on the max-magnitude coordinates,
// split evenly across ties; zero for delta = 0.
Tensor linf_subgradient(const Tensor& delta) {
  Tensor g(delta.height(), delta.width(), delta.channels());
  double m = linf_norm(delta);
  if (m <= 0.0) return g;
  const double tol = 1e-12;
  std::vector<size_t> ties;
  for (size_t i = 0; i < delta.size(); ++i)
    if (std::fabs(delta[i]) >= m - tol) ties.push_back(i);
  for (size_t i : ties)
    g[i] = (delta[i] > 0 ? 1.0 : -1.0) / static_cast<double>(ties.size());
  return g;
}

}  // namespace

AttackResult fgsm(const Model& model, const Tensor& image, const Label& label,
                  double epsilon, AttackMethod norm) {
  model.check_input(image);
  LossSpec loss = ce_loss_for(model);
  Tensor grad = model.input_gradient(loss, image, label, nullptr);
  double ce = model.loss_value(loss, image, label, nullptr);

  Tensor step(image.height(), image.width(), image.channels());
  bool degenerate = false;
  switch (norm) {
    case AttackMethod::kFgsm:
      for (size_t i = 0; i < grad.size(); ++i)
        step[i] = epsilon * (grad[i] > 0 ? 1.0 : (grad[i] < 0 ? -1.0 : 0.0));
      break;
    case AttackMethod::kFgsmL2: {
      double n = l2_norm(grad);
      if (n <= 0.0) {
        degenerate = true;
      } else {
        step = grad * (epsilon / n);
      }
      break;
    }
    case AttackMethod::kFgsmLinf: {
      double n = linf_norm(grad);
      if (n <= 0.0) {
        degenerate = true;
      } else {
        step = grad * (epsilon / n);
      }
      break;
    }
    default:
      throw std::invalid_argument("fgsm: not a single-step norm variant");
  }

  AttackConfig cfg;
  cfg.method = norm;
  cfg.epsilon = epsilon;
  cfg.iterations = 1;
  std::vector<IterationTrace> trace{{ce, ce, l1_norm(grad), degenerate}};
  return finish(model, image, clip_valid(image + step), std::move(trace),
                std::move(cfg), degenerate);
}

AttackResult ifgsm(const Model& model, const Tensor& image, const Label& label,
                   double alpha, int iterations) {
  model.check_input(image);
  LossSpec loss = ce_loss_for(model);
  Tensor adv = image;
  std::vector<IterationTrace> trace;
  bool degenerate = false;
  for (int t = 0; t < iterations; ++t) {
    Tensor grad = model.input_gradient(loss, adv, label, nullptr);
    double ce = model.loss_value(loss, adv, label, nullptr);
    Tensor step(adv.height(), adv.width(), adv.channels());
    for (size_t i = 0; i < grad.size(); ++i)
      step[i] = alpha * (grad[i] > 0 ? 1.0 : (grad[i] < 0 ? -1.0 : 0.0));
    bool zero = l1_norm(grad) == 0.0;
    degenerate |= zero;
    adv = clip_valid(adv + step);
    trace.push_back({ce, ce, l1_norm(grad), zero});
  }
  AttackConfig cfg;
  cfg.method = AttackMethod::kIfgsm;
  cfg.alpha = alpha;
  cfg.iterations = iterations;
  return finish(model, image, std::move(adv), std::move(trace), std::move(cfg),
                degenerate);
}

AttackResult cw_attack(const Model& model, const Tensor& image, const Label& label,
                       double mu, double alpha, int iterations) {
  model.check_input(image);
  LossSpec loss = ce_loss_for(model);
  Tensor adv = image;
  std::vector<IterationTrace> trace;
  bool degenerate = false;
  for (int t = 0; t < iterations; ++t) {
    Tensor delta = adv - image;
    Tensor grad_ce = model.input_gradient(loss, adv, label, nullptr);
    double ce = model.loss_value(loss, adv, label, nullptr);
    // descend on |delta|_inf - mu * CE
    Tensor dir = grad_ce * mu - linf_subgradient(delta);
    double n = linf_norm(dir);
    double objective = linf_norm(delta) - mu * ce;
    if (n <= 0.0) {
      degenerate = true;
      trace.push_back({objective, ce, 0.0, true});
      continue;
    }
    adv = clip_valid(adv + dir * (alpha / n));
    trace.push_back({objective, ce, l1_norm(dir), false});
  }
  AttackConfig cfg;
  cfg.method = AttackMethod::kCw;
  cfg.alpha = alpha;
  cfg.iterations = iterations;
  cfg.mu = mu;
  return finish(model, image, std::move(adv), std::move(trace), std::move(cfg),
                degenerate);
}

Tensor scale_augmented_gradient(const Model& model, const LossSpec& loss,
                                const Tensor& image, const Label& label,
                                const Tensor* virtual_features, int copies) {
  if (copies < 1) throw std::invalid_argument("scale copies must be >= 1");
  Tensor acc(image.height(), image.width(), image.channels());
  double factor = 1.0;
  for (int i = 0; i < copies; ++i) {
    Tensor scaled = image * factor;
    Tensor g = model.input_gradient(loss, scaled, label, virtual_features);
    g *= factor;
    acc += g;
    factor *= 0.5;
  }
  acc *= 1.0 / copies;
  return acc;
}

AttackResult mix_attack(const Model& model, const Tensor& image, const Label& label,
                        const Tensor& virtual_image, const AttackConfig& config) {
  config.validate();
  model.check_input(image);
  model.check_input(virtual_image);

  Tensor virtual_features = model.extract_features(virtual_image);
  LossSpec loss;
  loss.kind = model.task() == Task::kClassification ? LossKind::kTotal
                                                    : LossKind::kTotalSeg;
  loss.beta = config.beta;
  LossSpec ce_loss = ce_loss_for(model);

  Tensor adv = image;
  Tensor velocity(image.height(), image.width(), image.channels());
  std::vector<IterationTrace> trace;
  bool degenerate = false;

  for (int t = 0; t < config.iterations; ++t) {
    Tensor grad =
        config.scale_augment
            ? scale_augmented_gradient(model, loss, adv, label, &virtual_features,
                                       config.scale_copies)
            : model.input_gradient(loss, adv, label, &virtual_features);
    double value = model.loss_value(loss, adv, label, &virtual_features);
    double ce = model.loss_value(ce_loss, adv, label, nullptr);
    double g1 = l1_norm(grad);

    Tensor direction(adv.height(), adv.width(), adv.channels());
    if (config.momentum) {
      if (g1 > 0.0) velocity += grad * (1.0 / g1);
      double vmax = linf_norm(velocity);
      if (vmax > 0.0) direction = velocity * (1.0 / vmax);
    } else {
      double gmax = linf_norm(grad);
      if (gmax > 0.0) direction = grad * (1.0 / gmax);
    }

    bool zero = linf_norm(direction) == 0.0;
    degenerate |= zero;
    if (!zero) adv = clip_valid(adv + direction * config.alpha);
    trace.push_back({value, ce, g1, zero});
  }
  return finish(model, image, std::move(adv), std::move(trace), config,
                degenerate);
}

AttackResult run_attack(const Model& model, const Tensor& image, const Label& label,
                        const AttackConfig& config, const Tensor* virtual_image) {
  switch (config.method) {
    case AttackMethod::kFgsm:
    case AttackMethod::kFgsmL2:
    case AttackMethod::kFgsmLinf:
      return fgsm(model, image, label, config.epsilon, config.method);
    case AttackMethod::kIfgsm:
      return ifgsm(model, image, label, config.alpha, config.iterations);
    case AttackMethod::kCw:
      return cw_attack(model, image, label, config.mu, config.alpha,
                       config.iterations);
    case AttackMethod::kMixup:
    case AttackMethod::kMixcut:
      if (!virtual_image)
        throw std::invalid_argument("mix attack requires a virtual image");
      return mix_attack(model, image, label, *virtual_image, config);
  }
  throw std::logic_error("unreachable");
}

std::vector<AttackResult> attack_batch(const Model& model, const Dataset& dataset,
                                       const AttackConfig& config,
                                       const Tensor* virtual_image, int jobs) {
  std::vector<AttackResult> results(dataset.samples.size());
  auto run_one = [&](size_t i) {
    try {
      results[i] = run_attack(model, dataset.samples[i].image,
                              dataset.samples[i].label, config, virtual_image);
    } catch (const std::exception& e) {
      results[i].failed = true;
      results[i].error = e.what();
      results[i].config = config;
    }
  };
  if (jobs <= 1 || results.size() <= 1) {
    for (size_t i = 0; i < results.size(); ++i) run_one(i);
    return results;
  }
  std::vector<std::thread> workers;
  std::atomic<size_t> next{0};
  int n = std::min<int>(jobs, static_cast<int>(results.size()));
  for (int t = 0; t < n; ++t)
    workers.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < results.size(); i = next.fetch_add(1))
        run_one(i);
    });
  for (std::thread& t : workers) t.join();
  return results;
}

}  // namespace advkit
