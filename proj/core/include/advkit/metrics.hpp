#pragma once

#include <string>
#include <vector>

#include "advkit/attack.hpp"
#include "advkit/dataset.hpp"
#include "advkit/model.hpp"

namespace advkit {

struct ClassF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool present = false;  // class occurs in predictions or ground truth
};

struct EvalReport {
  std::string victim_id;
  std::string method;
  double success_rate = 0.0;
  double overall_accuracy = 0.0;
  size_t n_wrong = 0, n_correct = 0, n_total = 0;
  std::vector<ClassF1> per_class;
  double mean_f1 = 0.0;
  bool has_f1 = false;
  bool victim_resized = false;  // inputs were resized to the victim's spec
};

// n_wrong / n_total over valid entries. Throws when nothing is valid.
double success_rate(const std::vector<int>& predictions,
                    const std::vector<int>& labels,
                    const std::vector<uint8_t>* valid = nullptr);

double overall_accuracy(const std::vector<int>& predictions,
                        const std::vector<int>& labels,
                        const std::vector<uint8_t>* valid = nullptr);

// Per-class precision/recall/F1 plus the mean over classes present in
// predictions or ground truth.
std::vector<ClassF1> f1_scores(const std::vector<int>& predictions,
                               const std::vector<int>& labels, int n_classes,
                               const std::vector<uint8_t>* valid = nullptr);

double mean_f1(const std::vector<ClassF1>& scores);

// Scores `images` (paired index-wise with dataset labels) under a
// victim. Images whose size mismatches the victim's spec are resized
// and the report flagged.
EvalReport evaluate_victim(const Model& victim, const std::vector<Tensor>& images,
                           const Dataset& dataset, const std::string& method);

struct TransferReport {
  std::string surrogate_id;
  std::string method;
  std::vector<EvalReport> clean;        // one per victim
  std::vector<EvalReport> adversarial;  // one per victim
};

// Generates the adversarial set once on the surrogate, then feeds it to
// every victim; the clean baseline column is always included.
// `mix_source` supplies virtual-sample images for the mix methods
// (defaults to the attacked dataset).
TransferReport evaluate_transfer(const Model& surrogate,
                                 const std::vector<const Model*>& victims,
                                 const Dataset& dataset, const AttackConfig& config,
                                 const Dataset* mix_source = nullptr);

struct AblationToggles {
  bool ce = false;
  bool mix = false;
  bool momentum = false;
};

// One report per toggle combination. The CE-only row runs the plain
// I-FGSM baseline; rows with the mix term run the feature-space attack
// with momentum per the toggle.
std::vector<EvalReport> ablation_run(const Model& surrogate, const Model& victim,
                                     const Dataset& dataset,
                                     const std::vector<AblationToggles>& toggles,
                                     const AttackConfig& base_config,
                                     const Dataset* mix_source = nullptr);

std::string report_to_json(const std::vector<EvalReport>& reports);
std::string report_to_csv(const std::vector<EvalReport>& reports);
std::string report_to_table(const std::vector<EvalReport>& reports);

}  // namespace advkit
