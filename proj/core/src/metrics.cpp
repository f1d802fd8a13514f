#include "advkit/metrics.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "advkit/losses.hpp"
#include "advkit/toy_models.hpp"
#include "advkit/virtual_sample.hpp"
#include "json.hpp"

namespace advkit {

namespace {

struct Counts {
  size_t wrong = 0, total = 0;
};

Counts count_errors(const std::vector<int>& predictions,
                    const std::vector<int>& labels,
                    const std::vector<uint8_t>* valid) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("predictions/labels length mismatch");
  if (valid && valid->size() != labels.size())
    throw std::invalid_argument("valid mask length mismatch");
  Counts c;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    ++c.total;
    if (predictions[i] != labels[i]) ++c.wrong;
  }
  if (c.total == 0)
    throw std::invalid_argument("metric undefined: no valid entries");
  return c;
}

}  // namespace

double success_rate(const std::vector<int>& predictions,
                    const std::vector<int>& labels,
                    const std::vector<uint8_t>* valid) {
  Counts c = count_errors(predictions, labels, valid);
  return static_cast<double>(c.wrong) / c.total;
}

double overall_accuracy(const std::vector<int>& predictions,
                        const std::vector<int>& labels,
                        const std::vector<uint8_t>* valid) {
  Counts c = count_errors(predictions, labels, valid);
  return static_cast<double>(c.total - c.wrong) / c.total;
}

std::vector<ClassF1> f1_scores(const std::vector<int>& predictions,
                               const std::vector<int>& labels, int n_classes,
                               const std::vector<uint8_t>* valid) {
  count_errors(predictions, labels, valid);  // validates lengths / emptiness
  std::vector<size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    int p = predictions[i], y = labels[i];
    if (p < 0 || p >= n_classes || y < 0 || y >= n_classes)
      throw std::invalid_argument("f1_scores: class id out of range");
    if (p == y) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  std::vector<ClassF1> out(n_classes);
  for (int k = 0; k < n_classes; ++k) {
    size_t occur = tp[k] + fp[k] + fn[k];
    out[k].present = occur > 0;
    if (!out[k].present) continue;
    double prec = tp[k] + fp[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fp[k]) : 0.0;
    double rec = tp[k] + fn[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fn[k]) : 0.0;
    out[k].precision = prec;
    out[k].recall = rec;
    out[k].f1 = prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  return out;
}

double mean_f1(const std::vector<ClassF1>& scores) {
  double sum = 0.0;
  int n = 0;
  for (const ClassF1& s : scores)
    if (s.present) {
      sum += s.f1;
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

EvalReport evaluate_victim(const Model& victim, const std::vector<Tensor>& images,
                           const Dataset& dataset, const std::string& method) {
  if (images.size() != dataset.samples.size())
    throw std::invalid_argument("evaluate_victim: image/label count mismatch");
  EvalReport rep;
  rep.victim_id = victim.id();
  rep.method = method;

  std::vector<int> preds, labels;
  std::vector<uint8_t> valid;
  const InputSpec& spec = victim.input_spec();

  for (size_t i = 0; i < images.size(); ++i) {
    Tensor img = images[i];
    if (img.height() != spec.height || img.width() != spec.width) {
      img = bilinear_resize(img, spec.height, spec.width);
      rep.victim_resized = true;
    }
    const Label& label = dataset.samples[i].label;
    if (victim.task() == Task::kClassification) {
      preds.push_back(argmax_class(victim.predict_logits(img)));
      labels.push_back(label.class_id);
      valid.push_back(1);
    } else {
      Tensor up = bilinear_upsample(victim.predict_logits(img), label.map_h,
                                    label.map_w);
      std::vector<int> pm = argmax_map(up);
      preds.insert(preds.end(), pm.begin(), pm.end());
      labels.insert(labels.end(), label.map.begin(), label.map.end());
      valid.insert(valid.end(), label.valid.begin(), label.valid.end());
    }
  }

  Counts c{};
  for (size_t i = 0; i < preds.size(); ++i) {
    if (!valid[i]) continue;
    ++c.total;
    if (preds[i] != labels[i]) ++c.wrong;
  }
  if (c.total == 0)
    throw std::invalid_argument("evaluate_victim: no valid entries");
  rep.n_total = c.total;
  rep.n_wrong = c.wrong;
  rep.n_correct = c.total - c.wrong;
  rep.success_rate = static_cast<double>(c.wrong) / c.total;
  rep.overall_accuracy = static_cast<double>(rep.n_correct) / c.total;
  if (victim.task() == Task::kSegmentation) {
    rep.per_class = f1_scores(preds, labels, victim.num_classes(), &valid);
    rep.mean_f1 = mean_f1(rep.per_class);
    rep.has_f1 = true;
  }
  return rep;
}

TransferReport evaluate_transfer(const Model& surrogate,
                                 const std::vector<const Model*>& victims,
                                 const Dataset& dataset, const AttackConfig& config,
                                 const Dataset* mix_source) {
  TransferReport report;
  report.surrogate_id = surrogate.id();
  report.method = to_string(config.method);

  Tensor virtual_image;
  const Tensor* vptr = nullptr;
  if (config.method == AttackMethod::kMixup || config.method == AttackMethod::kMixcut) {
    const Dataset& src = mix_source ? *mix_source : dataset;
    VirtualSampleSpec vs;
    vs.method = config.method == AttackMethod::kMixup ? MixMethod::kMixup
                                                      : MixMethod::kMixcut;
    vs.n_mix = config.n_mix;
    vs.seed = config.seed;
    const InputSpec& spec = surrogate.input_spec();
    virtual_image = build_virtual_sample(src, vs, spec.height, spec.width);
    vptr = &virtual_image;
  }

  std::vector<AttackResult> results = attack_batch(surrogate, dataset, config, vptr);
  std::vector<Tensor> adv, clean;
  adv.reserve(results.size());
  for (size_t i = 0; i < results.size(); ++i) {
    adv.push_back(results[i].failed ? dataset.samples[i].image
                                    : results[i].adversarial);
    clean.push_back(dataset.samples[i].image);
  }
  for (const Model* victim : victims) {
    report.clean.push_back(evaluate_victim(*victim, clean, dataset, "clean"));
    report.adversarial.push_back(
        evaluate_victim(*victim, adv, dataset, report.method));
  }
  return report;
}

std::vector<EvalReport> ablation_run(const Model& surrogate, const Model& victim,
                                     const Dataset& dataset,
                                     const std::vector<AblationToggles>& toggles,
                                     const AttackConfig& base_config,
                                     const Dataset* mix_source) {
  if (toggles.empty())
    throw std::invalid_argument("ablation_run: empty toggle set");
  std::vector<EvalReport> reports;
  for (const AblationToggles& t : toggles) {
    if (!t.ce && !t.mix)
      throw std::invalid_argument("ablation_run: toggle row enables no loss term");
    AttackConfig cfg = base_config;
    std::string tag;
    if (!t.mix) {
      cfg.method = AttackMethod::kIfgsm;
      tag = "ce";
    } else {
      cfg.beta = t.ce ? base_config.beta : 0.0;
      cfg.momentum = t.momentum;
      tag = std::string(t.ce ? "ce+" : "") + "mix" + (t.momentum ? "+momentum" : "");
    }
    TransferReport tr = evaluate_transfer(surrogate, {&victim}, dataset, cfg,
                                          mix_source);
    EvalReport rep = tr.adversarial[0];
    rep.method = tag;
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string report_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const EvalReport& r : reports) {
    nlohmann::json j{{"victim", r.victim_id},
                     {"method", r.method},
                     {"success_rate", r.success_rate},
                     {"overall_accuracy", r.overall_accuracy},
                     {"n_wrong", r.n_wrong},
                     {"n_correct", r.n_correct},
                     {"n_total", r.n_total},
                     {"victim_resized", r.victim_resized}};
    if (r.has_f1) {
      j["mean_f1"] = r.mean_f1;
      nlohmann::json pc = nlohmann::json::array();
      for (const ClassF1& s : r.per_class)
        pc.push_back({{"precision", s.precision},
                      {"recall", s.recall},
                      {"f1", s.f1},
                      {"present", s.present}});
      j["per_class_f1"] = pc;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::string report_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "victim,method,success_rate,overall_accuracy,n_wrong,n_correct,n_total,mean_f1\n";
  for (const EvalReport& r : reports) {
    os << r.victim_id << ',' << r.method << ',' << r.success_rate << ','
       << r.overall_accuracy << ',' << r.n_wrong << ',' << r.n_correct << ','
       << r.n_total << ',';
    if (r.has_f1) os << r.mean_f1;
    os << '\n';
  }
  return os.str();
}

std::string report_to_table(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "victim" << std::setw(16) << "method"
     << std::right << std::setw(8) << "SR" << std::setw(8) << "OA"
     << std::setw(10) << "meanF1" << '\n';
  for (const EvalReport& r : reports) {
    os << std::left << std::setw(24) << r.victim_id << std::setw(16) << r.method
       << std::right << std::fixed << std::setprecision(4) << std::setw(8)
       << r.success_rate << std::setw(8) << r.overall_accuracy;
    if (r.has_f1)
      os << std::setw(10) << r.mean_f1;
    os << '\n';
  }
  return os.str();
}

}  // namespace advkit
