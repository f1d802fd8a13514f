#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advkit/attack.hpp"
#include "advkit/dataset_io.hpp"
#include "advkit/metrics.hpp"
#include "advkit/registry.hpp"
#include "advkit/serialize.hpp"
#include "advkit/toy_models.hpp"
#include "advkit/virtual_sample.hpp"

namespace fs = std::filesystem;
using namespace advkit;

namespace {

uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path.string());
  uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

struct AttackFlags {
  std::string surrogate, method, input, out, mix_source;
  AttackConfig config;
  bool no_momentum = false;
  bool no_scale_augment = false;
  double beta = -1.0;  // <0 means per-method default
  int jobs = 1;
};

int cmd_attack(const AttackFlags& f) {
  auto model = resolve_model(f.surrogate);
  Dataset ds = load_dataset(f.input);

  AttackConfig cfg = f.config;
  cfg.method = attack_method_from_string(f.method);
  cfg.momentum = !f.no_momentum;
  cfg.scale_augment = !f.no_scale_augment;
  cfg.beta = f.beta >= 0.0 ? f.beta : AttackConfig::default_beta(cfg.method);
  cfg.validate();

  Tensor virtual_image;
  const Tensor* vptr = nullptr;
  if (cfg.method == AttackMethod::kMixup || cfg.method == AttackMethod::kMixcut) {
    Dataset mix_ds;
    const Dataset* src = &ds;
    if (!f.mix_source.empty()) {
      mix_ds = load_dataset(f.mix_source);
      src = &mix_ds;
    }
    VirtualSampleSpec vs;
    vs.method = cfg.method == AttackMethod::kMixup ? MixMethod::kMixup
                                                   : MixMethod::kMixcut;
    vs.n_mix = cfg.n_mix;
    vs.seed = cfg.seed;
    const InputSpec& spec = model->input_spec();
    virtual_image = build_virtual_sample(*src, vs, spec.height, spec.width);
    vptr = &virtual_image;
  }

  std::vector<AttackResult> results = attack_batch(*model, ds, cfg, vptr, f.jobs);
  ExportBundle bundle = export_adversarial_set(results, f.out, ds);

  double max_delta = 0.0, sum_delta = 0.0;
  int failures = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].failed) {
      ++failures;
      std::cerr << "attack failed for " << ds.samples[i].name << ": "
                << results[i].error << '\n';
      continue;
    }
    max_delta = std::max(max_delta, bundle.entries[i].delta_linf);
    sum_delta += bundle.entries[i].delta_linf;
  }
  size_t ok = results.size() - failures;
  std::cout << "attacked " << ok << "/" << results.size() << " images; |delta|_inf"
            << " max " << max_delta << " mean " << (ok ? sum_delta / ok : 0.0)
            << "; bundle at " << f.out << '\n';
  return failures == static_cast<int>(results.size()) && !results.empty() ? 1 : 0;
}

struct EvaluateFlags {
  std::vector<std::string> victims;
  std::string adv, clean, out_prefix;
};

int cmd_evaluate(const EvaluateFlags& f) {
  Dataset adv = load_dataset(f.adv);
  Dataset clean = load_dataset(f.clean);
  if (adv.samples.size() != clean.samples.size())
    throw std::runtime_error("adversarial and clean sets differ in size");

  std::vector<Tensor> adv_images, clean_images;
  for (const Sample& s : adv.samples) adv_images.push_back(s.image);
  for (const Sample& s : clean.samples) clean_images.push_back(s.image);

  std::vector<EvalReport> reports;
  for (const std::string& vid : f.victims) {
    auto victim = resolve_model(vid);
    EvalReport base = evaluate_victim(*victim, clean_images, clean, "clean");
    EvalReport attacked = evaluate_victim(*victim, adv_images, adv, "adversarial");
    if (victim->task() == Task::kClassification) {
      std::cout << vid << ": SR " << attacked.success_rate << " OA "
                << attacked.overall_accuracy << " (clean OA "
                << base.overall_accuracy << ")\n";
    } else {
      std::cout << vid << ": SR " << attacked.success_rate << " mean F1 "
                << attacked.mean_f1 << " (clean mean F1 " << base.mean_f1
                << ")\n";
    }
    reports.push_back(std::move(base));
    reports.push_back(std::move(attacked));
  }
  if (!f.out_prefix.empty()) {
    std::ofstream(f.out_prefix + ".json") << report_to_json(reports);
    std::ofstream(f.out_prefix + ".csv") << report_to_csv(reports);
  }
  std::cout << report_to_table(reports);
  return 0;
}

struct AblateFlags {
  std::string surrogate, victim, input, out_prefix;
  std::vector<std::string> toggles;
  AttackConfig config;
  double beta = -1.0;
  std::string method = "mixup";
};

int cmd_ablate(const AblateFlags& f) {
  auto surrogate = resolve_model(f.surrogate);
  auto victim = resolve_model(f.victim);
  Dataset ds = load_dataset(f.input);

  std::vector<AblationToggles> toggles;
  for (const std::string& row : f.toggles) {
    AblationToggles t;
    std::stringstream ss(row);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "ce") t.ce = true;
      else if (item == "mix") t.mix = true;
      else if (item == "momentum") t.momentum = true;
      else throw std::runtime_error("unknown toggle: " + item);
    }
    toggles.push_back(t);
  }

  AttackConfig cfg = f.config;
  cfg.method = attack_method_from_string(f.method);
  cfg.beta = f.beta >= 0.0 ? f.beta : AttackConfig::default_beta(cfg.method);
  std::vector<EvalReport> reports =
      ablation_run(*surrogate, *victim, ds, toggles, cfg);
  std::cout << report_to_table(reports);
  if (!f.out_prefix.empty()) {
    std::ofstream(f.out_prefix + ".json") << report_to_json(reports);
    std::ofstream(f.out_prefix + ".csv") << report_to_csv(reports);
  }
  return 0;
}

struct GenToyFlags {
  std::string out;
  uint64_t seed = 42;
  int classes = 4, per_class = 125, size = 32, width = 8;
  int epochs = 200;
  double lr = 0.01;
  bool force = false;
};

int cmd_gen_toy(const GenToyFlags& f) {
  if (f.size != 32)
    throw std::runtime_error(
        "gen-toy: the reference classifier takes 32x32 inputs; --size must be 32");
  fs::path out = f.out;
  fs::path weights = out / "toy_cls.bin";
  fs::path dataset_dir = out / "dataset";
  if (!f.force && (fs::exists(weights) || fs::exists(dataset_dir / "manifest.csv"))) {
    std::cerr << "fixtures already exist at " << out << "; use --force to overwrite\n";
    return 1;
  }
  Dataset ds = make_synthetic(f.classes, f.per_class, f.size, f.seed);
  save_dataset(ds, dataset_dir);

  auto model = make_toy_classifier(f.seed, f.width, f.classes);
  TrainRecipe recipe;
  recipe.epochs = f.epochs;
  recipe.lr = f.lr;
  recipe.seed = f.seed;
  train_toy(*model, ds, recipe);
  save_model(weights, *model);

  std::ofstream reg(out / "registry.txt");
  reg << "# id arch weights tap h w c\n";
  reg << "toy-trained - toy_cls.bin pool1 " << f.size << ' ' << f.size << " 3\n";

  std::ofstream sums(out / "checksums.txt");
  sums << std::hex;
  sums << fnv1a_file(weights) << "  toy_cls.bin\n";
  sums << fnv1a_file(dataset_dir / "manifest.csv") << "  dataset/manifest.csv\n";
  for (const Sample& s : ds.samples)
    sums << fnv1a_file(dataset_dir / "images" / (s.name + ".png")) << "  dataset/images/"
         << s.name << ".png\n";

  double acc = clean_accuracy(*model, ds);
  std::cout << "fixtures written to " << out << "; train accuracy " << acc << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box transferable adversarial attack toolkit"};
  app.require_subcommand(1);

  AttackFlags af;
  CLI::App* attack = app.add_subcommand("attack", "Generate an adversarial bundle");
  attack->add_option("--surrogate", af.surrogate, "Surrogate model id")->required();
  attack->add_option("--method", af.method,
                     "fgsm|fgsm_l2|fgsm_linf|ifgsm|cw|mixup|mixcut")->required();
  attack->add_option("--input", af.input, "Dataset manifest CSV")->required();
  attack->add_option("--out", af.out, "Output bundle directory")->required();
  attack->add_option("--epsilon", af.config.epsilon, "Perturbation level (pixels)")
      ->capture_default_str();
  attack->add_option("--alpha", af.config.alpha, "Step size (pixels)")
      ->capture_default_str();
  attack->add_option("--iters", af.config.iterations, "Total iterations T")
      ->capture_default_str();
  attack->add_option("--beta", af.beta,
                     "CE weight (default 0.0005 mixup / 0.005 mixcut)");
  attack->add_option("--nmix", af.config.n_mix, "Categories in the virtual sample")
      ->capture_default_str();
  attack->add_option("--mu", af.config.mu, "CE weight in the C&W objective")
      ->capture_default_str();
  attack->add_option("--seed", af.config.seed, "RNG seed")->capture_default_str();
  attack->add_option("--scale-copies", af.config.scale_copies,
                     "Scale-augmentation copies m")->capture_default_str();
  attack->add_flag("--no-momentum", af.no_momentum, "Disable momentum accumulation");
  attack->add_flag("--no-scale-augment", af.no_scale_augment,
                   "Disable scale augmentation");
  attack->add_option("--mix-source", af.mix_source,
                     "Manifest supplying virtual-sample images (default: --input)");
  attack->add_option("--jobs", af.jobs, "Parallel attack workers")
      ->capture_default_str();

  EvaluateFlags ef;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score victims on a bundle");
  evaluate->add_option("--victim", ef.victims, "Victim model id (repeatable)")
      ->required();
  evaluate->add_option("--adv", ef.adv, "Adversarial manifest CSV")->required();
  evaluate->add_option("--clean", ef.clean, "Clean manifest CSV")->required();
  evaluate->add_option("--report", ef.out_prefix,
                       "Write <prefix>.json and <prefix>.csv reports");

  AblateFlags bf;
  CLI::App* ablate = app.add_subcommand("ablate", "Loss/momentum ablation rows");
  ablate->add_option("--surrogate", bf.surrogate, "Surrogate model id")->required();
  ablate->add_option("--victim", bf.victim, "Victim model id")->required();
  ablate->add_option("--input", bf.input, "Dataset manifest CSV")->required();
  ablate->add_option("--toggles", bf.toggles,
                     "Toggle rows, e.g. ce ce,mix ce,mix,momentum")
      ->required();
  ablate->add_option("--method", bf.method, "mixup|mixcut for the mix rows")
      ->capture_default_str();
  ablate->add_option("--beta", bf.beta, "CE weight override");
  ablate->add_option("--nmix", bf.config.n_mix, "Categories in the virtual sample")
      ->capture_default_str();
  ablate->add_option("--seed", bf.config.seed, "RNG seed")->capture_default_str();
  ablate->add_option("--iters", bf.config.iterations, "Total iterations T")
      ->capture_default_str();
  ablate->add_option("--report", bf.out_prefix, "Report file prefix");

  GenToyFlags gf;
  CLI::App* gen = app.add_subcommand("gen-toy", "Write synthetic fixtures");
  gen->add_option("--out", gf.out, "Fixture directory")->required();
  gen->add_option("--seed", gf.seed, "Generator/training seed")->capture_default_str();
  gen->add_option("--classes", gf.classes, "Class count")->capture_default_str();
  gen->add_option("--per-class", gf.per_class, "Images per class")
      ->capture_default_str();
  gen->add_option("--size", gf.size, "Image side length")->capture_default_str();
  gen->add_option("--width", gf.width, "Model width")->capture_default_str();
  gen->add_option("--epochs", gf.epochs, "Training epochs")->capture_default_str();
  gen->add_option("--lr", gf.lr, "Learning rate")->capture_default_str();
  gen->add_flag("--force", gf.force, "Overwrite existing fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (attack->parsed()) return cmd_attack(af);
    if (evaluate->parsed()) return cmd_evaluate(ef);
    if (ablate->parsed()) return cmd_ablate(bf);
    if (gen->parsed()) return cmd_gen_toy(gf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
