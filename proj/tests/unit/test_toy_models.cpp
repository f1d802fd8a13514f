#include <cstdio>
#include <filesystem>
#include <random>

#include "advkit/registry.hpp"
#include "advkit/serialize.hpp"
#include "advkit/toy_models.hpp"
#include "advkit/virtual_sample.hpp"
#include "doctest.h"

using namespace advkit;
namespace fs = std::filesystem;

namespace {

Tensor random_image(int h, int w, int c, uint64_t seed) {
  Tensor t(h, w, c);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (double& v : t.data()) v = u(rng);
  return t;
}

std::vector<size_t> sample_coords(size_t n, size_t total, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> u(0, total - 1);
  std::vector<size_t> coords;
  for (size_t i = 0; i < n; ++i) coords.push_back(u(rng));
  return coords;
}

// Compares the analytic gradient against central differences on a
// sampled coordinate subset: relative tolerance `rel`, absolute floor
// `floor` below which entries are not compared.
void check_gradient(const Model& model, const LossSpec& loss, const Tensor& image,
                    const Label& label, const Tensor* vf, size_t n_coords,
                    double rel = 1e-4, double floor = 1e-6) {
  Tensor analytic = model.input_gradient(loss, image, label, vf);
  REQUIRE(analytic.same_shape(image));
  auto coords = sample_coords(n_coords, image.size(), 99);
  Tensor fd = finite_diff_gradient(model, loss, image, label, vf, 1e-3, coords);
  for (size_t i : coords) {
    double a = analytic[i], b = fd[i];
    if (std::fabs(a) <= floor && std::fabs(b) <= floor) continue;
    double denom = std::max({std::fabs(a), std::fabs(b), floor});
    CHECK(std::fabs(a - b) / denom <= rel);
  }
}

}  // namespace

TEST_CASE("classifier logits are deterministic and well-formed") {
  auto m = make_toy_classifier(0, 8, 4);
  Tensor zero(32, 32, 3, 0.0);
  Tensor l1 = m->predict_logits(zero);
  Tensor l2 = m->predict_logits(zero);
  REQUIRE(l1.size() == 4);
  CHECK(l1.all_finite());
  for (size_t i = 0; i < l1.size(); ++i) CHECK(l1[i] == l2[i]);
  int cls = argmax_class(l1);
  CHECK(cls >= 0);
  CHECK(cls < 4);

  Tensor x = random_image(32, 32, 3, 5);
  Tensor a = m->predict_logits(x);
  Tensor b = m->predict_logits(x);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("different seeds give different weights on the same architecture") {
  auto a = make_toy_classifier(0, 8, 4);
  auto b = make_toy_classifier(1, 8, 4);
  REQUIRE(a->conv1().w.size() == b->conv1().w.size());
  bool differ = false;
  for (size_t i = 0; i < a->conv1().w.size(); ++i)
    if (a->conv1().w[i] != b->conv1().w[i]) differ = true;
  CHECK(differ);
}

TEST_CASE("classifier feature tap shape and nonnegativity") {
  auto m = make_toy_classifier(3, 8, 4);
  CHECK(m->feature_tap() == "pool1");
  Tensor x = random_image(32, 32, 3, 8);
  Tensor f = m->extract_features(x);
  CHECK(f.height() == 8);   // 32 / 4 after the first (wide) pooling
  CHECK(f.width() == 8);
  CHECK(f.channels() == 8);
  CHECK(f.min() >= 0.0);  // ReLU precedes the pool
  Tensor f2 = m->extract_features(x);
  for (size_t i = 0; i < f.size(); ++i) CHECK(f[i] == f2[i]);
}

TEST_CASE("segmenter logit map shape and per-pixel softmax") {
  auto m = make_toy_segmenter(2, 8, 6);
  Tensor x = random_image(32, 32, 3, 4);
  Tensor logits = m->predict_logits(x);
  CHECK(logits.height() == 8);
  CHECK(logits.width() == 8);
  CHECK(logits.channels() == 6);
  CHECK(logits.all_finite());
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      double z = 0.0, sum = 0.0;
      for (int k = 0; k < 6; ++k) z += std::exp(logits.at(r, c, k));
      for (int k = 0; k < 6; ++k) sum += std::exp(logits.at(r, c, k)) / z;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  Tensor f = m->extract_features(x);
  CHECK(f.height() == 16);  // avgpool2 tap
  CHECK(f.min() >= 0.0);
}

TEST_CASE("classifier gradients match finite differences for every loss") {
  auto m = make_toy_classifier(7, 6, 4);
  Tensor x = random_image(32, 32, 3, 21);
  Label y = Label::of_class(2);
  Dataset ds = make_synthetic(4, 3, 32, 11);
  VirtualSampleSpec vs;
  vs.n_mix = 4;
  Tensor virt = build_virtual_sample(ds, vs, 32, 32);
  Tensor vf = m->extract_features(virt);

  LossSpec ce;
  ce.kind = LossKind::kCrossEntropy;
  check_gradient(*m, ce, x, y, nullptr, 60);

  LossSpec mix;
  mix.kind = LossKind::kMix;
  check_gradient(*m, mix, x, y, &vf, 60);

  LossSpec total;
  total.kind = LossKind::kTotal;
  total.beta = 0.0005;
  check_gradient(*m, total, x, y, &vf, 60);
}

TEST_CASE("total loss gradient is the beta-weighted sum of its parts") {
  auto m = make_toy_classifier(9, 6, 4);
  Tensor x = random_image(32, 32, 3, 30);
  Label y = Label::of_class(1);
  Dataset ds = make_synthetic(4, 3, 32, 12);
  VirtualSampleSpec vs;
  vs.n_mix = 4;
  Tensor vf = m->extract_features(build_virtual_sample(ds, vs, 32, 32));

  LossSpec ce{LossKind::kCrossEntropy, 0.0, 1e-12};
  LossSpec mix{LossKind::kMix, 0.0, 1e-12};
  LossSpec total{LossKind::kTotal, 0.0005, 1e-12};
  Tensor g_ce = m->input_gradient(ce, x, y, nullptr);
  Tensor g_mix = m->input_gradient(mix, x, y, &vf);
  Tensor g_tot = m->input_gradient(total, x, y, &vf);
  for (size_t i = 0; i < g_tot.size(); ++i)
    CHECK(g_tot[i] == doctest::Approx(g_mix[i] + 0.0005 * g_ce[i]).epsilon(1e-6));
}

TEST_CASE("mix gradient vanishes when virtual features equal own features") {
  auto m = make_toy_classifier(4, 6, 4);
  Tensor x = random_image(32, 32, 3, 2);
  Tensor vf = m->extract_features(x);
  LossSpec mix{LossKind::kMix, 0.0, 1e-12};
  Tensor g = m->input_gradient(mix, x, Label::of_class(0), &vf);
  CHECK(linf_norm(g) <= 1e-9);
}

TEST_CASE("mix losses require virtual features") {
  auto m = make_toy_classifier(4, 6, 4);
  Tensor x = random_image(32, 32, 3, 2);
  LossSpec mix{LossKind::kMix, 0.0, 1e-12};
  CHECK_THROWS(m->input_gradient(mix, x, Label::of_class(0), nullptr));
}

TEST_CASE("segmenter gradients match finite differences") {
  auto m = make_toy_segmenter(5, 4, 4);
  Dataset ds = make_synthetic_segmentation(4, 2, 32, 6);
  const Sample& s = ds.samples[0];
  VirtualSampleSpec vs;
  vs.n_mix = 2;
  Tensor vf = m->extract_features(build_virtual_sample(ds, vs, 32, 32));

  LossSpec seg{LossKind::kSegCrossEntropy, 0.0, 1e-12};
  check_gradient(*m, seg, s.image, s.label, nullptr, 50);

  LossSpec total{LossKind::kTotalSeg, 0.005, 1e-12};
  check_gradient(*m, total, s.image, s.label, &vf, 50);
}

TEST_CASE("input shape mismatch is rejected") {
  auto m = make_toy_classifier(0, 8, 4);
  Tensor wrong(16, 16, 3);
  CHECK_THROWS_AS(m->predict_logits(wrong), std::invalid_argument);
}

TEST_CASE("finite differences recover the analytic gradient of simple functions") {
  // quadratic sanity check on the oracle itself via the CE of a tiny model
  auto m = make_toy_classifier(1, 4, 4);
  Tensor x = random_image(32, 32, 3, 77);
  Label y = Label::of_class(3);
  LossSpec ce{LossKind::kCrossEntropy, 0.0, 1e-12};
  auto coords = sample_coords(20, x.size(), 3);
  Tensor fd1 = finite_diff_gradient(*m, ce, x, y, nullptr, 1e-3, coords);
  Tensor fd2 = finite_diff_gradient(*m, ce, x, y, nullptr, 5e-4, coords);
  for (size_t i : coords)
    CHECK(fd1[i] == doctest::Approx(fd2[i]).epsilon(1e-4));
}

TEST_CASE("synthetic dataset is balanced and reproducible") {
  Dataset a = make_synthetic(4, 125, 32, 42);
  REQUIRE(a.samples.size() == 500);
  std::vector<int> counts(4, 0);
  for (const Sample& s : a.samples) ++counts[s.label.class_id];
  for (int c : counts) CHECK(c == 125);
  CHECK(a.class_names.size() == 4);

  Dataset b = make_synthetic(4, 125, 32, 42);
  for (size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.samples[i].image.same_shape(b.samples[i].image));
    for (size_t j = 0; j < a.samples[i].image.size(); ++j)
      CHECK(a.samples[i].image[j] == b.samples[i].image[j]);
  }

  Dataset c = make_synthetic(4, 125, 32, 43);
  bool differ = false;
  for (size_t j = 0; j < a.samples[0].image.size(); ++j)
    if (a.samples[0].image[j] != c.samples[0].image[j]) differ = true;
  CHECK(differ);
}

TEST_CASE("distinct classes have distinct mean images") {
  Dataset ds = make_synthetic(4, 20, 32, 13);
  std::vector<Tensor> means(4, Tensor(32, 32, 3, 0.0));
  std::vector<int> counts(4, 0);
  for (const Sample& s : ds.samples) {
    means[s.label.class_id] += s.image;
    ++counts[s.label.class_id];
  }
  for (int c = 0; c < 4; ++c) means[c] *= 1.0 / counts[c];
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      CHECK(linf_distance(means[a], means[b]) > 0.1);
}

TEST_CASE("training is deterministic and zero epochs is a no-op") {
  Dataset ds = make_synthetic(4, 10, 32, 3);
  auto m0 = make_toy_classifier(5, 4, 4);
  auto m1 = make_toy_classifier(5, 4, 4);
  TrainRecipe none;
  none.epochs = 0;
  train_toy(*m1, ds, none);
  for (size_t i = 0; i < m0->conv1().w.size(); ++i)
    CHECK(m0->conv1().w[i] == m1->conv1().w[i]);

  auto m2 = make_toy_classifier(5, 4, 4);
  auto m3 = make_toy_classifier(5, 4, 4);
  TrainRecipe r;
  r.epochs = 3;
  r.seed = 5;
  train_toy(*m2, ds, r);
  train_toy(*m3, ds, r);
  for (size_t i = 0; i < m2->dense().w.size(); ++i)
    CHECK(m2->dense().w[i] == m3->dense().w[i]);
  bool moved = false;
  for (size_t i = 0; i < m2->dense().w.size(); ++i)
    if (m2->dense().w[i] != m0->dense().w[i]) moved = true;
  CHECK(moved);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  auto m = make_toy_classifier(17, 6, 4);
  Dataset ds = make_synthetic(4, 5, 32, 17);
  TrainRecipe r;
  r.epochs = 2;
  r.seed = 17;
  train_toy(*m, ds, r);

  fs::path tmp = fs::temp_directory_path() / "advkit_test_model.bin";
  save_model(tmp, *m);
  auto loaded = load_model(tmp);
  REQUIRE(loaded != nullptr);
  CHECK(loaded->task() == Task::kClassification);
  Tensor x = random_image(32, 32, 3, 55);
  Tensor a = m->predict_logits(x);
  Tensor b = loaded->predict_logits(x);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  fs::remove(tmp);

  auto seg = make_toy_segmenter(21, 4, 5);
  fs::path tmp2 = fs::temp_directory_path() / "advkit_test_seg.bin";
  save_model(tmp2, *seg);
  auto loaded_seg = load_model(tmp2);
  CHECK(loaded_seg->task() == Task::kSegmentation);
  Tensor la = seg->predict_logits(x);
  Tensor lb = loaded_seg->predict_logits(x);
  for (size_t i = 0; i < la.size(); ++i) CHECK(la[i] == lb[i]);
  fs::remove(tmp2);
}

TEST_CASE("builtin registry ids resolve to the expected models") {
  auto cls = resolve_model("toy:cls:3:6:4");
  REQUIRE(cls != nullptr);
  CHECK(cls->task() == Task::kClassification);
  CHECK(cls->num_classes() == 4);
  auto seg = resolve_model("toy:seg:1");
  CHECK(seg->task() == Task::kSegmentation);
  CHECK_THROWS(resolve_model("no-such-model"));
}

TEST_CASE("committed fixture model keeps its trained accuracy") {
  fs::path fixture = fs::path(ADVKIT_FIXTURE_DIR) / "toy" / "toy_cls.bin";
  REQUIRE(fs::exists(fixture));
  auto m = load_model(fixture);
  Dataset train = make_synthetic(4, 125, 32, 42);
  Dataset test = make_synthetic(4, 25, 32, 1042);
  CHECK(clean_accuracy(*m, train) >= 0.99);
  CHECK(clean_accuracy(*m, test) >= 0.90);
}
