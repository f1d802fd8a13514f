#include <sstream>

#include "advkit/metrics.hpp"
#include "advkit/toy_models.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace advkit;

TEST_CASE("success rate hand counts") {
  std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  std::vector<int> preds{0, 0, 0, 0, 1, 1, 1, 1, 0, 0};  // 3 wrong of 10
  CHECK(success_rate(preds, labels) == doctest::Approx(0.30));
  CHECK(overall_accuracy(preds, labels) == doctest::Approx(0.70));
  CHECK(success_rate(labels, labels) == doctest::Approx(0.0));
  CHECK(overall_accuracy(labels, labels) == doctest::Approx(1.0));
}

TEST_CASE("success rate plus overall accuracy is one") {
  std::vector<int> labels{0, 1, 2, 3, 0, 1, 2};
  std::vector<int> preds{0, 2, 2, 1, 0, 1, 0};
  CHECK(success_rate(preds, labels) + overall_accuracy(preds, labels) ==
        doctest::Approx(1.0));
}

TEST_CASE("segmentation success rate over valid pixels only") {
  // 5x5 map, 5 invalid pixels, 10 of the 20 valid pixels wrong
  std::vector<int> labels(25, 0);
  std::vector<int> preds(25, 0);
  std::vector<uint8_t> valid(25, 1);
  for (int i = 0; i < 5; ++i) valid[i] = 0;
  for (int i = 5; i < 15; ++i) preds[i] = 1;  // wrong on 10 valid pixels
  for (int i = 0; i < 3; ++i) preds[i] = 1;   // invalid pixels must not count
  CHECK(success_rate(preds, labels, &valid) == doctest::Approx(0.50));
  CHECK(overall_accuracy(preds, labels, &valid) == doctest::Approx(0.50));
}

TEST_CASE("empty valid set is an undefined metric") {
  std::vector<int> labels{0, 1};
  std::vector<int> preds{0, 1};
  std::vector<uint8_t> valid{0, 0};
  CHECK_THROWS(success_rate(preds, labels, &valid));
  CHECK_THROWS(success_rate({}, {}));
}

TEST_CASE("perfect prediction yields F1 of one for every present class") {
  std::vector<int> labels{0, 1, 2, 0, 1, 2};
  auto scores = f1_scores(labels, labels, 3);
  REQUIRE(scores.size() == 3);
  for (const ClassF1& s : scores) {
    CHECK(s.present);
    CHECK(s.f1 == doctest::Approx(1.0));
  }
  CHECK(mean_f1(scores) == doctest::Approx(1.0));
}

TEST_CASE("F1 hand case TP=2 FP=1 FN=1") {
  // class 0: predictions {0,0,0} against labels {0,0,1}, plus one label-0
  // pixel predicted 1 -> TP=2, FP=1, FN=1
  std::vector<int> labels{0, 0, 1, 0};
  std::vector<int> preds{0, 0, 0, 1};
  auto scores = f1_scores(preds, labels, 2);
  CHECK(scores[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(scores[0].recall == doctest::Approx(2.0 / 3.0));
  CHECK(scores[0].f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("F1 equals precision when precision and recall agree") {
  // class 0: TP=4, FP=1, FN=1 -> P = R = 0.8 -> F1 = 0.8
  std::vector<int> labels{0, 0, 0, 0, 1, 0};
  std::vector<int> preds{0, 0, 0, 0, 0, 1};
  auto scores = f1_scores(preds, labels, 2);
  CHECK(scores[0].precision == doctest::Approx(0.8));
  CHECK(scores[0].recall == doctest::Approx(0.8));
  CHECK(scores[0].f1 == doctest::Approx(0.8));
}

TEST_CASE("F1 is zero when TP is zero but the class occurs") {
  std::vector<int> labels{0, 0, 1};
  std::vector<int> preds{1, 1, 0};
  auto scores = f1_scores(preds, labels, 2);
  CHECK(scores[0].f1 == doctest::Approx(0.0));
  CHECK(scores[1].f1 == doctest::Approx(0.0));
}

TEST_CASE("classes absent from both sides are excluded from the mean") {
  std::vector<int> labels{0, 0, 1, 1};
  std::vector<int> preds{0, 0, 1, 0};
  auto scores = f1_scores(preds, labels, 5);
  CHECK(!scores[3].present);
  CHECK(!scores[4].present);
  double m = mean_f1(scores);
  double f0 = scores[0].f1, f1v = scores[1].f1;
  CHECK(m == doctest::Approx((f0 + f1v) / 2.0));
}

TEST_CASE("victim evaluation counts misclassifications against ground truth") {
  auto m = make_toy_classifier(4, 6, 4);
  Dataset ds = make_synthetic(4, 5, 32, 31);
  std::vector<Tensor> images;
  for (const Sample& s : ds.samples) images.push_back(s.image);
  EvalReport r = evaluate_victim(*m, images, ds, "clean");
  CHECK(r.n_total == ds.samples.size());
  CHECK(r.n_wrong + r.n_correct == r.n_total);
  CHECK(r.success_rate + r.overall_accuracy == doctest::Approx(1.0));
  CHECK(r.success_rate ==
        doctest::Approx(1.0 - clean_accuracy(*m, ds)).epsilon(1e-12));
}

TEST_CASE("transfer matrix includes the white-box diagonal and clean baseline") {
  auto sur = make_toy_classifier(4, 6, 4);
  auto vic = make_toy_classifier(5, 4, 4);
  Dataset ds = make_synthetic(4, 3, 32, 33);
  AttackConfig cfg;
  cfg.method = AttackMethod::kIfgsm;
  std::vector<const Model*> victims{sur.get(), vic.get()};
  TransferReport t = evaluate_transfer(*sur, victims, ds, cfg);
  REQUIRE(t.clean.size() == 2);
  REQUIRE(t.adversarial.size() == 2);
  CHECK(t.adversarial[0].victim_id == sur->id());
  // white-box cell attacks the surrogate itself
  CHECK(t.adversarial[0].success_rate >= t.clean[0].success_rate - 1e-12);
  // cells are independent of victim evaluation order
  std::vector<const Model*> swapped{vic.get(), sur.get()};
  TransferReport t2 = evaluate_transfer(*sur, swapped, ds, cfg);
  CHECK(t2.adversarial[1].success_rate ==
        doctest::Approx(t.adversarial[0].success_rate));
  CHECK(t2.adversarial[0].success_rate ==
        doctest::Approx(t.adversarial[1].success_rate));
}

TEST_CASE("ablation CE-only row reproduces the I-FGSM baseline bit for bit") {
  auto sur = make_toy_classifier(6, 6, 4);
  auto vic = make_toy_classifier(7, 4, 4);
  Dataset ds = make_synthetic(4, 3, 32, 37);
  AttackConfig cfg;
  cfg.method = AttackMethod::kMixup;
  cfg.n_mix = 4;
  cfg.seed = 11;
  std::vector<AblationToggles> toggles{{true, false, false},
                                       {true, true, false},
                                       {true, true, true}};
  auto rows = ablation_run(*sur, *vic, ds, toggles, cfg);
  REQUIRE(rows.size() == 3);

  AttackConfig ifgsm_cfg = cfg;
  ifgsm_cfg.method = AttackMethod::kIfgsm;
  std::vector<const Model*> victims{vic.get()};
  TransferReport base = evaluate_transfer(*sur, victims, ds, ifgsm_cfg);
  CHECK(rows[0].success_rate == base.adversarial[0].success_rate);
  CHECK(rows[0].n_wrong == base.adversarial[0].n_wrong);

  CHECK_THROWS(ablation_run(*sur, *vic, ds, {}, cfg));
}

TEST_CASE("reports serialize to parseable JSON and CSV") {
  EvalReport r;
  r.victim_id = "toy:cls:1";
  r.method = "ifgsm";
  r.success_rate = 0.25;
  r.overall_accuracy = 0.75;
  r.n_wrong = 1;
  r.n_correct = 3;
  r.n_total = 4;
  std::vector<EvalReport> reports{r};

  auto parsed = nlohmann::json::parse(report_to_json(reports));
  REQUIRE(parsed.is_array());
  CHECK(parsed[0]["victim"] == "toy:cls:1");
  CHECK(parsed[0]["success_rate"] == doctest::Approx(0.25));

  std::string csv = report_to_csv(reports);
  CHECK(csv.find("toy:cls:1") != std::string::npos);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header.find("success_rate") != std::string::npos);

  std::string table = report_to_table(reports);
  CHECK(table.find("ifgsm") != std::string::npos);
}
