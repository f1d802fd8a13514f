#include <cmath>
#include <random>

#include "advkit/losses.hpp"
#include "advkit/tensor.hpp"
#include "doctest.h"

using namespace advkit;

namespace {

Tensor pair_map(double a, double b) {
  Tensor t(1, 2, 1);
  t.at(0, 0, 0) = a;
  t.at(0, 1, 0) = b;
  return t;
}

}  // namespace

TEST_CASE("mix loss of identical feature maps is zero") {
  Tensor f(3, 3, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (double& v : f.data()) v = u(rng);
  CHECK(mix_loss(f, f) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mix loss reproduces the hand-evaluated KL value") {
  // KL((0.5,0.5) || (0.25,0.75)) = 0.5 ln 2 + 0.5 ln(2/3) = 0.143841;
  // the loss is its negation.
  double v = mix_loss(pair_map(0.5, 0.5), pair_map(0.25, 0.75));
  CHECK(v == doctest::Approx(-0.143841).epsilon(1e-5));
  double hand = -(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0));
  CHECK(v == doctest::Approx(hand).epsilon(1e-9));
}

TEST_CASE("mix loss is nonpositive and strictly negative when maps differ") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a(2, 2, 2), b(2, 2, 2);
    for (double& v : a.data()) v = u(rng);
    for (double& v : b.data()) v = u(rng);
    double loss = mix_loss(a, b);
    CHECK(loss <= 1e-12);
    double diff = 0.0;
    double sa = 0.0, sb = 0.0;
    for (double v : a.data()) sa += v;
    for (double v : b.data()) sb += v;
    for (size_t i = 0; i < a.size(); ++i)
      diff = std::max(diff, std::fabs(a[i] / sa - b[i] / sb));
    if (diff > 1e-6) CHECK(loss < 0.0);
  }
}

TEST_CASE("mix loss is invariant to joint positive rescaling") {
  Tensor a = pair_map(1.0, 3.0), b = pair_map(2.0, 2.0);
  double base = mix_loss(a, b);
  for (double s : {0.5, 10.0, 1234.5}) {
    CHECK(mix_loss(a * s, b * s) == doctest::Approx(base).epsilon(1e-9));
  }
  // normalization also absorbs rescaling of each map independently
  CHECK(mix_loss(a * 3.0, b) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("mix loss rejects shape mismatch") {
  Tensor a(2, 2, 1), b(2, 3, 1);
  CHECK_THROWS_AS(mix_loss(a, b), std::invalid_argument);
}

TEST_CASE("cross entropy of a uniform prediction is ln n") {
  std::vector<double> logits(4, 0.7);  // equal logits -> uniform softmax
  CHECK(cross_entropy(logits, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  CHECK(cross_entropy(logits, 2) == doctest::Approx(1.386294).epsilon(1e-5));
}

TEST_CASE("cross entropy of a near-certain prediction approaches zero") {
  std::vector<double> logits{50.0, 0.0, 0.0};
  CHECK(cross_entropy(logits, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cross_entropy(logits, 0) >= 0.0);
}

TEST_CASE("cross entropy stays finite for extreme logits") {
  std::vector<double> logits{1000.0, -1000.0};
  CHECK(std::isfinite(cross_entropy(logits, 1)));
  CHECK(cross_entropy(logits, 1) >= 0.0);
}

TEST_CASE("cross entropy gradient is softmax minus one-hot") {
  std::vector<double> logits{0.3, -1.2, 2.0};
  std::vector<double> g = cross_entropy_grad(logits, 1);
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  for (int k = 0; k < 3; ++k) {
    double expect = std::exp(logits[k]) / z - (k == 1 ? 1.0 : 0.0);
    CHECK(g[k] == doctest::Approx(expect).epsilon(1e-12));
  }
  // numerical check against central differences
  for (int k = 0; k < 3; ++k) {
    const double h = 1e-6;
    auto lp = logits, lm = logits;
    lp[k] += h;
    lm[k] -= h;
    double fd = (cross_entropy(lp, 1) - cross_entropy(lm, 1)) / (2 * h);
    CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("bilinear upsample preserves constants") {
  Tensor m(1, 1, 1, 3.25);
  Tensor up = bilinear_upsample(m, 7, 5);
  for (double v : up.data()) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("bilinear upsample at the source size is the identity") {
  Tensor m(3, 4, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& v : m.data()) v = u(rng);
  Tensor up = bilinear_upsample(m, 3, 4);
  for (size_t i = 0; i < m.size(); ++i)
    CHECK(up[i] == doctest::Approx(m[i]).epsilon(1e-12));
}

TEST_CASE("bilinear upsample matches the per-pixel formula oracle on 2x2 -> 4x4") {
  Tensor m(2, 2, 1);
  m.at(0, 0, 0) = 0.0;
  m.at(0, 1, 0) = 1.0;
  m.at(1, 0, 0) = 1.0;
  m.at(1, 1, 0) = 0.0;
  Tensor up = bilinear_upsample(m, 4, 4);
  // independent oracle: src = (dst + 0.5) * (2/4) - 0.5, edge-clamped
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      auto sample = [&](double s, int lo_cap) {
        double clamped = std::min(std::max(s, 0.0), 1.0);
        (void)lo_cap;
        return clamped;
      };
      double sr = sample((r + 0.5) * 0.5 - 0.5, 1);
      double sc = sample((c + 0.5) * 0.5 - 0.5, 1);
      int r0 = static_cast<int>(std::floor(sr)), c0 = static_cast<int>(std::floor(sc));
      int r1 = std::min(r0 + 1, 1), c1 = std::min(c0 + 1, 1);
      double fr = sr - r0, fc = sc - c0;
      double expect = (1 - fr) * ((1 - fc) * m.at(r0, c0, 0) + fc * m.at(r0, c1, 0)) +
                      fr * ((1 - fc) * m.at(r1, c0, 0) + fc * m.at(r1, c1, 0));
      CHECK(up.at(r, c, 0) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("bilinear upsample is linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor a(3, 3, 2), b(3, 3, 2);
  for (double& v : a.data()) v = u(rng);
  for (double& v : b.data()) v = u(rng);
  Tensor combo = a * 1.5 + b * (-0.25);
  Tensor lhs = bilinear_upsample(combo, 9, 7);
  Tensor rhs = bilinear_upsample(a, 9, 7) * 1.5 + bilinear_upsample(b, 9, 7) * (-0.25);
  for (size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-9));
}

TEST_CASE("bilinear upsample rejects downscaling") {
  Tensor m(4, 4, 1);
  CHECK_THROWS_AS(bilinear_upsample(m, 2, 4), std::invalid_argument);
}

TEST_CASE("segmentation cross entropy hand cases") {
  const int nv = 6;
  // 10x10 logit map at full label resolution; equal logits -> uniform.
  Tensor logits(10, 10, nv, 0.0);
  std::vector<int> labels(100, 3);
  std::vector<uint8_t> valid(100, 0);
  for (int i = 0; i < 100; ++i) valid[i] = 1;
  Label all = Label::of_map(labels, valid, 10, 10);
  CHECK(seg_cross_entropy(logits, all) ==
        doctest::Approx(100.0 * std::log(6.0)).epsilon(1e-9));
  CHECK(seg_cross_entropy(logits, all) == doctest::Approx(179.176).epsilon(1e-4));

  SUBCASE("exactly 100 valid pixels out of more") {
    Tensor big(12, 12, nv, 0.0);
    std::vector<int> lab(144, 1);
    std::vector<uint8_t> val(144, 0);
    for (int i = 0; i < 100; ++i) val[i] = 1;
    Label l = Label::of_map(lab, val, 12, 12);
    CHECK(seg_cross_entropy(big, l) ==
          doctest::Approx(100.0 * std::log(6.0)).epsilon(1e-9));
  }

  SUBCASE("all pixels invalid gives the empty sum") {
    std::vector<uint8_t> none(100, 0);
    Label l = Label::of_map(labels, none, 10, 10);
    CHECK(seg_cross_entropy(logits, l) == doctest::Approx(0.0));
  }

  SUBCASE("near-perfect prediction approaches zero") {
    Tensor sharp(10, 10, nv, 0.0);
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 10; ++c) sharp.at(r, c, 3) = 60.0;
    CHECK(seg_cross_entropy(sharp, all) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("segmentation cross entropy is additive over disjoint valid sets") {
  const int nv = 4;
  Tensor logits(4, 4, nv);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& v : logits.data()) v = u(rng);
  std::vector<int> labels(16);
  for (int i = 0; i < 16; ++i) labels[i] = i % nv;
  std::vector<uint8_t> left(16, 0), right(16, 0), both(16, 0);
  for (int i = 0; i < 16; ++i) {
    (i < 8 ? left : right)[i] = 1;
    both[i] = 1;
  }
  double a = seg_cross_entropy(logits, Label::of_map(labels, left, 4, 4));
  double b = seg_cross_entropy(logits, Label::of_map(labels, right, 4, 4));
  double all = seg_cross_entropy(logits, Label::of_map(labels, both, 4, 4));
  CHECK(all == doctest::Approx(a + b).epsilon(1e-9));
}

TEST_CASE("total loss arithmetic") {
  CHECK(total_loss(-0.143841, 1.386294, 0.0005) ==
        doctest::Approx(-0.143148).epsilon(1e-5));
  CHECK(total_loss(-0.5, 123.0, 0.0) == doctest::Approx(-0.5));
  CHECK(total_loss(0.0, 2.25, 1.0) == doctest::Approx(2.25));
}
