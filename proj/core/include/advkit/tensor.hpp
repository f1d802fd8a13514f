#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace advkit {

// Dense H x W x C tensor of doubles, row-major with channels innermost.
// Used for images (canonical pixel range [0, 255]), feature maps, logit
// maps, and gradients alike.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int h, int w, int c, double fill = 0.0)
      : h_(h), w_(w), c_(c), data_(static_cast<size_t>(h) * w * c, fill) {
    if (h <= 0 || w <= 0 || c <= 0)
      throw std::invalid_argument("Tensor: dimensions must be positive");
  }

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c, int k) {
    return data_[(static_cast<size_t>(r) * w_ + c) * c_ + k];
  }
  double at(int r, int c, int k) const {
    return data_[(static_cast<size_t>(r) * w_ + c) * c_ + k];
  }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
  }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    require_same_shape(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const Tensor& o) const {
    if (!same_shape(o))
      throw std::invalid_argument("Tensor: shape mismatch");
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double min() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::max(m, v);
    return m;
  }

 private:
  int h_ = 0, w_ = 0, c_ = 0;
  std::vector<double> data_;
};

inline Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
inline Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
inline Tensor operator*(Tensor a, double s) { return a *= s; }

// Sum of |v| over the whole tensor.
inline double l1_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += std::fabs(v);
  return s;
}

inline double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

inline double linf_norm(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::fabs(v));
  return m;
}

inline double linf_distance(const Tensor& a, const Tensor& b) {
  a.require_same_shape(b);
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace advkit
