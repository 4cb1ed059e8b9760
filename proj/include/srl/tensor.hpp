#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "srl/error.hpp"

namespace srl::nn {

/// Dense row-major array. Rank 1 and 2 are what the model uses; the scalar
/// type is a template parameter so the whole network can run in a 64-bit
/// shadow mode for gradient checking.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), T{0}) {}

  static Tensor vector(std::size_t n) { return Tensor({n}); }
  static Tensor matrix(std::size_t rows, std::size_t cols) {
    return Tensor({rows, cols});
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols() + j];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool finite() const {
    for (T v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + ")";
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

template <typename T>
inline void check_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                             const char* what) {
  if (!a.same_shape(b))
    throw NumericError(std::string(what) + ": shape mismatch " +
                       a.shape_string() + " vs " + b.shape_string());
}

/// y = W x  (W is rows x cols, x has cols entries).
template <typename T>
inline void matvec(const Tensor<T>& w, const Tensor<T>& x, Tensor<T>& y) {
  const std::size_t r = w.rows(), c = w.cols();
  if (x.size() != c || y.size() != r)
    throw NumericError("matvec: shape mismatch " + w.shape_string() + " * " +
                       x.shape_string() + " -> " + y.shape_string());
  const T* wd = w.data();
  const T* xd = x.data();
  T* yd = y.data();
  for (std::size_t i = 0; i < r; ++i) {
    T acc{0};
    const T* row = wd + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * xd[j];
    yd[i] = acc;
  }
}

/// y += W x
template <typename T>
inline void matvec_add(const Tensor<T>& w, const Tensor<T>& x, Tensor<T>& y) {
  const std::size_t r = w.rows(), c = w.cols();
  if (x.size() != c || y.size() != r)
    throw NumericError("matvec_add: shape mismatch");
  const T* wd = w.data();
  const T* xd = x.data();
  T* yd = y.data();
  for (std::size_t i = 0; i < r; ++i) {
    T acc{0};
    const T* row = wd + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * xd[j];
    yd[i] += acc;
  }
}

/// y += W^T x  (x has rows entries, y has cols entries).
template <typename T>
inline void matvec_transposed_add(const Tensor<T>& w, const Tensor<T>& x,
                                  Tensor<T>& y) {
  const std::size_t r = w.rows(), c = w.cols();
  if (x.size() != r || y.size() != c)
    throw NumericError("matvec_transposed_add: shape mismatch");
  const T* wd = w.data();
  const T* xd = x.data();
  T* yd = y.data();
  for (std::size_t i = 0; i < r; ++i) {
    const T xi = xd[i];
    const T* row = wd + i * c;
    for (std::size_t j = 0; j < c; ++j) yd[j] += row[j] * xi;
  }
}

/// W += a b^T  (rank-1 update; a has rows entries, b has cols entries).
template <typename T>
inline void outer_add(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& w) {
  const std::size_t r = w.rows(), c = w.cols();
  if (a.size() != r || b.size() != c)
    throw NumericError("outer_add: shape mismatch");
  T* wd = w.data();
  const T* ad = a.data();
  const T* bd = b.data();
  for (std::size_t i = 0; i < r; ++i) {
    const T ai = ad[i];
    T* row = wd + i * c;
    for (std::size_t j = 0; j < c; ++j) row[j] += ai * bd[j];
  }
}

template <typename T>
inline void add(const Tensor<T>& x, Tensor<T>& y) {
  check_same_shape(x, y, "add");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += x[i];
}

template <typename T>
inline void axpy(T a, const Tensor<T>& x, Tensor<T>& y) {
  check_same_shape(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace srl::nn
