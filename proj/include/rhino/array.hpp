#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rhino/error.hpp"

namespace rhino {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

/// Row-major dense array of 64-bit floats. The one value type every
/// module trades in; rank is dynamic (scalars are shape []).
class DenseArray {
 public:
  DenseArray() = default;

  explicit DenseArray(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {
    for (int64_t d : shape_)
      if (d < 0) throw DimensionError("negative dimension in shape " + shape_str(shape_));
  }

  DenseArray(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != static_cast<int64_t>(data_.size()))
      throw DimensionError("shape " + shape_str(shape_) + " does not match " +
                           std::to_string(data_.size()) + " elements");
  }

  static DenseArray scalar(double v) { return DenseArray({}, {v}); }

  static DenseArray zeros(Shape shape) { return DenseArray(std::move(shape)); }

  static DenseArray full(Shape shape, double v) {
    DenseArray a(std::move(shape));
    std::fill(a.data_.begin(), a.data_.end(), v);
    return a;
  }

  static DenseArray ones(Shape shape) { return full(std::move(shape), 1.0); }

  static DenseArray vec(std::initializer_list<double> vals) {
    return DenseArray({static_cast<int64_t>(vals.size())}, std::vector<double>(vals));
  }

  static DenseArray identity(int64_t n) {
    DenseArray a({n, n});
    for (int64_t i = 0; i < n; ++i) a.data_[i * n + i] = 1.0;
    return a;
  }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec_data() { return data_; }
  const std::vector<double>& vec_data() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& operator()(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  double operator()(int64_t i, int64_t j) const { return data_[static_cast<size_t>(i * shape_[1] + j)]; }

  double& operator()(int64_t i, int64_t j, int64_t k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double operator()(int64_t i, int64_t j, int64_t k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }

  double& operator()(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  double operator()(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  DenseArray reshaped(Shape shape) const {
    if (shape_numel(shape) != numel())
      throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    return DenseArray(std::move(shape), data_);
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const DenseArray& o) const { return shape_ == o.shape_; }

 private:
  Shape shape_;
  std::vector<double> data_;
};

using EigenRowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<EigenRowMat>;
using ConstMatMap = Eigen::Map<const EigenRowMat>;

inline ConstMatMap mat_view(const DenseArray& a) {
  if (a.ndim() != 2) throw DimensionError("expected 2-D array, got " + shape_str(a.shape()));
  return ConstMatMap(a.data(), a.dim(0), a.dim(1));
}

inline MatMap mat_view(DenseArray& a) {
  if (a.ndim() != 2) throw DimensionError("expected 2-D array, got " + shape_str(a.shape()));
  return MatMap(a.data(), a.dim(0), a.dim(1));
}

/// Plain (non-differentiable) 2-D product, used for constant matrices
/// such as normalized adjacencies and Chebyshev terms.
inline DenseArray arr_matmul(const DenseArray& a, const DenseArray& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    throw DimensionError("matmul " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  DenseArray c({a.dim(0), b.dim(1)});
  mat_view(c) = mat_view(a) * mat_view(b);
  return c;
}

inline DenseArray arr_transpose(const DenseArray& a) {
  DenseArray t({a.dim(1), a.dim(0)});
  mat_view(t) = mat_view(a).transpose();
  return t;
}

inline DenseArray arr_scale(const DenseArray& a, double s) {
  DenseArray out = a;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
  return out;
}

inline DenseArray arr_add(const DenseArray& a, const DenseArray& b) {
  if (!a.same_shape(b)) throw DimensionError("add " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  DenseArray out = a;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

inline DenseArray arr_sub(const DenseArray& a, const DenseArray& b) {
  if (!a.same_shape(b)) throw DimensionError("sub " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  DenseArray out = a;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

inline double arr_max_abs_diff(const DenseArray& a, const DenseArray& b) {
  if (!a.same_shape(b)) throw DimensionError("compare " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  double m = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace rhino
