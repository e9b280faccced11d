#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace hdmmd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n x p block of observations, one observation per row. Rows are contiguous so
// inner products between observations stream through memory.
class SampleMatrix {
 public:
  SampleMatrix() = default;

  // Throws InvalidArgument on an empty shape or non-finite entries.
  explicit SampleMatrix(RowMatrix data);

  Eigen::Index rows() const noexcept { return data_.rows(); }
  Eigen::Index cols() const noexcept { return data_.cols(); }
  bool empty() const noexcept { return data_.size() == 0; }

  const RowMatrix& matrix() const noexcept { return data_; }
  auto row(Eigen::Index i) const { return data_.row(i); }
  double operator()(Eigen::Index i, Eigen::Index k) const { return data_(i, k); }

 private:
  RowMatrix data_;
};

}  // namespace hdmmd
