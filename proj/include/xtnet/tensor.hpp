#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace xtnet {

// Dense row-major matrix of doubles. Scalars are 1x1, row vectors 1xN.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  static Tensor row(const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.data = v;
    return t;
  }

  std::size_t size() const { return data.size(); }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool is_scalar() const { return rows == 1 && cols == 1; }

  double item() const {
    if (!is_scalar()) throw std::logic_error("Tensor::item on non-scalar " + shape_str());
    return data[0];
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }
};

}  // namespace xtnet
