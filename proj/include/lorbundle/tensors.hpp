// Dense little rank-3/4 tensors indexed (a,b,c[,d]); dimensions are tiny
// (chart dimension <= ~10), so flat storage with no strides tricks.
#pragma once

#include <vector>

namespace lorbundle {

struct Tensor3 {
  int d = 0;
  std::vector<double> v;

  Tensor3() = default;
  explicit Tensor3(int dim) : d(dim), v(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  double& operator()(int a, int b, int c) {
    return v[(static_cast<size_t>(a) * d + b) * d + c];
  }
  double operator()(int a, int b, int c) const {
    return v[(static_cast<size_t>(a) * d + b) * d + c];
  }
};

struct Tensor4 {
  int d = 0;
  std::vector<double> v;

  Tensor4() = default;
  explicit Tensor4(int dim)
      : d(dim), v(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

  double& operator()(int a, int b, int c, int e) {
    return v[((static_cast<size_t>(a) * d + b) * d + c) * d + e];
  }
  double operator()(int a, int b, int c, int e) const {
    return v[((static_cast<size_t>(a) * d + b) * d + c) * d + e];
  }
};

}  // namespace lorbundle
