#pragma once

// Central finite-difference oracle shared by the test suites. Independent of
// the autodiff implementation: it only evaluates the function.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gradleak/tensor.hpp"

namespace gradleak::testing {

inline Tensor finite_difference(const std::function<double(const Tensor&)>& f, const Tensor& at,
                                double h = 1e-5) {
  Tensor grad(at.rows(), at.cols(), 0.0);
  Tensor probe = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ||a - b|| / max(||b||, floor)
inline double relative_error(const Tensor& a, const Tensor& b, double floor = 1e-6) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

inline Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

inline Tensor random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double std = 1.0) {
  std::normal_distribution<double> dist(0.0, std);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace gradleak::testing
