#ifndef SFVM_TESTS_SUPPORT_HPP_
#define SFVM_TESTS_SUPPORT_HPP_

// Seeded generators for the property tests. Every case is reproducible from
// its seed, which the failing assertion prints.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sfvm/sfvm.hpp"

namespace sfvm::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  /// Polynomial coefficient of total degree <= 2 in the chart coordinates.
  Coefficient polynomial(int dim) {
    std::vector<double> c(1 + dim + dim * dim);
    for (double& v : c) v = uniform(-1.0, 1.0);
    Coefficient out;
    out.value = [c, dim](std::span<const double> x) {
      double acc = c[0];
      for (int i = 0; i < dim; ++i) acc += c[1 + i] * x[i];
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) acc += c[1 + dim + i * dim + j] * x[i] * x[j];
      return acc;
    };
    return out;
  }

  /// Random k-form with polynomial coefficients on every canonical index.
  CoordinateForm form(int degree, int dim) {
    CoordinateForm out(degree, dim);
    for (const auto& idx : increasing_indices(dim, degree)) out.add_term(idx, polynomial(dim));
    return out;
  }

  std::vector<double> point(int dim, double lo = -1.0, double hi = 1.0) {
    std::vector<double> p(dim);
    for (double& v : p) v = uniform(lo, hi);
    return p;
  }

  /// Piecewise smooth bounded data on [a, b]: a few sine modes plus an
  /// optional jump.
  std::function<double(double, double)> data(double a, double b, double amplitude) {
    const double m1 = uniform(-0.5, 0.5), m2 = uniform(-0.3, 0.3), phase = uniform(0.0, 6.0);
    const double jump = integer(0, 1) ? uniform(-0.5, 0.5) : 0.0, where = uniform(a, b);
    const double L = b - a;
    return [=](double t, double x) {
      const double s = (x - a) / L;
      double v = m1 * std::sin(2.0 * std::numbers::pi * s + phase) + m2 * std::cos(6.0 * s + 3.0 * t) +
                 (x < where ? jump : -jump);
      return amplitude * std::tanh(v);
    };
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace sfvm::testing

#endif  // SFVM_TESTS_SUPPORT_HPP_
