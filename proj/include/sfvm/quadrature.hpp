#ifndef SFVM_QUADRATURE_HPP_
#define SFVM_QUADRATURE_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sfvm {

/// Quadrature rule on the unit reference cell [0,1]^dim.
///
/// Nodes are stored flat (node-major). Weights are positive and sum to 1,
/// the volume of the reference cell.
class QuadratureRule {
 public:
  QuadratureRule() = default;
  QuadratureRule(int dim, std::vector<double> nodes, std::vector<double> weights,
                 int exactness_degree)
      : dim_(dim),
        nodes_(std::move(nodes)),
        weights_(std::move(weights)),
        exactness_degree_(exactness_degree) {
    if (dim_ < 0) throw std::invalid_argument("QuadratureRule: negative dimension");
    if (nodes_.size() != weights_.size() * static_cast<std::size_t>(dim_ == 0 ? 0 : dim_))
      throw std::invalid_argument("QuadratureRule: node/weight size mismatch");
    for (double w : weights_)
      if (!(w > 0.0)) throw std::invalid_argument("QuadratureRule: non-positive weight");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  int exactness_degree() const { return exactness_degree_; }
  std::span<const double> node(std::size_t i) const {
    return {nodes_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

 private:
  int dim_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  int exactness_degree_ = 0;
};

/// Gauss-Legendre rule with n nodes mapped to [0,1]; exact up to degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 0.5 * w;
  }
  return QuadratureRule(1, std::move(nodes), std::move(weights), 2 * n - 1);
}

/// Default face rule: 5 Gauss-Legendre nodes, exact to degree 9.
inline const QuadratureRule& default_face_rule() {
  static const QuadratureRule rule = gauss_legendre(5);
  return rule;
}

/// Tensor product of two rules.
inline QuadratureRule tensor_product(const QuadratureRule& a, const QuadratureRule& b) {
  std::vector<double> nodes, weights;
  nodes.reserve(a.size() * b.size() * (a.dim() + b.dim()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      for (double c : a.node(i)) nodes.push_back(c);
      for (double c : b.node(j)) nodes.push_back(c);
      weights.push_back(a.weight(i) * b.weight(j));
    }
  const int exact = a.exactness_degree() < b.exactness_degree() ? a.exactness_degree()
                                                                 : b.exactness_degree();
  return QuadratureRule(a.dim() + b.dim(), std::move(nodes), std::move(weights), exact);
}

/// Composite rule: `base` (1-d) repeated on `pieces` equal sub-intervals of [0,1].
inline QuadratureRule composite(const QuadratureRule& base, int pieces) {
  if (base.dim() != 1 || pieces < 1) throw std::invalid_argument("composite: 1-d base only");
  std::vector<double> nodes, weights;
  for (int p = 0; p < pieces; ++p)
    for (std::size_t i = 0; i < base.size(); ++i) {
      nodes.push_back((p + base.node(i)[0]) / pieces);
      weights.push_back(base.weight(i) / pieces);
    }
  return QuadratureRule(1, std::move(nodes), std::move(weights), base.exactness_degree());
}

namespace detail {

template <class F>
double adaptive_simpson_step(F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a,b] (signed: a > b flips the sign).
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12, int max_depth = 40) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, tol, max_depth);
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace sfvm

#endif  // SFVM_QUADRATURE_HPP_
