#ifndef SFVM_FORMS_HPP_
#define SFVM_FORMS_HPP_

// Differential forms in a single coordinate chart.
//
// A k-form on a d-dimensional chart is stored in canonical antisymmetric
// form: one coefficient function per strictly increasing multi-index
// (i_1 < ... < i_k). The coordinate order fixes the orientation, i.e.
// dx^0 ^ ... ^ dx^(d-1) is the positive volume form. In a spacetime chart
// (t, x) this makes dt ^ dx positive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfvm/errors.hpp"
#include "sfvm/quadrature.hpp"

namespace sfvm {

using MultiIndex = std::vector<int>;
using ScalarField = std::function<double(std::span<const double>)>;
using GradientField = std::function<void(std::span<const double>, std::span<double>)>;
using ChartDomain = std::function<bool(std::span<const double>)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Sort `idx` in place; returns the permutation sign, or 0 on a repeated index.
inline int canonicalize(MultiIndex& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

/// All strictly increasing multi-indices of length k over {0..d-1}, in
/// lexicographic order.
inline std::vector<MultiIndex> increasing_indices(int d, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > d) return out;
  MultiIndex cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

/// Position of a canonical multi-index in increasing_indices(d, idx.size()).
inline int index_rank(const MultiIndex& idx, int d) {
  const auto all = increasing_indices(d, static_cast<int>(idx.size()));
  const auto it = std::find(all.begin(), all.end(), idx);
  return it == all.end() ? -1 : static_cast<int>(it - all.begin());
}

/// Determinant of a small dense k x k matrix (row-major, copied).
inline double small_determinant(std::vector<double> a, int k) {
  double det = 1.0;
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
    if (a[piv * k + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < k; ++j) std::swap(a[piv * k + j], a[c * k + j]);
      det = -det;
    }
    det *= a[c * k + c];
    for (int r = c + 1; r < k; ++r) {
      const double f = a[r * k + c] / a[c * k + c];
      for (int j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
    }
  }
  return det;
}

/// A scalar coefficient function with an optional analytic gradient.
struct Coefficient {
  ScalarField value;
  GradientField gradient;  // empty: derivatives fall back to finite differences

  static Coefficient constant(double c) {
    Coefficient out;
    out.value = [c](std::span<const double>) { return c; };
    out.gradient = [](std::span<const double>, std::span<double> g) {
      std::fill(g.begin(), g.end(), 0.0);
    };
    return out;
  }
};

inline Coefficient scaled(const Coefficient& c, double s) {
  Coefficient out;
  out.value = [f = c.value, s](std::span<const double> x) { return s * f(x); };
  if (c.gradient)
    out.gradient = [g = c.gradient, s](std::span<const double> x, std::span<double> grad) {
      g(x, grad);
      for (double& v : grad) v *= s;
    };
  return out;
}

inline Coefficient sum(const Coefficient& a, const Coefficient& b) {
  Coefficient out;
  out.value = [fa = a.value, fb = b.value](std::span<const double> x) { return fa(x) + fb(x); };
  if (a.gradient && b.gradient)
    out.gradient = [ga = a.gradient, gb = b.gradient](std::span<const double> x,
                                                      std::span<double> grad) {
      std::vector<double> tmp(grad.size());
      ga(x, grad);
      gb(x, tmp);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += tmp[i];
    };
  return out;
}

inline Coefficient product(const Coefficient& a, const Coefficient& b) {
  Coefficient out;
  out.value = [fa = a.value, fb = b.value](std::span<const double> x) { return fa(x) * fb(x); };
  if (a.gradient && b.gradient)
    out.gradient = [fa = a.value, fb = b.value, ga = a.gradient, gb = b.gradient](
                       std::span<const double> x, std::span<double> grad) {
      std::vector<double> tmp(grad.size());
      ga(x, grad);
      gb(x, tmp);
      const double va = fa(x), vb = fb(x);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = grad[i] * vb + va * tmp[i];
    };
  return out;
}

class CoordinateForm;
CoordinateForm wedge(const CoordinateForm& a, const CoordinateForm& b);

/// A differential k-form on a d-dimensional coordinate chart.
class CoordinateForm {
 public:
  CoordinateForm(int degree, int chart_dim) : degree_(degree), dim_(chart_dim) {
    if (chart_dim < 0 || degree < 0)
      throw DimensionError("CoordinateForm: negative degree or dimension");
    if (degree > chart_dim)
      throw DimensionError("CoordinateForm: degree " + std::to_string(degree) +
                           " exceeds chart dimension " + std::to_string(chart_dim));
  }

  /// 0-form from a function.
  static CoordinateForm function(int chart_dim, Coefficient f) {
    CoordinateForm out(0, chart_dim);
    out.add_term({}, std::move(f));
    return out;
  }

  /// The zero form; degrees above chart_dim are allowed here (and only here).
  static CoordinateForm zero(int degree, int chart_dim) {
    if (degree > chart_dim) return CoordinateForm(VanishingTag{}, degree, chart_dim);
    return CoordinateForm(degree, chart_dim);
  }

  /// c * dx^{idx}, with idx in any order (sign-normalized).
  static CoordinateForm basis(int chart_dim, MultiIndex idx, double c = 1.0) {
    CoordinateForm out(static_cast<int>(idx.size()), chart_dim);
    out.add_term(std::move(idx), Coefficient::constant(c));
    return out;
  }

  int degree() const { return degree_; }
  int chart_dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<MultiIndex, Coefficient>& terms() const { return terms_; }
  const ChartDomain& domain() const { return domain_; }

  /// Adds f * dx^{idx}; idx is canonicalized and the sign folded into f.
  CoordinateForm& add_term(MultiIndex idx, Coefficient f) {
    if (vanishing_) throw DimensionError("CoordinateForm: cannot add terms above top degree");
    if (static_cast<int>(idx.size()) != degree_)
      throw DimensionError("CoordinateForm::add_term: multi-index length mismatch");
    for (int i : idx)
      if (i < 0 || i >= dim_) throw DimensionError("CoordinateForm::add_term: index out of chart");
    const int sign = canonicalize(idx);
    if (sign == 0) return *this;
    if (sign < 0) f = scaled(f, -1.0);
    auto it = terms_.find(idx);
    if (it == terms_.end())
      terms_.emplace(std::move(idx), std::move(f));
    else
      it->second = sum(it->second, f);
    return *this;
  }

  CoordinateForm with_domain(ChartDomain domain) const {
    CoordinateForm out = *this;
    out.domain_ = std::move(domain);
    return out;
  }

  void check_domain(std::span<const double> x) const {
    if (domain_ && !domain_(x)) {
      std::string msg = "coefficient evaluated outside chart domain at (";
      for (std::size_t i = 0; i < x.size(); ++i)
        msg += (i ? ", " : "") + std::to_string(x[i]);
      throw DomainError(msg + ")");
    }
  }

  /// Coefficient of the canonical multi-index idx at x (0 if absent).
  double coefficient(const MultiIndex& idx, std::span<const double> x) const {
    check_domain(x);
    auto it = terms_.find(idx);
    return it == terms_.end() ? 0.0 : it->second.value(x);
  }

  /// Coefficient of dx^0 ^ ... ^ dx^(d-1); requires degree == chart_dim.
  double top_coefficient(std::span<const double> x) const {
    if (degree_ != dim_) throw DimensionError("top_coefficient: form is not of top degree");
    MultiIndex idx(dim_);
    std::iota(idx.begin(), idx.end(), 0);
    return coefficient(idx, x);
  }

  CoordinateForm operator-() const {
    CoordinateForm out(*this);
    for (auto& [idx, c] : out.terms_) c = scaled(c, -1.0);
    return out;
  }

  friend CoordinateForm operator+(const CoordinateForm& a, const CoordinateForm& b) {
    if (a.degree_ != b.degree_ || a.dim_ != b.dim_)
      throw DimensionError("CoordinateForm +: degree or dimension mismatch");
    CoordinateForm out(a);
    for (const auto& [idx, c] : b.terms_) out.add_term(idx, c);
    if (!out.domain_) out.domain_ = b.domain_;
    return out;
  }
  friend CoordinateForm operator-(const CoordinateForm& a, const CoordinateForm& b) {
    return a + (-b);
  }

  /// Pointwise product with a 0-form coefficient.
  friend CoordinateForm operator*(const Coefficient& f, const CoordinateForm& a) {
    CoordinateForm out(a.degree_, a.dim_);
    out.domain_ = a.domain_;
    for (const auto& [idx, c] : a.terms_) out.add_term(idx, product(f, c));
    return out;
  }

 private:
  friend CoordinateForm wedge(const CoordinateForm&, const CoordinateForm&);

  struct VanishingTag {};
  CoordinateForm(VanishingTag, int degree, int chart_dim)
      : degree_(degree), dim_(chart_dim), vanishing_(true) {}

  int degree_;
  int dim_;
  bool vanishing_ = false;  // degree above chart_dim: identically zero
  std::map<MultiIndex, Coefficient> terms_;
  ChartDomain domain_;
};

/// Exterior product in canonical form. Degrees above the chart dimension give
/// the (terms-free) zero form.
inline CoordinateForm wedge(const CoordinateForm& a, const CoordinateForm& b) {
  if (a.chart_dim() != b.chart_dim())
    throw DimensionError("wedge: chart dimension mismatch (" + std::to_string(a.chart_dim()) +
                         " vs " + std::to_string(b.chart_dim()) + ")");
  const int degree = a.degree() + b.degree();
  if (degree > a.chart_dim())
    return CoordinateForm(CoordinateForm::VanishingTag{}, degree, a.chart_dim());
  CoordinateForm out(degree, a.chart_dim());
  out.domain_ = a.domain() ? a.domain() : b.domain();
  for (const auto& [ia, ca] : a.terms())
    for (const auto& [ib, cb] : b.terms()) {
      MultiIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add_term(std::move(idx), product(ca, cb));
    }
  return out;
}

struct DerivativeOptions {
  bool use_analytic = true;  // use Coefficient::gradient when present
  double fd_scale = 1e-6;    // step h = fd_scale * (1 + |x_j|), central differences
};

/// Partial derivative of a coefficient along coordinate j at x.
inline double partial(const Coefficient& c, int j, std::span<const double> x, int dim,
                      const DerivativeOptions& opt) {
  if (opt.use_analytic && c.gradient) {
    std::vector<double> g(dim);
    c.gradient(x, g);
    return g[j];
  }
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  const double h = opt.fd_scale * (1.0 + std::abs(x[j]));
  xp[j] += h;
  xm[j] -= h;
  return (c.value(xp) - c.value(xm)) / (xp[j] - xm[j]);
}

/// Exterior derivative d(sum f_I dx^I) = sum_j d_j f_I dx^j ^ dx^I.
inline CoordinateForm exterior_derivative(const CoordinateForm& f,
                                          const DerivativeOptions& opt = {}) {
  if (f.degree() + 1 > f.chart_dim()) return CoordinateForm::zero(f.degree() + 1, f.chart_dim());
  const int dim = f.chart_dim();
  CoordinateForm out(f.degree() + 1, dim);
  for (const auto& [idx, c] : f.terms())
    for (int j = 0; j < dim; ++j) {
      if (std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
      MultiIndex nidx{j};
      nidx.insert(nidx.end(), idx.begin(), idx.end());
      Coefficient dc;
      dc.value = [c, j, dim, opt](std::span<const double> x) { return partial(c, j, x, dim, opt); };
      out.add_term(std::move(nidx), std::move(dc));
    }
  return out.with_domain(f.domain());
}

/// A parameterized face: a smooth map from the reference cell [0,1]^k into the
/// chart, with a fixed orientation sign.
class FaceChart {
 public:
  using ParamFn = std::function<void(std::span<const double>, std::span<double>)>;
  /// Row-major chart_dim x face_dim tangent map.
  using JacobianFn = std::function<void(std::span<const double>, std::span<double>)>;

  FaceChart(int chart_dim, int face_dim, ParamFn param, JacobianFn jacobian = {},
            int orientation = 1)
      : chart_dim_(chart_dim),
        face_dim_(face_dim),
        orientation_(orientation >= 0 ? 1 : -1),
        param_(std::move(param)),
        jacobian_(std::move(jacobian)) {
    if (face_dim < 0 || face_dim > chart_dim)
      throw DimensionError("FaceChart: face dimension must lie in [0, chart_dim]");
  }

  /// Straight segment a + s (b - a), s in [0,1].
  static FaceChart segment(std::vector<double> a, std::vector<double> b, int orientation = 1) {
    if (a.size() != b.size()) throw DimensionError("FaceChart::segment: endpoint dimensions differ");
    const int d = static_cast<int>(a.size());
    std::vector<double> dir(d);
    for (int i = 0; i < d; ++i) dir[i] = b[i] - a[i];
    auto param = [a, dir](std::span<const double> s, std::span<double> x) {
      for (std::size_t i = 0; i < a.size(); ++i) x[i] = a[i] + s[0] * dir[i];
    };
    auto jac = [dir](std::span<const double>, std::span<double> j) {
      std::copy(dir.begin(), dir.end(), j.begin());
    };
    return FaceChart(d, 1, std::move(param), std::move(jac), orientation);
  }

  /// Axis-aligned box [lo, hi] as a full-dimensional chart (used for cells).
  static FaceChart box(std::vector<double> lo, std::vector<double> hi) {
    const int d = static_cast<int>(lo.size());
    auto param = [lo, hi](std::span<const double> s, std::span<double> x) {
      for (std::size_t i = 0; i < lo.size(); ++i) x[i] = lo[i] + s[i] * (hi[i] - lo[i]);
    };
    auto jac = [lo, hi, d](std::span<const double>, std::span<double> j) {
      std::fill(j.begin(), j.end(), 0.0);
      for (int i = 0; i < d; ++i) j[i * d + i] = hi[i] - lo[i];
    };
    return FaceChart(d, d, std::move(param), std::move(jac), 1);
  }

  int chart_dim() const { return chart_dim_; }
  int face_dim() const { return face_dim_; }
  int orientation() const { return orientation_; }

  FaceChart with_orientation(int sign) const {
    FaceChart out(*this);
    out.orientation_ = sign >= 0 ? 1 : -1;
    return out;
  }
  FaceChart flipped() const { return with_orientation(-orientation_); }

  void point(std::span<const double> s, std::span<double> x) const { param_(s, x); }
  std::vector<double> point(std::span<const double> s) const {
    std::vector<double> x(chart_dim_);
    param_(s, x);
    return x;
  }

  void jacobian(std::span<const double> s, std::span<double> jac) const {
    if (jacobian_) {
      jacobian_(s, jac);
      return;
    }
    std::vector<double> sp(s.begin(), s.end()), sm(s.begin(), s.end());
    std::vector<double> xp(chart_dim_), xm(chart_dim_);
    for (int c = 0; c < face_dim_; ++c) {
      const double h = 1e-6 * (1.0 + std::abs(s[c]));
      sp[c] = s[c] + h;
      sm[c] = s[c] - h;
      param_(sp, xp);
      param_(sm, xm);
      for (int r = 0; r < chart_dim_; ++r) jac[r * face_dim_ + c] = (xp[r] - xm[r]) / (2.0 * h);
      sp[c] = sm[c] = s[c];
    }
  }

  /// Minor of the tangent map for chart rows `rows` (all face columns).
  double minor(std::span<const double> jac, const MultiIndex& rows) const {
    const int k = face_dim_;
    std::vector<double> m(k * k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) m[r * k + c] = jac[rows[r] * k + c];
    return small_determinant(std::move(m), k);
  }

  /// Gram determinant det(J^T J); zero iff the tangent map is rank deficient.
  double gram_determinant(std::span<const double> jac) const {
    const int k = face_dim_;
    std::vector<double> g(k * k, 0.0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int r = 0; r < chart_dim_; ++r) g[a * k + b] += jac[r * k + a] * jac[r * k + b];
    return small_determinant(std::move(g), k);
  }

 private:
  int chart_dim_;
  int face_dim_;
  int orientation_;
  ParamFn param_;
  JacobianFn jacobian_;
};

inline void require_full_rank(const FaceChart& face, std::span<const double> jac) {
  if (face.face_dim() == 0) return;
  double scale = 0.0;
  for (double v : jac) scale = std::max(scale, std::abs(v));
  const double gram = face.gram_determinant(jac);
  if (!(gram > 1e-24 * std::pow(scale, 2 * face.face_dim())) || scale == 0.0)
    throw DimensionError("pullback: rank-deficient face jacobian");
}

/// Pullback of f along the face map: a form of the same degree on the
/// reference cell [0,1]^face_dim, with the face orientation folded in.
inline CoordinateForm pullback(const CoordinateForm& f, const FaceChart& face) {
  if (f.chart_dim() != face.chart_dim())
    throw DimensionError("pullback: chart dimension mismatch");
  const int k = face.face_dim();
  if (f.degree() > k) return CoordinateForm::zero(f.degree(), k);
  CoordinateForm out(f.degree(), k);
  const auto targets = increasing_indices(k, f.degree());
  for (const MultiIndex& target : targets) {
    Coefficient c;
    c.value = [f, face, target](std::span<const double> s) {
      const int d = face.chart_dim(), kk = face.face_dim();
      std::vector<double> x(d), jac(d * kk);
      face.point(s, x);
      face.jacobian(s, jac);
      require_full_rank(face, jac);
      double acc = 0.0;
      for (const auto& [idx, coef] : f.terms()) {
        // minor with chart rows idx and reference columns target
        const int m = static_cast<int>(idx.size());
        std::vector<double> sub(m * m);
        for (int r = 0; r < m; ++r)
          for (int cc = 0; cc < m; ++cc) sub[r * m + cc] = jac[idx[r] * kk + target[cc]];
        const double det = m == 0 ? 1.0 : small_determinant(std::move(sub), m);
        if (det == 0.0) continue;
        f.check_domain(x);
        acc += coef.value(x) * det;
      }
      return face.orientation() * acc;
    };
    out.add_term(target, std::move(c));
  }
  return out;
}

/// Integral of a top-degree form on the reference cell by the given rule.
inline double integrate(const CoordinateForm& f, const QuadratureRule& rule) {
  if (f.degree() != rule.dim() || f.chart_dim() != rule.dim())
    throw DimensionError("integrate: form degree must equal the reference cell dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weight(i) * f.top_coefficient(rule.node(i));
  return acc;
}

// ---------------------------------------------------------------------------
// Parameterized forms u -> omega(u)

using ParamField = std::function<double(std::span<const double>, double)>;
using ParamGradient = std::function<void(std::span<const double>, double, std::span<double>)>;

/// One canonical term of a parameterized form: value(x,u) dx^I, with its
/// u-derivative and (optionally) spatial gradients of both.
struct ParamTerm {
  MultiIndex index;
  ParamField value;
  ParamField du;
  ParamGradient gradient;     // optional
  ParamGradient du_gradient;  // optional
  int rank = -1;              // position among increasing indices of this degree
};

/// A family u -> omega(u) of k-forms together with its u-derivative family.
class ParamForm {
 public:
  ParamForm(int degree, int chart_dim, Interval u_range)
      : degree_(degree), dim_(chart_dim), u_range_(u_range) {
    CoordinateForm(degree, chart_dim);  // validates degree <= dim
    if (!(u_range.hi >= u_range.lo)) throw std::invalid_argument("ParamForm: empty u_range");
  }

  ParamForm& add_term(ParamTerm term) {
    if (static_cast<int>(term.index.size()) != degree_)
      throw DimensionError("ParamForm::add_term: multi-index length mismatch");
    const int sign = canonicalize(term.index);
    if (sign == 0) return *this;
    if (!term.du) {
      term.du = [v = term.value](std::span<const double> x, double u) {
        const double h = 1e-6 * (1.0 + std::abs(u));
        return (v(x, u + h) - v(x, u - h)) / (2.0 * h);
      };
    }
    if (sign < 0) {
      term.value = [v = term.value](std::span<const double> x, double u) { return -v(x, u); };
      term.du = [v = term.du](std::span<const double> x, double u) { return -v(x, u); };
      auto neg = [](ParamGradient g) -> ParamGradient {
        if (!g) return {};
        return [g](std::span<const double> x, double u, std::span<double> out) {
          g(x, u, out);
          for (double& v : out) v = -v;
        };
      };
      term.gradient = neg(term.gradient);
      term.du_gradient = neg(term.du_gradient);
    }
    for (const auto& t : terms_)
      if (t.index == term.index)
        throw DimensionError("ParamForm::add_term: duplicate multi-index");
    term.rank = index_rank(term.index, dim_);
    terms_.push_back(std::move(term));
    return *this;
  }

  int degree() const { return degree_; }
  int chart_dim() const { return dim_; }
  Interval u_range() const { return u_range_; }
  const std::vector<ParamTerm>& terms() const { return terms_; }
  void set_u_range(Interval r) { u_range_ = r; }

  /// omega(u) as a coordinate form.
  CoordinateForm at(double u) const { return build(u, false); }
  /// d_u omega(u) as a coordinate form.
  CoordinateForm du_at(double u) const { return build(u, true); }

  /// Largest |central FD in u of the base - du| over the given samples.
  double du_consistency_error(std::span<const std::vector<double>> points,
                              std::span<const double> u_samples) const {
    double err = 0.0;
    for (const auto& x : points)
      for (double u : u_samples)
        for (const auto& t : terms_) {
          const double h = 1e-5 * (1.0 + std::abs(u));
          const double fd = (t.value(x, u + h) - t.value(x, u - h)) / (2.0 * h);
          err = std::max(err, std::abs(fd - t.du(x, u)));
        }
    return err;
  }

 private:
  CoordinateForm build(double u, bool derivative) const {
    CoordinateForm out(degree_, dim_);
    for (const auto& t : terms_) {
      Coefficient c;
      const ParamField& f = derivative ? t.du : t.value;
      const ParamGradient& g = derivative ? t.du_gradient : t.gradient;
      c.value = [f, u](std::span<const double> x) { return f(x, u); };
      if (g) c.gradient = [g, u](std::span<const double> x, std::span<double> out) { g(x, u, out); };
      out.add_term(t.index, std::move(c));
    }
    return out.with_domain(domain_);
  }

 public:
  ParamForm& with_domain(ChartDomain d) {
    domain_ = std::move(d);
    return *this;
  }
  const ChartDomain& domain() const { return domain_; }

 private:
  int degree_;
  int dim_;
  Interval u_range_;
  std::vector<ParamTerm> terms_;
  ChartDomain domain_;
};

/// Quadrature nodes of a face, with the chart points, orientation-signed
/// weights and all k x k minors of the tangent map precomputed. Integrating
/// a parameterized form over the face then costs one coefficient call per
/// node and non-vanishing term.
class FaceStencil {
 public:
  FaceStencil() = default;
  FaceStencil(const FaceChart& face, const QuadratureRule& rule) : dim_(face.chart_dim()) {
    if (rule.dim() != face.face_dim())
      throw DimensionError("FaceStencil: rule dimension differs from face dimension");
    const int k = face.face_dim();
    combos_ = static_cast<int>(increasing_indices(dim_, k).size());
    const auto rows = increasing_indices(dim_, k);
    std::vector<double> jac(dim_ * k);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto s = rule.node(i);
      const auto x = face.point(s);
      points_.insert(points_.end(), x.begin(), x.end());
      face.jacobian(s, jac);
      require_full_rank(face, jac);
      weights_.push_back(rule.weight(i) * face.orientation());
      for (const auto& r : rows) minors_.push_back(k == 0 ? 1.0 : face.minor(jac, r));
    }
  }

  std::size_t size() const { return weights_.size(); }
  int chart_dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  double minor(std::size_t i, int rank) const { return minors_[i * combos_ + rank]; }

  /// Integral of omega(u) (or d_u omega(u)) over the face.
  double integrate(const ParamForm& f, double u, bool derivative = false) const {
    return integrate_weighted(f, u, derivative, [](std::span<const double>) { return 1.0; });
  }

  /// Integral of psi * omega(u) (or psi * d_u omega(u)) over the face.
  template <class Weight>
  double integrate_weighted(const ParamForm& f, double u, bool derivative, Weight&& psi) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto x = point(i);
      double local = 0.0;
      for (const auto& t : f.terms()) {
        const double m = minor(i, t.rank);
        if (m == 0.0) continue;
        local += m * (derivative ? t.du(x, u) : t.value(x, u));
      }
      if (local != 0.0) acc += weights_[i] * psi(x) * local;
    }
    return acc;
  }

  /// Pointwise pulled-back coefficient of omega(u) at node i (orientation applied).
  double pulled_coefficient(const ParamForm& f, std::size_t i, double u, bool derivative) const {
    double local = 0.0;
    const auto x = point(i);
    for (const auto& t : f.terms()) {
      const double m = minor(i, t.rank);
      if (m != 0.0) local += m * (derivative ? t.du(x, u) : t.value(x, u));
    }
    return (weights_[i] < 0 ? -1.0 : 1.0) * local;
  }

  /// Integral of a plain (non-parameterized) coordinate form.
  double integrate(const CoordinateForm& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto x = point(i);
      for (const auto& [idx, c] : f.terms()) {
        const double m = minor(i, index_rank(idx, dim_));
        if (m == 0.0) continue;
        f.check_domain(x);
        acc += weights_[i] * m * c.value(x);
      }
    }
    return acc;
  }

 private:
  int dim_ = 0;
  int combos_ = 0;
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<double> minors_;
};

/// Evenly spaced samples of an interval (n >= 2 includes both endpoints).
inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  if (n == 1) return {0.5 * (a + b)};
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

}  // namespace sfvm

#endif  // SFVM_FORMS_HPP_
