#ifndef SFVM_BUILTIN_FLUXES_HPP_
#define SFVM_BUILTIN_FLUXES_HPP_

// Ready-made flux fields.
//
// Solver fluxes live on the spacetime chart (t, x): coordinate 0 is t,
// coordinate 1 is x. A conservation law d_t v(u) + d_x f(u) = 0 corresponds to
// omega(u) = v(u) dx - f(u) dt.
//
// The two planar geometries (annulus, square with a hole) live on a chart
// (x, y) and are only used for classification.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sfvm/expression.hpp"
#include "sfvm/fluxfield.hpp"
#include "sfvm/forms.hpp"

namespace sfvm {

inline constexpr int kT = 0;
inline constexpr int kX = 1;

namespace detail {

inline ParamGradient zero_gradient() {
  return [](std::span<const double>, double, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
}

inline double sampled_max_abs(const std::function<double(double)>& f, Interval r, int n = 65) {
  double m = 0.0;
  for (double u : linspace(r.lo, r.hi, n)) m = std::max(m, std::abs(f(u)));
  return m;
}

}  // namespace detail

/// omega(u) = u dx - f(u) dt on the flat (t, x) chart.
inline FluxField flat_flux(std::function<double(double)> f, std::function<double(double)> df,
                           Interval u_range, std::string name) {
  ParamForm omega(1, 2, u_range);
  const ParamGradient zero = detail::zero_gradient();
  omega.add_term({{kX},
                  [](std::span<const double>, double u) { return u; },
                  [](std::span<const double>, double) { return 1.0; },
                  zero,
                  zero});
  omega.add_term({{kT},
                  [f](std::span<const double>, double u) { return -f(u); },
                  [df](std::span<const double>, double u) { return -df(u); },
                  zero,
                  zero});
  const double lip = detail::sampled_max_abs(df, u_range);
  CoordinateForm alpha = CoordinateForm::basis(2, {kX}, 1.0) + CoordinateForm::basis(2, {kT}, lip);
  return {std::move(omega), std::move(alpha), std::move(name)};
}

inline FluxField burgers_flux(Interval u_range) {
  return flat_flux([](double u) { return 0.5 * u * u; }, [](double u) { return u; }, u_range, "burgers");
}

inline FluxField linear_flux(double speed, Interval u_range) {
  return flat_flux([speed](double u) { return speed * u; }, [speed](double) { return speed; }, u_range,
                   "linear");
}

/// Flat flux with a random cubic f(u) = c1 u + c2 u^2 + c3 u^3, c_i uniform in [-1, 1].
inline FluxField random_polynomial_flux(std::uint64_t seed, Interval u_range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
  return flat_flux([=](double u) { return u * (c1 + u * (c2 + u * c3)); },
                   [=](double u) { return c1 + u * (2.0 * c2 + 3.0 * c3 * u); }, u_range,
                   "poly" + std::to_string(seed));
}

/// omega(u) = phi(x - t) u (dx - dt) with phi(s) = 2 + sin(k s). Geometry
/// compatible; solutions are transported: u(t, x) = u0(x - t).
inline FluxField phi_transport_flux(double k, Interval u_range) {
  auto phi = [k](double s) { return 2.0 + std::sin(k * s); };
  auto dphi = [k](double s) { return k * std::cos(k * s); };
  ParamForm omega(1, 2, u_range);
  auto grad = [dphi](bool times_u) {
    return [dphi, times_u](std::span<const double> p, double u, std::span<double> g) {
      const double d = dphi(p[kX] - p[kT]) * (times_u ? u : 1.0);
      g[kT] = -d;
      g[kX] = d;
    };
  };
  // dx component: +phi u ; dt component: -phi u
  for (const auto& [idx, sign] : {std::pair{kX, 1.0}, std::pair{kT, -1.0}}) {
    ParamGradient g_val = grad(true), g_du = grad(false);
    omega.add_term({{idx},
                    [phi, sign](std::span<const double> p, double u) { return sign * phi(p[kX] - p[kT]) * u; },
                    [phi, sign](std::span<const double> p, double) { return sign * phi(p[kX] - p[kT]); },
                    [g_val, sign](std::span<const double> p, double u, std::span<double> g) {
                      g_val(p, u, g);
                      for (double& v : g) v *= sign;
                    },
                    [g_du, sign](std::span<const double> p, double u, std::span<double> g) {
                      g_du(p, u, g);
                      for (double& v : g) v *= sign;
                    }});
  }
  Coefficient phi_c;
  phi_c.value = [phi](std::span<const double> p) { return phi(p[kX] - p[kT]); };
  CoordinateForm alpha = phi_c * (CoordinateForm::basis(2, {kX}) + CoordinateForm::basis(2, {kT}));
  return {std::move(omega), std::move(alpha), "phi_transport"};
}

/// omega(u) = a(t,x,u) dx - b(t,x,u) dt from expressions; derivatives are
/// symbolic. The growth bound is the sampled coefficient-wise sup over `box`.
inline FluxField expression_flux(const Expression& density, const Expression& flux, Interval u_range,
                                 const std::vector<double>& box_lo, const std::vector<double>& box_hi,
                                 std::string name = "expression") {
  ParamForm omega(1, 2, u_range);
  auto make_term = [](int idx, Expression e, double sign) {
    Expression du = e.derivative(Var::U);
    Expression et = e.derivative(Var::T), ex = e.derivative(Var::X);
    Expression dut = du.derivative(Var::T), dux = du.derivative(Var::X);
    ParamTerm term;
    term.index = {idx};
    term.value = [e, sign](std::span<const double> p, double u) { return sign * e(p[kT], p[kX], u); };
    term.du = [du, sign](std::span<const double> p, double u) { return sign * du(p[kT], p[kX], u); };
    term.gradient = [et, ex, sign](std::span<const double> p, double u, std::span<double> g) {
      g[kT] = sign * et(p[kT], p[kX], u);
      g[kX] = sign * ex(p[kT], p[kX], u);
    };
    term.du_gradient = [dut, dux, sign](std::span<const double> p, double u, std::span<double> g) {
      g[kT] = sign * dut(p[kT], p[kX], u);
      g[kX] = sign * dux(p[kT], p[kX], u);
    };
    return term;
  };
  omega.add_term(make_term(kX, density, 1.0));
  omega.add_term(make_term(kT, flux, -1.0));
  double a_bound = 0.0, b_bound = 0.0;
  const Expression da = density.derivative(Var::U), db = flux.derivative(Var::U);
  for (const auto& p : grid_points(box_lo, box_hi, 9))
    for (double u : u_samples(u_range, 17)) {
      a_bound = std::max(a_bound, std::abs(da(p[kT], p[kX], u)));
      b_bound = std::max(b_bound, std::abs(db(p[kT], p[kX], u)));
    }
  CoordinateForm alpha = CoordinateForm::basis(2, {kX}, a_bound) + CoordinateForm::basis(2, {kT}, b_bound);
  return {std::move(omega), std::move(alpha), std::move(name)};
}

/// A boundary piece of a planar region with its outward normal 1-form.
struct BoundaryPiece {
  std::string label;
  FaceChart face;
  CoordinateForm normal;
};

/// Annulus 1 <= x^2 + y^2 <= 2 with omega(u) = u x dx + u y dy.
struct AnnulusGeometry {
  FluxField flux;
  Observer observer;
  std::vector<BoundaryPiece> boundary;
  ChartDomain domain;
};

inline FaceChart circle_face(double r) {
  const double two_pi = 2.0 * std::numbers::pi;
  return FaceChart(
      2, 1,
      [r, two_pi](std::span<const double> s, std::span<double> x) {
        x[0] = r * std::cos(two_pi * s[0]);
        x[1] = r * std::sin(two_pi * s[0]);
      },
      [r, two_pi](std::span<const double> s, std::span<double> j) {
        j[0] = -two_pi * r * std::sin(two_pi * s[0]);
        j[1] = two_pi * r * std::cos(two_pi * s[0]);
      });
}

inline AnnulusGeometry annulus_geometry(Interval u_range = {-1.0, 1.0}) {
  ChartDomain domain = [](std::span<const double> p) {
    const double r2 = p[0] * p[0] + p[1] * p[1];
    return r2 >= 1.0 - 1e-9 && r2 <= 2.0 + 1e-9;
  };
  ParamForm omega(1, 2, u_range);
  for (int i = 0; i < 2; ++i) {
    omega.add_term({{i},
                    [i](std::span<const double> p, double u) { return u * p[i]; },
                    [i](std::span<const double> p, double) { return p[i]; },
                    [i](std::span<const double>, double u, std::span<double> g) {
                      g[0] = g[1] = 0.0;
                      g[i] = u;
                    },
                    [i](std::span<const double>, double, std::span<double> g) {
                      g[0] = g[1] = 0.0;
                      g[i] = 1.0;
                    }});
  }
  omega.with_domain(domain);
  auto coord = [](int i, double sign) {
    Coefficient c;
    c.value = [i, sign](std::span<const double> p) { return sign * p[i]; };
    c.gradient = [i, sign](std::span<const double>, std::span<double> g) {
      g[0] = g[1] = 0.0;
      g[i] = sign;
    };
    return c;
  };
  auto abs_coord = [](int i) {
    Coefficient c;
    c.value = [i](std::span<const double> p) { return std::abs(p[i]); };
    return c;
  };
  CoordinateForm alpha = abs_coord(0) * CoordinateForm::basis(2, {0}) + abs_coord(1) * CoordinateForm::basis(2, {1});
  // T = y dx - x dy
  CoordinateForm T = coord(1, 1.0) * CoordinateForm::basis(2, {0}) + coord(0, -1.0) * CoordinateForm::basis(2, {1});
  CoordinateForm radial = coord(0, 1.0) * CoordinateForm::basis(2, {0}) + coord(1, 1.0) * CoordinateForm::basis(2, {1});
  std::vector<BoundaryPiece> boundary;
  boundary.push_back({"inner circle r=1", circle_face(1.0), -radial});
  boundary.push_back({"outer circle r=sqrt(2)", circle_face(std::sqrt(2.0)), radial});
  return {{std::move(omega), std::move(alpha), "annulus"}, {std::move(T)}, std::move(boundary), domain};
}

/// Square [0,3]^2 with the open hole (1,2)^2 removed, omega(u) = -u dx, T = dy.
struct SquareWithHoleGeometry {
  FluxField flux;
  Observer observer;
  std::vector<BoundaryPiece> boundary;  // unit-length segments
  ChartDomain domain;
};

inline SquareWithHoleGeometry square_with_hole_geometry(Interval u_range = {-1.0, 1.0}) {
  ChartDomain domain = [](std::span<const double> p) {
    const bool in_square = p[0] >= 0.0 && p[0] <= 3.0 && p[1] >= 0.0 && p[1] <= 3.0;
    const bool in_hole = p[0] > 1.0 && p[0] < 2.0 && p[1] > 1.0 && p[1] < 2.0;
    return in_square && !in_hole;
  };
  ParamForm omega(1, 2, u_range);
  const ParamGradient zero = detail::zero_gradient();
  omega.add_term({{0},
                  [](std::span<const double>, double u) { return -u; },
                  [](std::span<const double>, double) { return -1.0; },
                  zero,
                  zero});
  omega.with_domain(domain);
  const CoordinateForm dx = CoordinateForm::basis(2, {0}), dy = CoordinateForm::basis(2, {1});
  std::vector<BoundaryPiece> b;
  auto seg = [&b](std::string label, double x0, double y0, double x1, double y1, CoordinateForm n) {
    b.push_back({std::move(label), FaceChart::segment({x0, y0}, {x1, y1}), std::move(n)});
  };
  for (int i = 0; i < 3; ++i) {
    const double a = i, c = i + 1.0;
    seg("outer bottom", a, 0, c, 0, -dy);
    seg("outer top", a, 3, c, 3, dy);
    seg("outer left", 0, a, 0, c, -dx);
    seg("outer right", 3, a, 3, c, dx);
  }
  seg("hole bottom", 1, 1, 2, 1, dy);
  seg("hole top", 1, 2, 2, 2, -dy);
  seg("hole left", 1, 1, 1, 2, dx);
  seg("hole right", 2, 1, 2, 2, -dx);
  CoordinateForm alpha = CoordinateForm::basis(2, {0});
  return {{std::move(omega), std::move(alpha), "square_with_hole"}, {dy}, std::move(b), domain};
}

}  // namespace sfvm

#endif  // SFVM_BUILTIN_FLUXES_HPP_
