#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfvm/sfvm.hpp"
#include "support.hpp"

using namespace sfvm;
using sfvm::testing::Gen;

namespace {

const MultiIndex kTX{kT, kX};

double at(const CoordinateForm& f, const MultiIndex& idx, std::vector<double> x) { return f.coefficient(idx, x); }

Coefficient coord(int i, double s = 1.0) {
  Coefficient c;
  c.value = [i, s](std::span<const double> x) { return s * x[i]; };
  return c;
}

}  // namespace

TEST(Wedge, BasisOrientation) {
  const auto dt = CoordinateForm::basis(2, {kT}), dx = CoordinateForm::basis(2, {kX});
  EXPECT_EQ(at(wedge(dt, dx), kTX, {0.3, 0.7}), 1.0);
  EXPECT_EQ(at(wedge(dx, dt), kTX, {0.3, 0.7}), -1.0);
  EXPECT_TRUE(wedge(dx, dx).is_zero());
}

TEST(Wedge, AnnulusObserverTimesRadialDerivative) {
  const auto dx = CoordinateForm::basis(2, {0}), dy = CoordinateForm::basis(2, {1});
  const CoordinateForm T = coord(1) * dx + coord(0, -1.0) * dy;
  const CoordinateForm radial = coord(0) * dx + coord(1) * dy;
  const CoordinateForm w = wedge(T, radial);
  Gen g(11);
  for (int n = 0; n < 50; ++n) {
    const auto p = g.point(2, -2.0, 2.0);
    EXPECT_NEAR(w.top_coefficient(p), p[0] * p[0] + p[1] * p[1], 1e-14);
  }
}

TEST(Wedge, AboveTopDegreeIsZero) {
  const auto f = CoordinateForm::basis(2, {kT, kX});
  const auto w = wedge(f, CoordinateForm::basis(2, {kX}));
  EXPECT_EQ(w.degree(), 3);
  EXPECT_TRUE(w.is_zero());
}

TEST(Wedge, RejectsMismatchedCharts) {
  EXPECT_THROW(wedge(CoordinateForm::basis(2, {0}), CoordinateForm::basis(3, {0})), DimensionError);
}

TEST(CoordinateForm, DegreeAboveChartRejected) { EXPECT_THROW(CoordinateForm(3, 2), DimensionError); }

TEST(CoordinateForm, RepeatedIndexVanishes) { EXPECT_TRUE(CoordinateForm::basis(3, {1, 1}).is_zero()); }

// Property: a ^ b = (-1)^(deg a deg b) b ^ a.
TEST(WedgeProperty, GradedAntisymmetry) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Gen g(seed);
    const int dim = 3;
    const int ka = g.integer(0, 2), kb = g.integer(0, dim - ka);
    const auto a = g.form(ka, dim), b = g.form(kb, dim);
    const auto ab = wedge(a, b), ba = wedge(b, a);
    const double sign = (ka * kb) % 2 ? -1.0 : 1.0;
    const auto p = g.point(dim);
    for (const auto& idx : increasing_indices(dim, ka + kb))
      EXPECT_NEAR(ab.coefficient(idx, p), sign * ba.coefficient(idx, p), 1e-13) << "seed " << seed;
  }
}

TEST(ExteriorDerivative, XdyGivesVolume) {
  const auto f = coord(1) * CoordinateForm::basis(2, {0});  // y dx -> d = -dx^dy
  EXPECT_NEAR(exterior_derivative(f).top_coefficient(std::vector<double>{0.2, 0.4}), -1.0, 1e-9);
  const auto g = coord(0) * CoordinateForm::basis(2, {1});  // x dy -> dx^dy
  EXPECT_NEAR(exterior_derivative(g).top_coefficient(std::vector<double>{0.2, 0.4}), 1.0, 1e-9);
}

TEST(ExteriorDerivative, AnnulusFieldIsClosed) {
  const auto geo = annulus_geometry();
  for (double u : linspace(-1.0, 1.0, 5))
    for (bool analytic : {true, false}) {
      const auto d = exterior_derivative(geo.flux.omega.at(u), {analytic, 1e-6});
      for (const auto& p : grid_points({-1.4, -1.4}, {1.4, 1.4}, 9, geo.domain))
        EXPECT_NEAR(d.top_coefficient(p), 0.0, 1e-8);
    }
}

TEST(ExteriorDerivative, PhiTransportFieldIsClosed) {
  const auto flux = phi_transport_flux(3.0, {-2.0, 2.0});
  Gen g(5);
  for (double u : {-1.5, 0.0, 0.8})
    for (int n = 0; n < 20; ++n) {
      const auto p = g.point(2, -3.0, 3.0);
      EXPECT_NEAR(exterior_derivative(flux.omega.at(u)).top_coefficient(p), 0.0, 1e-12);
      EXPECT_NEAR(exterior_derivative(flux.omega.at(u), {false, 1e-6}).top_coefficient(p), 0.0, 1e-7);
    }
}

// Property: d(d f) = 0 for smooth forms (finite differences of finite differences).
TEST(ExteriorDerivativeProperty, SquareVanishes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(100 + seed);
    const int k = g.integer(0, 1);
    const auto f = g.form(k, 3);
    const auto dd = exterior_derivative(exterior_derivative(f, {false, 1e-4}), {false, 1e-4});
    const auto p = g.point(3);
    for (const auto& idx : increasing_indices(3, k + 2)) EXPECT_NEAR(dd.coefficient(idx, p), 0.0, 1e-6) << "seed " << seed;
  }
}

// Property: d(psi w) = d psi ^ w + psi d w.
TEST(ExteriorDerivativeProperty, Leibniz) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(200 + seed);
    const Coefficient psi = g.polynomial(2);
    const auto w = g.form(1, 2);
    const auto lhs = exterior_derivative(psi * w);
    const auto rhs = wedge(exterior_derivative(CoordinateForm::function(2, psi)), w) + psi * exterior_derivative(w);
    const auto p = g.point(2);
    EXPECT_NEAR(lhs.top_coefficient(p), rhs.top_coefficient(p), 1e-7) << "seed " << seed;
  }
}

TEST(Pullback, StateTimesDxOnInitialSlice) {
  ParamForm w(1, 2, {-1, 1});
  w.add_term({{kX}, [](std::span<const double>, double u) { return u; }, {}, {}, {}});
  const auto face = FaceChart::segment({0.0, 0.0}, {0.0, 1.0});
  for (double u : {-0.5, 0.25}) {
    const auto pb = pullback(w.at(u), face);
    for (double s : {0.0, 0.3, 1.0}) EXPECT_NEAR(pb.top_coefficient(std::vector<double>{s}), u, 1e-15);
  }
}

TEST(Pullback, RadialFormVanishesOnCircle) {
  const auto radial = coord(0) * CoordinateForm::basis(2, {0}) + coord(1) * CoordinateForm::basis(2, {1});
  const auto pb = pullback(radial, circle_face(1.0));
  for (double s : linspace(0.0, 1.0, 13)) EXPECT_NEAR(pb.top_coefficient(std::vector<double>{s}), 0.0, 1e-14);
  EXPECT_NEAR(integrate(pb, default_face_rule()), 0.0, 1e-14);
}

TEST(Pullback, FluxTermOnVerticalSegment) {
  // -Q dt with Q = t u on {x = x0, t in [t0, t1]}: integral -u (t1^2 - t0^2) / 2.
  const double t0 = 0.2, t1 = 0.7, x0 = 0.4, u = 1.3;
  Coefficient q;
  q.value = [u](std::span<const double> p) { return -p[kT] * u; };
  const auto form = q * CoordinateForm::basis(2, {kT});
  const auto face = FaceChart::segment({t0, x0}, {t1, x0});
  EXPECT_NEAR(integrate(pullback(form, face), default_face_rule()), -u * (t1 * t1 - t0 * t0) / 2.0, 1e-14);
  EXPECT_NEAR(integrate(pullback(form, face.flipped()), default_face_rule()), u * (t1 * t1 - t0 * t0) / 2.0, 1e-14);
}

TEST(Pullback, RankDeficientFaceRejected) {
  const auto face = FaceChart::segment({0.5, 0.5}, {0.5, 0.5});
  const auto pb = pullback(CoordinateForm::basis(2, {kX}), face);
  EXPECT_THROW(pb.top_coefficient(std::vector<double>{0.5}), DimensionError);
}

TEST(Integrate, WeightedDensityOnSlice) {
  Coefficient c;
  const double u = 0.6;
  c.value = [u](std::span<const double> p) { return (2.0 + std::sin(p[kX])) * u; };
  const auto face = FaceChart::segment({0.0, 0.0}, {0.0, std::numbers::pi});
  const double exact = (2.0 * std::numbers::pi + 2.0) * u;
  EXPECT_NEAR(integrate(pullback(c * CoordinateForm::basis(2, {kX}), face), gauss_legendre(12)), exact, 1e-13);
}

// Stokes on a rectangle: the integral of d w over K equals the boundary
// integral with dt^dx positive.
TEST(StokesProperty, Rectangle) {
  const auto rule2 = tensor_product(gauss_legendre(5), gauss_legendre(5));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(300 + seed);
    const auto w = g.form(1, 2);
    const double t0 = g.uniform(-1, 0), t1 = t0 + g.uniform(0.1, 1), x0 = g.uniform(-1, 0), x1 = x0 + g.uniform(0.1, 1);
    const double inner = integrate(pullback(exterior_derivative(w), FaceChart::box({t0, x0}, {t1, x1})), rule2);
    double boundary = 0.0;
    const std::vector<std::vector<double>> corners{{t0, x0}, {t1, x0}, {t1, x1}, {t0, x1}, {t0, x0}};
    for (int e = 0; e < 4; ++e) boundary += integrate(pullback(w, FaceChart::segment(corners[e], corners[e + 1])), gauss_legendre(5));
    EXPECT_NEAR(inner, boundary, 1e-7) << "seed " << seed;
  }
}

TEST(Quadrature, GaussLegendreExactness) {
  for (int n = 1; n <= 8; ++n) {
    const auto r = gauss_legendre(n);
    EXPECT_EQ(r.exactness_degree(), 2 * n - 1);
    double wsum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_GT(r.weight(i), 0.0);
      wsum += r.weight(i);
    }
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) acc += r.weight(i) * std::pow(r.node(i)[0], p);
      EXPECT_NEAR(acc, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
    }
  }
  EXPECT_EQ(default_face_rule().size(), 5u);
  EXPECT_EQ(default_face_rule().exactness_degree(), 9);
}

TEST(Quadrature, TensorAndComposite) {
  const auto t = tensor_product(gauss_legendre(3), gauss_legendre(4));
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += t.weight(i) * std::pow(t.node(i)[0], 5) * std::pow(t.node(i)[1], 7);
  EXPECT_NEAR(acc, 1.0 / 48.0, 1e-14);
  const auto c = composite(gauss_legendre(2), 10);
  acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c.weight(i) * std::abs(c.node(i)[0] - 0.5);
  EXPECT_NEAR(acc, 0.25, 1e-14);
}

TEST(Quadrature, AdaptiveSimpsonSigned) {
  auto f = [](double x) { return std::exp(x); };
  EXPECT_NEAR(adaptive_simpson(f, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-12);
  EXPECT_NEAR(adaptive_simpson(f, 1.0, 0.0), 1.0 - std::exp(1.0), 1e-12);
}

TEST(ParamForm, DerivativeConsistency) {
  const auto flux = phi_transport_flux(2.0, {-1, 1});
  const auto pts = grid_points({0, 0}, {1, 1}, 5);
  const auto us = linspace(-1, 1, 7);
  EXPECT_LT(flux.omega.du_consistency_error(pts, us), 1e-8);
  EXPECT_LT(burgers_flux({-1, 1}).omega.du_consistency_error(pts, us), 1e-8);
}

TEST(FaceStencil, MatchesPullbackQuadrature) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Gen g(400 + seed);
    const double c1 = g.uniform(-1, 1), c2 = g.uniform(-1, 1);
    ParamForm w(1, 2, {-1, 1});
    w.add_term({{kX}, [c1](std::span<const double> p, double u) { return (1 + c1 * p[kT]) * u * u; }, {}, {}, {}});
    w.add_term({{kT}, [c2](std::span<const double> p, double u) { return c2 * p[kX] * u; }, {}, {}, {}});
    const auto face = FaceChart::segment(g.point(2), g.point(2), g.integer(0, 1) ? 1 : -1);
    const double u = g.uniform(-1, 1);
    const FaceStencil st(face, default_face_rule());
    EXPECT_NEAR(st.integrate(w, u), integrate(pullback(w.at(u), face), default_face_rule()), 1e-14) << "seed " << seed;
  }
}
