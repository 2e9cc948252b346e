#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfvm/sfvm.hpp"
#include "support.hpp"

using namespace sfvm;
using sfvm::testing::Gen;

namespace {

// omega(u) = w(x) u dx with exact u-derivative.
FluxField weighted_density(std::function<double(double)> w) {
  ParamForm omega(1, 2, {-1, 1});
  omega.add_term({{kX},
                  [w](std::span<const double> p, double u) { return w(p[kX]) * u; },
                  [w](std::span<const double> p, double) { return w(p[kX]); },
                  {},
                  {}});
  return {std::move(omega), CoordinateForm::basis(2, {kX}), "weighted density"};
}

Foliation uniform_foliation(SpatialDomain d, double T, int slabs) {
  Foliation f{{}, d};
  for (int j = 0; j <= slabs; ++j) f.times.push_back(T * j / slabs);
  return f;
}

// Random 1-form whose coefficients are periodic in x with period L, with
// analytic gradients.
CoordinateForm periodic_form(Gen& g, double L) {
  CoordinateForm out(1, 2);
  for (int idx : {kT, kX}) {
    std::array<double, 5> p;
    for (double& v : p) v = g.uniform(-1, 1);
    const double k = 2 * std::numbers::pi / L;
    Coefficient c;
    c.value = [p, k](std::span<const double> x) {
      const double s = std::sin(k * x[kX]), co = std::cos(k * x[kX]);
      return p[0] + p[1] * x[kT] + p[2] * s + p[3] * co + p[4] * x[kT] * s;
    };
    c.gradient = [p, k](std::span<const double> x, std::span<double> d) {
      const double s = std::sin(k * x[kX]), co = std::cos(k * x[kX]);
      d[kT] = p[1] + p[4] * s;
      d[kX] = k * (p[2] * co - p[3] * s + p[4] * x[kT] * co);
    };
    out.add_term({idx}, c);
  }
  return out;
}

double integrate_on(const CoordinateForm& f, const FaceChart& face, int n = 8) {
  const auto rule = face.face_dim() == 1 ? gauss_legendre(n) : tensor_product(gauss_legendre(n), gauss_legendre(n));
  return integrate(pullback(f, face), rule);
}

}  // namespace

TEST(Triangulation, IntervalCounts) {
  const auto d = SpatialDomain::interval(0, 1);
  const Triangulation tri(uniform_foliation(d, 1.0, 4), SpatialPartition::uniform(d, 8));
  EXPECT_EQ(tri.cells().size(), 32u);
  EXPECT_EQ(tri.spacelike_count(), 40);
  EXPECT_EQ(tri.vertical_count(), 9 * 4);
  EXPECT_EQ(tri.boundary_vertical_count(), 2 * 4);
  EXPECT_EQ(tri.boundary_faces().size(), 8u);
  EXPECT_TRUE(tri.admissibility().all());
}

TEST(Triangulation, CircleCounts) {
  const auto d = SpatialDomain::circle(1.0);
  const Triangulation tri(uniform_foliation(d, 1.0, 2), SpatialPartition::uniform(d, 3));
  EXPECT_EQ(tri.cells().size(), 6u);
  EXPECT_EQ(tri.spacelike_count(), 9);
  int interior = 0, boundary = 0;
  for (const auto& f : tri.faces()) {
    interior += f.role == FaceRole::VerticalInterior;
    boundary += f.role == FaceRole::VerticalBoundary;
  }
  EXPECT_EQ(interior, 6);
  EXPECT_EQ(boundary, 0);
  EXPECT_TRUE(tri.admissibility().all());
}

TEST(Triangulation, NonUniformPartitionAccepted) {
  const auto d = SpatialDomain::interval(0, 1);
  const Triangulation tri(uniform_foliation(d, 0.5, 3), SpatialPartition{d, {0, 0.5, 0.6, 1}});
  const auto fl = tri.admissibility();
  EXPECT_TRUE(fl.one_inflow_one_outflow);
  EXPECT_TRUE(fl.spacelike_faces_on_slices);
  EXPECT_TRUE(fl.interior_faces_shared_oppositely);
  EXPECT_TRUE(fl.inflow_faces_chain);
}

TEST(Triangulation, RejectsBadInput) {
  const auto d = SpatialDomain::interval(0, 1);
  EXPECT_THROW(Triangulation(uniform_foliation(d, 1, 2), SpatialPartition{d, {0, 0.7, 0.5, 1}}), std::invalid_argument);
  EXPECT_THROW(Triangulation(uniform_foliation(d, 1, 2), SpatialPartition{d, {0, 0.5, 0.9}}), std::invalid_argument);
  EXPECT_THROW(Triangulation(Foliation{{0.0}, d}, SpatialPartition::uniform(d, 4)), std::invalid_argument);
  EXPECT_THROW(Triangulation(Foliation{{0.1, 0.2}, d}, SpatialPartition::uniform(d, 4)), std::invalid_argument);
  EXPECT_THROW(Triangulation(Foliation{{0.0, 0.2, 0.2}, d}, SpatialPartition::uniform(d, 4)), std::invalid_argument);
}

// Property: with the per-cell vertical signs, the boundary of every cell is
// the Stokes boundary: int_K d(beta) = int_out - int_in + sum_s sign_s int_s.
TEST(TriangulationProperty, CellBoundaryOrientationSatisfiesStokes) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Gen g(seed);
    const bool circle = seed % 2;
    const auto d = circle ? SpatialDomain::circle(g.uniform(0.5, 2)) : SpatialDomain::interval(-1, g.uniform(0, 1));
    std::vector<double> nodes{d.a};
    const int n = g.integer(2, 5);
    for (int i = 1; i < n; ++i) nodes.push_back(d.a + d.length() * (i + g.uniform(-0.3, 0.3)) / n);
    nodes.push_back(d.b);
    Foliation fol{{0.0}, d};
    for (int j = 0; j < 3; ++j) fol.times.push_back(fol.times.back() + g.uniform(0.05, 0.5));
    const Triangulation tri(fol, SpatialPartition{d, nodes});
    const CoordinateForm beta = circle ? periodic_form(g, d.length()) : g.form(1, 2);
    const CoordinateForm dbeta = exterior_derivative(beta);
    for (const auto& c : tri.cells()) {
      double boundary = integrate_on(beta, tri.face_chart(c.outflow)) - integrate_on(beta, tri.face_chart(c.inflow));
      for (const auto& side : c.vertical) boundary += side.sign * integrate_on(beta, tri.face_chart(side.face));
      EXPECT_NEAR(integrate_on(dbeta, tri.cell_chart(c.id)), boundary, 1e-10) << "seed " << seed << " cell " << c.id;
    }
  }
}

TEST(Triangulation, InteriorFacesSeenOppositely) {
  const auto d = SpatialDomain::circle(1.0);
  const Triangulation tri(uniform_foliation(d, 1.0, 2), SpatialPartition::uniform(d, 5));
  const auto flux = burgers_flux({-1, 1});
  for (const auto& f : tri.faces()) {
    if (f.role != FaceRole::VerticalInterior) continue;
    double total = 0.0;
    for (int cid : {f.owner, f.neighbor})
      for (const auto& side : tri.cell(cid).vertical)
        if (side.face == f.id) total += side.sign * integrate_on(flux.omega.at(0.6), tri.face_chart(f.id));
    EXPECT_EQ(total, 0.0);
  }
}

TEST(TotalFlux, UnitDensity) {
  const auto flux = weighted_density([](double) { return 1.0; });
  const auto q = total_flux(FaceChart::segment({0.3, 0}, {0.3, 1}), flux, {-1, 1}, true);
  for (double u : {-1.0, -0.2, 0.5, 1.0}) {
    EXPECT_NEAR(q(u), u, 1e-15);
    EXPECT_NEAR(q.derivative(u), 1.0, 1e-15);
  }
  EXPECT_NEAR(q.dq_inf(), 1.0, 1e-15);
  EXPECT_NEAR(q.dq_max(), 1.0, 1e-15);
  EXPECT_NEAR(q.dq_min(), 0.9, 1e-15);
  EXPECT_NEAR(q.image().lo, -1.0, 1e-15);
  EXPECT_NEAR(q.image().hi, 1.0, 1e-15);
}

TEST(TotalFlux, WeightedDensity) {
  const auto flux = weighted_density([](double x) { return 2.0 + std::sin(x); });
  const auto q = total_flux(FaceChart::segment({0, 0}, {0, std::numbers::pi}), flux, {-1, 1}, true, gauss_legendre(16));
  const double c = 2 * std::numbers::pi + 2;
  for (double u : {-1.0, 0.25, 1.0}) EXPECT_NEAR(q(u), c * u, 1e-13);
  EXPECT_NEAR(invert_total_flux(q, c), 1.0, 1e-12);
}

TEST(TotalFlux, CharacteristicCircleIsNotMonotone) {
  const auto g = annulus_geometry();
  const auto q = total_flux(circle_face(1.0), g.flux, {-1, 1}, false, composite(gauss_legendre(8), 8));
  for (double u : {-1.0, 0.0, 0.7}) EXPECT_NEAR(q(u), 0.0, 1e-14);
  EXPECT_THROW(total_flux(circle_face(1.0), g.flux, {-1, 1}, true), NotSpacelikeError);
}

TEST(InvertTotalFlux, Examples) {
  const auto two = weighted_density([](double) { return 2.0; });
  EXPECT_NEAR(invert_total_flux(total_flux(FaceChart::segment({0, 0}, {0, 1}), two, {-1, 1}, true), 1.0), 0.5, 1e-14);
  const auto unit = weighted_density([](double) { return 1.0; });
  const auto q = total_flux(FaceChart::segment({0, 0}, {0, 1}), unit, {0, 1}, true);
  EXPECT_THROW(invert_total_flux(q, 2.0), ValueOutsideImage);
  // within tol of the image edge is accepted and clamped
  EXPECT_EQ(invert_total_flux(q, 1.0 + 1e-14), 1.0);
}

// Property: invert(q(u)) == u on spacelike slices of the built-in fields.
TEST(InvertTotalFluxProperty, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Gen g(seed);
    const Interval r{-1.5, 1.5};
    const FluxField flux = seed % 3 == 0   ? burgers_flux(r)
                           : seed % 3 == 1 ? phi_transport_flux(g.uniform(1, 8), r)
                                           : random_polynomial_flux(seed, r);
    const double t = g.uniform(0, 1), x0 = g.uniform(-1, 1);
    const auto q = total_flux(FaceChart::segment({t, x0}, {t, x0 + g.uniform(0.01, 0.5)}), flux, r, true);
    EXPECT_GT(q.dq_inf(), 0.0);
    for (int n = 0; n < 10; ++n) {
      const double u = g.uniform(r.lo, r.hi);
      const double back = invert_total_flux(q, q(u));
      EXPECT_LE(std::abs(q(back) - q(u)), 1e-12 * std::max(1.0, std::abs(q(u)))) << "seed " << seed;
      EXPECT_NEAR(back, u, 1e-9) << "seed " << seed;
    }
  }
}

// Property: sum over the boundary of K of the oriented total fluxes of
// omega(c) equals int_K d(omega(c)); zero for geometry-compatible fields.
TEST(TotalFluxProperty, StokesPerCellForConstants) {
  ParamForm tdx(1, 2, {-1, 1});
  tdx.add_term({{kX}, [](std::span<const double> p, double u) { return u * p[kT]; }, {}, {}, {}});
  const FluxField incompatible{tdx, CoordinateForm::basis(2, {kX}), "u t dx"};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Gen g(seed);
    const auto d = SpatialDomain::interval(0, 1);
    const Triangulation tri(uniform_foliation(d, 0.4, 3), SpatialPartition::uniform(d, 5));
    const double c = g.uniform(-1, 1);
    const FluxField compatible = seed % 2 ? phi_transport_flux(g.uniform(1, 7), {-1, 1}) : random_polynomial_flux(seed, {-1, 1});
    for (const auto& cell : tri.cells()) {
      auto boundary_sum = [&](const FluxField& f) {
        double s = total_flux(tri.face_chart(cell.outflow), f, {-1, 1}, false)(c) -
                   total_flux(tri.face_chart(cell.inflow), f, {-1, 1}, false)(c);
        for (const auto& side : cell.vertical) s += side.sign * total_flux(tri.face_chart(side.face), f, {-1, 1}, false)(c);
        return s;
      };
      EXPECT_NEAR(boundary_sum(compatible), 0.0, 1e-11) << "seed " << seed;
      const double area = (0.4 / 3) * 0.2;
      EXPECT_NEAR(boundary_sum(incompatible), c * area, 1e-12) << "seed " << seed;
    }
  }
}

TEST(MeshRegularity, FlatFluxRatioIsOne) {
  const auto d = SpatialDomain::interval(0, 1);
  const Triangulation tri(uniform_foliation(d, 0.2, 4), SpatialPartition::uniform(d, 10));
  const auto rep = mesh_regularity_report(tri, burgers_flux({-1, 1}));
  EXPECT_NEAR(rep.flux_ratio, 1.0, 1e-12);
  EXPECT_NEAR(rep.h, 0.1, 1e-15);
  EXPECT_NEAR(rep.h_bar, 0.05, 1e-15);
  EXPECT_NEAR(rep.dq_inf_scaled, 1.0, 1e-12);
  EXPECT_NEAR(rep.diameter_ratio, std::hypot(0.1, 0.05) / 0.1, 1e-12);
  EXPECT_EQ(rep.max_vertical_faces, 2);
  EXPECT_EQ(rep.max_boundary_faces_per_slab, 2);
  EXPECT_NEAR(rep.density_oscillation, 0.0, 1e-12);
}

TEST(MeshRegularity, WeightedDensityRatioBounded) {
  const auto d = SpatialDomain::interval(0, 2 * std::numbers::pi);
  const auto flux = weighted_density([](double x) { return 2.0 + std::sin(x); });
  const Triangulation tri(uniform_foliation(d, 0.1, 2), SpatialPartition::uniform(d, 3));
  const auto rep = mesh_regularity_report(tri, flux);
  EXPECT_GE(rep.flux_ratio, 1.0);
  EXPECT_LE(rep.flux_ratio, 3.0);
}

TEST(MeshRegularity, TemporalChangeIsSecondOrder) {
  // psi is a smooth bump; on product meshes the change sum scales like h^2
  const TestFunction psi = [](double t, double x) {
    const double r2 = (t - 0.3) * (t - 0.3) / 0.04 + (x - 0.5) * (x - 0.5) / 0.09;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
  };
  RegularityOptions opt;
  opt.psi = psi;
  std::vector<double> sums;
  for (int n : {20, 40, 80}) {
    const auto d = SpatialDomain::interval(0, 1);
    const Triangulation tri(uniform_foliation(d, 0.6, 2 * n), SpatialPartition::uniform(d, n));
    sums.push_back(mesh_regularity_report(tri, burgers_flux({-1, 1}), opt).temporal_change);
  }
  EXPECT_GT(sums[0] / sums[1], 3.0);
  EXPECT_GT(sums[1] / sums[2], 3.0);
}
