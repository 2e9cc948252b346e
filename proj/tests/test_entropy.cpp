#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfvm/sfvm.hpp"
#include "support.hpp"

using namespace sfvm;
using sfvm::testing::Gen;

namespace {

const NumericalFluxSpec kGodunov{NumericalFluxKind::GodunovOsher, std::nullopt};
const NumericalFluxSpec kRusanov{NumericalFluxKind::Rusanov, std::nullopt};

FluxField unit_density() {
  ParamForm w(1, 2, {-2, 2});
  w.add_term({{kX},
              [](std::span<const double>, double u) { return u; },
              [](std::span<const double>, double) { return 1.0; },
              {},
              {}});
  return {std::move(w), CoordinateForm::basis(2, {kX}), "u dx"};
}

BoundaryData riemann(double ul, double ur, double x0 = 0.0) {
  return {[=](double, double x) { return x < x0 ? ul : (x > x0 ? ur : 0.5 * (ul + ur)); }};
}

RunResult burgers_run(const BoundaryData& bd, const NumericalFluxSpec& spec, int cells = 40, double T = 0.3) {
  return run_to(burgers_flux({-1, 1}), SpatialPartition::uniform(SpatialDomain::interval(-1, 1), cells), spec, bd, T);
}

double smooth_bump(double t, double x, double tc, double xc, double rt, double rx) {
  const double r2 = (t - tc) * (t - tc) / (rt * rt) + (x - xc) * (x - xc) / (rx * rx);
  return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

}  // namespace

TEST(EntropyTotalFlux, IdentityEntropyReproducesTotalFlux) {
  const auto q = total_flux(FaceChart::segment({0, 0}, {0, 1}), burgers_flux({-1, 1}), {-1, 1}, true);
  const auto id = EntropyPair::identity({-1, 1});
  for (double u : {-1.0, -0.4, 0.0, 0.3, 1.0}) EXPECT_NEAR(entropy_total_flux(id, q, u), q(u) - q(0.0), 1e-12);
}

TEST(EntropyTotalFlux, KruzkovOnUnitDensity) {
  const auto q = total_flux(FaceChart::segment({0.2, 0}, {0.2, 1}), unit_density(), {-2, 2}, true);
  for (double c : {-0.5, 0.0, 0.7})
    for (double u : {-1.5, -0.5, 0.1, 1.9}) EXPECT_NEAR(entropy_total_flux(EntropyPair::kruzkov(c), q, u), std::abs(u - c), 1e-14);
  EXPECT_EQ(entropy_total_flux(EntropyPair::kruzkov(0.3), q, 0.3), 0.0);
}

TEST(EntropyPair, OmegaVanishesAtZeroAndMatchesFaceFlux) {
  const auto flux = phi_transport_flux(3.0, {-1, 1});
  const auto face = FaceChart::segment({0.1, 0.2}, {0.1, 0.9});
  const FaceStencil st(face, default_face_rule());
  const auto q = total_flux(face, flux, {-1, 1}, true);
  for (const auto& pair : {EntropyPair::square({-1, 1}), EntropyPair::kruzkov(0.25)}) {
    const ParamForm Omega = pair.omega(flux.omega);
    if (pair.kind() == EntropyPair::Kind::Convex) {
      EXPECT_EQ(st.integrate(Omega, 0.0), 0.0);
    }
    for (double u : {-0.9, -0.1, 0.25, 0.8}) EXPECT_NEAR(st.integrate(Omega, u), pair.face_flux(q, u), 1e-11) << pair.name();
  }
  const auto kr = EntropyPair::kruzkov(0.4).omega(flux.omega);
  EXPECT_EQ(st.integrate(kr, 0.4), 0.0);
}

TEST(EntropyPair, ConvexityAndModulus) {
  const auto sq = EntropyPair::square({-1, 1});
  EXPECT_GE(sq.min_second_difference(), 0.0);
  EXPECT_DOUBLE_EQ(sq.convexity_modulus(), 1.0);
  EXPECT_TRUE(sq.admissible());
  EXPECT_EQ(EntropyPair::kruzkov(0.1).convexity_modulus(), 0.0);
  EXPECT_GE(EntropyPair::kruzkov(0.1).min_second_difference(), 0.0);
}

// Property: d/du q^Omega(u) = U'(u) dq/du, i.e. the chain rule through q^{-1}.
TEST(EntropyTotalFluxProperty, DerivativeIdentity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Gen g(seed);
    const FluxField flux = seed % 2 ? phi_transport_flux(g.uniform(1, 6), {-1, 1}) : random_polynomial_flux(seed, {-1, 1});
    const double t = g.uniform(0, 1), x = g.uniform(-1, 1);
    const auto q = total_flux(FaceChart::segment({t, x}, {t, x + g.uniform(0.05, 0.5)}), flux, {-1, 1}, true);
    const double a = g.uniform(0.5, 2);
    const auto pair = EntropyPair::convex([a](double u) { return std::exp(a * u); }, [a](double u) { return a * std::exp(a * u); },
                                          [a](double u) { return a * a * std::exp(a * u); }, {-1, 1}, "exp");
    for (int n = 0; n < 5; ++n) {
      const double u = g.uniform(-0.9, 0.9), h = 1e-5;
      const double lhs = (pair.face_flux(q, u + h) - pair.face_flux(q, u - h)) / (q(u + h) - q(u - h));
      EXPECT_NEAR(lhs, pair.dU(u), 1e-6 * (1 + std::abs(pair.dU(u)))) << "seed " << seed;
    }
  }
}

// Property: q^Omega of a Kruzkov pair is non-negative on oriented spacelike faces.
TEST(EntropyTotalFluxProperty, KruzkovPositivity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(seed);
    const auto flux = random_polynomial_flux(seed, {-1, 1});
    const double t = g.uniform(0, 1), x = g.uniform(-1, 1);
    const auto q = total_flux(FaceChart::segment({t, x}, {t, x + 0.3}), flux, {-1, 1}, true);
    for (int n = 0; n < 20; ++n)
      EXPECT_GE(EntropyPair::kruzkov(g.uniform(-1, 1)).face_flux(q, g.uniform(-1, 1)), 0.0);
  }
}

TEST(KruzkovNumericalFlux, Examples) {
  const auto ctx = make_context(burgers_flux({-1, 1}), SpatialPartition::uniform(SpatialDomain::interval(0, 1), 4),
                                kGodunov, {-1, 1});
  const auto tab = build_slab_tables(ctx, 0.0, 0.1);
  const auto& vf = tab.vertical[2];
  EXPECT_EQ(kruzkov_numerical_flux(kGodunov, vf, 1, 0.3, 0.3, 0.3), 0.0);
  EXPECT_NEAR(kruzkov_numerical_flux(kGodunov, vf, 1, 0.8, 0.5, 0.2),
              numerical_flux(kGodunov, vf, 1, 0.8, 0.5) - numerical_flux(kGodunov, vf, 1, 0.2, 0.2), 1e-15);
  EXPECT_NEAR(kruzkov_numerical_flux(kGodunov, vf, 1, 1.0, -1.0, 0.0), 0.0, 1e-15);
}

// Property: Kruzkov numerical fluxes are consistent with the Kruzkov face
// flux and conservative.
TEST(KruzkovNumericalFluxProperty, ConsistentAndConservative) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Gen g(seed);
    for (const auto& spec : {kGodunov, kRusanov}) {
      const auto ctx = make_context(random_polynomial_flux(seed, {-1, 1}),
                                    SpatialPartition::uniform(SpatialDomain::interval(0, 1), 4), spec, {-1, 1});
      const auto tab = build_slab_tables(ctx, 0.0, 0.05);
      const auto& vf = tab.vertical[g.integer(0, 4)];
      for (int n = 0; n < 30; ++n) {
        const double u = g.uniform(-1, 1), v = g.uniform(-1, 1), c = g.uniform(-1, 1);
        EXPECT_NEAR(kruzkov_numerical_flux(spec, vf, 1, u, u, c), EntropyPair::kruzkov(c).face_flux(vf.g, u), 1e-14);
        EXPECT_NEAR(kruzkov_numerical_flux(spec, vf, -1, v, u, c), -kruzkov_numerical_flux(spec, vf, 1, u, v, c), 1e-15);
      }
    }
  }
}

TEST(DecompositionStates, EqualNeighborsGiveCommonValue) {
  const auto ctx = make_context(burgers_flux({-1, 1}), SpatialPartition::uniform(SpatialDomain::circle(1), 5),
                                kGodunov, {-1, 1});
  const auto tab = build_slab_tables(ctx, 0.0, 0.04);
  const std::vector<double> u(5, -0.35);
  const auto d = decomposition_states(ctx, tab, u, u, {NAN, NAN}, 2);
  for (int s = 0; s < 2; ++s) {
    EXPECT_NEAR(d.u_tilde[s], -0.35, 1e-12);
    EXPECT_NEAR(d.u_bar[s], -0.35, 1e-12);
  }
  EXPECT_LE(d.convdec_residual, 1e-13);
}

TEST(DecompositionStates, LinearAdvectionHandCase) {
  // upwind with r = dt/dx: the left side carries u + 2r(v - u), the right side u
  const double dx = 0.1, dt = 0.02, r = dt / dx;
  const auto ctx = make_context(linear_flux(1.0, {-1, 1}), SpatialPartition::uniform(SpatialDomain::interval(0, 1), 10),
                                kGodunov, {-1, 1});
  const auto in = build_slice_fluxes(ctx, 0.0);
  const auto tab = build_slab_tables(ctx, 0.0, dt);
  std::vector<double> u(10, 0.2);
  u[3] = 0.9;
  std::vector<double> next(10);
  for (int i = 0; i < 10; ++i) next[i] = step_cell(ctx, tab, in[i], u, {0.2, 0.2}, i);
  const auto d = decomposition_states(ctx, tab, u, next, {0.2, 0.2}, 4);
  EXPECT_NEAR(d.u_tilde[0], 0.2 + 2 * r * (0.9 - 0.2), 1e-12);
  EXPECT_NEAR(d.u_tilde[1], 0.2, 1e-12);
  EXPECT_NEAR(0.5 * (d.u_tilde[0] + d.u_tilde[1]), next[4], 1e-12);
  EXPECT_LE(d.convdec_residual, 1e-10);
  EXPECT_LE(d.bracket_violation, 1e-12);
}

TEST(EntropyCheck, ConstantRunHasZeroResiduals) {
  const auto run = burgers_run({[](double, double) { return 0.4; }}, kGodunov, 20, 0.2);
  const auto rep = entropy_check(burgers_flux({-1, 1}), kGodunov, run);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.face.max, 1e-13);
  EXPECT_LE(rep.cell.max, 1e-13);
  for (const auto& d : rep.dissipation) {
    EXPECT_NEAR(d.dissipation, 0.0, 1e-20);
    EXPECT_NEAR(d.slack, 0.0, 1e-12);
  }
}

TEST(EntropyCheck, GodunovShockPasses) {
  const auto run = burgers_run(riemann(1, 0), kGodunov);
  EntropyCheckOptions opt;
  opt.extra_lattice = {0.0};
  const auto rep = entropy_check(burgers_flux({-1, 1}), kGodunov, run, opt);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.convdec.max, 1e-9);
  EXPECT_LE(rep.face.max, 1e-9);
  EXPECT_LE(rep.boundary_condition.max, 1e-9);
  double diss = 0.0;
  for (const auto& d : rep.dissipation) {
    diss += d.dissipation;
    EXPECT_GE(d.slack, -d.tol);
  }
  EXPECT_GT(diss, 0.0);
}

TEST(EntropyCheck, RusanovRarefactionPasses) {
  const auto run = burgers_run(riemann(-1, 1), kRusanov);
  EntropyCheckOptions opt;
  opt.convex_pairs = {EntropyPair::square(run.u_range), EntropyPair::identity(run.u_range)};
  const auto rep = entropy_check(burgers_flux({-1, 1}), kRusanov, run, opt);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.cell.max, 1e-9);
}

TEST(EntropyCheck, KruzkovOutsideHullReducesToConservation) {
  const auto run = burgers_run(riemann(0.5, -0.2), kGodunov, 20, 0.2);
  EntropyCheckOptions opt;
  opt.kruzkov = false;
  opt.extra_lattice = {-5.0, 5.0};
  opt.dissipation = false;
  const auto rep = entropy_check(burgers_flux({-1, 1}), kGodunov, run, opt);
  EXPECT_LE(rep.cell.max, 1e-11);
  EXPECT_TRUE(rep.pass());
}

TEST(EntropyCheck, AntiDiffusiveFluxIsFlagged) {
  const NumericalFluxSpec anti{NumericalFluxKind::AntiDiffusive, std::nullopt};
  RunConfig cfg;
  cfg.u_range = Interval{-3, 3};
  const auto run = run_to(burgers_flux({-3, 3}), SpatialPartition::uniform(SpatialDomain::interval(-1, 1), 40), anti,
                          riemann(1, 0), 0.01, cfg);
  const auto rep = entropy_check(burgers_flux({-3, 3}), anti, run);
  EXPECT_FALSE(rep.pass());
  EXPECT_GT(rep.face.failures + rep.cell.failures + rep.bracketing.failures, 0);
}

TEST(BoundaryCondition, GhostEqualsStateAndIdentityEntropy) {
  const auto ctx = make_context(burgers_flux({-1, 1}), SpatialPartition::uniform(SpatialDomain::interval(0, 1), 4),
                                kGodunov, {-1, 1});
  const auto tab = build_slab_tables(ctx, 0.0, 0.05);
  Gen g(7);
  for (int n = 0; n < 30; ++n) {
    std::vector<double> u(4);
    for (double& v : u) v = g.uniform(-1, 1);
    const std::array<double, 2> ghosts{g.uniform(-1, 1), g.uniform(-1, 1)};
    for (int i : {0, 3}) {
      const auto d = decomposition_states(ctx, tab, u, u, ghosts, i);
      const int s = i == 0 ? 0 : 1;
      for (const auto& pair : {EntropyPair::identity({-1, 1}), EntropyPair::kruzkov(g.uniform(-1, 1))})
        EXPECT_LE(check_discrete_boundary_condition(ctx, tab, d, s, pair), 1e-12);
      auto same = u;
      same[i] = ghosts[s];
      const auto e = decomposition_states(ctx, tab, same, same, ghosts, i);
      EXPECT_EQ(check_discrete_boundary_condition(ctx, tab, e, s, EntropyPair::square({-1, 1})), 0.0);
    }
  }
}

TEST(Dissipation, CircleHasNoBoundarySum) {
  const auto part = SpatialPartition::uniform(SpatialDomain::circle(1), 20);
  const auto run = run_to(burgers_flux({-1, 1}), part, kGodunov, {[](double, double x) { return std::sin(2 * std::numbers::pi * x); }}, 0.2);
  const auto ctx = check_context(burgers_flux({-1, 1}), kGodunov, run);
  const auto sq = EntropyPair::square(run.u_range);
  for_each_slab(ctx, run, [&](const SlabView& s) {
    std::vector<CellDecomposition> dec;
    double inflow = 0.0;
    for (int i = 0; i < 20; ++i) {
      dec.push_back(decomposition_states(ctx, s.tab, s.u_minus, s.u_plus, s.ghosts, i));
      inflow += sq.face_flux(s.inflow[i], s.u_minus[i]);
    }
    const auto r = global_dissipation_report(ctx, s, dec, sq, 1e-9);
    EXPECT_NEAR(r.rhs, inflow, 1e-14);
    EXPECT_TRUE(r.pass());
  });
}

TEST(GlobalEntropyInequality, ZeroTestFunction) {
  const auto run = burgers_run(riemann(1, 0), kGodunov, 20, 0.2);
  const auto t = global_entropy_inequality_report(burgers_flux({-1, 1}), kGodunov, run, [](double, double) { return 0.0; },
                                                  EntropyPair::square(run.u_range));
  for (double v : {t.lhs, t.A, t.B, t.C, t.D, t.E}) EXPECT_EQ(v, 0.0);
}

TEST(GlobalEntropyInequality, PiecewiseConstantTestFunction) {
  const auto run = burgers_run(riemann(1, 0), kGodunov, 20, 0.2);
  const double cut = run.foliation.times[run.foliation.slabs() - 1];
  const TestFunction psi = [cut](double t, double) { return t <= cut ? 1.0 : 0.0; };
  const auto t = global_entropy_inequality_report(burgers_flux({-1, 1}), kGodunov, run, psi, EntropyPair::square(run.u_range));
  EXPECT_NEAR(t.A, 0.0, 1e-15);
  EXPECT_NEAR(t.B, 0.0, 1e-15);
  EXPECT_NEAR(t.C, 0.0, 1e-15);
  EXPECT_NEAR(t.E, 0.0, 1e-15);
  EXPECT_NEAR(t.D, 0.0, 1e-10);
}

TEST(GlobalEntropyInequality, BumpHolds) {
  const auto run = burgers_run(riemann(1, 0), kGodunov, 40, 0.3);
  const TestFunction psi = [](double t, double x) { return smooth_bump(t, x, 0.12, 0.0, 0.1, 0.5); };
  for (const auto& pair : {EntropyPair::square(run.u_range), EntropyPair::kruzkov(0.5)}) {
    const auto t = global_entropy_inequality_report(burgers_flux({-1, 1}), kGodunov, run, psi, pair);
    EXPECT_TRUE(t.pass(1e-9)) << pair.name() << " slack " << t.slack();
  }
  EXPECT_THROW(global_entropy_inequality_report(burgers_flux({-1, 1}), kGodunov, run, [](double, double) { return 1.0; },
                                                EntropyPair::kruzkov(0.0)),
               std::invalid_argument);
}

TEST(Contraction, IdenticalRunsHaveZeroDistance) {
  const auto run = burgers_run(riemann(1, 0), kGodunov, 20, 0.2);
  const auto rep = contraction_check(burgers_flux({-1, 1}), run, run);
  for (double d : rep.distances) EXPECT_EQ(d, 0.0);
  EXPECT_TRUE(rep.pass());
}

TEST(Contraction, CircleDistanceNonIncreasing) {
  const auto part = SpatialPartition::uniform(SpatialDomain::circle(1), 40);
  RunConfig cfg;
  cfg.u_range = Interval{-1, 1};
  cfg.fixed_dt = 0.005;
  const auto flux = burgers_flux({-1, 1});
  const auto a = run_to(flux, part, kGodunov, {[](double, double x) { return 0.8 * std::sin(2 * std::numbers::pi * x); }}, 0.3, cfg);
  const auto b = run_to(flux, part, kGodunov, {[](double, double x) { return 0.5 * std::cos(2 * std::numbers::pi * x); }}, 0.3, cfg);
  const auto rep = contraction_check(flux, a, b);
  EXPECT_TRUE(rep.pass());
  for (std::size_t j = 1; j < rep.distances.size(); ++j) {
    EXPECT_LE(rep.distances[j], rep.distances[j - 1] + 1e-12);
    EXPECT_GE(rep.distances[j], 0.0);
  }
  EXPECT_LT(rep.distances.back(), rep.distances.front());
}

TEST(Contraction, IntervalWithinBoundaryBudget) {
  const auto part = SpatialPartition::uniform(SpatialDomain::interval(0, 1), 40);
  RunConfig cfg;
  cfg.u_range = Interval{-1, 1};
  cfg.fixed_dt = 0.005;
  const auto flux = burgers_flux({-1, 1});
  const auto a = run_to(flux, part, kGodunov, {[](double t, double x) { return 0.6 * std::sin(4 * x + t); }}, 0.3, cfg);
  const auto b = run_to(flux, part, kGodunov, {[](double t, double x) { return 0.6 * std::cos(3 * x - 2 * t); }}, 0.3, cfg);
  const auto rep = contraction_check(flux, a, b);
  EXPECT_TRUE(rep.pass()) << rep.min_slack;
  double budget = 0.0;
  for (double v : rep.budgets) budget += v;
  EXPECT_GT(budget, 0.0);
  const auto other = run_to(flux, SpatialPartition::uniform(SpatialDomain::interval(0, 1), 20), kGodunov,
                            {[](double, double) { return 0.0; }}, 0.3, cfg);
  EXPECT_THROW(contraction_check(flux, a, other), std::invalid_argument);
}
