#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfvm/sfvm.hpp"
#include "support.hpp"

using namespace sfvm;
using sfvm::testing::Gen;

TEST(Oracle, BurgersShock) {
  const auto o = exact_burgers_riemann(1.0, 0.0);
  EXPECT_EQ(o(0.4, 0.19), 1.0);
  EXPECT_EQ(o(0.4, 0.21), 0.0);
  ASSERT_EQ(o.breaks(0.4).size(), 1u);
  EXPECT_DOUBLE_EQ(o.breaks(0.4)[0], 0.2);
}

TEST(Oracle, BurgersRarefaction) {
  const auto o = exact_burgers_riemann(-1.0, 1.0, 0.25);
  EXPECT_EQ(o(0.5, -0.5), -1.0);
  EXPECT_DOUBLE_EQ(o(0.5, 0.45), 0.4);
  EXPECT_EQ(o(0.5, 0.9), 1.0);
  EXPECT_EQ(o.breaks(0.5), (std::vector<double>{-0.25, 0.75}));
}

TEST(Oracle, LinearCharacteristicsWrap) {
  const auto o = exact_linear([](double s) { return s; }, {0.0}, 1.0);
  EXPECT_NEAR(o(0.3, 0.1), 0.8, 1e-15);
  EXPECT_NEAR(o(2.25, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(o.breaks(0.3)[0], 0.3, 1e-15);
}

// Property: the exact solutions are weak solutions, so their Stokes defect
// over rectangles vanishes to quadrature accuracy.
TEST(OracleProperty, ConservationDefectVanishes) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Gen g(seed);
    const double ul = g.uniform(-1, 1), ur = g.uniform(-1, 1);
    const auto o = exact_burgers_riemann(ul, ur, g.uniform(-0.2, 0.2));
    EXPECT_LE(oracle_conservation_defect(burgers_flux({-1, 1}), o, {0.05, 0.5}, {-1, 1}), 1e-9) << "seed " << seed;
  }
  const auto ex = linear_advection_experiment();
  EXPECT_LE(oracle_conservation_defect(ex.flux, ex.oracle, {0, 1}, {0, 1}), 1e-9);
}

TEST(Oracle, WrongShockSpeedIsDetected) {
  Oracle o = exact_burgers_riemann(1.0, 0.0);
  o.u = [](double t, double x) { return x < 0.8 * t ? 1.0 : 0.0; };
  o.breaks = [](double t) { return std::vector<double>{0.8 * t}; };
  // defect is |(s - 1/2)| times the jump times the crossing duration
  EXPECT_GT(oracle_conservation_defect(burgers_flux({-1, 1}), o, {0, 0.5}, {-1, 1}), 1e-2);
}

TEST(L1Error, ExactOnPiecewiseConstantLattice) {
  // one slab with the oracle equal to the cell means at t = 0
  const auto part = SpatialPartition::uniform(SpatialDomain::interval(-1, 1), 8);
  const auto run = run_to(burgers_flux({-1, 1}), part, {}, {[](double, double x) { return x < 0 ? 1.0 : 0.0; }}, 0.1);
  EXPECT_EQ(l1_error(burgers_flux({-1, 1}), run, exact_burgers_riemann(1, 0), 0), 0.0);
  Oracle shifted = exact_burgers_riemann(1, 0);
  shifted.u = [](double, double x) { return x < 0 ? 0.5 : 0.0; };
  EXPECT_NEAR(l1_error(burgers_flux({-1, 1}), run, shifted, 0), 0.5, 1e-14);
  EXPECT_THROW(l1_error(burgers_flux({-1, 1}), run, shifted, 99), std::invalid_argument);
}

TEST(L1Error, WeightedByDensity) {
  const auto ex = linear_advection_experiment();
  const auto part = SpatialPartition::uniform(ex.domain, 4);
  const auto run = run_to(ex.flux, part, {}, {[](double, double) { return 0.0; }}, 0.01);
  Oracle one = ex.oracle;
  one.u = [](double, double) { return 1.0; };
  one.breaks = nullptr;
  // integral of phi(x) = 2 + sin(2 pi x) over one period
  EXPECT_NEAR(l1_error(ex.flux, run, one, 0), 2.0, 1e-12);
}

TEST(FitOrder, RecoversSyntheticOrder) {
  const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  for (double p : {0.5, 1.0, 2.0}) {
    std::vector<double> e;
    for (double v : h) e.push_back(3.0 * std::pow(v, p));
    EXPECT_NEAR(fit_order(h, e), p, 1e-12);
  }
  EXPECT_THROW(fit_order({0.1}, {1.0}), std::invalid_argument);
}

TEST(ConvergenceStudy, ShockOrderNearOne) {
  const auto st = convergence_study(burgers_shock_experiment(), {1.0 / 40, 1.0 / 80, 1.0 / 160});
  EXPECT_TRUE(st.strictly_decreasing());
  EXPECT_GT(st.order, 0.7);
  EXPECT_LT(st.order, 1.1);
  EXPECT_TRUE(st.oracle_resolved());
  EXPECT_EQ(st.cells, (std::vector<int>{80, 160, 320}));
  EXPECT_THROW(convergence_study(burgers_shock_experiment(), {0.1, 0.05}), std::invalid_argument);
  EXPECT_THROW(convergence_study(burgers_shock_experiment(), {0.1, 0.1, 0.05}), std::invalid_argument);
}

TEST(TraceStudy, DistanceDecreases) {
  const auto st = trace_convergence_check(burgers_shock_experiment(), {0.1, 0.05, 0.025});
  EXPECT_TRUE(st.decreasing());
  EXPECT_GE(st.order, 0.5);
}

TEST(GlobalTermsStudy, SumDecreasesWithRefinement) {
  const TestFunction psi = [](double t, double x) {
    const double r2 = (t - 0.2) * (t - 0.2) / 0.04 + x * x / 0.36;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
  };
  const auto terms = global_terms_study(burgers_shock_experiment(), {0.1, 0.05, 0.025}, psi, EntropyPair::square({-1, 1}));
  ASSERT_EQ(terms.size(), 3u);
  for (const auto& t : terms) EXPECT_TRUE(t.pass(1e-9));
  EXPECT_LT(terms[1].abs_sum(), terms[0].abs_sum());
  EXPECT_LT(terms[2].abs_sum(), terms[1].abs_sum());
}

TEST(Appendix, ReproducesBothExamples) {
  const auto rep = appendix_examples(21, 32);
  EXPECT_TRUE(rep.annulus_hyperbolicity.pass);
  EXPECT_NEAR(rep.annulus_hyperbolicity.min_coefficient, 1.0, 1e-12);
  EXPECT_TRUE(rep.annulus_compatibility.pass);
  EXPECT_EQ(rep.annulus_spacelike_faces, 0);
  EXPECT_TRUE(rep.square_hyperbolicity.pass);
  EXPECT_EQ(rep.square_inflow_pieces, 4);  // three unit segments of the outer bottom plus the hole top
  EXPECT_EQ(rep.inflow_mismatches, 0);
  EXPECT_TRUE(rep.pass());
}

TEST(Appendix, ReferenceInflowSet) {
  EXPECT_TRUE(square_reference_inflow(2.5, 0.0));
  EXPECT_TRUE(square_reference_inflow(1.5, 2.0));
  EXPECT_FALSE(square_reference_inflow(0.5, 2.0));
  EXPECT_FALSE(square_reference_inflow(1.5, 1.0));
  EXPECT_FALSE(square_reference_inflow(1.5, 3.0));
}
