#ifndef SFVM_REGULARITY_HPP_
#define SFVM_REGULARITY_HPP_

// Diagnostics for the mesh conditions used in the convergence analysis. The
// metric is the Euclidean distance of the (t, x) chart and h is the largest
// spatial cell width.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sfvm/entropy.hpp"
#include "sfvm/mesh.hpp"
#include "sfvm/scheme.hpp"

namespace sfvm {

struct RegularityOptions {
  Interval u_range{-1.0, 1.0};
  CoordinateForm alpha_B = CoordinateForm::basis(2, {0}) + CoordinateForm::basis(2, {1});
  std::optional<Interval> region_t, region_x;  // compact region D; whole mesh if unset
  TestFunction psi;                            // for the temporal-change sum; skipped if empty
  std::optional<EntropyPair> pair;             // entropy of that sum; default Kruzkov at u_range.lo
  std::vector<double> u_samples;               // default: 5 samples of u_range
  NumericalFluxSpec spec;                      // fixes the lambda weights in psi averages
  int threads = 0;
};

struct MeshRegularityReport {
  double h = 0.0;                    // largest spatial width
  double h_bar = 0.0;                // largest slab extent
  double diameter_ratio = 0.0;       // max diam(K) / h
  double dq_inf_scaled = 0.0;        // min over outflow faces of inf dq / h
  double dq_max_scaled = 0.0;        // max over outflow faces of sup dq / h
  double boundary_mass_scaled = 0.0; // max alpha_B mass of a boundary face / h
  int max_vertical_faces = 0;        // per cell
  int max_boundary_faces_per_slab = 0;
  int region_cells_per_slab = 0;     // max # cells of a slab meeting D
  double region_cells_scaled = 0.0;  // times h
  int region_slabs = 0;              // # slabs meeting D
  double region_slabs_scaled = 0.0;  // times h
  double flux_ratio = 0.0;           // max sup dq / inf dq over spacelike faces
  double density_oscillation = 0.0;  // max relative mean deviation of Kruzkov densities on vertical faces
  double temporal_change = 0.0;      // max over slabs j >= 1 and samples of the psi-average change sum
};

namespace detail {

/// Mean absolute deviation of the dt-density of i* Omega(u) on a vertical
/// face, relative to its dt-mean.
inline double vertical_density_oscillation(const FaceStencil& st, const ParamForm& Omega, double u, double dt) {
  double mass = 0.0, mean = 0.0;
  std::vector<double> phi(st.size());
  for (std::size_t n = 0; n < st.size(); ++n) {
    phi[n] = st.pulled_coefficient(Omega, n, u, false) / dt;
    mass += std::abs(st.weight(n));
    mean += std::abs(st.weight(n)) * phi[n];
  }
  mean /= mass;
  double dev = 0.0;
  for (std::size_t n = 0; n < st.size(); ++n) dev += std::abs(st.weight(n)) * std::abs(phi[n] - mean);
  return dev / mass;
}

inline double psi_boundary_average(const SchemeContext& ctx, const SlabTables& tab, int i, const TestFunction& psi) {
  const auto sides = cell_sides(ctx.partition, i);
  const CellLambdas lam = cell_lambdas(ctx, tab, i);
  double out = 0.0;
  for (int s = 0; s < 2; ++s) out += lam.lambda[s] * vertical_mean(tab.vertical[sides[s].k].g.stencil(), psi);
  return out;
}

}  // namespace detail

inline MeshRegularityReport mesh_regularity_report(const Triangulation& tri, const FluxField& flux,
                                                   const RegularityOptions& opt = {}) {
  const SpatialPartition& part = tri.partition();
  const Foliation& fol = tri.foliation();
  const SchemeContext ctx = make_context(flux, part, opt.spec, opt.u_range, opt.threads);
  const std::vector<double> us = opt.u_samples.empty() ? linspace(opt.u_range.lo, opt.u_range.hi, 5) : opt.u_samples;
  MeshRegularityReport rep;
  rep.h = part.max_width();
  rep.max_vertical_faces = 2;
  rep.max_boundary_faces_per_slab = part.domain.periodic() ? 0 : 2;
  rep.dq_inf_scaled = std::numeric_limits<double>::infinity();
  const Interval rt = opt.region_t.value_or(Interval{fol.times.front(), fol.horizon()});
  const Interval rx = opt.region_x.value_or(Interval{part.domain.a, part.domain.b});

  std::vector<ParamForm> kruzkov;
  for (double c : us) kruzkov.push_back(EntropyPair::kruzkov(c).omega(*ctx.omega));

  const ParamForm change_omega = opt.pair.value_or(EntropyPair::kruzkov(opt.u_range.lo)).omega(*ctx.omega);

  auto spacelike_ratio = [&](const TotalFlux& q) { rep.flux_ratio = std::max(rep.flux_ratio, q.dq_max() / q.dq_inf()); };
  SliceFluxes first = build_slice_fluxes(ctx, fol.times.front());
  for (const auto& q : first) spacelike_ratio(q);

  std::optional<SlabTables> prev;
  for (int j = 0; j < fol.slabs(); ++j) {
    const double t0 = fol.times[j], t1 = fol.times[j + 1], dt = t1 - t0;
    rep.h_bar = std::max(rep.h_bar, dt);
    SlabTables tab = build_slab_tables(ctx, t0, t1);
    int in_region = 0;
    for (int i = 0; i < part.cells(); ++i) {
      const double w = part.width(i);
      rep.diameter_ratio = std::max(rep.diameter_ratio, std::hypot(w, dt) / rep.h);
      const TotalFlux& q = tab.outflow[i];
      rep.dq_inf_scaled = std::min(rep.dq_inf_scaled, q.dq_inf() / rep.h);
      rep.dq_max_scaled = std::max(rep.dq_max_scaled, q.dq_max() / rep.h);
      spacelike_ratio(q);
      if (t1 >= rt.lo && t0 <= rt.hi && part.nodes[i + 1] >= rx.lo && part.nodes[i] <= rx.hi) ++in_region;
    }
    rep.region_cells_per_slab = std::max(rep.region_cells_per_slab, in_region);
    if (in_region > 0) ++rep.region_slabs;
    for (const auto& vf : tab.vertical)
      for (const auto& Omega : kruzkov)
        for (double u : us)
          rep.density_oscillation = std::max(
              rep.density_oscillation, detail::vertical_density_oscillation(vf.g.stencil(), Omega, u, dt));
    if (!part.domain.periodic())
      for (int k : {0, part.cells()}) {
        const FaceStencil st(vertical_face_chart(part, t0, t1, k).with_orientation(1), ctx.rule);
        rep.boundary_mass_scaled = std::max(rep.boundary_mass_scaled, std::abs(st.integrate(opt.alpha_B)) / rep.h);
      }
    if (opt.psi && prev) {
      const SlabTables& before = *prev;
      for (double u : us) {
        double sum = 0.0;
        for (int i = 0; i < part.cells(); ++i) {
          const double avg_prev = detail::psi_boundary_average(ctx, before, i, opt.psi);
          const double avg = detail::psi_boundary_average(ctx, tab, i, opt.psi);
          auto w_prev = [&](std::span<const double> x) { return avg_prev - opt.psi(x[0], x[1]); };
          auto w_cur = [&](std::span<const double> x) { return avg - opt.psi(x[0], x[1]); };
          sum += std::abs(before.outflow[i].stencil().integrate_weighted(change_omega, u, false, w_prev) -
                          tab.outflow[i].stencil().integrate_weighted(change_omega, u, false, w_cur));
        }
        rep.temporal_change = std::max(rep.temporal_change, sum);
      }
    }
    prev = std::move(tab);
  }
  rep.region_cells_scaled = rep.region_cells_per_slab * rep.h;
  rep.region_slabs_scaled = rep.region_slabs * rep.h;
  return rep;
}

}  // namespace sfvm

#endif  // SFVM_REGULARITY_HPP_
