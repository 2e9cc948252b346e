#ifndef SFVM_SCHEME_HPP_
#define SFVM_SCHEME_HPP_

// Finite volume time stepping on product triangulations.
//
// Per cell K = [t_j, t_j+1] x [x_i, x_i+1] the update is
//   q_out(u_out) = q_in(u_in) - sum_{vertical sides e} Q_{K,e}(u_in, u_neighbor)
// and u_out is recovered by inverting the strictly increasing q_out.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sfvm/errors.hpp"
#include "sfvm/fluxfield.hpp"
#include "sfvm/forms.hpp"
#include "sfvm/mesh.hpp"
#include "sfvm/parallel.hpp"
#include "sfvm/quadrature.hpp"

namespace sfvm {

enum class NumericalFluxKind {
  GodunovOsher,
  Rusanov,
  AntiDiffusive,  // Rusanov with the dissipation sign flipped; not monotone, for guard tests
};

inline const char* to_string(NumericalFluxKind k) {
  switch (k) {
    case NumericalFluxKind::GodunovOsher: return "godunov";
    case NumericalFluxKind::Rusanov: return "rusanov";
    case NumericalFluxKind::AntiDiffusive: return "antidiffusive";
  }
  return "?";
}

inline std::optional<NumericalFluxKind> parse_flux_kind(const std::string& s) {
  if (s == "godunov" || s == "godunov_osher" || s == "GodunovOsher") return NumericalFluxKind::GodunovOsher;
  if (s == "rusanov" || s == "Rusanov") return NumericalFluxKind::Rusanov;
  if (s == "antidiffusive" || s == "anti_diffusive") return NumericalFluxKind::AntiDiffusive;
  return std::nullopt;
}

struct NumericalFluxSpec {
  NumericalFluxKind kind = NumericalFluxKind::GodunovOsher;
  std::optional<double> rusanov_speed = std::nullopt;  // default: 1.1 * sampled max |g'|
};

/// Owner-oriented total flux g of a vertical face plus the data the
/// numerical flux needs.
struct VerticalFlux {
  TotalFlux g;
  double speed = 0.0;                  // dissipation speed s (Rusanov / anti-diffusive)
  double lambda_numerator = 0.0;       // bound on sup (d_u Q - d_v Q) over u_range
  std::vector<double> critical_points; // sign changes of g' on u_range, ascending
};

/// Zeros of g' located from its sampled sign changes and refined by bisection.
inline std::vector<double> critical_points(const TotalFlux& g) {
  const auto& us = g.sample_points();
  const auto& ds = g.derivative_samples();
  std::vector<double> out;
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (ds[i] == 0.0) {
      out.push_back(us[i]);
      continue;
    }
    if (i + 1 == us.size() || ds[i + 1] == 0.0 || (ds[i] > 0.0) == (ds[i + 1] > 0.0)) continue;
    double a = us[i], b = us[i + 1];
    const bool rising = ds[i] < 0.0;
    for (int it = 0; it < 60 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      if ((g.derivative(m) < 0.0) == rising) a = m; else b = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

inline VerticalFlux make_vertical_flux(TotalFlux g, const NumericalFluxSpec& spec) {
  VerticalFlux vf;
  const double lip = std::max(std::abs(g.dq_inf()), std::abs(g.dq_max()));
  vf.speed = spec.rusanov_speed ? *spec.rusanov_speed : 1.1 * lip;
  if (spec.kind == NumericalFluxKind::GodunovOsher) {
    vf.lambda_numerator = lip;
    vf.critical_points = critical_points(g);
  } else {
    vf.lambda_numerator = vf.speed + 0.5 * (g.dq_max() - g.dq_inf());
  }
  vf.g = std::move(g);
  return vf;
}

/// Godunov flux of g: min over [u, v] if u <= v, else max over [v, u]. The
/// extremum is taken over the endpoints and the critical points of g between
/// them.
inline double godunov_flux(const VerticalFlux& vf, double u, double v) {
  if (u == v) return vf.g(u);
  const bool minimize = u < v;
  const double lo = std::min(u, v), hi = std::max(u, v);
  double best = minimize ? std::min(vf.g(lo), vf.g(hi)) : std::max(vf.g(lo), vf.g(hi));
  for (double w : vf.critical_points) {
    if (w <= lo) continue;
    if (w >= hi) break;
    best = minimize ? std::min(best, vf.g(w)) : std::max(best, vf.g(w));
  }
  return best;
}

/// Q in the owner's orientation.
inline double reference_flux(const NumericalFluxSpec& spec, const VerticalFlux& vf, double u, double v) {
  switch (spec.kind) {
    case NumericalFluxKind::GodunovOsher: return godunov_flux(vf, u, v);
    case NumericalFluxKind::Rusanov: return 0.5 * (vf.g(u) + vf.g(v)) - 0.5 * vf.speed * (v - u);
    case NumericalFluxKind::AntiDiffusive: return 0.5 * (vf.g(u) + vf.g(v)) + 0.5 * vf.speed * (v - u);
  }
  return 0.0;
}

/// Q_{K,e}(u, v) for a cell seeing the face with orientation sign relative to
/// the owner. Non-owners use -Q_ref(v, u), which makes conservation exact.
inline double numerical_flux(const NumericalFluxSpec& spec, const VerticalFlux& vf, int sign, double u,
                             double v) {
  return sign > 0 ? reference_flux(spec, vf, u, v) : -reference_flux(spec, vf, v, u);
}

/// g_{K,e}(u): the oriented total flux through e as seen from K.
inline double vertical_signed_flux(const VerticalFlux& vf, int sign, double u) { return sign * vf.g(u); }

/// Everything fixed for one discretization.
struct SchemeContext {
  std::shared_ptr<const ParamForm> omega;
  SpatialPartition partition;
  NumericalFluxSpec spec;
  Interval u_range;
  QuadratureRule rule = default_face_rule();
  int threads = 1;
};

inline SchemeContext make_context(const FluxField& flux, SpatialPartition part, NumericalFluxSpec spec,
                                  Interval u_range, int threads = 1,
                                  const QuadratureRule& rule = default_face_rule()) {
  part.validate();
  if (part.domain.periodic() && part.cells() < 2)
    throw std::invalid_argument("a circle needs at least two spatial cells");
  return {std::make_shared<const ParamForm>(flux.omega), std::move(part), spec, u_range, rule,
          resolve_threads(threads)};
}

using SliceFluxes = std::vector<TotalFlux>;

/// Total fluxes of the spacelike faces of the slice {t}; monotone required.
inline SliceFluxes build_slice_fluxes(const SchemeContext& ctx, double t) {
  SliceFluxes out(ctx.partition.cells());
  parallel_for(ctx.partition.cells(), ctx.threads, [&](int i) {
    out[i] = TotalFlux(ctx.omega, FaceStencil(spacelike_face_chart(ctx.partition, t, i), ctx.rule), ctx.u_range,
                       true);
  });
  return out;
}

/// Vertical fluxes of the slab [t0, t1] and the outflow slice fluxes at t1.
struct SlabTables {
  double t0 = 0.0, t1 = 0.0;
  std::vector<VerticalFlux> vertical;  // by node index k
  SliceFluxes outflow;                 // by spatial cell i
};

inline SlabTables build_slab_tables(const SchemeContext& ctx, double t0, double t1) {
  SlabTables tab;
  tab.t0 = t0;
  tab.t1 = t1;
  const int V = vertical_face_count(ctx.partition);
  tab.vertical.resize(V);
  parallel_for(V, ctx.threads, [&](int k) {
    TotalFlux g(ctx.omega, FaceStencil(vertical_face_chart(ctx.partition, t0, t1, k), ctx.rule), ctx.u_range,
                false);
    tab.vertical[k] = make_vertical_flux(std::move(g), ctx.spec);
  });
  tab.outflow = build_slice_fluxes(ctx, t1);
  return tab;
}

/// lambda-hat per vertical side, their sum, and the normalized weights.
struct CellLambdas {
  std::array<double, 2> hat{0.0, 0.0};
  double hat_K = 0.0;
  std::array<double, 2> lambda{0.5, 0.5};
  bool pass(double bound = 0.5) const { return hat_K <= bound * (1.0 + 1e-12); }
};

inline CellLambdas lambdas_from_hats(std::array<double, 2> hat) {
  CellLambdas out;
  out.hat = hat;
  out.hat_K = hat[0] + hat[1];
  if (out.hat_K > 0.0)
    out.lambda = {hat[0] / out.hat_K, hat[1] / out.hat_K};
  else
    out.lambda = {0.5, 0.5};
  return out;
}

/// lambda-hat from the structural bounds on d_u Q - d_v Q (exact for the
/// built-in numerical fluxes given sampled bounds on g').
inline CellLambdas cell_lambdas(const SchemeContext& ctx, const SlabTables& tab, int i) {
  const auto sides = cell_sides(ctx.partition, i);
  const double dq = tab.outflow[i].dq_inf();
  std::array<double, 2> hat{};
  for (int s = 0; s < 2; ++s) hat[s] = std::abs(tab.vertical[sides[s].k].lambda_numerator / dq);
  return lambdas_from_hats(hat);
}

/// lambda-hat estimated by central finite differences of Q on a (u, v) grid
/// over u_range.
inline CellLambdas compute_lambdas_fd(const SchemeContext& ctx, const SlabTables& tab, int i, int grid = 17) {
  const auto sides = cell_sides(ctx.partition, i);
  const double dq = tab.outflow[i].dq_inf();
  const auto pts = linspace(ctx.u_range.lo, ctx.u_range.hi, grid);
  std::array<double, 2> hat{};
  for (int s = 0; s < 2; ++s) {
    const VerticalFlux& vf = tab.vertical[sides[s].k];
    const int sign = sides[s].sign;
    double sup = -std::numeric_limits<double>::infinity();
    for (double u : pts)
      for (double v : pts) {
        const double hu = 1e-6 * (1.0 + std::abs(u)), hv = 1e-6 * (1.0 + std::abs(v));
        const double du = (numerical_flux(ctx.spec, vf, sign, u + hu, v) -
                           numerical_flux(ctx.spec, vf, sign, u - hu, v)) / (2.0 * hu);
        const double dv = (numerical_flux(ctx.spec, vf, sign, u, v + hv) -
                           numerical_flux(ctx.spec, vf, sign, u, v - hv)) / (2.0 * hv);
        sup = std::max(sup, du - dv);
      }
    hat[s] = std::abs(sup / dq);
  }
  return lambdas_from_hats(hat);
}

inline double max_lambda_hat(const SchemeContext& ctx, const SlabTables& tab) {
  double m = 0.0;
  for (int i = 0; i < ctx.partition.cells(); ++i) m = std::max(m, cell_lambdas(ctx, tab, i).hat_K);
  return m;
}

/// Boundary data u_B on the spacetime boundary and the positive 1-form
/// alpha_B used for face averages (default dt + dx).
struct BoundaryData {
  std::function<double(double, double)> u_B;  // (t, x)
  CoordinateForm alpha_B = CoordinateForm::basis(2, {0}) + CoordinateForm::basis(2, {1});
};

/// alpha_B-weighted mean of u_B over a face (orientation of the
/// parametrization; the face's stored orientation is ignored).
inline double boundary_ghost_value(const FaceChart& face, const BoundaryData& bd,
                                   const QuadratureRule& rule = default_face_rule()) {
  const FaceStencil st(face.with_orientation(1), rule);
  double mass = 0.0, acc = 0.0;
  for (std::size_t n = 0; n < st.size(); ++n) {
    const auto p = st.point(n);
    double a = 0.0;
    for (const auto& [idx, c] : bd.alpha_B.terms()) a += c.value(p) * st.minor(n, index_rank(idx, 2));
    mass += st.weight(n) * a;
    acc += st.weight(n) * a * bd.u_B(p[0], p[1]);
  }
  if (!(mass > 0.0)) throw std::invalid_argument("boundary average: nonpositive alpha_B mass on a face");
  return acc / mass;
}

/// Initial values on H_0: alpha_B-means of u_B over the spacelike faces.
inline std::vector<double> initial_values(const SpatialPartition& part, const BoundaryData& bd,
                                          const QuadratureRule& rule = default_face_rule()) {
  std::vector<double> out(part.cells());
  for (int i = 0; i < part.cells(); ++i) out[i] = boundary_ghost_value(spacelike_face_chart(part, 0.0, i), bd, rule);
  return out;
}

/// Ghost values of the two boundary faces of slab [t0, t1]; NaN on a circle.
inline std::array<double, 2> slab_ghosts(const SpatialPartition& part, const BoundaryData& bd, double t0, double t1,
                                         const QuadratureRule& rule = default_face_rule()) {
  if (part.domain.periodic())
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  return {boundary_ghost_value(vertical_face_chart(part, t0, t1, 0), bd, rule),
          boundary_ghost_value(vertical_face_chart(part, t0, t1, part.cells()), bd, rule)};
}

/// Hull of u_B sampled at the H_0 quadrature nodes and densely along the
/// vertical boundary over [0, T], widened by a relative 1e-6.
inline Interval sampled_data_range(const SpatialPartition& part, const BoundaryData& bd, double T,
                                   const QuadratureRule& rule = default_face_rule()) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto take = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (int i = 0; i < part.cells(); ++i) {
    for (std::size_t n = 0; n < rule.size(); ++n)
      take(bd.u_B(0.0, part.nodes[i] + rule.node(n)[0] * part.width(i)));
    take(bd.u_B(0.0, part.nodes[i]));
  }
  take(bd.u_B(0.0, part.nodes.back()));
  if (!part.domain.periodic())
    for (double t : linspace(0.0, T, 1025)) {
      take(bd.u_B(t, part.domain.a));
      take(bd.u_B(t, part.domain.b));
    }
  const double pad = 1e-6 * std::max(1.0, hi - lo);
  return {lo - pad, hi + pad};
}

struct RunConfig {
  double cfl_target = 0.5;
  double inversion_tol = 1e-12;
  std::optional<Interval> u_range;
  std::optional<double> fixed_dt;  // uniform slabs instead of CFL-driven selection
  int threads = 0;                 // 0: SPACETIME_FVM_THREADS or 1

  void validate() const {
    if (!(cfl_target > 0.0 && cfl_target <= 0.5))
      throw ConfigError("cfl_target must lie in (0, 1/2], got " + std::to_string(cfl_target));
    if (!(inversion_tol > 0.0)) throw ConfigError("inversion tolerance must be positive");
    if (fixed_dt && !(*fixed_dt > 0.0)) throw ConfigError("explicit slab extent must be positive");
    if (u_range && !(u_range->hi >= u_range->lo)) throw ConfigError("u_range is empty");
  }
};

/// End of a slab of extent h starting at t, snapped to T when the remainder
/// would be negligible.
inline double slab_end(double t, double h, double T) {
  const double t1 = t + std::min(h, T - t);
  return T - t1 <= 1e-12 * std::max(1.0, std::abs(T)) ? T : t1;
}

/// Largest slab extent h in (0, t_end - t_start] with max lambda-hat_K <=
/// cfl_target: halving until admissible, then bisection between the last
/// admissible and inadmissible extents.
inline double select_timestep(const SchemeContext& ctx, double cfl_target, double t_start, double t_end) {
  const double horizon = t_end - t_start;
  if (!(horizon > 0.0)) return 0.0;
  auto admissible = [&](double h) {
    return max_lambda_hat(ctx, build_slab_tables(ctx, t_start, slab_end(t_start, h, t_end))) <= cfl_target;
  };
  double hi = horizon;
  if (admissible(hi)) return hi;
  double lo = 0.5 * hi;
  const double floor = 1e-14 * std::max(1.0, std::abs(t_end));
  while (!admissible(lo)) {
    hi = lo;
    lo *= 0.5;
    if (lo < floor) throw SchemeAbort("select_timestep: no admissible slab extent above the floor");
  }
  for (int it = 0; it < 50 && hi - lo > 1e-12 * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (admissible(mid)) lo = mid; else hi = mid;
  }
  return lo;
}

/// Tables of the next admissible slab starting at t. The previous extent is
/// reused while admissible; otherwise a secant guess from the measured
/// lambda-hat is tried before falling back to select_timestep. h is updated.
inline SlabTables next_slab(const SchemeContext& ctx, double cfl_target, double t, double T, double& h) {
  if (h > 0.0) {
    SlabTables tab = build_slab_tables(ctx, t, slab_end(t, h, T));
    const double m = max_lambda_hat(ctx, tab);
    if (m <= cfl_target) return tab;
    const double guess = (tab.t1 - t) * cfl_target / m * (1.0 - 1e-3);
    tab = build_slab_tables(ctx, t, slab_end(t, guess, T));
    if (max_lambda_hat(ctx, tab) <= cfl_target) {
      h = guess;
      return tab;
    }
  }
  h = select_timestep(ctx, cfl_target, t, T);
  return build_slab_tables(ctx, t, slab_end(t, h, T));
}

/// Slice times from 0 to T chosen slab by slab with next_slab.
inline Foliation plan_foliation(const SchemeContext& ctx, double cfl_target, double T) {
  Foliation fol{{0.0}, ctx.partition.domain};
  double h = 0.0;
  while (fol.times.back() < T) fol.times.push_back(next_slab(ctx, cfl_target, fol.times.back(), T, h).t1);
  return fol;
}

struct SliceState {
  int slice = 0;
  std::vector<double> values;  // u_e per spatial cell
  std::vector<double> fluxes;  // q_e(u_e)
};

struct RunResult {
  SpatialPartition partition;
  Foliation foliation;
  Interval u_range;
  std::vector<SliceState> slices;
  std::vector<std::array<double, 2>> ghosts;  // per slab: left, right (NaN on a circle)

  const SliceState& final_slice() const { return slices.back(); }

  /// Piecewise constant u^h: value of the inflow face of the cell containing
  /// (t, x); t = T maps to the final slice.
  double evaluate(double t, double x) const {
    const auto& times = foliation.times;
    int j = static_cast<int>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
    j = std::clamp(j, 0, static_cast<int>(slices.size()) - 1);
    const auto& nodes = partition.nodes;
    int i = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
    i = std::clamp(i, 0, partition.cells() - 1);
    return slices[j].values[i];
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& s : slices)
      for (double v : s.values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Update of one cell; returns u on its outflow face.
inline double step_cell(const SchemeContext& ctx, const SlabTables& tab, const TotalFlux& q_in,
                        const std::vector<double>& u, const std::array<double, 2>& ghosts, int i,
                        double inversion_tol = 1e-12) {
  const auto sides = cell_sides(ctx.partition, i);
  double rhs = q_in(u[i]);
  for (int s = 0; s < 2; ++s) {
    const double v = sides[s].neighbor >= 0 ? u[sides[s].neighbor] : ghosts[s];
    rhs -= numerical_flux(ctx.spec, tab.vertical[sides[s].k], sides[s].sign, u[i], v);
  }
  InversionOptions opt;
  opt.tol = inversion_tol;
  try {
    return tab.outflow[i].invert(rhs, opt);
  } catch (const ValueOutsideImage& e) {
    std::ostringstream msg;
    msg << "cell " << i << " of slab [" << tab.t0 << ", " << tab.t1 << "]: " << e.what()
        << " (CFL breach or non-monotone numerical flux)";
    throw ValueOutsideImage(msg.str(), e.value(), e.image_lo(), e.image_hi());
  }
}

namespace detail {

inline void advance(const SchemeContext& ctx, const SlabTables& tab, const SliceFluxes& in,
                    const SliceState& cur, const std::array<double, 2>& ghosts, double tol, SliceState& next) {
  const int n = ctx.partition.cells();
  next.values.assign(n, 0.0);
  next.fluxes.assign(n, 0.0);
  parallel_for(n, ctx.threads, [&](int i) {
    next.values[i] = step_cell(ctx, tab, in[i], cur.values, ghosts, i, tol);
    next.fluxes[i] = tab.outflow[i](next.values[i]);
  });
}

inline void check_cfl(const SchemeContext& ctx, const SlabTables& tab) {
  const double m = max_lambda_hat(ctx, tab);
  if (!(m <= 0.5 * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "CFL condition violated on slab [" << tab.t0 << ", " << tab.t1 << "]: lambda_hat_K = " << m << " > 1/2";
    throw CflViolation(msg.str(), m);
  }
}

inline void check_within(Interval r, double v, const char* what) {
  if (v < r.lo || v > r.hi) {
    std::ostringstream msg;
    msg << what << " value " << v << " lies outside u_range [" << r.lo << ", " << r.hi << "]";
    throw ConfigError(msg.str());
  }
}

}  // namespace detail

/// Runs the scheme on a given foliation. CFL is verified slab by slab.
inline RunResult run(const SchemeContext& ctx, const Foliation& fol, const BoundaryData& bd,
                     const RunConfig& cfg = {}) {
  cfg.validate();
  fol.validate();
  RunResult res{ctx.partition, fol, ctx.u_range, {}, {}};
  const int N = fol.slabs();
  SliceState s0{0, initial_values(ctx.partition, bd, ctx.rule), {}};
  for (double v : s0.values) detail::check_within(ctx.u_range, v, "initial");
  SliceFluxes in = build_slice_fluxes(ctx, 0.0);
  s0.fluxes.resize(s0.values.size());
  for (std::size_t i = 0; i < s0.values.size(); ++i) s0.fluxes[i] = in[i](s0.values[i]);
  res.slices.push_back(std::move(s0));
  for (int j = 0; j < N; ++j) {
    const auto ghosts = slab_ghosts(ctx.partition, bd, fol.times[j], fol.times[j + 1], ctx.rule);
    if (!ctx.partition.domain.periodic())
      for (double g : ghosts) detail::check_within(ctx.u_range, g, "boundary");
    SlabTables tab = build_slab_tables(ctx, fol.times[j], fol.times[j + 1]);
    detail::check_cfl(ctx, tab);
    SliceState next{j + 1, {}, {}};
    detail::advance(ctx, tab, in, res.slices.back(), ghosts, cfg.inversion_tol, next);
    res.slices.push_back(std::move(next));
    res.ghosts.push_back(ghosts);
    in = std::move(tab.outflow);
  }
  return res;
}

/// Data range for a run: the configured u_range or the sampled hull of u_B.
inline Interval run_data_range(const SpatialPartition& part, const BoundaryData& bd, double T,
                               const RunConfig& cfg) {
  return cfg.u_range ? *cfg.u_range : sampled_data_range(part, bd, T);
}

/// Plans slabs on the fly (CFL-driven, or cfg.fixed_dt) and runs to time T.
inline RunResult run_to(const FluxField& flux, const SpatialPartition& part, const NumericalFluxSpec& spec,
                        const BoundaryData& bd, double T, const RunConfig& cfg = {}) {
  cfg.validate();
  if (!(T >= 0.0)) throw ConfigError("time horizon must be non-negative");
  SchemeContext ctx = make_context(flux, part, spec, run_data_range(part, bd, T, cfg), cfg.threads);
  RunResult res{ctx.partition, Foliation{{0.0}, part.domain}, ctx.u_range, {}, {}};
  SliceState s0{0, initial_values(ctx.partition, bd, ctx.rule), {}};
  for (double v : s0.values) detail::check_within(ctx.u_range, v, "initial");
  SliceFluxes in = build_slice_fluxes(ctx, 0.0);
  s0.fluxes.resize(s0.values.size());
  for (std::size_t i = 0; i < s0.values.size(); ++i) s0.fluxes[i] = in[i](s0.values[i]);
  res.slices.push_back(std::move(s0));
  double h = 0.0;
  while (res.foliation.times.back() < T) {
    const double t = res.foliation.times.back();
    SlabTables tab = cfg.fixed_dt ? build_slab_tables(ctx, t, slab_end(t, *cfg.fixed_dt, T))
                                  : next_slab(ctx, cfg.cfl_target, t, T, h);
    const double t1 = tab.t1;
    detail::check_cfl(ctx, tab);
    const auto ghosts = slab_ghosts(ctx.partition, bd, t, t1, ctx.rule);
    if (!ctx.partition.domain.periodic())
      for (double g : ghosts) detail::check_within(ctx.u_range, g, "boundary");
    SliceState next{static_cast<int>(res.slices.size()), {}, {}};
    detail::advance(ctx, tab, in, res.slices.back(), ghosts, cfg.inversion_tol, next);
    res.slices.push_back(std::move(next));
    res.ghosts.push_back(ghosts);
    res.foliation.times.push_back(t1);
    in = std::move(tab.outflow);
  }
  return res;
}

/// Convenience overload on a prebuilt triangulation.
inline RunResult run(const Triangulation& tri, const FluxField& flux, const NumericalFluxSpec& spec,
                     const BoundaryData& bd, const RunConfig& cfg = {}) {
  const SchemeContext ctx = make_context(flux, tri.partition(), spec,
                                         run_data_range(tri.partition(), bd, tri.foliation().horizon(), cfg),
                                         cfg.threads);
  return run(ctx, tri.foliation(), bd, cfg);
}

}  // namespace sfvm

#endif  // SFVM_SCHEME_HPP_
