#ifndef SFVM_HARNESS_HPP_
#define SFVM_HARNESS_HPP_

// Reference solutions, refinement studies and the two planar geometry
// examples used as classification references.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfvm/builtin_fluxes.hpp"
#include "sfvm/entropy.hpp"
#include "sfvm/fluxfield.hpp"
#include "sfvm/scheme.hpp"

namespace sfvm {

enum class OracleKind { CharacteristicsLinear, BurgersRiemann };

inline const char* to_string(OracleKind k) {
  return k == OracleKind::CharacteristicsLinear ? "CharacteristicsLinear" : "BurgersRiemann";
}

/// Exact solution u*(t, x) together with the x-locations where it fails to
/// be smooth at time t (used to split quadrature).
struct Oracle {
  OracleKind kind = OracleKind::CharacteristicsLinear;
  std::function<double(double, double)> u;
  std::function<std::vector<double>(double)> breaks;
  std::string description;

  double operator()(double t, double x) const { return u(t, x); }
};

/// Transport along x - t = const, the solution for omega(u) = phi(x - t) u (dx - dt):
/// u*(t, x) = u0(x - t). With period > 0 the argument is wrapped into
/// [0, period). `u0_breaks` are the kinks or jumps of u0.
inline Oracle exact_linear(std::function<double(double)> u0, std::vector<double> u0_breaks = {}, double period = 0.0) {
  auto wrap = [period](double s) {
    if (period <= 0.0) return s;
    s = std::fmod(s, period);
    return s < 0.0 ? s + period : s;
  };
  Oracle o;
  o.kind = OracleKind::CharacteristicsLinear;
  o.u = [u0, wrap](double t, double x) { return u0(wrap(x - t)); };
  o.breaks = [u0_breaks, wrap](double t) {
    std::vector<double> out;
    for (double b : u0_breaks) out.push_back(wrap(b + t));
    std::sort(out.begin(), out.end());
    return out;
  };
  o.description = "characteristics u0(x - t)";
  return o;
}

/// Entropy solution of Burgers' equation for Riemann data centred at x0:
/// a shock of speed (ul + ur)/2 if ul > ur, the fan u = (x - x0)/t otherwise.
inline Oracle exact_burgers_riemann(double ul, double ur, double x0 = 0.0) {
  Oracle o;
  o.kind = OracleKind::BurgersRiemann;
  if (ul > ur) {
    const double s = 0.5 * (ul + ur);
    o.u = [=](double t, double x) { return x - x0 < s * t ? ul : ur; };
    o.breaks = [=](double t) { return std::vector<double>{x0 + s * t}; };
    o.description = "Burgers shock";
  } else {
    o.u = [=](double t, double x) {
      const double y = x - x0;
      if (y <= ul * t) return ul;
      if (y >= ur * t) return ur;
      return y / t;
    };
    o.breaks = [=](double t) {
      if (ul == ur) return std::vector<double>{};
      return std::vector<double>{x0 + ul * t, x0 + ur * t};
    };
    o.description = ul == ur ? "constant" : "Burgers rarefaction";
  }
  return o;
}

namespace detail {

/// Sum of the components of omega(u) on dx (a) or dt (b) at (t, x).
inline double omega_component(const ParamForm& w, int index, double t, double x, double u, bool derivative) {
  const double p[2] = {t, x};
  double acc = 0.0;
  for (const auto& term : w.terms())
    if (term.index.size() == 1 && term.index[0] == index) acc += derivative ? term.du(p, u) : term.value(p, u);
  return acc;
}

/// Integrates f over [a, b] with composite Gauss-Legendre, split at breaks.
template <class F>
double split_integral(F&& f, double a, double b, std::vector<double> breaks, const QuadratureRule& rule) {
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double c : breaks)
    if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double lo = pts[k], w = pts[k + 1] - pts[k];
    for (std::size_t n = 0; n < rule.size(); ++n) acc += rule.weight(n) * w * f(lo + rule.node(n)[0] * w);
  }
  return acc;
}

}  // namespace detail

/// E = sum over cells of the integral of |u^h - u*| mu on slice j, with the
/// weight mu = i* d_u omega(u_ref) on the slice. Quadrature: 4 pieces of
/// 8-point Gauss-Legendre per cell, split at the oracle's breaks.
inline double l1_error(const FluxField& flux, const RunResult& run, const Oracle& oracle, int slice,
                       double u_ref = 0.0) {
  if (slice < 0 || slice >= static_cast<int>(run.slices.size()))
    throw std::invalid_argument("l1_error: slice index out of range");
  static const QuadratureRule rule = composite(gauss_legendre(8), 4);
  const double t = run.foliation.times[slice];
  const auto& part = run.partition;
  std::vector<double> breaks = oracle.breaks ? oracle.breaks(t) : std::vector<double>{};
  double e = 0.0;
  for (int i = 0; i < part.cells(); ++i) {
    const double uh = run.slices[slice].values[i];
    e += detail::split_integral(
        [&](double x) {
          const double mu = detail::omega_component(flux.omega, kX, t, x, u_ref, true);
          return std::abs(uh - oracle(t, x)) * mu;
        },
        part.nodes[i], part.nodes[i + 1], breaks, rule);
  }
  return e;
}

namespace detail {

template <class F>
double piecewise_simpson(F&& f, double a, double b, std::vector<double> cuts, double tol) {
  std::vector<double> pts{a};
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts)
    if (c > pts.back() && c < b) pts.push_back(c);
  pts.push_back(b);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) acc += adaptive_simpson(f, pts[k], pts[k + 1], tol, 50);
  return acc;
}

/// Times in (t0, t1) at which the k-th break of the oracle crosses x.
inline std::vector<double> break_crossings(const Oracle& o, double x, double t0, double t1) {
  std::vector<double> out;
  if (!o.breaks) return out;
  const std::size_t nb = o.breaks(t0).size();
  for (std::size_t k = 0; k < nb; ++k) {
    auto g = [&](double t) { return o.breaks(t)[k] - x; };
    const auto ts = linspace(t0, t1, 17);
    for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
      double lo = ts[m], hi = ts[m + 1];
      double glo = g(lo);
      if (glo == 0.0) {
        out.push_back(lo);
        continue;
      }
      if (glo * g(hi) >= 0.0) continue;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) * glo > 0.0 ? lo : hi) = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

}  // namespace detail

/// Stokes defect of the oracle: max over a grid of rectangles R of
/// |integral over the boundary of R of omega(u*)|, integrated adaptively
/// between the oracle's breaks. Vanishes for weak solutions; the convergence
/// study compares it to the scheme error.
inline double oracle_conservation_defect(const FluxField& flux, const Oracle& oracle, Interval t_range, Interval x_range,
                                         int rects = 4, double tol = 1e-13) {
  auto a = [&](double t, double x) { return detail::omega_component(flux.omega, kX, t, x, oracle(t, x), false); };
  auto b = [&](double t, double x) { return detail::omega_component(flux.omega, kT, t, x, oracle(t, x), false); };
  auto breaks = [&](double t) { return oracle.breaks ? oracle.breaks(t) : std::vector<double>{}; };
  double worst = 0.0;
  for (int p = 0; p < rects; ++p)
    for (int q = 0; q < rects; ++q) {
      const double t0 = t_range.lo + t_range.width() * p / rects, t1 = t_range.lo + t_range.width() * (p + 1) / rects;
      const double x0 = x_range.lo + x_range.width() * q / rects, x1 = x_range.lo + x_range.width() * (q + 1) / rects;
      const double top = detail::piecewise_simpson([&](double x) { return a(t1, x); }, x0, x1, breaks(t1), tol) -
                         detail::piecewise_simpson([&](double x) { return a(t0, x); }, x0, x1, breaks(t0), tol);
      const double side =
          detail::piecewise_simpson([&](double t) { return b(t, x1); }, t0, t1,
                                    detail::break_crossings(oracle, x1, t0, t1), tol) -
          detail::piecewise_simpson([&](double t) { return b(t, x0); }, t0, t1,
                                    detail::break_crossings(oracle, x0, t0, t1), tol);
      worst = std::max(worst, std::abs(top - side));
    }
  return worst;
}

struct Experiment {
  std::string name;
  FluxField flux;
  SpatialDomain domain;
  BoundaryData data;
  double T = 1.0;
  Oracle oracle;
};

/// omega = phi(x - t) u (dx - dt), phi = 2 + sin(2 pi s), on the unit circle,
/// u0 = sin(2 pi x), one revolution.
inline Experiment linear_advection_experiment() {
  const double k = 2.0 * std::numbers::pi;
  auto u0 = [k](double x) { return std::sin(k * x); };
  Oracle o = exact_linear(u0, {}, 1.0);
  return {"linear_advection", phi_transport_flux(k, {-2.0, 2.0}), SpatialDomain::circle(1.0),
          BoundaryData{o.u}, 1.0, o};
}

inline Experiment burgers_riemann_experiment(double ul, double ur, std::string name) {
  Oracle o = exact_burgers_riemann(ul, ur);
  const double m = std::max({std::abs(ul), std::abs(ur), 1.0});
  return {std::move(name), burgers_flux({-m, m}), SpatialDomain::interval(-1.0, 1.0), BoundaryData{o.u}, 0.5, o};
}

inline Experiment burgers_rarefaction_experiment() { return burgers_riemann_experiment(-1.0, 1.0, "burgers_rarefaction"); }
inline Experiment burgers_shock_experiment() { return burgers_riemann_experiment(1.0, 0.0, "burgers_shock"); }

inline int cells_for(const SpatialDomain& d, double h) {
  return std::max(1, static_cast<int>(std::lround(d.length() / h)));
}

/// Least-squares slope of log e against log h.
inline double fit_order(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2) throw std::invalid_argument("fit_order: need at least two samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergenceStudy {
  std::string experiment;
  std::string flux_kind;
  double u_ref = 0.0;
  std::vector<double> h;
  std::vector<int> cells;
  std::vector<double> errors;
  std::vector<double> seconds;
  double order = 0.0;
  double oracle_defect = 0.0;

  bool strictly_decreasing() const {
    for (std::size_t i = 1; i < errors.size(); ++i)
      if (!(errors[i] < errors[i - 1])) return false;
    return true;
  }
  /// Oracle defect at least 100x below the coarsest-mesh error.
  bool oracle_resolved() const { return !errors.empty() && 100.0 * oracle_defect <= errors.front(); }
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs the experiment on uniform meshes of width h (strictly decreasing) and
/// fits the order of the final-slice L1 error.
inline ConvergenceStudy convergence_study(const Experiment& ex, const std::vector<double>& hs,
                                          const NumericalFluxSpec& spec = {}, const RunConfig& cfg = {}) {
  if (hs.size() < 3) throw std::invalid_argument("convergence_study: need at least three meshes");
  for (std::size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1])) throw std::invalid_argument("convergence_study: mesh sizes must strictly decrease");
  ConvergenceStudy st;
  st.experiment = ex.name;
  st.flux_kind = to_string(spec.kind);
  for (double h : hs) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto part = SpatialPartition::uniform(ex.domain, cells_for(ex.domain, h));
    const RunResult res = run_to(ex.flux, part, spec, ex.data, ex.T, cfg);
    st.h.push_back(part.max_width());
    st.cells.push_back(part.cells());
    st.errors.push_back(l1_error(ex.flux, res, ex.oracle, static_cast<int>(res.slices.size()) - 1, st.u_ref));
    st.seconds.push_back(seconds_since(t0));
  }
  st.order = fit_order(st.h, st.errors);
  st.oracle_defect = oracle_conservation_defect(ex.flux, ex.oracle, {0.0, ex.T}, {ex.domain.a, ex.domain.b});
  return st;
}

struct TraceStudy {
  std::vector<double> h;
  std::vector<double> distances;
  double order = 0.0;
  bool decreasing() const {
    for (std::size_t i = 1; i < distances.size(); ++i)
      if (!(distances[i] < distances[i - 1])) return false;
    return true;
  }
};

/// Slice-1 Kruzkov distance to u_B(0, .) under refinement. Only the first
/// slab (CFL-selected) is computed on each mesh.
inline TraceStudy trace_convergence_check(const Experiment& ex, const std::vector<double>& hs,
                                          const NumericalFluxSpec& spec = {}, const RunConfig& cfg = {}) {
  TraceStudy st;
  for (double h : hs) {
    const auto part = SpatialPartition::uniform(ex.domain, cells_for(ex.domain, h));
    const Interval range = run_data_range(part, ex.data, ex.T, cfg);
    const SchemeContext ctx = make_context(ex.flux, part, spec, range, cfg.threads);
    const double first = cfg.fixed_dt ? std::min(*cfg.fixed_dt, ex.T) : select_timestep(ctx, cfg.cfl_target, 0.0, ex.T);
    RunConfig one = cfg;
    one.u_range = range;
    const RunResult res = run_to(ex.flux, part, spec, ex.data, first, one);
    st.h.push_back(part.max_width());
    st.distances.push_back(trace_distance(ex.flux, res, ex.data, 1));
  }
  bool positive = true;
  for (double d : st.distances) positive = positive && d > 0.0;
  st.order = positive && st.distances.size() >= 2 ? fit_order(st.h, st.distances) : 0.0;
  return st;
}

/// Sum |A| + ... + |E| of the global entropy inequality for each mesh width.
inline std::vector<GlobalEntropyTerms> global_terms_study(const Experiment& ex, const std::vector<double>& hs,
                                                          const TestFunction& psi, const EntropyPair& pair,
                                                          const NumericalFluxSpec& spec = {},
                                                          const RunConfig& cfg = {}) {
  std::vector<GlobalEntropyTerms> out;
  for (double h : hs) {
    const auto part = SpatialPartition::uniform(ex.domain, cells_for(ex.domain, h));
    const RunResult res = run_to(ex.flux, part, spec, ex.data, ex.T, cfg);
    out.push_back(global_entropy_inequality_report(ex.flux, spec, res, psi, pair, cfg.threads));
  }
  return out;
}

struct PieceClass {
  std::string label;
  FaceKind kind = FaceKind::NotSpacelike;
  double min = 0.0, max = 0.0;
};

struct AppendixReport {
  HyperbolicityReport annulus_hyperbolicity;
  GeometryReport annulus_compatibility;
  std::vector<PieceClass> annulus_boundary;
  int annulus_spacelike_faces = 0;
  HyperbolicityReport square_hyperbolicity;
  std::vector<PieceClass> square_boundary;
  int square_inflow_pieces = 0;
  int inflow_mismatches = 0;  // sampled boundary points whose inflow status differs from the reference set

  bool annulus_pass() const {
    return annulus_hyperbolicity.pass && annulus_compatibility.pass && annulus_spacelike_faces == 0;
  }
  bool square_pass() const { return square_hyperbolicity.pass && inflow_mismatches == 0; }
  bool pass() const { return annulus_pass() && square_pass(); }
};

/// Reference inflow set of the square with hole: [0,3] x {0} and [1,2] x {2}.
inline bool square_reference_inflow(double x, double y) {
  const double eps = 1e-12;
  return std::abs(y) <= eps || (std::abs(y - 2.0) <= eps && x >= 1.0 - eps && x <= 2.0 + eps);
}

/// Classifies the boundaries of the annulus (omega = u x dx + u y dy,
/// T = y dx - x dy) and of the square with hole (omega = -u dx, T = dy).
inline AppendixReport appendix_examples(int grid = 41, int dense_points = 64) {
  AppendixReport rep;
  const FaceSampling sampling{dense_points, nullptr};
  {
    const AnnulusGeometry g = annulus_geometry();
    const auto us = u_samples(g.flux.omega.u_range());
    const double r = std::sqrt(2.0);
    const auto pts = grid_points({-r, -r}, {r, r}, grid, g.domain);
    rep.annulus_hyperbolicity = check_hyperbolicity(g.flux, g.observer, pts, us);
    rep.annulus_compatibility = check_geometry_compatible(g.flux, pts, us, 1e-9);
    for (const auto& piece : g.boundary) {
      const FaceClass c = classify_face(piece.face, piece.normal, g.flux, us, sampling);
      rep.annulus_boundary.push_back({piece.label, c.kind, c.min, c.max});
      if (c.kind != FaceKind::NotSpacelike) ++rep.annulus_spacelike_faces;
    }
  }
  {
    const SquareWithHoleGeometry g = square_with_hole_geometry();
    const auto us = u_samples(g.flux.omega.u_range());
    const auto pts = grid_points({0.0, 0.0}, {3.0, 3.0}, grid, g.domain);
    rep.square_hyperbolicity = check_hyperbolicity(g.flux, g.observer, pts, us);
    for (const auto& piece : g.boundary) {
      const FaceClass c = classify_face(piece.face, piece.normal, g.flux, us, sampling);
      rep.square_boundary.push_back({piece.label, c.kind, c.min, c.max});
      const bool inflow = c.kind == FaceKind::SpacelikeInflow;
      if (inflow) ++rep.square_inflow_pieces;
      // open-segment samples; corners belong to two pieces
      for (int n = 0; n < dense_points; ++n) {
        const double s = (n + 0.5) / dense_points;
        const auto x = piece.face.point(std::vector<double>{s});
        if (inflow != square_reference_inflow(x[0], x[1])) ++rep.inflow_mismatches;
      }
    }
  }
  return rep;
}

}  // namespace sfvm

#endif  // SFVM_HARNESS_HPP_
