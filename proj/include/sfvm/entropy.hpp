#ifndef SFVM_ENTROPY_HPP_
#define SFVM_ENTROPY_HPP_

// Entropy pairs and verifiers for the discrete entropy inequalities of a run.
//
// Kruzkov pairs are evaluated in closed form. A general convex pair (U, Omega)
// with Omega(u) = int_0^u U'(v) d_u omega(v) dv is handled through the
// superposition
//   U(u) = U(0) + b u + 1/2 int_m^M U''(c) (|u - c| - |c|) dc,  b = (U'(m) + U'(M)) / 2,
// valid on a window [m, M] containing 0 and every state; the numerical entropy
// flux inherits it from the Kruzkov numerical fluxes.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfvm/fluxfield.hpp"
#include "sfvm/forms.hpp"
#include "sfvm/mesh.hpp"
#include "sfvm/parallel.hpp"
#include "sfvm/quadrature.hpp"
#include "sfvm/scheme.hpp"

namespace sfvm {

inline double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

/// Q(u v c, v v c) - Q(u ^ c, v ^ c) for the cell seeing the face with the given sign.
inline double kruzkov_numerical_flux(const NumericalFluxSpec& spec, const VerticalFlux& vf, int sign, double u,
                                     double v, double c) {
  return numerical_flux(spec, vf, sign, std::max(u, c), std::max(v, c)) -
         numerical_flux(spec, vf, sign, std::min(u, c), std::min(v, c));
}

class EntropyPair {
 public:
  enum class Kind { Kruzkov, Convex };
  using Fn = std::function<double(double)>;

  /// U(u) = |u - c|.
  static EntropyPair kruzkov(double c) {
    EntropyPair p;
    p.kind_ = Kind::Kruzkov;
    p.c_ = c;
    p.name_ = "kruzkov(" + std::to_string(c) + ")";
    return p;
  }

  /// Convex U with derivatives; states must stay inside the window, which is
  /// widened to contain 0.
  static EntropyPair convex(Fn U, Fn dU, Fn ddU, Interval window, std::string name) {
    EntropyPair p;
    p.kind_ = Kind::Convex;
    p.U_ = std::move(U);
    p.dU_ = std::move(dU);
    p.ddU_ = std::move(ddU);
    p.window_ = {std::min(window.lo, 0.0), std::max(window.hi, 0.0)};
    p.name_ = std::move(name);
    return p;
  }

  static EntropyPair square(Interval window) {
    return convex([](double u) { return u * u; }, [](double u) { return 2.0 * u; }, [](double) { return 2.0; },
                  window, "u^2");
  }

  static EntropyPair identity(Interval window) {
    return convex([](double u) { return u; }, [](double) { return 1.0; }, [](double) { return 0.0; }, window,
                  "u");
  }

  Kind kind() const { return kind_; }
  double parameter() const { return c_; }
  const std::string& name() const { return name_; }
  Interval window() const { return window_; }

  double U(double u) const { return kind_ == Kind::Kruzkov ? std::abs(u - c_) : U_(u); }
  double dU(double u) const { return kind_ == Kind::Kruzkov ? sgn(u - c_) : dU_(u); }

  /// c such that 2c is a modulus of convexity on the window (0 for Kruzkov).
  double convexity_modulus() const {
    if (kind_ == Kind::Kruzkov) return 0.0;
    double m = std::numeric_limits<double>::infinity();
    for (double u : linspace(window_.lo, window_.hi, 65)) m = std::min(m, ddU_(u));
    return std::max(0.0, 0.5 * m);
  }

  /// sup |U'| over the sampled window is finite.
  bool admissible() const {
    if (kind_ == Kind::Kruzkov) return true;
    for (double u : linspace(window_.lo, window_.hi, 65))
      if (!std::isfinite(dU_(u))) return false;
    return true;
  }

  /// Smallest second difference of U on the sampled window.
  double min_second_difference(int n = 65) const {
    const auto pts = linspace(window_.lo, window_.hi, n);
    double m = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < n; ++i) m = std::min(m, U(pts[i - 1]) - 2.0 * U(pts[i]) + U(pts[i + 1]));
    return m;
  }

  /// q^Omega of a face: integral of i* Omega(u).
  double face_flux(const TotalFlux& q, double u) const {
    if (kind_ == Kind::Kruzkov) return q(std::max(u, c_)) - q(std::min(u, c_));
    return adaptive_simpson([&](double v) { return dU_(v) * q.derivative(v); }, 0.0, u, 1e-12);
  }

  /// Numerical entropy flux Q^Omega_{K,e}(u, v).
  double numerical_flux(const NumericalFluxSpec& spec, const VerticalFlux& vf, int sign, double u,
                        double v) const {
    if (kind_ == Kind::Kruzkov) return kruzkov_numerical_flux(spec, vf, sign, u, v, c_);
    return sign > 0 ? reference_flux(spec, vf, u, v) : -reference_flux(spec, vf, v, u);
  }

  /// Omega as a parameterized form built from omega.
  ParamForm omega(const ParamForm& w) const {
    ParamForm out(w.degree(), w.chart_dim(), w.u_range());
    for (const auto& t : w.terms()) {
      ParamTerm term;
      term.index = t.index;
      if (kind_ == Kind::Kruzkov) {
        const double c = c_;
        term.value = [v = t.value, c](std::span<const double> x, double u) { return sgn(u - c) * (v(x, u) - v(x, c)); };
        term.du = [d = t.du, c](std::span<const double> x, double u) { return sgn(u - c) * d(x, u); };
      } else {
        term.value = [d = t.du, dU = dU_](std::span<const double> x, double u) {
          return adaptive_simpson([&](double v) { return dU(v) * d(x, v); }, 0.0, u, 1e-12);
        };
        term.du = [d = t.du, dU = dU_](std::span<const double> x, double u) { return dU(u) * d(x, u); };
      }
      out.add_term(std::move(term));
    }
    out.with_domain(w.domain());
    return out;
  }

 private:
  double reference_flux(const NumericalFluxSpec& spec, const VerticalFlux& vf, double u, double v) const {
    const double m = window_.lo, M = window_.hi;
    const double b = 0.5 * (dU_(m) + dU_(M));
    auto integrand = [&](double c) {
      const double k = sfvm::kruzkov_numerical_flux(spec, vf, 1, u, v, c);
      const double k0 = vf.g(std::max(0.0, c)) - vf.g(std::min(0.0, c));
      return ddU_(c) * (k - k0);
    };
    std::array<double, 5> cuts{m, M, std::clamp(u, m, M), std::clamp(v, m, M), 0.0};
    std::sort(cuts.begin(), cuts.end());
    double integral = 0.0;
    for (int i = 0; i + 1 < 5; ++i)
      if (cuts[i + 1] > cuts[i]) integral += adaptive_simpson(integrand, cuts[i], cuts[i + 1], 1e-13);
    return b * (sfvm::reference_flux(spec, vf, u, v) - vf.g(0.0)) + 0.5 * integral;
  }

  Kind kind_ = Kind::Kruzkov;
  double c_ = 0.0;
  Fn U_, dU_, ddU_;
  Interval window_{0.0, 0.0};
  std::string name_;
};

/// q^Omega_e(u) for the given pair.
inline double entropy_total_flux(const EntropyPair& pair, const TotalFlux& q, double u) {
  return pair.face_flux(q, u);
}

// Convex decomposition

struct CellDecomposition {
  int cell = 0;
  CellLambdas lambdas;
  double u_minus = 0.0, u_plus = 0.0;
  std::array<double, 2> neighbor{};  // u of the neighbor across each side (ghost on the boundary)
  std::array<double, 2> q_tilde{}, q_bar{};  // right-hand sides defining u_tilde, u_bar
  std::array<double, 2> u_tilde{}, u_bar{};
  double convdec_residual = 0.0;     // |sum lambda q+(u_tilde) - q+(u_plus)|
  double bracket_violation = 0.0;    // distance of q_tilde, q_bar outside [q+(u-), q+(v)]
};

/// Intermediate states of cell i: q+(u_tilde) = q+(u-) - (Q(u-,v) - Q(u-,u-)) / lambda and
/// q+(u_bar) = q+(v) + (Q(u-,v) - Q(v,v)) / lambda. Sides with lambda = 0
/// carry u_tilde = u-, u_bar = v.
inline CellDecomposition decomposition_states(const SchemeContext& ctx, const SlabTables& tab,
                                              const std::vector<double>& u_minus,
                                              const std::vector<double>& u_plus,
                                              const std::array<double, 2>& ghosts, int i,
                                              double inversion_tol = 1e-12) {
  CellDecomposition d;
  d.cell = i;
  d.lambdas = cell_lambdas(ctx, tab, i);
  d.u_minus = u_minus[i];
  d.u_plus = u_plus[i];
  const TotalFlux& qp = tab.outflow[i];
  const auto sides = cell_sides(ctx.partition, i);
  InversionOptions opt;
  opt.tol = inversion_tol;
  double mix = 0.0;
  const double u = d.u_minus;
  for (int s = 0; s < 2; ++s) {
    const double v = sides[s].neighbor >= 0 ? u_minus[sides[s].neighbor] : ghosts[s];
    d.neighbor[s] = v;
    const VerticalFlux& vf = tab.vertical[sides[s].k];
    const double lam = d.lambdas.lambda[s];
    const double quu = qp(u), qvv = qp(v);
    if (lam > 0.0) {
      const double Quv = numerical_flux(ctx.spec, vf, sides[s].sign, u, v);
      d.q_tilde[s] = quu - (Quv - numerical_flux(ctx.spec, vf, sides[s].sign, u, u)) / lam;
      d.q_bar[s] = qvv + (Quv - numerical_flux(ctx.spec, vf, sides[s].sign, v, v)) / lam;
      d.u_tilde[s] = qp.invert(d.q_tilde[s], opt);
      d.u_bar[s] = qp.invert(d.q_bar[s], opt);
    } else {
      d.q_tilde[s] = quu;
      d.q_bar[s] = qvv;
      d.u_tilde[s] = u;
      d.u_bar[s] = v;
    }
    const double lo = std::min(quu, qvv), hi = std::max(quu, qvv);
    for (double q : {d.q_tilde[s], d.q_bar[s]})
      d.bracket_violation = std::max({d.bracket_violation, lo - q, q - hi});
    mix += lam * qp(d.u_tilde[s]);
  }
  d.convdec_residual = std::abs(mix - qp(d.u_plus));
  return d;
}

// Local entropy inequalities

struct FaceEntropyResidual {
  double dei = 0.0;       // inequality for u_tilde
  double boundary = 0.0;  // inequality for u_bar
};

/// Residuals max(0, LHS - RHS) of the face entropy inequalities on side s of the cell.
inline FaceEntropyResidual check_face_entropy_inequality(const SchemeContext& ctx, const SlabTables& tab,
                                                         const CellDecomposition& d, int s,
                                                         const EntropyPair& pair) {
  FaceEntropyResidual r;
  const double lam = d.lambdas.lambda[s];
  if (!(lam > 0.0)) return r;
  const auto side = cell_sides(ctx.partition, d.cell)[s];
  const VerticalFlux& vf = tab.vertical[side.k];
  const TotalFlux& qp = tab.outflow[d.cell];
  const double u = d.u_minus, v = d.neighbor[s];
  const double Quv = pair.numerical_flux(ctx.spec, vf, side.sign, u, v);
  const double rhs_t = pair.face_flux(qp, u) - (Quv - pair.numerical_flux(ctx.spec, vf, side.sign, u, u)) / lam;
  const double rhs_b = pair.face_flux(qp, v) + (Quv - pair.numerical_flux(ctx.spec, vf, side.sign, v, v)) / lam;
  r.dei = std::max(0.0, pair.face_flux(qp, d.u_tilde[s]) - rhs_t);
  r.boundary = std::max(0.0, pair.face_flux(qp, d.u_bar[s]) - rhs_b);
  return r;
}

/// Residual of q^O+(u+) - q^O+(u-) + sum (Q^O(u-,v) - Q^O(u-,u-)) <= 0.
inline double check_cell_entropy_inequality(const SchemeContext& ctx, const SlabTables& tab,
                                            const CellDecomposition& d, const EntropyPair& pair) {
  const TotalFlux& qp = tab.outflow[d.cell];
  const auto sides = cell_sides(ctx.partition, d.cell);
  double lhs = pair.face_flux(qp, d.u_plus) - pair.face_flux(qp, d.u_minus);
  for (int s = 0; s < 2; ++s) {
    const VerticalFlux& vf = tab.vertical[sides[s].k];
    lhs += pair.numerical_flux(ctx.spec, vf, sides[s].sign, d.u_minus, d.neighbor[s]) -
           pair.numerical_flux(ctx.spec, vf, sides[s].sign, d.u_minus, d.u_minus);
  }
  return std::max(0.0, lhs);
}

/// Residual of q^O+(u+) <= sum lambda q^O+(u_tilde).
inline double check_convex_combination(const SlabTables& tab, const CellDecomposition& d, const EntropyPair& pair) {
  const TotalFlux& qp = tab.outflow[d.cell];
  double rhs = 0.0;
  for (int s = 0; s < 2; ++s) rhs += d.lambdas.lambda[s] * pair.face_flux(qp, d.u_tilde[s]);
  return std::max(0.0, pair.face_flux(qp, d.u_plus) - rhs);
}

/// Residual of Q^O(u-,g) - Q^O(g,g) >= U'(g) (Q(u-,g) - Q(g,g)) on a boundary side (0 elsewhere).
inline double check_discrete_boundary_condition(const SchemeContext& ctx, const SlabTables& tab,
                                                const CellDecomposition& d, int s, const EntropyPair& pair) {
  const auto side = cell_sides(ctx.partition, d.cell)[s];
  if (side.neighbor >= 0) return 0.0;
  const VerticalFlux& vf = tab.vertical[side.k];
  const double u = d.u_minus, g = d.neighbor[s];
  const double lhs = pair.numerical_flux(ctx.spec, vf, side.sign, u, g) -
                     pair.numerical_flux(ctx.spec, vf, side.sign, g, g);
  const double rhs = pair.dU(g) * (numerical_flux(ctx.spec, vf, side.sign, u, g) -
                                   numerical_flux(ctx.spec, vf, side.sign, g, g));
  return std::max(0.0, rhs - lhs);
}

// Slab iteration over a stored run

struct SlabView {
  int slab;
  const SlabTables& tab;
  const SliceFluxes& inflow;
  const std::vector<double>& u_minus;
  const std::vector<double>& u_plus;
  std::array<double, 2> ghosts;
};

inline SchemeContext check_context(const FluxField& flux, const NumericalFluxSpec& spec, const RunResult& run,
                                   int threads = 0) {
  if (static_cast<int>(run.slices.size()) != run.foliation.slabs() + 1 ||
      static_cast<int>(run.ghosts.size()) != run.foliation.slabs())
    throw std::invalid_argument("run output does not match its foliation");
  for (const auto& s : run.slices)
    if (static_cast<int>(s.values.size()) != run.partition.cells())
      throw std::invalid_argument("run output does not match its spatial partition");
  return make_context(flux, run.partition, spec, run.u_range, threads);
}

template <class Fn>
void for_each_slab(const SchemeContext& ctx, const RunResult& run, Fn&& fn) {
  SliceFluxes in = build_slice_fluxes(ctx, run.foliation.times.front());
  for (int j = 0; j < run.foliation.slabs(); ++j) {
    SlabTables tab = build_slab_tables(ctx, run.foliation.times[j], run.foliation.times[j + 1]);
    fn(SlabView{j, tab, in, run.slices[j].values, run.slices[j + 1].values, run.ghosts[j]});
    in = std::move(tab.outflow);
  }
}

/// max |q| over the slab's faces and states, used to scale tolerances.
inline double slab_flux_scale(const SlabView& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.u_minus.size(); ++i)
    m = std::max({m, std::abs(s.inflow[i](s.u_minus[i])), std::abs(s.tab.outflow[i](s.u_plus[i]))});
  return m;
}

/// Sorted distinct data values of the slab with their midpoints and the
/// range endpoints.
inline std::vector<double> kruzkov_lattice(Interval range, const std::vector<double>& a, const std::vector<double>& b,
                                           const std::array<double, 2>& ghosts) {
  std::vector<double> v{range.lo, range.hi};
  v.insert(v.end(), a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  for (double g : ghosts)
    if (std::isfinite(g)) v.push_back(g);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  const std::size_t n = v.size();
  for (std::size_t i = 0; i + 1 < n; ++i) v.push_back(0.5 * (v[i] + v[i + 1]));
  std::sort(v.begin(), v.end());
  return v;
}

/// Lattice values inside [lo, hi] plus the nearest one on either side. For
/// c outside the hull of a cell's states the Kruzkov inequalities of that
/// cell reduce to the same conservation identity, so one value per side
/// represents them all.
inline std::vector<double> local_lattice(const std::vector<double>& lattice, double lo, double hi) {
  auto first = std::lower_bound(lattice.begin(), lattice.end(), lo);
  auto last = std::upper_bound(lattice.begin(), lattice.end(), hi);
  if (first != lattice.begin()) --first;
  if (last != lattice.end()) ++last;
  return {first, last};
}

// Reports

struct ResidualStat {
  double max = 0.0;
  long long count = 0;
  long long failures = 0;
  int slab = -1, cell = -1;
  double c = std::numeric_limits<double>::quiet_NaN();

  void add(double r, double tol, int j, int i, double cval) {
    ++count;
    if (r > tol) ++failures;
    if (slab < 0 || r > max) {
      max = r;
      slab = j;
      cell = i;
      c = cval;
    }
  }
  bool pass() const { return failures == 0; }
};

struct CellResidualRow {
  int slab = 0, cell = 0;
  double convdec = 0.0, bracket = 0.0, face = 0.0, face_boundary = 0.0, cell_ineq = 0.0, convex = 0.0,
         boundary_condition = 0.0, tol = 0.0;
};

struct DissipationRecord {
  int slab = 0;
  double lhs = 0.0;          // sum q^O+(u+) + c * dissipation
  double dissipation = 0.0;  // sum lambda (inf dq)^2 / sup dq |u_tilde - u+|^2
  double rhs = 0.0;          // -sum_boundary Q^O(u-, g) + sum q^O-(u-)
  double slack = 0.0;        // rhs - lhs
  double slack_square = 0.0; // rhs - dissipation
  double tol = 0.0;
  bool pass() const { return slack >= -tol && slack_square >= -tol; }
};

struct EntropyReport {
  std::vector<std::string> pairs;
  ResidualStat convdec, bracketing, face, face_boundary, cell, convex, boundary_condition;
  std::vector<DissipationRecord> dissipation;
  std::vector<CellResidualRow> cells;
  double min_dissipation_slack = std::numeric_limits<double>::infinity();

  bool dissipation_pass() const {
    for (const auto& d : dissipation)
      if (!d.pass()) return false;
    return true;
  }
  bool pass() const {
    return convdec.pass() && bracketing.pass() && face.pass() && face_boundary.pass() && cell.pass() &&
           convex.pass() && boundary_condition.pass() && dissipation_pass();
  }
};

/// Both dissipation estimates for one slab with a convex pair (U = u^2 for
/// the second one to be meaningful).
inline DissipationRecord global_dissipation_report(const SchemeContext& ctx, const SlabView& s,
                                                   const std::vector<CellDecomposition>& dec,
                                                   const EntropyPair& pair, double tol) {
  DissipationRecord r;
  r.slab = s.slab;
  r.tol = tol;
  const double c = pair.convexity_modulus();
  double qsum = 0.0;
  for (const auto& d : dec) {
    const TotalFlux& qp = s.tab.outflow[d.cell];
    qsum += pair.face_flux(qp, d.u_plus);
    const double w = qp.dq_inf() * qp.dq_inf() / qp.dq_max();
    for (int k = 0; k < 2; ++k) r.dissipation += d.lambdas.lambda[k] * w * std::pow(d.u_tilde[k] - d.u_plus, 2);
    r.rhs += pair.face_flux(s.inflow[d.cell], d.u_minus);
    const auto sides = cell_sides(ctx.partition, d.cell);
    for (int k = 0; k < 2; ++k)
      if (sides[k].neighbor < 0)
        r.rhs -= pair.numerical_flux(ctx.spec, s.tab.vertical[sides[k].k], sides[k].sign, d.u_minus, d.neighbor[k]);
  }
  r.lhs = qsum + c * r.dissipation;
  r.slack = r.rhs - r.lhs;
  r.slack_square = r.rhs - r.dissipation;
  return r;
}

struct EntropyCheckOptions {
  double tol_scale = 1e-9;                 // tolerance = tol_scale * (1 + slab flux scale)
  bool kruzkov = true;                     // run the Kruzkov lattice
  std::vector<double> extra_lattice;       // further Kruzkov parameters checked on every cell
  std::vector<EntropyPair> convex_pairs;   // further pairs checked cell by cell
  bool dissipation = true;                 // U = u^2 dissipation estimates
  bool keep_cells = true;                  // fill EntropyReport::cells
  double inversion_tol = 1e-12;
  int threads = 0;
};

/// Runs every local entropy check over all cells and slabs of a run.
inline EntropyReport entropy_check(const FluxField& flux, const NumericalFluxSpec& spec, const RunResult& run,
                                   const EntropyCheckOptions& opt = {}) {
  const SchemeContext ctx = check_context(flux, spec, run, opt.threads);
  EntropyReport rep;
  if (opt.kruzkov) rep.pairs.push_back("kruzkov-lattice");
  for (const auto& p : opt.convex_pairs) rep.pairs.push_back(p.name());
  const EntropyPair square = EntropyPair::square(run.u_range);
  if (opt.dissipation) rep.pairs.push_back("u^2 (dissipation)");

  for_each_slab(ctx, run, [&](const SlabView& s) {
    const int n = ctx.partition.cells();
    const double tol = opt.tol_scale * (1.0 + slab_flux_scale(s));
    std::vector<CellDecomposition> dec(n);
    parallel_for(n, ctx.threads, [&](int i) {
      dec[i] = decomposition_states(ctx, s.tab, s.u_minus, s.u_plus, s.ghosts, i, opt.inversion_tol);
    });
    const std::vector<double> lattice =
        opt.kruzkov ? kruzkov_lattice(run.u_range, s.u_minus, s.u_plus, s.ghosts) : std::vector<double>{};

    struct Worst {
      double face = 0, face_boundary = 0, cell = 0, convex = 0, bc = 0;
      double c_face = NAN, c_face_boundary = NAN, c_cell = NAN, c_convex = NAN, c_bc = NAN;
      long long evaluations = 0;
    };
    std::vector<Worst> worst(n);
    parallel_for(n, ctx.threads, [&](int i) {
      const CellDecomposition& d = dec[i];
      Worst& w = worst[i];
      auto eval = [&](const EntropyPair& pair, double cval) {
        ++w.evaluations;
        for (int k = 0; k < 2; ++k) {
          const auto f = check_face_entropy_inequality(ctx, s.tab, d, k, pair);
          if (f.dei > w.face) { w.face = f.dei; w.c_face = cval; }
          if (f.boundary > w.face_boundary) { w.face_boundary = f.boundary; w.c_face_boundary = cval; }
          const double bc = check_discrete_boundary_condition(ctx, s.tab, d, k, pair);
          if (bc > w.bc) { w.bc = bc; w.c_bc = cval; }
        }
        const double cr = check_cell_entropy_inequality(ctx, s.tab, d, pair);
        if (cr > w.cell) { w.cell = cr; w.c_cell = cval; }
        const double cv = check_convex_combination(s.tab, d, pair);
        if (cv > w.convex) { w.convex = cv; w.c_convex = cval; }
      };
      if (opt.kruzkov) {
        double lo = std::min({d.u_minus, d.u_plus, d.neighbor[0], d.neighbor[1]});
        double hi = std::max({d.u_minus, d.u_plus, d.neighbor[0], d.neighbor[1]});
        for (int k = 0; k < 2; ++k) {
          lo = std::min({lo, d.u_tilde[k], d.u_bar[k]});
          hi = std::max({hi, d.u_tilde[k], d.u_bar[k]});
        }
        for (double c : local_lattice(lattice, lo, hi)) eval(EntropyPair::kruzkov(c), c);
      }
      for (double c : opt.extra_lattice) eval(EntropyPair::kruzkov(c), c);
      for (const auto& p : opt.convex_pairs) eval(p, NAN);
    });

    for (int i = 0; i < n; ++i) {
      const auto& d = dec[i];
      const auto& w = worst[i];
      rep.convdec.add(d.convdec_residual, tol, s.slab, i, NAN);
      rep.bracketing.add(d.bracket_violation, tol, s.slab, i, NAN);
      rep.face.add(w.face, tol, s.slab, i, w.c_face);
      rep.face_boundary.add(w.face_boundary, tol, s.slab, i, w.c_face_boundary);
      rep.cell.add(w.cell, tol, s.slab, i, w.c_cell);
      rep.convex.add(w.convex, tol, s.slab, i, w.c_convex);
      rep.boundary_condition.add(w.bc, tol, s.slab, i, w.c_bc);
      if (opt.keep_cells)
        rep.cells.push_back({s.slab, i, d.convdec_residual, std::max(0.0, d.bracket_violation), w.face,
                             w.face_boundary, w.cell, w.convex, w.bc, tol});
    }
    if (opt.dissipation) {
      rep.dissipation.push_back(global_dissipation_report(ctx, s, dec, square, tol));
      rep.min_dissipation_slack =
          std::min({rep.min_dissipation_slack, rep.dissipation.back().slack, rep.dissipation.back().slack_square});
    }
  });
  return rep;
}

// Global entropy inequality with test function

using TestFunction = std::function<double(double, double)>;  // psi(t, x)

struct GlobalEntropyTerms {
  double lhs = 0.0;
  double lhs_boundary_form = 0.0;  // boundary term bounded below through the discrete boundary condition
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0;
  double rhs() const { return A + B + C + D + E; }
  double abs_sum() const { return std::abs(A) + std::abs(B) + std::abs(C) + std::abs(D) + std::abs(E); }
  double slack() const { return rhs() - lhs; }
  bool pass(double tol) const { return lhs <= rhs() + tol && lhs_boundary_form <= rhs() + tol; }
};

namespace detail {

/// Mean of psi over a vertical face with respect to dt.
inline double vertical_mean(const FaceStencil& st, const TestFunction& psi) {
  double m = 0.0, a = 0.0;
  for (std::size_t n = 0; n < st.size(); ++n) {
    const auto p = st.point(n);
    m += std::abs(st.weight(n));
    a += std::abs(st.weight(n)) * psi(p[0], p[1]);
  }
  return a / m;
}

inline void check_test_function_node(const TestFunction& psi, double t, double x, bool on_final_slice) {
  const double v = psi(t, x);
  if (v < -1e-14) throw std::invalid_argument("test function must be non-negative");
  if (on_final_slice && std::abs(v) > 1e-14)
    throw std::invalid_argument("test function must vanish on the final slice H_T");
}

}  // namespace detail

/// LHS and the terms A..E of the global entropy inequality for a test
/// function psi >= 0 vanishing on the final slice.
inline GlobalEntropyTerms global_entropy_inequality_report(const FluxField& flux, const NumericalFluxSpec& spec,
                                                           const RunResult& run, const TestFunction& psi,
                                                           const EntropyPair& pair, int threads = 0) {
  const SchemeContext ctx = check_context(flux, spec, run, threads);
  const ParamForm Omega = pair.omega(*ctx.omega);
  const ParamForm& w = *ctx.omega;
  const int n = ctx.partition.cells();
  {
    const SliceFluxes last = build_slice_fluxes(ctx, run.foliation.horizon());
    for (const auto& q : last)
      for (std::size_t k = 0; k < q.stencil().size(); ++k)
        detail::check_test_function_node(psi, q.stencil().point(k)[0], q.stencil().point(k)[1], true);
  }
  auto psi_x = [&](std::span<const double> x) { return psi(x[0], x[1]); };
  auto one = [](std::span<const double>) { return 1.0; };

  struct CellTerms {
    double lhs = 0, lhs_bf = 0, A = 0, B = 0, C = 0, D = 0, E = 0;
  };
  GlobalEntropyTerms out;
  for_each_slab(ctx, run, [&](const SlabView& s) {
    std::vector<CellTerms> terms(n);
    parallel_for(n, ctx.threads, [&](int i) {
      const CellDecomposition d = decomposition_states(ctx, s.tab, s.u_minus, s.u_plus, s.ghosts, i);
      const auto sides = cell_sides(ctx.partition, i);
      const FaceStencil& up = s.tab.outflow[i].stencil();
      const FaceStencil& down = s.inflow[i].stencil();
      for (std::size_t k = 0; k < down.size(); ++k)
        detail::check_test_function_node(psi, down.point(k)[0], down.point(k)[1], false);
      CellTerms& ct = terms[i];
      const double um = d.u_minus, up_val = d.u_plus;
      std::array<double, 2> psi_e{};
      double psi_K = 0.0;
      for (int k = 0; k < 2; ++k) {
        psi_e[k] = detail::vertical_mean(s.tab.vertical[sides[k].k].g.stencil(), psi);
        psi_K += d.lambdas.lambda[k] * psi_e[k];
      }
      // -int_K d(psi Omega)(u-) via the oriented boundary of K
      double boundary_integral = up.integrate_weighted(Omega, um, false, psi_x) -
                                 down.integrate_weighted(Omega, um, false, psi_x);
      for (int k = 0; k < 2; ++k)
        boundary_integral +=
            sides[k].sign * s.tab.vertical[sides[k].k].g.stencil().integrate_weighted(Omega, um, false, psi_x);
      ct.lhs = -boundary_integral;
      if (s.slab == 0) ct.lhs -= down.integrate_weighted(Omega, um, false, psi_x);
      ct.lhs_bf = ct.lhs;
      for (int k = 0; k < 2; ++k) {
        const VerticalFlux& vf = s.tab.vertical[sides[k].k];
        const FaceStencil& vs = vf.g.stencil();
        const int sign = sides[k].sign;
        if (sides[k].neighbor < 0) {
          const double g = d.neighbor[k];
          ct.lhs += psi_e[k] * pair.numerical_flux(ctx.spec, vf, sign, um, g);
          ct.lhs_bf += psi_e[k] * (pair.numerical_flux(ctx.spec, vf, sign, g, g) +
                                   pair.dU(g) * (numerical_flux(ctx.spec, vf, sign, um, g) -
                                                 numerical_flux(ctx.spec, vf, sign, g, g)));
        }
        const double lam = d.lambdas.lambda[k];
        const double ut = d.u_tilde[k];
        const TotalFlux& qp = s.tab.outflow[i];
        ct.A += lam * (psi_K - psi_e[k]) * (pair.face_flux(qp, ut) - pair.face_flux(qp, up_val));
        ct.B += sign * (psi_e[k] * vs.integrate_weighted(Omega, um, false, one) -
                        vs.integrate_weighted(Omega, um, false, psi_x));
        auto diff_weight = [&](std::span<const double> x) { return psi_K - psi_x(x); };
        ct.C -= lam * (up.integrate_weighted(Omega, ut, false, diff_weight) -
                       up.integrate_weighted(Omega, up_val, false, diff_weight));
        ct.D -= lam * pair.dU(up_val) *
                (up.integrate_weighted(w, ut, false, psi_x) - up.integrate_weighted(w, up_val, false, psi_x));
      }
      auto diff_weight = [&](std::span<const double> x) { return psi_K - psi_x(x); };
      ct.E = -(up.integrate_weighted(Omega, up_val, false, diff_weight) -
               up.integrate_weighted(Omega, um, false, diff_weight));
    });
    for (const auto& ct : terms) {
      out.lhs += ct.lhs;
      out.lhs_boundary_form += ct.lhs_bf;
      out.A += ct.A;
      out.B += ct.B;
      out.C += ct.C;
      out.D += ct.D;
      out.E += ct.E;
    }
  });
  return out;
}

// Contraction and boundary trace

/// sum over the slice of q_e(u_e v v_e) - q_e(u_e ^ v_e).
inline double kruzkov_slice_distance(const SliceFluxes& q, const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != q.size() || v.size() != q.size()) throw std::invalid_argument("slice distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) d += q[i](std::max(u[i], v[i])) - q[i](std::min(u[i], v[i]));
  return d;
}

/// 1.05 * sum over nodes of |w| sup_u |pulled d_u omega| on a face.
inline double boundary_growth_mass(const FaceStencil& st, const ParamForm& w, Interval range) {
  const auto us = linspace(range.lo, range.hi, 17);
  double acc = 0.0;
  for (std::size_t n = 0; n < st.size(); ++n) {
    double m = 0.0;
    for (double u : us) m = std::max(m, std::abs(st.pulled_coefficient(w, n, u, true)));
    acc += std::abs(st.weight(n)) * m;
  }
  return 1.05 * acc;
}

struct ContractionReport {
  std::vector<double> distances;  // per slice
  std::vector<double> budgets;    // per slab: boundary contribution
  std::vector<double> slacks;     // per slab: d_j + budget_j + tol h - d_{j+1}
  double tol = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  bool pass() const { return min_slack >= 0.0; }
};

inline ContractionReport contraction_check(const FluxField& flux, const RunResult& a, const RunResult& b,
                                           double tol = 1e-9, int threads = 0) {
  if (a.partition.nodes != b.partition.nodes || a.foliation.times != b.foliation.times ||
      a.partition.domain.periodic() != b.partition.domain.periodic())
    throw std::invalid_argument("contraction_check: runs live on different meshes");
  const Interval range{std::min(a.u_range.lo, b.u_range.lo), std::max(a.u_range.hi, b.u_range.hi)};
  const SchemeContext ctx = make_context(flux, a.partition, {}, range, threads);
  ContractionReport rep;
  rep.tol = tol;
  const double h = a.partition.max_width();
  for (int j = 0; j <= a.foliation.slabs(); ++j)
    rep.distances.push_back(
        kruzkov_slice_distance(build_slice_fluxes(ctx, a.foliation.times[j]), a.slices[j].values, b.slices[j].values));
  const int n = a.partition.cells();
  for (int j = 0; j < a.foliation.slabs(); ++j) {
    double budget = 0.0;
    if (!a.partition.domain.periodic()) {
      const int ks[2] = {0, n};
      for (int s = 0; s < 2; ++s) {
        const FaceStencil st(vertical_face_chart(a.partition, a.foliation.times[j], a.foliation.times[j + 1], ks[s]),
                             ctx.rule);
        budget += std::abs(a.ghosts[j][s] - b.ghosts[j][s]) * boundary_growth_mass(st, *ctx.omega, range);
      }
    }
    rep.budgets.push_back(budget);
    rep.slacks.push_back(rep.distances[j] + budget + tol * h - rep.distances[j + 1]);
    rep.min_slack = std::min(rep.min_slack, rep.slacks.back());
  }
  return rep;
}

/// Kruzkov distance between slice `slice` of a run and the initial data
/// u_B(0, x), evaluated pointwise at the face quadrature nodes.
inline double trace_distance(const FluxField& flux, const RunResult& run, const BoundaryData& bd, int slice = 1) {
  if (slice < 0 || slice >= static_cast<int>(run.slices.size()))
    throw std::invalid_argument("trace_distance: slice index out of range");
  const auto w = std::make_shared<const ParamForm>(flux.omega);
  double acc = 0.0;
  for (int i = 0; i < run.partition.cells(); ++i) {
    const FaceStencil st(spacelike_face_chart(run.partition, run.foliation.times[slice], i), default_face_rule());
    const double ui = run.slices[slice].values[i];
    for (std::size_t n = 0; n < st.size(); ++n) {
      const double ub = bd.u_B(0.0, st.point(n)[1]);
      acc += std::abs(st.weight(n)) * sgn(ui - ub) *
             (st.pulled_coefficient(*w, n, ui, false) - st.pulled_coefficient(*w, n, ub, false));
    }
  }
  return acc;
}

}  // namespace sfvm

#endif  // SFVM_ENTROPY_HPP_
