#ifndef SFVM_FLUXFIELD_HPP_
#define SFVM_FLUXFIELD_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfvm/errors.hpp"
#include "sfvm/forms.hpp"
#include "sfvm/quadrature.hpp"

namespace sfvm {

/// A flux field u -> omega(u) of n-forms on an (n+1)-dimensional chart,
/// with a user-supplied growth bound alpha (|coeff of d_u omega| <= coeff of
/// alpha, term by term).
struct FluxField {
  ParamForm omega;
  CoordinateForm growth_bound;
  std::string name;
};

struct Observer {
  CoordinateForm T;
};

enum class FaceKind { SpacelikeInflow, SpacelikeOutflow, NotSpacelike };

inline const char* to_string(FaceKind k) {
  switch (k) {
    case FaceKind::SpacelikeInflow: return "SpacelikeInflow";
    case FaceKind::SpacelikeOutflow: return "SpacelikeOutflow";
    case FaceKind::NotSpacelike: return "NotSpacelike";
  }
  return "?";
}

struct FaceClass {
  FaceKind kind = FaceKind::NotSpacelike;
  double min = 0.0;  // extrema of the top coefficient of N ^ d_u omega over samples
  double max = 0.0;
};

struct FaceSampling {
  int dense_points = 64;
  const QuadratureRule* rule = nullptr;  // nullptr: default_face_rule()
};

/// n samples evenly covering a closed interval, both endpoints included.
inline std::vector<double> u_samples(Interval range, int n = 17) { return linspace(range.lo, range.hi, n); }

/// Tensor grid of n points per axis over the box [lo, hi], optionally
/// filtered by a chart-domain predicate.
inline std::vector<std::vector<double>> grid_points(const std::vector<double>& lo,
                                                    const std::vector<double>& hi, int n,
                                                    const ChartDomain& keep = {}) {
  const std::size_t d = lo.size();
  std::vector<std::vector<double>> out;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i)
      p[i] = n == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * idx[i] / (n - 1);
    if (!keep || keep(p)) out.push_back(std::move(p));
    std::size_t k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

struct HyperbolicityReport {
  double min_coefficient = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  double argmin_u = 0.0;
  bool pass = false;
};

/// Evaluates the top coefficient of T ^ d_u omega(u) on all samples.
inline HyperbolicityReport check_hyperbolicity(const FluxField& flux, const Observer& obs,
                                               const std::vector<std::vector<double>>& points,
                                               const std::vector<double>& us) {
  HyperbolicityReport rep;
  for (double u : us) {
    const CoordinateForm w = wedge(obs.T, flux.omega.du_at(u));
    for (const auto& p : points) {
      const double c = w.top_coefficient(p);
      if (c < rep.min_coefficient) {
        rep.min_coefficient = c;
        rep.argmin = p;
        rep.argmin_u = u;
      }
    }
  }
  rep.pass = rep.min_coefficient > 0.0;
  return rep;
}

struct GeometryReport {
  double max_residual = 0.0;
  bool pass = false;
};

/// max |top coefficient of d(omega(u))| over the samples.
inline GeometryReport check_geometry_compatible(const FluxField& flux,
                                                const std::vector<std::vector<double>>& points,
                                                const std::vector<double>& us, double tol,
                                                const DerivativeOptions& opt = {}) {
  GeometryReport rep;
  for (double u : us) {
    const CoordinateForm d = exterior_derivative(flux.omega.at(u), opt);
    if (d.is_zero()) continue;
    for (const auto& p : points) rep.max_residual = std::max(rep.max_residual, std::abs(d.top_coefficient(p)));
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

struct GrowthReport {
  double max_excess = -std::numeric_limits<double>::infinity();  // max(|c_I(d_u omega)| - c_I(alpha))
  bool pass = false;
};

/// Term-by-term check of |coefficient of d_u omega| <= coefficient of alpha.
inline GrowthReport check_growth_bound(const FluxField& flux,
                                       const std::vector<std::vector<double>>& points,
                                       const std::vector<double>& us) {
  GrowthReport rep;
  const auto indices = increasing_indices(flux.omega.chart_dim(), flux.omega.degree());
  for (double u : us) {
    const CoordinateForm du = flux.omega.du_at(u);
    for (const auto& p : points)
      for (const auto& idx : indices)
        rep.max_excess = std::max(rep.max_excess, std::abs(du.coefficient(idx, p)) -
                                                      flux.growth_bound.coefficient(idx, p));
  }
  rep.pass = rep.max_excess <= 0.0;
  return rep;
}

namespace detail {

inline std::vector<std::vector<double>> face_samples(const FaceChart& face, const FaceSampling& s) {
  const QuadratureRule& rule = s.rule ? *s.rule : default_face_rule();
  std::vector<std::vector<double>> refs;
  if (face.face_dim() == 1) {
    for (double v : linspace(0.0, 1.0, s.dense_points)) refs.push_back({v});
    for (std::size_t i = 0; i < rule.size(); ++i)
      refs.emplace_back(rule.node(i).begin(), rule.node(i).end());
  } else if (face.face_dim() == 0) {
    refs.push_back({});
  } else {
    const int n = std::max(2, static_cast<int>(std::lround(std::pow(s.dense_points, 1.0 / face.face_dim()))));
    refs = grid_points(std::vector<double>(face.face_dim(), 0.0),
                       std::vector<double>(face.face_dim(), 1.0), n);
  }
  return refs;
}

}  // namespace detail

/// Sign of the top coefficient of N ^ d_u omega along the face.
inline FaceClass classify_face(const FaceChart& face, const CoordinateForm& normal,
                               const FluxField& flux, const std::vector<double>& us,
                               const FaceSampling& sampling = {}) {
  if (normal.degree() != 1 || normal.chart_dim() != flux.omega.chart_dim())
    throw DimensionError("classify_face: normal must be a 1-form on the flux chart");
  FaceClass out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  const auto refs = detail::face_samples(face, sampling);
  std::vector<double> x(face.chart_dim());
  for (double u : us) {
    const CoordinateForm w = wedge(normal, flux.omega.du_at(u));
    for (const auto& s : refs) {
      face.point(s, x);
      double nn = 0.0;
      for (int i = 0; i < normal.chart_dim(); ++i) nn += std::abs(normal.coefficient({i}, x));
      if (nn == 0.0) throw std::invalid_argument("classify_face: degenerate normal (zero 1-form) on the face");
      const double c = w.top_coefficient(x);
      out.min = std::min(out.min, c);
      out.max = std::max(out.max, c);
    }
  }
  if (out.min > 0.0) out.kind = FaceKind::SpacelikeOutflow;
  else if (out.max < 0.0) out.kind = FaceKind::SpacelikeInflow;
  else out.kind = FaceKind::NotSpacelike;
  return out;
}

/// Extrema of the pulled-back coefficient of d_u omega on the face (with the
/// face's current orientation).
inline std::pair<double, double> pulled_du_range(const FaceChart& face, const FluxField& flux,
                                                 const std::vector<double>& us,
                                                 const FaceSampling& sampling = {}) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const auto refs = detail::face_samples(face, sampling);
  for (double u : us) {
    const CoordinateForm p = pullback(flux.omega.du_at(u), face);
    for (const auto& s : refs) {
      const double c = p.top_coefficient(s);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  return {lo, hi};
}

/// Returns the face oriented so that the pulled-back d_u omega is positive.
inline FaceChart orient_spacelike(const FaceChart& face, const FluxField& flux,
                                  const std::vector<double>& us, const FaceSampling& sampling = {}) {
  const auto [lo, hi] = pulled_du_range(face, flux, us, sampling);
  if (lo > 0.0) return face;
  if (hi < 0.0) return face.flipped();
  throw NotSpacelikeError("orient_spacelike: pulled-back d_u omega vanishes or changes sign (range [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "])");
}

}  // namespace sfvm

#endif  // SFVM_FLUXFIELD_HPP_
