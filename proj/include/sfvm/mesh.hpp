#ifndef SFVM_MESH_HPP_
#define SFVM_MESH_HPP_

// Product triangulations of [0,T] x S, S an interval or a circle, associated
// with a foliation by the slices {t = t_j}.
//
// Ids are deterministic:
//   cell (slab j, spatial i)            -> j * Nx + i
//   spacelike face (slice j, spatial i) -> j * Nx + i,  j = 0..N
//   vertical face (slab j, node k)      -> (N+1) * Nx + j * V + k
// with V = Nx + 1 vertical faces per slab on an interval and V = Nx on a
// circle. The vertical face at node x_k is owned by the cell on its left
// (cell k-1, cyclically on a circle); on an interval the face at x_0 is owned
// by cell 0. Vertical faces are stored oriented as a boundary of their owner.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sfvm/errors.hpp"
#include "sfvm/fluxfield.hpp"
#include "sfvm/forms.hpp"
#include "sfvm/quadrature.hpp"
#include "sfvm/root_finding.hpp"

namespace sfvm {

struct SpatialDomain {
  enum class Kind { Interval, Circle };
  Kind kind = Kind::Interval;
  double a = 0.0;  // circle: a = 0, b = circumference
  double b = 1.0;

  static SpatialDomain interval(double a, double b) { return {Kind::Interval, a, b}; }
  static SpatialDomain circle(double length) { return {Kind::Circle, 0.0, length}; }
  bool periodic() const { return kind == Kind::Circle; }
  double length() const { return b - a; }
};

/// Nodes x_0 < ... < x_Nx covering the spatial domain.
struct SpatialPartition {
  SpatialDomain domain;
  std::vector<double> nodes;

  static SpatialPartition uniform(SpatialDomain d, int cells) {
    if (cells < 1) throw std::invalid_argument("SpatialPartition: need at least one cell");
    std::vector<double> nodes(cells + 1);
    for (int i = 0; i <= cells; ++i) nodes[i] = d.a + d.length() * i / cells;
    nodes.back() = d.b;
    return {d, std::move(nodes)};
  }

  int cells() const { return static_cast<int>(nodes.size()) - 1; }
  double width(int i) const { return nodes[i + 1] - nodes[i]; }
  double max_width() const {
    double m = 0.0;
    for (int i = 0; i < cells(); ++i) m = std::max(m, width(i));
    return m;
  }
  double min_width() const {
    double m = width(0);
    for (int i = 0; i < cells(); ++i) m = std::min(m, width(i));
    return m;
  }

  void validate() const {
    if (nodes.size() < 2) throw std::invalid_argument("spatial partition needs at least two nodes");
    if (nodes.front() != domain.a || nodes.back() != domain.b)
      throw std::invalid_argument("spatial partition does not cover the domain");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("spatial partition nodes must increase strictly");
  }
};

/// Slice times 0 = t_0 < t_1 < ... < t_N = T.
struct Foliation {
  std::vector<double> times;
  SpatialDomain domain;

  int slabs() const { return static_cast<int>(times.size()) - 1; }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  void validate() const {
    if (times.empty() || times.front() != 0.0) throw std::invalid_argument("foliation must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw std::invalid_argument("foliation times must increase strictly");
  }
};

/// Vertical side of spatial cell i within a slab: node index k of the face,
/// the sign relating the cell's boundary orientation to the stored (owner)
/// orientation, and the neighbouring spatial cell (-1 on the boundary).
struct SlabSide {
  int k;
  int sign;
  int neighbor;
};

inline std::array<SlabSide, 2> cell_sides(const SpatialPartition& p, int i) {
  const int n = p.cells();
  if (p.domain.periodic())
    return {SlabSide{i, -1, (i + n - 1) % n}, SlabSide{(i + 1) % n, 1, (i + 1) % n}};
  return {SlabSide{i, i == 0 ? 1 : -1, i == 0 ? -1 : i - 1}, SlabSide{i + 1, 1, i + 1 == n ? -1 : i + 1}};
}

inline int vertical_face_count(const SpatialPartition& p) {
  return p.domain.periodic() ? p.cells() : p.cells() + 1;
}

/// Owner orientation of the vertical face at node k: -1 for a right face of
/// its owner (outward +dx against tangent +dt), +1 for the left boundary face.
inline int vertical_orientation(const SpatialPartition& p, int k) {
  return (!p.domain.periodic() && k == 0) ? 1 : -1;
}

inline FaceChart vertical_face_chart(const SpatialPartition& p, double t0, double t1, int k) {
  return FaceChart::segment({t0, p.nodes[k]}, {t1, p.nodes[k]}, vertical_orientation(p, k));
}

inline FaceChart spacelike_face_chart(const SpatialPartition& p, double t, int i) {
  return FaceChart::segment({t, p.nodes[i]}, {t, p.nodes[i + 1]}, 1);
}

enum class FaceRole { Spacelike, VerticalInterior, VerticalBoundary };

struct Face {
  int id = -1;
  FaceRole role = FaceRole::Spacelike;
  int level = 0;   // slice index (spacelike) or slab index (vertical)
  int index = 0;   // spatial cell (spacelike) or node index k (vertical)
  double t0 = 0.0, t1 = 0.0;  // spacelike: t0 == t1
  double x0 = 0.0, x1 = 0.0;  // vertical: x0 == x1
  int owner = -1;
  int neighbor = -1;  // -1 on the boundary or for H_0 / H_T sides
  int orientation = 1;
};

struct VerticalSide {
  int face = -1;
  int sign = 1;  // +1: this cell owns the face; -1: it sees the reversed orientation
};

struct Cell {
  int id = -1;
  int slab = 0;
  int index = 0;
  int inflow = -1;
  int outflow = -1;
  std::vector<VerticalSide> vertical;  // left then right
};

struct AdmissibilityFlags {
  bool one_inflow_one_outflow = false;
  bool spacelike_faces_on_slices = false;
  bool interior_faces_shared_oppositely = false;
  bool inflow_faces_chain = false;
  bool all() const {
    return one_inflow_one_outflow && spacelike_faces_on_slices && interior_faces_shared_oppositely &&
           inflow_faces_chain;
  }
};

class Triangulation {
 public:
  Triangulation(Foliation fol, SpatialPartition part) : fol_(std::move(fol)), part_(std::move(part)) {
    fol_.validate();
    part_.validate();
    if (fol_.slabs() < 1) throw std::invalid_argument("triangulation needs at least one slab (empty slices)");
    if (part_.domain.periodic() && part_.cells() < 2)
      throw std::invalid_argument("a circle needs at least two spatial cells");
    if (fol_.domain.kind != part_.domain.kind || fol_.domain.a != part_.domain.a || fol_.domain.b != part_.domain.b)
      throw std::invalid_argument("foliation and spatial partition refer to different domains");
    build();
  }

  const Foliation& foliation() const { return fol_; }
  const SpatialPartition& partition() const { return part_; }
  bool periodic() const { return part_.domain.periodic(); }
  int nx() const { return part_.cells(); }
  int slabs() const { return fol_.slabs(); }
  int vertical_per_slab() const { return periodic() ? nx() : nx() + 1; }

  int cell_id(int slab, int i) const { return slab * nx() + i; }
  int spacelike_id(int slice, int i) const { return slice * nx() + i; }
  int vertical_id(int slab, int k) const { return (slabs() + 1) * nx() + slab * vertical_per_slab() + k; }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Cell& cell(int id) const { return cells_[id]; }
  const Face& face(int id) const { return faces_[id]; }

  int spacelike_count() const { return (slabs() + 1) * nx(); }
  int vertical_count() const { return slabs() * vertical_per_slab(); }
  int boundary_vertical_count() const { return periodic() ? 0 : 2 * slabs(); }

  /// Cells of slab j (T_j).
  std::vector<int> slab_cells(int j) const {
    std::vector<int> out(nx());
    for (int i = 0; i < nx(); ++i) out[i] = cell_id(j, i);
    return out;
  }
  /// Boundary vertical faces of slab j (the boundary part of dT_j).
  std::vector<int> slab_boundary_faces(int j) const {
    if (periodic()) return {};
    return {vertical_id(j, 0), vertical_id(j, nx())};
  }
  /// All boundary vertical faces (dT^0).
  std::vector<int> boundary_faces() const {
    std::vector<int> out;
    for (int j = 0; j < slabs(); ++j)
      for (int f : slab_boundary_faces(j)) out.push_back(f);
    return out;
  }

  /// Face geometry. Spacelike faces run in increasing x with orientation +1;
  /// vertical faces run in increasing t, oriented as a boundary of the owner.
  FaceChart face_chart(int id) const {
    const Face& f = faces_[id];
    if (f.role == FaceRole::Spacelike)
      return FaceChart::segment({f.t0, f.x0}, {f.t0, f.x1}, f.orientation);
    return FaceChart::segment({f.t0, f.x0}, {f.t1, f.x0}, f.orientation);
  }

  /// Cell box [t_j, t_{j+1}] x [x_i, x_{i+1}] as a full-dimensional chart.
  FaceChart cell_chart(int id) const {
    const Cell& c = cells_[id];
    return FaceChart::box({fol_.times[c.slab], part_.nodes[c.index]},
                          {fol_.times[c.slab + 1], part_.nodes[c.index + 1]});
  }

  AdmissibilityFlags admissibility() const {
    AdmissibilityFlags fl;
    fl.one_inflow_one_outflow = std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) {
      return c.inflow >= 0 && c.outflow >= 0 && c.inflow != c.outflow;
    });
    fl.spacelike_faces_on_slices = std::all_of(cells_.begin(), cells_.end(), [this](const Cell& c) {
      const Face& a = faces_[c.inflow];
      const Face& b = faces_[c.outflow];
      return a.t0 == fol_.times[c.slab] && b.t0 == fol_.times[c.slab + 1];
    });
    bool shared = true;
    for (const Face& f : faces_) {
      if (f.role != FaceRole::VerticalInterior) continue;
      int signs = 0, count = 0;
      for (int c : {f.owner, f.neighbor}) {
        if (c < 0) {
          shared = false;
          continue;
        }
        for (const auto& side : cells_[c].vertical)
          if (side.face == f.id) {
            signs += side.sign;
            ++count;
          }
      }
      shared = shared && count == 2 && signs == 0;
    }
    fl.interior_faces_shared_oppositely = shared;
    bool chain = true;
    for (const Cell& c : cells_)
      if (c.slab > 0) chain = chain && cells_[cell_id(c.slab - 1, c.index)].outflow == c.inflow;
    fl.inflow_faces_chain = chain;
    return fl;
  }

 private:
  void build() {
    const int n = nx(), N = slabs(), V = vertical_per_slab();
    const auto& t = fol_.times;
    const auto& x = part_.nodes;
    faces_.resize(static_cast<std::size_t>((N + 1) * n + N * V));
    for (int j = 0; j <= N; ++j)
      for (int i = 0; i < n; ++i) {
        Face& f = faces_[spacelike_id(j, i)];
        f.id = spacelike_id(j, i);
        f.role = FaceRole::Spacelike;
        f.level = j;
        f.index = i;
        f.t0 = f.t1 = t[j];
        f.x0 = x[i];
        f.x1 = x[i + 1];
        f.owner = j < N ? cell_id(j, i) : -1;         // cell having it as inflow
        f.neighbor = j > 0 ? cell_id(j - 1, i) : -1;  // cell having it as outflow
        f.orientation = 1;
      }
    cells_.resize(static_cast<std::size_t>(N * n));
    for (int j = 0; j < N; ++j) {
      for (int k = 0; k < V; ++k) {
        Face& f = faces_[vertical_id(j, k)];
        f.id = vertical_id(j, k);
        f.level = j;
        f.index = k;
        f.t0 = t[j];
        f.t1 = t[j + 1];
        f.x0 = f.x1 = x[k];
        if (periodic()) {
          f.role = FaceRole::VerticalInterior;
          f.owner = cell_id(j, (k + n - 1) % n);
          f.neighbor = cell_id(j, k);
          f.orientation = -1;  // right face of the owner: outward +dx, tangent +dt
        } else if (k == 0) {
          f.role = FaceRole::VerticalBoundary;
          f.owner = cell_id(j, 0);
          f.orientation = 1;  // left face of the owner: outward -dx
        } else {
          f.role = k == n ? FaceRole::VerticalBoundary : FaceRole::VerticalInterior;
          f.owner = cell_id(j, k - 1);
          f.neighbor = k == n ? -1 : cell_id(j, k);
          f.orientation = -1;
        }
      }
      for (int i = 0; i < n; ++i) {
        Cell& c = cells_[cell_id(j, i)];
        c.id = cell_id(j, i);
        c.slab = j;
        c.index = i;
        c.inflow = spacelike_id(j, i);
        c.outflow = spacelike_id(j + 1, i);
        const int left = vertical_id(j, i);
        const int right = periodic() ? vertical_id(j, (i + 1) % n) : vertical_id(j, i + 1);
        c.vertical = {{left, faces_[left].owner == c.id ? 1 : -1}, {right, faces_[right].owner == c.id ? 1 : -1}};
      }
    }
  }

  Foliation fol_;
  SpatialPartition part_;
  std::vector<Face> faces_;
  std::vector<Cell> cells_;
};

inline Triangulation build_triangulation(Foliation fol, SpatialPartition part) {
  return Triangulation(std::move(fol), std::move(part));
}

inline constexpr int kDerivativeSamples = 33;
inline constexpr double kDqSafety = 0.9;

/// q(u) = integral over a face of i* omega(u), with sampled derivative bounds.
/// For spacelike faces (monotone requested) q is strictly increasing.
class TotalFlux {
 public:
  TotalFlux() = default;
  TotalFlux(std::shared_ptr<const ParamForm> omega, FaceStencil stencil, Interval u_range,
            bool require_monotone)
      : omega_(std::move(omega)), stencil_(std::move(stencil)), range_(u_range) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    sample_points_ = linspace(range_.lo, range_.hi, kDerivativeSamples);
    for (double u : sample_points_) {
      const double d = derivative(u);
      dq_samples_.push_back(d);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    dq_inf_ = lo;
    dq_sup_ = hi;
    if (require_monotone && !(dq_inf_ > 0.0))
      throw NotSpacelikeError("total flux is not strictly increasing on this face (inf dq = " +
                              std::to_string(dq_inf_) + ")");
    image_ = {(*this)(range_.lo), (*this)(range_.hi)};
  }

  double operator()(double u) const { return stencil_.integrate(*omega_, u, false); }
  double derivative(double u) const { return stencil_.integrate(*omega_, u, true); }

  /// Sampled inf / sup of dq over u_range.
  double dq_inf() const { return dq_inf_; }
  double dq_max() const { return dq_sup_; }
  /// dq_inf with the safety factor applied.
  double dq_min() const { return kDqSafety * dq_inf_; }
  Interval image() const { return image_; }
  Interval u_range() const { return range_; }
  const std::vector<double>& sample_points() const { return sample_points_; }
  const std::vector<double>& derivative_samples() const { return dq_samples_; }
  const FaceStencil& stencil() const { return stencil_; }
  const ParamForm& omega() const { return *omega_; }

  double invert(double value, const InversionOptions& opt = {}) const {
    return invert_monotone([this](double u) { return (*this)(u); },
                           [this](double u) { return derivative(u); }, range_.lo, range_.hi, value, opt);
  }

 private:
  std::shared_ptr<const ParamForm> omega_;
  FaceStencil stencil_;
  Interval range_;
  std::vector<double> sample_points_, dq_samples_;
  double dq_inf_ = 0.0, dq_sup_ = 0.0;
  Interval image_;
};

inline TotalFlux total_flux(const FaceChart& face, const FluxField& flux, Interval u_range,
                            bool require_monotone, const QuadratureRule& rule = default_face_rule()) {
  return TotalFlux(std::make_shared<const ParamForm>(flux.omega), FaceStencil(face, rule), u_range,
                   require_monotone);
}

inline double invert_total_flux(const TotalFlux& tf, double value, double tol = 1e-12) {
  InversionOptions opt;
  opt.tol = tol;
  return tf.invert(value, opt);
}

}  // namespace sfvm

#endif  // SFVM_MESH_HPP_
