#ifndef SFVM_IO_HPP_
#define SFVM_IO_HPP_

// Run artifacts and reports. Slices go to CSV with the fixed header
// slice_index,t,x_left,x_right,u,q; runs and reports go to JSON. A run JSON
// embeds the verbatim config so it can be re-checked without the original
// file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfvm/config.hpp"
#include "sfvm/entropy.hpp"
#include "sfvm/harness.hpp"
#include "sfvm/regularity.hpp"
#include "sfvm/scheme.hpp"

namespace sfvm {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string() + ": cannot open file");
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline const char* kSliceCsvHeader = "slice_index,t,x_left,x_right,u,q";

/// All slices (or only the listed ones) as CSV rows.
inline std::string slices_csv(const RunResult& run, const std::vector<int>& only = {}) {
  std::string out = std::string(kSliceCsvHeader) + "\n";
  auto emit = [&](int j) {
    const auto& s = run.slices[j];
    for (int i = 0; i < run.partition.cells(); ++i) {
      out += std::to_string(j) + "," + format_double(run.foliation.times[j]) + "," +
             format_double(run.partition.nodes[i]) + "," + format_double(run.partition.nodes[i + 1]) + "," +
             format_double(s.values[i]) + "," + format_double(s.fluxes[i]) + "\n";
    }
  };
  if (only.empty())
    for (int j = 0; j < static_cast<int>(run.slices.size()); ++j) emit(j);
  else
    for (int j : only) emit(j);
  return out;
}

namespace detail {

inline Json nan_to_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double null_to_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline Json run_to_json(const RunResult& run, const Config& cfg) {
  Json j;
  j["format"] = "sfvm-run";
  j["version"] = 1;
  j["config_source"] = cfg.source;
  j["config"] = cfg.text;
  j["flux"] = cfg.flux.name;
  j["numerical_flux"] = to_string(cfg.spec.kind);
  j["domain"] = {{"kind", run.partition.domain.periodic() ? "circle" : "interval"},
                 {"a", run.partition.domain.a},
                 {"b", run.partition.domain.b}};
  j["u_range"] = {run.u_range.lo, run.u_range.hi};
  j["nodes"] = run.partition.nodes;
  j["times"] = run.foliation.times;
  Json slices = Json::array();
  for (const auto& s : run.slices) slices.push_back({{"values", s.values}, {"fluxes", s.fluxes}});
  j["slices"] = std::move(slices);
  Json ghosts = Json::array();
  for (const auto& g : run.ghosts) ghosts.push_back({detail::nan_to_null(g[0]), detail::nan_to_null(g[1])});
  j["ghosts"] = std::move(ghosts);
  j["max_abs"] = run.max_abs();
  return j;
}

struct RunArtifact {
  Config config;
  RunResult run;
};

inline RunArtifact run_from_json(const Json& j, const std::string& label = "<run>") {
  if (!j.is_object() || j.value("format", "") != "sfvm-run") throw ConfigError(label + ": not a run artifact");
  try {
    RunArtifact a{parse_config(j.at("config").get<std::string>(), j.value("config_source", label)), {}};
    RunResult& r = a.run;
    const auto& d = j.at("domain");
    const double lo = d.at("a").get<double>(), hi = d.at("b").get<double>();
    const SpatialDomain dom = d.at("kind").get<std::string>() == "circle" ? SpatialDomain::circle(hi - lo)
                                                                          : SpatialDomain::interval(lo, hi);
    r.partition = {dom, j.at("nodes").get<std::vector<double>>()};
    r.partition.validate();
    r.foliation = {j.at("times").get<std::vector<double>>(), dom};
    r.u_range = {j.at("u_range").at(0).get<double>(), j.at("u_range").at(1).get<double>()};
    int idx = 0;
    for (const auto& s : j.at("slices"))
      r.slices.push_back({idx++, s.at("values").get<std::vector<double>>(), s.at("fluxes").get<std::vector<double>>()});
    for (const auto& g : j.at("ghosts")) r.ghosts.push_back({detail::null_to_nan(g.at(0)), detail::null_to_nan(g.at(1))});
    if (r.slices.size() != r.foliation.times.size() || r.ghosts.size() + 1 != r.slices.size())
      throw ConfigError(label + ": inconsistent slice/time counts");
    for (const auto& s : r.slices)
      if (static_cast<int>(s.values.size()) != r.partition.cells()) throw ConfigError(label + ": slice size mismatch");
    return a;
  } catch (const Json::exception& e) {
    throw ConfigError(label + ": malformed run artifact: " + e.what());
  }
}

inline Json stat_json(const ResidualStat& s) {
  return {{"max", s.max},
          {"count", s.count},
          {"failures", s.failures},
          {"slab", s.slab},
          {"cell", s.cell},
          {"c", detail::nan_to_null(s.c)},
          {"pass", s.pass()}};
}

inline Json entropy_report_json(const EntropyReport& rep) {
  Json j;
  j["pairs"] = rep.pairs;
  j["convex_decomposition"] = stat_json(rep.convdec);
  j["bracketing"] = stat_json(rep.bracketing);
  j["face_inequality"] = stat_json(rep.face);
  j["face_boundary_inequality"] = stat_json(rep.face_boundary);
  j["cell_inequality"] = stat_json(rep.cell);
  j["convex_combination"] = stat_json(rep.convex);
  j["boundary_condition"] = stat_json(rep.boundary_condition);
  Json diss = Json::array();
  for (const auto& d : rep.dissipation)
    diss.push_back({{"slab", d.slab},
                    {"lhs", d.lhs},
                    {"dissipation", d.dissipation},
                    {"rhs", d.rhs},
                    {"slack", d.slack},
                    {"slack_square", d.slack_square},
                    {"tol", d.tol},
                    {"pass", d.pass()}});
  j["dissipation"] = std::move(diss);
  j["min_dissipation_slack"] = detail::nan_to_null(rep.min_dissipation_slack);
  j["pass"] = rep.pass();
  return j;
}

inline std::string entropy_cells_csv(const EntropyReport& rep) {
  std::string out = "slab,cell,convdec,bracket,face,face_boundary,cell_inequality,convex,boundary_condition,tol\n";
  for (const auto& r : rep.cells) {
    out += std::to_string(r.slab) + "," + std::to_string(r.cell);
    for (double v : {r.convdec, r.bracket, r.face, r.face_boundary, r.cell_ineq, r.convex, r.boundary_condition, r.tol})
      out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline Json convergence_json(const ConvergenceStudy& st) {
  return {{"experiment", st.experiment},
          {"numerical_flux", st.flux_kind},
          {"l1_weight", "i* d_u omega(u_ref)"},
          {"u_ref", st.u_ref},
          {"h", st.h},
          {"cells", st.cells},
          {"errors", st.errors},
          {"seconds", st.seconds},
          {"order", st.order},
          {"strictly_decreasing", st.strictly_decreasing()},
          {"oracle_defect", st.oracle_defect},
          {"oracle_resolved", st.oracle_resolved()}};
}

inline std::string convergence_csv(const ConvergenceStudy& st) {
  std::string out = "h,cells,l1_error,seconds\n";
  for (std::size_t i = 0; i < st.h.size(); ++i)
    out += format_double(st.h[i]) + "," + std::to_string(st.cells[i]) + "," + format_double(st.errors[i]) + "," +
           format_double(st.seconds[i]) + "\n";
  return out;
}

inline Json regularity_json(const MeshRegularityReport& r) {
  return {{"h", r.h},
          {"h_bar", r.h_bar},
          {"diameter_ratio", r.diameter_ratio},
          {"dq_inf_over_h", r.dq_inf_scaled},
          {"dq_max_over_h", r.dq_max_scaled},
          {"boundary_mass_over_h", r.boundary_mass_scaled},
          {"max_vertical_faces", r.max_vertical_faces},
          {"max_boundary_faces_per_slab", r.max_boundary_faces_per_slab},
          {"region_cells_per_slab", r.region_cells_per_slab},
          {"region_cells_times_h", r.region_cells_scaled},
          {"region_slabs", r.region_slabs},
          {"region_slabs_times_h", r.region_slabs_scaled},
          {"flux_ratio", r.flux_ratio},
          {"density_oscillation", r.density_oscillation},
          {"temporal_change", r.temporal_change}};
}

inline Json pieces_json(const std::vector<PieceClass>& pieces) {
  Json a = Json::array();
  for (const auto& p : pieces) a.push_back({{"label", p.label}, {"kind", to_string(p.kind)}, {"min", p.min}, {"max", p.max}});
  return a;
}

inline Json appendix_json(const AppendixReport& r) {
  return {{"annulus",
           {{"hyperbolic", r.annulus_hyperbolicity.pass},
            {"min_coefficient", r.annulus_hyperbolicity.min_coefficient},
            {"geometry_compatible", r.annulus_compatibility.pass},
            {"spacelike_boundary_faces", r.annulus_spacelike_faces},
            {"boundary", pieces_json(r.annulus_boundary)},
            {"pass", r.annulus_pass()}}},
          {"square_with_hole",
           {{"hyperbolic", r.square_hyperbolicity.pass},
            {"min_coefficient", r.square_hyperbolicity.min_coefficient},
            {"inflow_pieces", r.square_inflow_pieces},
            {"inflow_mismatches", r.inflow_mismatches},
            {"boundary", pieces_json(r.square_boundary)},
            {"pass", r.square_pass()}}},
          {"pass", r.pass()}};
}

}  // namespace sfvm

#endif  // SFVM_IO_HPP_
