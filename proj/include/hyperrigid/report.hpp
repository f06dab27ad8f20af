#pragma once

// JSON views of library results. Complex matrices are nested [re, im] pairs,
// row by row.

#include <json.hpp>

#include "hyperrigid/choi.hpp"
#include "hyperrigid/function_system.hpp"
#include "hyperrigid/korovkin.hpp"
#include "hyperrigid/lab.hpp"
#include "hyperrigid/lp.hpp"
#include "hyperrigid/matrix.hpp"
#include "hyperrigid/minimax.hpp"
#include "hyperrigid/rigidity.hpp"
#include "hyperrigid/uep.hpp"

namespace hyperrigid::report {

using json = nlohmann::json;

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw DomainError("matrix json: expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw DimensionError("matrix json: ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      const json& z = j[i][k];
      if (!z.is_array() || z.size() != 2) throw DomainError("matrix json: entries must be [re, im]");
      m(i, k) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

inline json choi_json(const choi::ChoiMatrix& c) {
  const auto d = choi::is_ucp(c);
  return {{"n_in", c.n_in()},
          {"n_out", c.n_out()},
          {"matrix", matrix_json(c.matrix())},
          {"ucp", {{"ok", d.ok}, {"min_eigenvalue", d.min_eigenvalue}, {"unitality_residual", d.unitality_residual}}}};
}

inline json convexity_json(const ConvexityResult& r) {
  return {{"kind", to_string(r.kind)},
          {"tol", r.tol},
          {"witness", r.witness ? json(*r.witness) : json(nullptr)},
          {"second_differences", r.second_differences}};
}

inline json boundary_json(const std::vector<BoundaryFlag>& flags, bool stable) {
  json pts = json::array();
  std::size_t count = 0;
  for (const auto& f : flags) {
    pts.push_back({{"x", f.x}, {"fx", f.fx}, {"boundary", f.boundary}});
    count += f.boundary;
  }
  return {{"points", pts}, {"boundary_count", count}, {"stable_under_refinement", stable}};
}

inline json counterexample_json(const CounterexampleReport& r) {
  json support = json::array();
  for (const auto& s : r.witness.support) support.push_back({{"x", s.x}, {"t", s.t}});
  return {{"witness", {{"x0", r.witness.x0}, {"support", support}}},
          {"A", r.A.diagonal_entries()},
          {"fA", r.fA.diagonal_entries()},
          {"dimension", r.A.dim()},
          {"phi", choi_json(r.phi)},
          {"residual_fix_A", r.residual_fix_A},
          {"residual_fix_fA", r.residual_fix_fA},
          {"deviation", r.deviation}};
}

inline json verdict_json(const RigidityVerdict& v) {
  return {{"verdict", to_string(v.kind)}, {"report", v.report ? counterexample_json(*v.report) : json(nullptr)}};
}

inline json uep_json(const uep::UepReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) probes.push_back(matrix_json(p));
  json log = json::array();
  for (const auto& d : r.restart_log)
    log.push_back({{"seed", d.seed},
                   {"epsilon", d.epsilon},
                   {"iterations", d.iterations},
                   {"ascent_steps", d.ascent_steps},
                   {"hit_iteration_cap", d.hit_iteration_cap},
                   {"final_change", d.final_change},
                   {"affine_residual", d.affine_residual},
                   {"deviation", d.deviation}});
  return {{"status", to_string(r.status)},
          {"evidence", r.status == uep::UepStatus::Violated
                           ? "certified: witness re-verified as a UCP map fixing the system"
                           : "heuristic: no violating UCP map found; this does not prove the unique extension property"},
          {"deviation", r.deviation},
          {"probes", probes},
          {"probe_deviations", r.probe_deviations},
          {"restarts", r.restarts},
          {"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"best_restart", r.best_restart},
          {"frame_rank", r.frame_rank},
          {"witness", r.witness ? choi_json(*r.witness) : json(nullptr)},
          {"best_map", choi_json(r.best_map)},
          {"verification",
           {{"min_eigenvalue", r.witness_min_eigenvalue},
            {"unitality_residual", r.witness_unitality_residual},
            {"fix_residual", r.witness_fix_residual}}},
          {"restart_log", log}};
}

inline json spectral_json(const lab::VolterraSpectralReport& r) {
  json matches = json::array();
  for (const auto& m : r.matches)
    matches.push_back(
        {{"k", m.k}, {"target", m.target}, {"eigenvalue", m.eigenvalue}, {"relative_error", m.relative_error}});
  json sch = json::array();
  for (const auto& s : r.schatten) sch.push_back({{"p", s.p}, {"sum", s.sum}});
  return {{"n", r.n},
          {"real_part_residual", r.real_part_residual},
          {"matches", matches},
          {"schatten", sch},
          {"min_abs_imag_eigenvalue", r.min_abs_imag_eigenvalue}};
}

inline json unitary_demo_json(const lab::UnitaryDemoReport& r) {
  json us = json::array();
  for (const auto& u : r.unitaries) us.push_back(matrix_json(u));
  return {{"seed", r.seed},
          {"seed_used", r.seed_used},
          {"attempts", r.attempts},
          {"commutant_dim", r.commutant_dim},
          {"rejected_commutant_dims", r.rejected_commutant_dims},
          {"unitaries", us},
          {"uep", uep_json(r.uep)}};
}

inline json domination_json(const lab::DominationReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back({{"epsilon", e.epsilon}, {"margin", e.margin}, {"success", e.success}});
  return {{"basis_size", r.basis_size},
          {"coefficients", r.coefficients},
          {"lambda_max", r.lambda_max},
          {"entries", entries},
          {"success", r.success},
          {"iterations", r.iterations},
          {"hit_cap", r.hit_cap}};
}

inline json korovkin_json(const korovkin::KorovkinTable& t) {
  json cols = json::array();
  for (const auto& c : t.columns)
    cols.push_back(
        {{"name", c.name}, {"role", c.is_test ? "test" : "probe"}, {"errors", c.errors}, {"monotone_breaks", c.monotone_breaks}});
  return {{"family", to_string(t.family)},
          {"n_list", t.n_list},
          {"columns", cols},
          {"max_test_error", t.max_test_error},
          {"co_decrease", t.co_decrease}};
}

inline json pinching_json(const korovkin::PinchingTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"blocks", r.blocks},
                    {"plain", {{"x", r.err_x}, {"x2", r.err_x2}, {"probe", r.err_probe}}},
                    {"conjugated", {{"x", r.conj_err_x}, {"x2", r.conj_err_x2}, {"probe", r.conj_err_probe}}}});
  return {{"d", t.d}, {"seed", t.seed}, {"probe", t.probe}, {"rows", rows}};
}

inline json lp_json(const lp::LpSolution& s) {
  return {{"status", to_string(s.status)},
          {"value", s.value},
          {"dual_value", s.dual_value},
          {"primal_residual", s.primal_residual},
          {"dual_residual", s.dual_residual},
          {"complementarity", s.complementarity},
          {"pivots", s.pivots}};
}

inline json minimax_json(const minimax::MinimaxReport& r) {
  return {{"sup_dominated", r.sup_dominated}, {"min_extension", r.min_extension}, {"inf_dominating", r.inf_dominating},
          {"max_extension", r.max_extension}, {"lower_gap", r.lower_gap},         {"upper_gap", r.upper_gap},
          {"tol", r.tol},                     {"ok", r.ok}};
}

inline json envelope_json(const minimax::EnvelopeReport& e) {
  return {{"index", e.p_index},  {"point", e.point}, {"envelope", e.envelope},         {"value", e.value},
          {"gap", e.gap},        {"boundary", e.boundary}, {"coefficients", e.coefficients}};
}

}  // namespace hyperrigid::report
