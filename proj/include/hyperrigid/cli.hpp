#pragma once

// Command-line front end. One subcommand per experiment; every run prints a
// JSON report (or writes it to --out). Exit codes: 0 ok, 1 domain or
// validation failure inside a module, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hyperrigid/expr.hpp"
#include "hyperrigid/report.hpp"

#ifndef HYPERRIGID_VERSION
#define HYPERRIGID_VERSION "0.1.0"
#endif

namespace hyperrigid::cli {

using json = nlohmann::json;

inline constexpr const char* kArtifact = "hyperrigid";
inline constexpr const char* kVersion = HYPERRIGID_VERSION;

// Bad flag value that CLI11 cannot see (unknown token, inconsistent flags).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Outcome {
  json result;
  std::uint64_t seed = 0;
  std::string text;  // non-empty: print this instead of the JSON
};

struct Command {
  CLI::App* app = nullptr;
  std::function<json()> config;
  std::function<Outcome()> run;
};

namespace detail {

inline FunctionSystem function_system(const std::string& f, const std::vector<double>& interval, std::size_t grid) {
  if (interval.size() != 2) throw UsageError("--interval takes two numbers");
  return FunctionSystem(interval[0], interval[1], expr::parse(f), grid);
}

// "A^k", "Ak", "A" (k = 1), "1" / "I" (k = 0); base is A or V
inline int power_token(const std::string& tok, char base, const char* flag) {
  if (tok == "1" || tok == "I") return 0;
  if (tok.empty() || tok[0] != base) throw UsageError(std::string(flag) + ": unknown element '" + tok + "'");
  std::string rest = tok.substr(1);
  if (rest.empty()) return 1;
  if (rest[0] == '^') rest = rest.substr(1);
  if (rest.empty() || rest.size() > 2 || !std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(c); }))
    throw UsageError(std::string(flag) + ": unknown element '" + tok + "'");
  const int k = std::stoi(rest);
  if (k > 16) throw UsageError(std::string(flag) + ": power too large in '" + tok + "'");
  return k;
}

inline ComplexMatrix matrix_power(const ComplexMatrix& a, int k) {
  ComplexMatrix r = ComplexMatrix::identity(a.rows());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline korovkin::NamedFunction named_expr(const std::string& text) {
  auto e = std::make_shared<expr::Expr>(expr::parse(text));
  return {text, [e](double x) { return (*e)(x); }};
}

inline std::string render_table(const json& table) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "n";
  for (const auto& c : table["columns"]) os << std::setw(14) << c["name"].get<std::string>();
  os << "\n";
  const auto& ns = table["n_list"];
  for (std::size_t i = 0; i < ns.size(); ++i) {
    os << std::setw(8) << ns[i].get<std::size_t>();
    for (const auto& c : table["columns"]) {
      std::ostringstream cell;
      cell << std::scientific << std::setprecision(3) << c["errors"][i].get<double>();
      os << std::setw(14) << cell.str();
    }
    os << "\n";
  }
  for (const auto& c : table["columns"])
    if (!c["monotone_breaks"].empty()) os << "non-monotone: " << c["name"].get<std::string>() << "\n";
  if (!table["co_decrease"].get<bool>()) os << "probe errors rose while test errors fell\n";
  return os.str();
}

}  // namespace detail

// ---- subcommands ----------------------------------------------------------

struct FunctionOpts {
  std::string f;
  std::vector<double> interval{0.0, 1.0};
  std::size_t grid = 101;
  double tol = -1.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FunctionOpts, f, interval, grid, tol)

inline void add_function_options(CLI::App* sub, FunctionOpts& o) {
  sub->add_option("--f", o.f, "function of x, e.g. \"abs(x-1/2)\"")->required();
  sub->add_option("--interval", o.interval, "endpoints a b")->expected(2)->delimiter(',');
  sub->add_option("--grid", o.grid, "grid points")->check(CLI::Range(3, 100001));
}

inline Command convexity_command(CLI::App& root) {
  auto o = std::make_shared<FunctionOpts>();
  auto* sub = root.add_subcommand("convexity", "classify a sampled function as strictly convex, concave or neither");
  add_function_options(sub, *o);
  sub->add_option("--tol", o->tol, "second-difference tolerance (negative: automatic)");
  return {sub, [o] { return json(*o); },
          [o] {
            const auto fs = detail::function_system(o->f, o->interval, o->grid);
            return Outcome{report::convexity_json(classify_convexity(fs, o->tol)), 0, {}};
          }};
}

inline Command boundary_command(CLI::App& root) {
  auto o = std::make_shared<FunctionOpts>();
  auto* sub = root.add_subcommand("boundary", "flag Choquet boundary points of span{1, x, f} on the grid");
  add_function_options(sub, *o);
  return {sub, [o] { return json(*o); },
          [o] {
            const auto fs = detail::function_system(o->f, o->interval, o->grid);
            return Outcome{report::boundary_json(choquet_boundary(fs), boundary_stable_under_refinement(fs)), 0, {}};
          }};
}

inline Command counterexample_command(CLI::App& root) {
  auto o = std::make_shared<FunctionOpts>();
  auto* sub = root.add_subcommand("counterexample", "rigidity verdict, with a non-multiplicative UCP map when not rigid");
  add_function_options(sub, *o);
  return {sub, [o] { return json(*o); },
          [o] {
            const auto fs = detail::function_system(o->f, o->interval, o->grid);
            return Outcome{report::verdict_json(rigidity_verdict(fs)), 0, {}};
          }};
}

struct UepOpts {
  std::vector<double> diag;
  std::vector<std::string> span{"1", "A"};
  std::vector<std::string> probe;
  std::size_t restarts = 16;
  std::vector<double> epsilons{0.05, 0.2, 0.8};
  std::size_t max_iterations = 500;
  std::size_t ascent_iterations = 50;
  std::size_t ascent_steps = 40;
  double change_tol = 1e-10;
  double violation_tol = 1e-4;
  double fix_tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool no_polish = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(UepOpts, diag, span, probe, restarts, epsilons, max_iterations, ascent_iterations,
                                   ascent_steps, change_tol, violation_tol, fix_tol, seed, threads, no_polish)

inline void add_solver_options(CLI::App* sub, std::size_t& restarts, std::uint64_t& seed, std::size_t& threads) {
  sub->add_option("--restarts", restarts, "random restarts")->check(CLI::Range(1, 1000));
  sub->add_option("--seed", seed, "seed for restart directions");
  sub->add_option("--threads", threads, "worker threads (0: all cores); results do not depend on it");
}

inline uep::UepParams uep_params(const UepOpts& o) {
  uep::UepParams p;
  p.restarts = o.restarts;
  p.epsilons = o.epsilons;
  p.max_iterations = o.max_iterations;
  p.ascent_iterations = o.ascent_iterations;
  p.ascent_steps = o.ascent_steps;
  p.change_tol = o.change_tol;
  p.violation_tol = o.violation_tol;
  p.fix_tol = o.fix_tol;
  p.seed = o.seed;
  p.threads = o.threads;
  p.polish = !o.no_polish;
  return p;
}

inline Command uep_command(CLI::App& root) {
  auto o = std::make_shared<UepOpts>();
  auto* sub = root.add_subcommand("uep", "search for a UCP map fixing span{A^k} that moves a probe (A diagonal)");
  sub->add_option("--diag", o->diag, "eigenvalues of A, e.g. 0,0.5,1")->required()->delimiter(',');
  sub->add_option("--span", o->span, "elements of S: 1, A, A^k")->delimiter(',');
  sub->add_option("--probe", o->probe, "probes (default: next power of A)")->delimiter(',');
  add_solver_options(sub, o->restarts, o->seed, o->threads);
  sub->add_option("--epsilons", o->epsilons, "restart step sizes")->delimiter(',');
  sub->add_option("--max-iterations", o->max_iterations)->check(CLI::Range(1, 100000));
  sub->add_option("--ascent-iterations", o->ascent_iterations)->check(CLI::Range(1, 100000));
  sub->add_option("--ascent-steps", o->ascent_steps)->check(CLI::Range(0, 10000));
  sub->add_option("--change-tol", o->change_tol)->check(CLI::PositiveNumber);
  sub->add_option("--violation-tol", o->violation_tol)->check(CLI::PositiveNumber);
  sub->add_option("--fix-tol", o->fix_tol)->check(CLI::PositiveNumber);
  sub->add_flag("--no-polish", o->no_polish, "skip the factored polish step");
  return {sub, [o] { return json(*o); },
          [o] {
            const std::size_t n = o->diag.size();
            if (n > 8) throw UsageError("--diag: at most 8 eigenvalues (got " + std::to_string(n) + ")");
            const ComplexMatrix a = ComplexMatrix::diagonal(o->diag);
            std::vector<ComplexMatrix> gens;
            int top = 0;
            bool has_one = false, has_a = false;
            for (const auto& t : o->span) {
              const int k = detail::power_token(t, 'A', "--span");
              top = std::max(top, k);
              has_one = has_one || k == 0;
              has_a = has_a || k == 1;
              gens.push_back(detail::matrix_power(a, k));
            }
            std::vector<std::string> probe_names = o->probe;
            if (probe_names.empty()) probe_names.push_back("A^" + std::to_string(top + 1));
            std::vector<ComplexMatrix> probes;
            for (const auto& t : probe_names) probes.push_back(detail::matrix_power(a, detail::power_token(t, 'A', "--probe")));

            const auto r = uep::uep_check(uep::OperatorSystemM(n, gens), probes, uep_params(*o));
            json explicit_witness = nullptr;
            const bool only_one_a = has_one && has_a && std::all_of(o->span.begin(), o->span.end(), [](const std::string& t) {
                                      const int k = detail::power_token(t, 'A', "--span");
                                      return k <= 1;
                                    });
            if (only_one_a) {
              try {
                const auto phi = uep::convex_split_witness(HermitianMatrix::diagonal(o->diag));
                const ComplexMatrix a2 = a * a;
                explicit_witness = {{"deviation", operator_norm(choi::apply(phi, a2) - a2)},
                                    {"map", report::choi_json(phi)}};
              } catch (const Error&) {
                // fewer than three eigenvalues or not diagonal: no closed-form witness
              }
            }
            json res = {{"A", o->diag},
                        {"span", o->span},
                        {"probes", probe_names},
                        {"report", report::uep_json(r)},
                        {"explicit_witness", explicit_witness}};
            return Outcome{res, o->seed, {}};
          }};
}

struct VolterraOpts {
  std::size_t n = 256;
  double c = 0.5;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VolterraOpts, n, c)

inline Command volterra_command(CLI::App& root) {
  auto o = std::make_shared<VolterraOpts>();
  auto* sub = root.add_subcommand("volterra", "spectral checks on the discretized Volterra operator V = A + iB");
  sub->add_option("--n", o->n, "grid size")->check(CLI::Range(16, 1024));
  sub->add_option("--c", o->c, "constant with A^2 <= cA for the negative element");
  return {sub, [o] { return json(*o); },
          [o] {
            const auto vd = lab::discretize_volterra(o->n);
            const auto neg = lab::strictly_negative_element(vd.A, vd.B, o->c);
            const auto rho = lab::infinity_obstruction_witness(vd);
            const ComplexMatrix v2 = vd.V * vd.V;
            const Complex rv = lab::expectation(rho, vd.V), rvd = lab::expectation(rho, vd.V.adjoint());
            json res = {
                {"label", "discretization evidence: finite midpoint truncation of the Volterra operator"},
                {"spectral", report::spectral_json(lab::volterra_spectral_report(o->n))},
                {"negative_element",
                 {{"c", o->c},
                  {"margin", neg.margin},
                  {"lambda_min_B2", min_eigenvalue(vd.B.matrix() * vd.B.matrix())},
                  {"ok", neg.ok}}},
                {"obstruction",
                 {{"trace", lab::expectation(rho, ComplexMatrix::identity(o->n)).real()},
                  {"min_eigenvalue", min_eigenvalue(rho.density)},
                  {"rho_V", report::complex_json(rv)},
                  {"rho_Vdag", report::complex_json(rvd)},
                  {"rho_V2_plus_adjoint", report::complex_json(lab::expectation(rho, v2 + v2.adjoint()))},
                  {"annihilates_V", std::max(std::abs(rv), std::abs(rvd)) <= 1e-10}}}};
            return Outcome{res, 0, {}};
          }};
}

struct IsometryOpts {
  std::size_t n = 3;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t restarts = 16;
  std::size_t threads = 0;
  std::size_t max_attempts = 8;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IsometryOpts, n, k, seed, restarts, threads, max_attempts)

inline Command isometry_command(CLI::App& root) {
  auto o = std::make_shared<IsometryOpts>();
  auto* sub = root.add_subcommand("isometry-demo", "UEP search on span{1, U_j, U_j*, sum U_j U_j*} for Haar unitaries");
  sub->add_option("--n", o->n, "matrix size")->check(CLI::Range(1, 6));
  sub->add_option("--k", o->k, "number of unitaries")->check(CLI::Range(1, 3));
  add_solver_options(sub, o->restarts, o->seed, o->threads);
  sub->add_option("--max-attempts", o->max_attempts, "redraws when the unitaries generate a proper algebra")
      ->check(CLI::Range(1, 1000));
  return {sub, [o] { return json(*o); },
          [o] {
            uep::UepParams p;
            p.restarts = o->restarts;
            p.threads = o->threads;
            const auto r = lab::unitary_generator_demo(o->n, o->k, o->seed, p, o->max_attempts);
            return Outcome{report::unitary_demo_json(r), o->seed, {}};
          }};
}

struct KorovkinOpts {
  std::string family = "bernstein";
  std::vector<std::size_t> n_list;
  std::vector<std::string> probe;
  std::size_t grid = 1001;
  std::size_t dim = 32;
  std::uint64_t seed = 0;
  std::string format = "json";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KorovkinOpts, family, n_list, probe, grid, dim, seed, format)

inline Command korovkin_command(CLI::App& root) {
  auto o = std::make_shared<KorovkinOpts>();
  auto* sub = root.add_subcommand("korovkin", "error tables for Bernstein operators or matrix pinchings");
  sub->add_option("--family", o->family)->check(CLI::IsMember({"bernstein", "pinching"}));
  sub->add_option("--n-list", o->n_list, "degrees (bernstein) or block counts (pinching)")->delimiter(',');
  sub->add_option("--probe", o->probe, "probe functions of x (default: sin(pi*x), abs(2*x-1), x^3, exp(x))")
      ->delimiter(',');
  sub->add_option("--grid", o->grid, "evaluation grid (bernstein)")->check(CLI::Range(2, 100001));
  sub->add_option("--dim", o->dim, "matrix size (pinching)")->check(CLI::Range(2, 256));
  sub->add_option("--seed", o->seed, "seed of the rotation (pinching)");
  sub->add_option("--format", o->format, "json or text")->check(CLI::IsMember({"json", "text"}));
  return {sub, [o] { return json(*o); },
          [o] {
            const bool bern = o->family == "bernstein";
            std::vector<std::size_t> ns = o->n_list;
            if (ns.empty()) ns = bern ? std::vector<std::size_t>{10, 100, 1000} : std::vector<std::size_t>{1, 2, 4, 8, 16, 32};
            for (std::size_t n : ns)
              if (n < 1 || n > 100000) throw UsageError("--n-list: entries must be in [1, 100000]");
            std::vector<korovkin::NamedFunction> probes;
            for (const auto& t : o->probe) probes.push_back(detail::named_expr(t));
            if (probes.empty()) probes = korovkin::default_probes();
            korovkin::KorovkinOptions opt;
            opt.grid = o->grid;
            opt.dim = o->dim;
            opt.seed = o->seed;
            const auto t = korovkin::korovkin_table(bern ? korovkin::MapFamily::Bernstein : korovkin::MapFamily::MatrixPinching,
                                                    korovkin::korovkin_tests(), probes, ns, opt);
            json res = {{"table", report::korovkin_json(t)}, {"pinching", nullptr}};
            if (!bern) res["pinching"] = report::pinching_json(korovkin::matrix_pinching_family(o->dim, ns, probes.front(), o->seed));
            Outcome out{res, o->seed, {}};
            if (o->format == "text") out.text = detail::render_table(res["table"]);
            return out;
          }};
}

struct MinimaxOpts {
  std::vector<double> points{0.0, 0.5, 1.0};
  std::vector<std::string> basis{"x"};
  std::string x = "x^2";
  double state_at = 0.5;
  std::vector<double> weights;
  std::vector<double> phi;
  double tol = 1e-8;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MinimaxOpts, points, basis, x, state_at, weights, phi, tol)

inline Command minimax_command(CLI::App& root) {
  auto o = std::make_shared<MinimaxOpts>();
  auto* sub = root.add_subcommand("minimax", "extension minimax and upper envelopes on a finite set, by LP");
  sub->add_option("--points", o->points, "the finite set X")->delimiter(',');
  sub->add_option("--basis", o->basis, "functions spanning S together with 1")->delimiter(',');
  sub->add_option("--x", o->x, "the function to bound");
  sub->add_option("--state-at", o->state_at, "state = evaluation at this point (default)");
  sub->add_option("--weights", o->weights, "state = this probability measure on X")->delimiter(',');
  sub->add_option("--phi", o->phi, "state given by its values on the basis (unit first)")->delimiter(',');
  sub->add_option("--tol", o->tol, "gap tolerance")->check(CLI::PositiveNumber);
  return {sub, [o] { return json(*o); },
          [o] {
            if (!o->weights.empty() && !o->phi.empty()) throw UsageError("--weights and --phi are exclusive");
            std::vector<std::function<double(double)>> gs;
            for (const auto& b : o->basis) gs.push_back(detail::named_expr(b).f);
            const auto fs = minimax::FiniteFunctionSystem::from_functions(o->points, gs);
            const auto xf = detail::named_expr(o->x);
            std::vector<double> xv;
            for (double p : o->points) xv.push_back(xf.f(p));
            std::vector<double> phi = o->phi;
            if (!o->weights.empty()) {
              if (o->weights.size() != fs.size()) throw UsageError("--weights: need one weight per point");
              phi.assign(fs.dim(), 0.0);
              for (std::size_t i = 0; i < fs.dim(); ++i)
                for (std::size_t j = 0; j < fs.size(); ++j) phi[i] += o->weights[j] * fs.basis()[i][j];
            } else if (phi.empty()) {
              phi.push_back(1.0);
              for (const auto& g : gs) phi.push_back(g(o->state_at));
            }
            json env = json::array();
            for (std::size_t j = 0; j < fs.size(); ++j) env.push_back(report::envelope_json(minimax::boundary_envelope(fs, j, xv)));
            std::vector<std::string> names{"1"};
            names.insert(names.end(), o->basis.begin(), o->basis.end());
            json res = {{"points", o->points},
                        {"basis", names},
                        {"phi", phi},
                        {"x", xv},
                        {"minimax", report::minimax_json(minimax::verify_minimax(fs, phi, xv, o->tol))},
                        {"envelope", env}};
            return Outcome{res, 0, {}};
          }};
}

struct DominateOpts {
  std::size_t n = 16;
  std::vector<std::string> gens{"V"};
  std::vector<double> p_range{1.0, 2.0};
  std::vector<double> p_diag;
  bool p_relative = false;
  std::vector<double> eps{1e-3, 0.1};
  std::size_t max_iterations = 2000;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DominateOpts, n, gens, p_range, p_diag, p_relative, eps, max_iterations)

inline Command dominate_command(CLI::App& root) {
  auto o = std::make_shared<DominateOpts>();
  auto* sub = root.add_subcommand("dominate", "is p almost dominated by the Hermitian part of span{gens, gens*}?");
  sub->add_option("--n", o->n, "Volterra grid size")->check(CLI::Range(3, 128));
  sub->add_option("--gens", o->gens, "generators: V, V^k, A, B, 1")->delimiter(',');
  sub->add_option("--p-range", o->p_range, "p = diag(linspace(lo, hi))")->expected(2)->delimiter(',');
  sub->add_option("--p-diag", o->p_diag, "explicit diagonal of p")->delimiter(',');
  sub->add_flag("--p-relative", o->p_relative, "scale p by the smallest eigenvalue of B^2");
  sub->add_option("--eps", o->eps, "epsilons")->delimiter(',');
  sub->add_option("--max-iterations", o->max_iterations)->check(CLI::Range(1, 1000000));
  return {sub, [o] { return json(*o); },
          [o] {
            const auto vd = lab::discretize_volterra(o->n);
            std::vector<ComplexMatrix> gens;
            bool killed_by_rho = true;
            for (const auto& t : o->gens) {
              if (t == "A" || t == "B") {
                gens.push_back(t == "A" ? vd.A.matrix() : vd.B.matrix());
                continue;
              }
              const int k = detail::power_token(t, 'V', "--gens");
              killed_by_rho = killed_by_rho && k == 1;
              gens.push_back(detail::matrix_power(vd.V, k));
            }
            std::vector<double> d = o->p_diag;
            if (d.empty()) {
              if (o->p_range.size() != 2) throw UsageError("--p-range takes two numbers");
              d = detail::linspace(o->p_range[0], o->p_range[1], o->n);
            }
            if (d.size() != o->n) throw UsageError("--p-diag: need " + std::to_string(o->n) + " entries");
            if (o->p_relative) {
              const double lmin = min_eigenvalue(vd.B.matrix() * vd.B.matrix());
              for (double& v : d) v *= lmin;
            }
            const HermitianMatrix p = HermitianMatrix::diagonal(d);
            lab::DominationParams prm;
            prm.max_iterations = o->max_iterations;
            const auto r = lab::almost_dominated_check(gens, p, o->eps, prm);
            json res = {{"n", o->n}, {"gens", o->gens}, {"p_diag", d}, {"report", report::domination_json(r)},
                        {"witness_bound", nullptr}, {"duality_consistent", nullptr}};
            if (killed_by_rho) {
              // the state killing V and V* bounds every margin from below
              const double bound = lab::expectation(lab::infinity_obstruction_witness(vd), p.matrix()).real();
              bool consistent = true;
              for (const auto& e : r.entries) consistent = consistent && e.margin >= bound - e.epsilon - 1e-12;
              res["witness_bound"] = bound;
              res["duality_consistent"] = consistent;
            }
            return Outcome{res, 0, {}};
          }};
}

// ---- driver ---------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat key=value file; '#' starts a comment. Values in double quotes stay one
// token, others split on whitespace. Keys already on the command line win.
inline void merge_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  auto given = [&](const std::string& key) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("--config: line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("--config: empty key on line " + std::to_string(lineno));
    if (given(key)) continue;
    if (value == "true" || value == "false") {  // flags
      if (value == "true") extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      extra.push_back(value.substr(1, value.size() - 2));
    } else {
      std::istringstream vs(value);
      for (std::string tok; vs >> tok;) extra.push_back(tok);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  // args[0] is the program name
  CLI::App app("Hyperrigidity experiments: function systems, UCP maps and operator examples", "hyperrigid");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string out_path;
  app.add_option("--out", out_path, "write the report here instead of stdout");
  app.fallthrough();

  std::vector<Command> cmds;
  cmds.push_back(convexity_command(app));
  cmds.push_back(boundary_command(app));
  cmds.push_back(counterexample_command(app));
  cmds.push_back(uep_command(app));
  cmds.push_back(volterra_command(app));
  cmds.push_back(isometry_command(app));
  cmds.push_back(korovkin_command(app));
  cmds.push_back(minimax_command(app));
  cmds.push_back(dominate_command(app));
  for (auto& c : cmds) c.app->footer("Reports are JSON. Options may also come from --config FILE (key=value lines).");

  try {
    detail::merge_config(args);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  const Command* cmd = nullptr;
  for (const auto& c : cmds)
    if (c.app->parsed()) cmd = &c;
  if (cmd == nullptr) {
    err << "usage error: no subcommand\n";
    return 2;
  }

  json doc = {{"artifact", kArtifact}, {"version", kVersion}, {"command", cmd->app->get_name()}, {"config", cmd->config()}};
  int code = 0;
  std::string text;
  try {
    Outcome r = cmd->run();
    doc["seed"] = r.seed;
    doc["status"] = "ok";
    doc["result"] = std::move(r.result);
    text = std::move(r.text);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    const char* kind = dynamic_cast<const PreconditionError*>(&e)   ? "PreconditionError"
                       : dynamic_cast<const DimensionError*>(&e)    ? "DimensionError"
                       : dynamic_cast<const ConvergenceError*>(&e)  ? "ConvergenceError"
                       : dynamic_cast<const DomainError*>(&e)       ? "DomainError"
                                                                     : "Error";
    err << "error: " << e.what() << "\n";
    doc["seed"] = cmd->config().value("seed", std::uint64_t{0});
    doc["status"] = "error";
    doc["error"] = {{"type", kind}, {"message", e.what()}};
    code = 1;
  }

  const std::string body = text.empty() ? doc.dump(2) + "\n" : text;
  if (out_path.empty()) {
    out << body;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f || !(f << body)) {
      err << "error: cannot write '" << out_path << "'\n";
      return 1;
    }
  }
  return code;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace hyperrigid::cli
