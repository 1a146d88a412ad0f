#include "philap/problem.hpp"

#include "philap/csv.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace philap {

namespace {

using json = nlohmann::ordered_json;

void expect_keys(const json& o, const std::set<std::string>& allowed,
                 const std::string& where) {
  if (!o.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : o.items())
    if (!allowed.count(key))
      throw ParseError(where + ": unknown field '" + key + "'");
}

const json& require(const json& o, const std::string& key, const std::string& where) {
  auto it = o.find(key);
  if (it == o.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

VectorXd as_vector(const json& j, int size, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != size)
    throw ParseError(where + ": expected an array of length " + std::to_string(size));
  VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = as_number(j[i], where);
  return v;
}

MatrixXd as_matrix(const json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ParseError(where + ": expected " + std::to_string(rows) + " rows");
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw ParseError(where + ": row " + std::to_string(r) + " must have " +
                       std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) m(r, c) = as_number(j[r][c], where);
  }
  return m;
}

// h is stored row-per-index in the file and column-per-index in memory.
MatrixXd forcing_from_json(const json& j, int T, int N, const std::string& where) {
  const MatrixXd rows = as_matrix(j, T, N, where);
  return rows.transpose();
}

json forcing_to_json(const MatrixXd& h) {
  json out = json::array();
  for (int n = 0; n < h.cols(); ++n) {
    json row = json::array();
    for (int r = 0; r < h.rows(); ++r) row.push_back(h(r, n));
    out.push_back(row);
  }
  return out;
}

json matrix_to_json(const MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  expect_keys(doc, {"schema_version", "T", "N", "phi", "law", "problem", "options"},
              "problem file");

  ProblemSpec spec;
  spec.schema_version = as_int(require(doc, "schema_version", "problem file"),
                               "schema_version");
  if (spec.schema_version != 1)
    throw ParseError("problem file: unsupported schema_version");
  spec.T = as_int(require(doc, "T", "problem file"), "T");
  spec.N = as_int(require(doc, "N", "problem file"), "N");
  if (spec.T < 1 || spec.N < 1) throw ParseError("problem file: need T >= 1, N >= 1");
  const int T = spec.T, N = spec.N;

  {
    const json& p = require(doc, "phi", "problem file");
    expect_keys(p, {"kind", "a", "p", "q"}, "phi");
    spec.phi.kind = require(p, "kind", "phi").get<std::string>();
    if (p.contains("a")) spec.phi.a = as_number(p["a"], "phi.a");
    if (p.contains("p")) spec.phi.p = as_number(p["p"], "phi.p");
    if (p.contains("q")) spec.phi.q = as_number(p["q"], "phi.q");
  }

  {
    const json& l = require(doc, "law", "problem file");
    expect_keys(l,
                {"kind", "m", "u", "sigma", "power", "power_left", "power_right",
                 "coeff_left", "coeff_right"},
                "law");
    spec.law.kind = require(l, "kind", "law").get<std::string>();
    if (l.contains("m")) spec.law.matrix = as_matrix(l["m"], 2 * N, 2 * N, "law.m");
    if (l.contains("u")) spec.law.matrix = as_matrix(l["u"], N, N, "law.u");
    if (l.contains("sigma")) spec.law.sigma = as_number(l["sigma"], "law.sigma");
    if (l.contains("power")) spec.law.power = as_number(l["power"], "law.power");
    if (l.contains("power_left"))
      spec.law.power_left = as_number(l["power_left"], "law.power_left");
    if (l.contains("power_right"))
      spec.law.power_right = as_number(l["power_right"], "law.power_right");
    if (l.contains("coeff_left"))
      spec.law.coeff_left = as_number(l["coeff_left"], "law.coeff_left");
    if (l.contains("coeff_right"))
      spec.law.coeff_right = as_number(l["coeff_right"], "law.coeff_right");
  }

  {
    const json& pr = require(doc, "problem", "problem file");
    spec.problem_kind = require(pr, "kind", "problem").get<std::string>();
    if (spec.problem_kind == "q_linear") {
      expect_keys(pr, {"kind", "h"}, "problem");
      spec.h = forcing_from_json(require(pr, "h", "problem"), T, N, "problem.h");
    } else if (spec.problem_kind == "nonpotential") {
      expect_keys(pr, {"kind", "f"}, "problem");
      const json& f = require(pr, "f", "problem");
      spec.field.kind = require(f, "kind", "problem.f").get<std::string>();
      if (spec.field.kind == "coupled_matrix") {
        expect_keys(f, {"kind", "coeffs", "h"}, "problem.f");
        spec.field.coeff_matrix =
            as_matrix(require(f, "coeffs", "problem.f"), T, T, "problem.f.coeffs");
        spec.field.h = forcing_from_json(require(f, "h", "problem.f"), T, N,
                                         "problem.f.h");
      } else if (spec.field.kind == "dissipative_plus_bounded") {
        expect_keys(f, {"kind", "kappa", "p", "c", "h"}, "problem.f");
        spec.field.kappa = as_vector(require(f, "kappa", "problem.f"), T,
                                     "problem.f.kappa");
        spec.field.p = as_number(require(f, "p", "problem.f"), "problem.f.p");
        spec.field.c = as_vector(require(f, "c", "problem.f"), T, "problem.f.c");
        spec.field.h = forcing_from_json(require(f, "h", "problem.f"), T, N,
                                         "problem.f.h");
      } else if (spec.field.kind == "delay_difference") {
        expect_keys(f, {"kind", "eps", "p", "h"}, "problem.f");
        spec.field.eps = as_number(require(f, "eps", "problem.f"), "problem.f.eps");
        spec.field.p = as_number(require(f, "p", "problem.f"), "problem.f.p");
        spec.field.h = forcing_from_json(require(f, "h", "problem.f"), T, N,
                                         "problem.f.h");
      } else if (spec.field.kind == "pendulum_power") {
        expect_keys(f, {"kind", "b", "c", "alpha", "nu", "h"}, "problem.f");
        spec.field.b = as_vector(require(f, "b", "problem.f"), T, "problem.f.b");
        spec.field.c = as_vector(require(f, "c", "problem.f"), T, "problem.f.c");
        spec.field.alpha =
            as_number(require(f, "alpha", "problem.f"), "problem.f.alpha");
        spec.field.nu = as_vector(require(f, "nu", "problem.f"), N, "problem.f.nu");
        spec.field.h = forcing_from_json(require(f, "h", "problem.f"), T, N,
                                         "problem.f.h");
      } else {
        throw ParseError("problem.f: unknown nonlinearity kind '" + spec.field.kind +
                         "'");
      }
    } else if (spec.problem_kind == "potential") {
      expect_keys(pr, {"kind", "F", "h"}, "problem");
      spec.h = forcing_from_json(require(pr, "h", "problem"), T, N, "problem.h");
      const json& F = require(pr, "F", "problem");
      spec.potential.kind = require(F, "kind", "problem.F").get<std::string>();
      if (spec.potential.kind == "power_sin") {
        expect_keys(F, {"kind", "b", "c", "alpha", "nu"}, "problem.F");
        spec.potential.b = as_vector(require(F, "b", "problem.F"), T, "problem.F.b");
        spec.potential.c = as_vector(require(F, "c", "problem.F"), T, "problem.F.c");
        spec.potential.alpha =
            as_number(require(F, "alpha", "problem.F"), "problem.F.alpha");
        spec.potential.nu =
            as_vector(require(F, "nu", "problem.F"), N, "problem.F.nu");
      } else if (spec.potential.kind == "periodic_multi") {
        expect_keys(F, {"kind", "c", "nu", "omega"}, "problem.F");
        spec.potential.c = as_vector(require(F, "c", "problem.F"), T, "problem.F.c");
        spec.potential.nu =
            as_vector(require(F, "nu", "problem.F"), N, "problem.F.nu");
        spec.potential.omega =
            as_vector(require(F, "omega", "problem.F"), N, "problem.F.omega");
      } else {
        throw ParseError("problem.F: unknown potential kind '" + spec.potential.kind +
                         "'");
      }
    } else {
      throw ParseError("problem: unknown kind '" + spec.problem_kind + "'");
    }
  }

  if (doc.contains("options")) {
    const json& o = doc["options"];
    expect_keys(o,
                {"tol_residual", "max_iters", "step_safety", "prox_point_lambda",
                 "seed", "mu_grid", "damping", "anderson_depth", "verify_batch"},
                "options");
    if (o.contains("tol_residual"))
      spec.options.tol_residual = as_number(o["tol_residual"], "options.tol_residual");
    if (o.contains("max_iters"))
      spec.options.max_iters = as_int(o["max_iters"], "options.max_iters");
    if (o.contains("step_safety"))
      spec.options.step_safety = as_number(o["step_safety"], "options.step_safety");
    if (o.contains("prox_point_lambda"))
      spec.options.prox_point_lambda =
          as_number(o["prox_point_lambda"], "options.prox_point_lambda");
    if (o.contains("seed"))
      spec.options.seed = static_cast<uint64_t>(as_int(o["seed"], "options.seed"));
    if (o.contains("mu_grid")) {
      const json& g = o["mu_grid"];
      if (!g.is_array() || g.empty())
        throw ParseError("options.mu_grid: expected a nonempty array");
      spec.homotopy.mu_grid.clear();
      for (const auto& v : g)
        spec.homotopy.mu_grid.push_back(as_number(v, "options.mu_grid"));
    }
    if (o.contains("damping"))
      spec.homotopy.damping = as_number(o["damping"], "options.damping");
    if (o.contains("anderson_depth"))
      spec.homotopy.anderson_depth =
          as_int(o["anderson_depth"], "options.anderson_depth");
    if (o.contains("verify_batch"))
      spec.verify_batch = as_int(o["verify_batch"], "options.verify_batch");
  }
  return spec;
}

std::string emit_problem(const ProblemSpec& spec) {
  json doc;
  doc["schema_version"] = spec.schema_version;
  doc["T"] = spec.T;
  doc["N"] = spec.N;

  json phi;
  phi["kind"] = spec.phi.kind;
  phi["a"] = spec.phi.a;
  if (spec.phi.kind == "p_relativistic" || spec.phi.kind == "double_phase")
    phi["p"] = spec.phi.p;
  if (spec.phi.kind == "double_phase") phi["q"] = spec.phi.q;
  doc["phi"] = phi;

  json law;
  law["kind"] = spec.law.kind;
  if (spec.law.kind == "matrix") law["m"] = matrix_to_json(spec.law.matrix);
  if (spec.law.kind == "rotating") law["u"] = matrix_to_json(spec.law.matrix);
  if (spec.law.kind == "steklov_difference") {
    law["power"] = spec.law.power;
    law["sigma"] = spec.law.sigma;
  }
  if (spec.law.kind == "steklov_pair") {
    law["power_left"] = spec.law.power_left;
    law["power_right"] = spec.law.power_right;
    law["coeff_left"] = spec.law.coeff_left;
    law["coeff_right"] = spec.law.coeff_right;
  }
  doc["law"] = law;

  json pr;
  pr["kind"] = spec.problem_kind;
  if (spec.problem_kind == "q_linear") {
    pr["h"] = forcing_to_json(spec.h);
  } else if (spec.problem_kind == "nonpotential") {
    json f;
    f["kind"] = spec.field.kind;
    if (spec.field.kind == "coupled_matrix")
      f["coeffs"] = matrix_to_json(spec.field.coeff_matrix);
    if (spec.field.kind == "dissipative_plus_bounded") {
      f["kappa"] = vector_to_json(spec.field.kappa);
      f["p"] = spec.field.p;
      f["c"] = vector_to_json(spec.field.c);
    }
    if (spec.field.kind == "delay_difference") {
      f["eps"] = spec.field.eps;
      f["p"] = spec.field.p;
    }
    if (spec.field.kind == "pendulum_power") {
      f["b"] = vector_to_json(spec.field.b);
      f["c"] = vector_to_json(spec.field.c);
      f["alpha"] = spec.field.alpha;
      f["nu"] = vector_to_json(spec.field.nu);
    }
    f["h"] = forcing_to_json(spec.field.h);
    pr["f"] = f;
  } else if (spec.problem_kind == "potential") {
    json F;
    F["kind"] = spec.potential.kind;
    if (spec.potential.kind == "power_sin") {
      F["b"] = vector_to_json(spec.potential.b);
      F["c"] = vector_to_json(spec.potential.c);
      F["alpha"] = spec.potential.alpha;
      F["nu"] = vector_to_json(spec.potential.nu);
    } else {
      F["c"] = vector_to_json(spec.potential.c);
      F["nu"] = vector_to_json(spec.potential.nu);
      F["omega"] = vector_to_json(spec.potential.omega);
    }
    pr["F"] = F;
    pr["h"] = forcing_to_json(spec.h);
  }
  doc["problem"] = pr;

  json o;
  o["tol_residual"] = spec.options.tol_residual;
  o["max_iters"] = spec.options.max_iters;
  o["step_safety"] = spec.options.step_safety;
  o["prox_point_lambda"] = spec.options.prox_point_lambda;
  o["seed"] = static_cast<int64_t>(spec.options.seed);
  o["mu_grid"] = spec.homotopy.mu_grid;
  o["damping"] = spec.homotopy.damping;
  o["anderson_depth"] = spec.homotopy.anderson_depth;
  o["verify_batch"] = spec.verify_batch;
  doc["options"] = o;

  return doc.dump(2) + "\n";
}

PhiMap build_phi(const PhiDescriptor& d) {
  if (d.kind == "relativistic") return PhiMap::relativistic(d.a);
  if (d.kind == "p_relativistic") return PhiMap::p_relativistic(d.p, d.a);
  if (d.kind == "double_phase") return PhiMap::double_phase(d.p, d.q, d.a);
  throw ParseError("phi: unknown kind '" + d.kind + "'");
}

BoundaryLaw build_law(const ProblemSpec& spec) { return make_law(spec.N, spec.law); }

NonlinearField build_field(const ProblemSpec& spec) {
  const auto& f = spec.field;
  const InteriorFunction h(f.h);
  if (f.kind == "coupled_matrix")
    return NonlinearField::coupled_matrix(f.coeff_matrix, h);
  if (f.kind == "dissipative_plus_bounded")
    return NonlinearField::dissipative_plus_bounded(f.kappa, f.p, f.c, h);
  if (f.kind == "delay_difference")
    return NonlinearField::delay_difference(f.eps, f.p, h);
  if (f.kind == "pendulum_power")
    return NonlinearField::pendulum_power(f.b, f.c, f.alpha, f.nu, h);
  throw ParseError("problem.f: unknown nonlinearity kind '" + f.kind + "'");
}

PotentialField build_potential(const ProblemSpec& spec) {
  const auto& F = spec.potential;
  if (F.kind == "power_sin")
    return PotentialField::power_sin(F.b, F.c, F.alpha, F.nu);
  if (F.kind == "periodic_multi")
    return PotentialField::periodic_multi(F.c, F.nu, F.omega);
  throw ParseError("problem.F: unknown potential kind '" + F.kind + "'");
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string curve_csv(const std::vector<ReducedSample>& samples) {
  std::string out = "axis,t,m\n";
  for (const auto& s : samples) {
    out += std::to_string(s.axis) + "," + format_value(s.t) + "," +
           format_value(s.value) + "\n";
  }
  return out;
}

json report_common(const std::string& command, bool converged) {
  json rep;
  rep["command"] = command;
  rep["status"] = converged ? "converged" : "not_converged";
  return rep;
}

void fill_solve_report(json& rep, const SolveReport& r) {
  rep["interior_residual"] = r.interior_residual;
  rep["boundary_residual"] = r.boundary_residual;
  rep["feasibility_margin"] = r.feasibility_margin;
  rep["strip_ok"] = r.strip_ok;
  rep["iterations"] = r.iterations;
  if (r.energy) rep["energy"] = *r.energy;
}

void fill_energy_report(json& rep, const EnergyReport& r) {
  rep["kind"] = r.kind == EnergyReport::Kind::minimizer ? "minimizer"
                                                        : "saddle_candidate";
  rep["energy"] = r.energy;
  rep["interior_residual"] = r.interior_residual;
  rep["boundary_residual"] = r.boundary_residual;
  rep["feasibility_margin"] = r.feasibility_margin;
  rep["strip_ok"] = r.strip_ok;
  rep["iterations"] = r.iterations;
  if (r.descent_witness) {
    rep["descent_witness"] = vector_to_json(*r.descent_witness);
    rep["witness_drop"] = r.witness_drop;
  }
}

}  // namespace

int run(const ProblemSpec& spec, const std::string& command, const RunOptions& ro) {
  namespace fs = std::filesystem;
  fs::create_directories(ro.out_dir);
  const fs::path out_dir(ro.out_dir);

  SolveOptions opts = spec.options;
  if (ro.seed) opts.seed = *ro.seed;
  if (ro.tol) opts.tol_residual = *ro.tol;

  json rep;
  int exit_code = 0;
  try {
    const PhiMap phi = build_phi(spec.phi);
    const BoundaryLaw law = build_law(spec);

    if (command == "solve") {
      SolveReport r;
      if (spec.problem_kind == "q_linear") {
        r = solve_q_general(phi, law, InteriorFunction(spec.h), opts);
      } else if (spec.problem_kind == "nonpotential") {
        r = picard_solve(phi, law, build_field(spec), opts, spec.homotopy);
      } else {
        throw std::invalid_argument(
            "command 'solve' needs a q_linear or nonpotential problem");
      }
      rep = report_common(command, r.converged);
      fill_solve_report(rep, r);
      write_text(out_dir / "solution.csv", to_csv(r.solution));
      exit_code = r.converged ? 0 : 1;
      std::printf("solve: %s interior=%.3e boundary=%.3e iters=%d\n",
                  r.converged ? "converged" : "NOT converged", r.interior_residual,
                  r.boundary_residual, r.iterations);
    } else if (command == "energy-min" || command == "saddle") {
      if (spec.problem_kind != "potential")
        throw std::invalid_argument("command '" + command +
                                    "' needs a potential problem");
      opts.sample_reduced_curve = true;
      const PotentialField F = build_potential(spec);
      const InteriorFunction h(spec.h);
      const EnergyReport r = command == "saddle"
                                 ? saddle_search(phi, law, F, h, opts)
                                 : minimize_energy(phi, law, F, h, opts);
      rep = report_common(command, r.converged);
      fill_energy_report(rep, r);
      write_text(out_dir / "solution.csv", to_csv(r.point));
      write_text(out_dir / "reduced_curve.csv", curve_csv(r.reduced_curve));
      exit_code = r.converged ? 0 : 1;
      std::printf("%s: %s energy=%.12g interior=%.3e boundary=%.3e\n",
                  command.c_str(), r.converged ? "converged" : "NOT converged",
                  r.energy, r.interior_residual, r.boundary_residual);
    } else if (command == "lambda1") {
      const Lambda1Result r =
          lambda1_estimate(phi.radius(), law, spec.T, spec.N, opts);
      rep = report_common(command, true);
      rep["lambda1"] = r.value;
      write_text(out_dir / "solution.csv", to_csv(r.minimizer));
      exit_code = 0;
      std::printf("lambda1 = %.12g\n", r.value);
    } else if (command == "verify") {
      const EstimateSummary s = check_estimates(phi, law, spec.T, spec.verify_batch,
                                                opts.seed, ro.workers);
      rep = report_common(command, s.ok());
      rep["instances"] = s.instances;
      rep["violations"] = s.violations;
      rep["worst_lipschitz_margin"] = s.worst_lipschitz_margin;
      rep["worst_zero_margin"] = s.worst_zero_margin;
      rep["worst_pointwise_margin"] = s.worst_pointwise_margin;
      rep["worst_identity_error"] = s.worst_identity_error;
      rep["worst_strip_margin"] = s.worst_strip_margin;
      exit_code = s.ok() ? 0 : 1;
      std::printf("verify: %d instances, %d violations\n", s.instances,
                  s.violations);
    } else {
      throw std::invalid_argument("unknown command '" + command + "'");
    }
  } catch (const std::exception& e) {
    rep = json();
    rep["command"] = command;
    rep["status"] = "error";
    rep["message"] = e.what();
    exit_code = 2;
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  rep["exit_code"] = exit_code;
  write_text(out_dir / "report.json", rep.dump(2) + "\n");
  return exit_code;
}

}  // namespace philap
