#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "philap/energy.hpp"
#include "philap/nonlinear.hpp"
#include "philap/verify.hpp"

namespace philap {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PhiDescriptor {
  std::string kind = "relativistic";
  double a = 1.0;
  double p = 2.0;
  double q = 3.0;
};

struct FieldDescriptor {
  std::string kind;      // coupled_matrix, dissipative_plus_bounded,
                         // delay_difference, pendulum_power
  MatrixXd coeff_matrix; // coupled_matrix: T x T
  VectorXd kappa, c, b, nu;
  double p = 2.0;
  double eps = 1.0;
  double alpha = 1.0;
  MatrixXd h;            // N x T forcing inside f
};

struct PotentialDescriptor {
  std::string kind;  // power_sin, periodic_multi
  VectorXd b, c, nu, omega;
  double alpha = 1.0;
};

/// In-memory form of a problem file. Problem files are strict JSON: unknown
/// fields are errors, every array is checked against T and N.
struct ProblemSpec {
  int schema_version = 1;
  int T = 0;
  int N = 0;
  PhiDescriptor phi;
  LawDescriptor law;
  std::string problem_kind;  // q_linear, nonpotential, potential
  MatrixXd h;                // q_linear / potential forcing (N x T)
  FieldDescriptor field;
  PotentialDescriptor potential;
  SolveOptions options;
  HomotopyOptions homotopy;
  int verify_batch = 100;
};

ProblemSpec parse_problem(const std::string& text);
std::string emit_problem(const ProblemSpec& spec);

PhiMap build_phi(const PhiDescriptor& d);
BoundaryLaw build_law(const ProblemSpec& spec);
NonlinearField build_field(const ProblemSpec& spec);
PotentialField build_potential(const ProblemSpec& spec);

struct RunOptions {
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
  std::optional<double> tol;
  int workers = 1;
};

/// Dispatches a command (solve, energy-min, saddle, lambda1, verify),
/// writes solution.csv / report.json (and reduced_curve.csv for the energy
/// commands) under out_dir, prints a one-line summary, and returns the
/// process exit status: 0 iff the result converged and certified.
int run(const ProblemSpec& spec, const std::string& command, const RunOptions& ro);

}  // namespace philap
