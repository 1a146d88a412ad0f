#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "philap/problem.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solver for nonlinear difference systems with a singular "
               "phi-Laplacian under two-point boundary laws"};

  std::string input, command = "solve", out_dir = ".";
  int64_t seed = -1;
  double tol = -1.0;
  int workers = 1;

  app.add_option("--input", input, "Problem file (JSON)")->required();
  app.add_option("--command", command,
                 "One of: solve, energy-min, saddle, lambda1, verify");
  app.add_option("--seed", seed, "Override options.seed");
  app.add_option("--tol", tol, "Override options.tol_residual");
  app.add_option("--out", out_dir, "Output directory for solution/report files");
  app.add_option("--workers", workers, "Concurrent instances for verify");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot open '%s'\n", input.c_str());
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();

  try {
    const philap::ProblemSpec spec = philap::parse_problem(text.str());
    philap::RunOptions ro;
    ro.out_dir = out_dir;
    ro.workers = workers;
    if (seed >= 0) ro.seed = static_cast<uint64_t>(seed);
    if (tol > 0.0) ro.tol = tol;
    return philap::run(spec, command, ro);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
