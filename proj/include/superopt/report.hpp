#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "superopt/superoptimal_solver.hpp"
#include "superopt/symbol_io.hpp"

namespace superopt {

struct CheckSelection {
  bool constancy = true;
  bool index_sums = true;
  bool inequalities = true;

  /// "all", "none", or a comma-separated subset of
  /// constancy,index_sums,inequalities. Throws Error("parse").
  static CheckSelection parse(const std::string& spec);
};

struct RunConfig {
  SolverConfig solver;
  CheckSelection checks;
  std::string input_path;
  std::string out_report;  // empty: no report file
  std::string out_csv;     // empty: no CSV file
};

/// Exit codes of run().
enum ExitCode : int {
  exit_ok = 0,
  exit_parse = 1,
  exit_hypothesis = 2,
  exit_convergence = 3,
};

/// Maps an error code to the exit-code contract.
int exit_code_for(const std::string& error_code);

struct RunOutcome {
  int exit_code = exit_ok;
  nlohmann::json report;
  std::string csv;
};

/// Solves and diagnoses one symbol; never throws for numerical failures,
/// which land in report["error"] and the exit code.
RunOutcome solve_and_report(const MatrixSymbol& sym, const RunConfig& config);

/// Reads config.input_path, solves, writes the requested outputs.
int run(const RunConfig& config, std::ostream& log);

/// Parse-only check of a symbol file.
std::vector<Violation> validate(const std::string& input_path);

/// Report with the timings removed, as used for determinism comparisons.
nlohmann::json canonical_report(const nlohmann::json& report);

/// JSON text with every floating-point number printed to 17 significant digits.
std::string dump_report(const nlohmann::json& report);

/// theta, s_0, ..., one row per grid node of the error Phi - Q.
std::string singular_value_csv(const SuperoptimalResult& result);

}  // namespace superopt
