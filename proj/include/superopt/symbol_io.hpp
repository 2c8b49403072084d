#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "superopt/fourier_symbols.hpp"

namespace superopt {

/// One problem found while checking a symbol document.
struct Violation {
  std::string path;     // e.g. "coeffs[2].re"
  std::string message;  // e.g. "duplicate k", "expected 2x2, got 2x1"
};

/// Checks a symbol document without building it:
///   {"partition": {"m1":..,"m2":..,"n1":..,"n2":..},
///    "coeffs": [{"k": -1, "re": [[..]], "im": [[..]]}, ...]}
/// "im" may be omitted (real coefficients). An empty list means the document
/// is well formed.
std::vector<Violation> validate_symbol_json(const nlohmann::json& doc);

/// Parses a symbol; throws Error("parse") listing the first violation.
MatrixSymbol symbol_from_json(const nlohmann::json& doc);
nlohmann::json symbol_to_json(const MatrixSymbol& sym);

/// Reads and parses a file. Throws Error("parse") on I/O or JSON syntax errors.
nlohmann::json read_json_file(const std::string& path);

}  // namespace superopt
