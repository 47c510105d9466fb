#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "cyllevy/characteristics.hpp"
#include "cyllevy/driver.hpp"
#include "cyllevy/integrate.hpp"
#include "cyllevy/modular.hpp"

namespace cyllevy {

// JSON documents. Readers reject unknown fields and throw FormatError.
//
// Characteristics:
//   {"dim_g": d, "a": [d], "q": [d*d row-major],
//    "levy": {"variant": "zero" | "atomic" | "diagonal_stable" | "canonical_stable",
//             "payload": {...}}}
// "a" and "q" default to zero. Payloads: atomic {"atoms": [[d], ...], "rates": [...]},
// diagonal_stable {"alphas": [d], "scales": [d]}, canonical_stable {"alpha": x},
// zero {}.
//
// Drivers add "kind"; a sum is {"kind": "sum", "components": [driver, ...]}.
//
// Step functions: {"points": [...], "dim_h": m, "dim_g": n, "values": [[m*n row-major], ...]}
// with one value per interval plus the value at the left endpoint first.
std::string chars_to_json(const CylCharacteristics& chars);
CylCharacteristics chars_from_json(std::string_view text);

std::string driver_to_json(const Driver& driver);
Driver driver_from_json(std::string_view text);

std::string step_function_to_json(const StepFunction& psi);
StepFunction step_function_from_json(std::string_view text);

// CSV tables.

/// Header "t,dx_0,...,dx_{d-1},jumps"; one row per interval with t the
/// right endpoint.
void write_path_csv(std::ostream& out, const PathTable& path);

/// Header "label,m_prime,m_double_prime,total,std_error,l_gap".
void write_modular_csv_header(std::ostream& out);
void write_modular_csv_row(std::ostream& out, std::string_view label, const ModularValue& m);

// Binary laws: uint64 dim, uint64 count, then count * dim float64 values
// sample by sample, all little-endian.
void write_law(std::ostream& out, const EmpiricalLaw& law);
EmpiricalLaw read_law(std::istream& in);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace cyllevy
