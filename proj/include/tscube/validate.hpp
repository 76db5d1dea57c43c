// tscube/validate.hpp - the rule engine classifying a document as a
// conforming time series cube serialization.
//
// Rule table (codes are frozen; new rules append):
//   TSC-001 error   dataProductType present and equal to "timeseries"
//   TSC-002 error   both axis collections present, each holding >= 1 axis
//                   with >= 1 column
//   TSC-003 error   every FIELDref/PARAMref/GROUPref resolves to an element
//                   of the matching kind
//   TSC-004 error   independent and dependent axes reference disjoint columns
//   TSC-005 error   quantity groups carry a value member, a distinct error
//                   member and well-formed statistics
//   TSC-006 warning FIELD missing ucd (any datatype) or unit attribute
//                   (numeric only; an empty unit declares dimensionless)
//   TSC-007 warning FIELD declares a null token; only empty cells are null
//   TSC-008 error   every row has exactly one cell per FIELD
//   TSC-009 info    document has no dataset group (omission is legal)
//   TSC-010 warning rows sharing independent coordinates disagree on
//                   dependent values (check_functional_dependence)
//   TSC-011 info    byte-identical duplicated rows (check_functional_dependence)
//   TSC-020 error   a declared statistic deviates from the recomputed value
//                   (check_quantity_statistics)
//   TSC-021 error   declared statistics over a column that is not numeric or
//                   holds no values (check_quantity_statistics)
#pragma once

#include <string>
#include <vector>

#include "tscube/model.hpp"
#include "tscube/votable.hpp"

namespace tscube {

enum class Severity { Error, Warning, Info };

// Lowercase token ("error", "warning", "info").
const char* to_string(Severity severity);

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;      // e.g. "TSC-001"
    std::string location;  // path into the document, e.g. "resource[0]/table[0]/group[1]"
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

// Runs rules TSC-001..TSC-009 over the whole document. Never throws;
// diagnostics are the output. An empty error-severity subset means the
// document is a conforming serialization.
std::vector<Diagnostic> validate_document(const Document& doc);

// Groups rows by the tuple of independent-axis cells: TSC-010 warning when
// dependent values differ within a group, TSC-011 info for exact duplicates.
// Throws Error(Lookup) when a cube column does not resolve in the table.
std::vector<Diagnostic> check_functional_dependence(const TimeSeriesCube& cube,
                                                    const Table& table);

// Recomputes statistics from the value column and emits TSC-020 per constant
// whose relative deviation exceeds rel_tol (absolute tolerance 1e-12 near
// zero); TSC-021 when the column cannot back statistics at all. Returns
// nothing when q has no declared stats.
std::vector<Diagnostic> check_quantity_statistics(const Quantity& q, const Table& table,
                                                  double rel_tol);

// Aggregation the CLI runs: validate_document, plus functional dependence
// when a single cube is extractable, plus statistics checks for every
// extractable quantity with declared stats. Never throws.
std::vector<Diagnostic> validate_full(const Document& doc, double rel_tol);

// Orders by (code, location, message) with numeric-aware location
// comparison, so row[2] sorts before row[10].
void sort_diagnostics(std::vector<Diagnostic>& diagnostics);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

// "ERROR TSC-001 document: message"
std::string format_text(const Diagnostic& diagnostic);

// "error<TAB>TSC-001<TAB>document<TAB>message"
std::string format_record(const Diagnostic& diagnostic);

}  // namespace tscube
