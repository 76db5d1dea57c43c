// tscube/cube_ops.hpp - numeric and relational operations over cube data:
// statistics, interval slicing, sigma filtering, link extraction and CSV
// export. All functions are pure.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscube/model.hpp"
#include "tscube/votable.hpp"

namespace tscube {

// Closed interval over one column. A missing bound leaves that side
// unbounded; an interval with no bounds keeps exactly the non-null rows.
struct AxisInterval {
    ColumnRef column;
    std::optional<double> lower;
    std::optional<double> upper;

    bool operator==(const AxisInterval&) const = default;
};

// A detached slice of table data: the field list plus matching rows.
struct RowSet {
    std::vector<Field> fields;
    std::vector<Row> rows;

    bool operator==(const RowSet&) const = default;
};

RowSet make_rowset(const Table& table);

// Numeric view of one column: nullopt per null cell, doubles otherwise
// (int64 cells widened). Throws Error(Type) for text and bool columns and
// Error(Value) for unparseable numeric cells.
std::vector<std::optional<double>> column_values(const RowSet& rows, const ColumnRef& column);

// mean, sample sigma (n-1 divisor, 0 when n=1), min/max, and quantiles by
// linear interpolation at rank p*(n-1) over the sorted non-null values.
// probs must be strictly increasing within [0, 1]. Throws Error(Value) when
// no non-null value remains.
Stats compute_stats(const std::vector<std::optional<double>>& values,
                    const std::vector<double>& probs);

// Keeps exactly the rows whose cell is non-null and within bounds for every
// interval; row order preserved. Coordinate and value columns are treated
// identically. Throws Error(Type) on a bounded interval over a non-numeric
// column and Error(Value) when lower > upper.
RowSet slice(const RowSet& rows, const std::vector<AxisInterval>& intervals);

// Keeps rows with k_min <= |x - stats.mean| / stats.sigma <= k_max; null
// cells never pass. Requires 0 <= k_min <= k_max and stats.sigma > 0
// (Error(Value) otherwise; a constant column is a degenerate distribution).
RowSet sigma_filter(const RowSet& rows, const ColumnRef& column, const Stats& stats,
                    double k_min, double k_max);

struct LinkScan {
    std::vector<std::pair<std::size_t, std::string>> links;     // (row index, absolute URL)
    std::vector<std::pair<std::size_t, std::string>> warnings;  // (row index, offending text)

    bool operator==(const LinkScan&) const = default;
};

// True for scheme://... with a nonempty remainder free of whitespace.
bool is_absolute_url(std::string_view text);

// Collects non-null cells of a text column that parse as absolute URLs;
// non-URL text lands in warnings. Null cells are skipped silently. Throws
// Error(Type) when the column is not text.
LinkScan extract_links(const RowSet& rows, const ColumnRef& column);

// RFC-4180-style CSV: header of field names, CRLF line ends, quoting only
// where needed, nulls as empty cells, numbers re-rendered with the shortest
// round-trip representation.
std::string export_csv(const RowSet& rows);

// ---------------------------------------------------------------------------
// Document-level convenience shared by the CLI and the python module.

// The table the data commands operate on: the cube's table when a cube is
// annotated, otherwise the document's only table. Throws Error(Lookup) when
// neither exists.
const Table& primary_table(const Document& doc);

// Sigma band over one column; the reference distribution is the column's
// declared Quantity statistics when present, else computed from the rows
// being filtered.
struct SigmaSpec {
    ColumnRef column;
    double k_min = 0.0;
    double k_max = 0.0;

    bool operator==(const SigmaSpec&) const = default;
};

// Copy of the document with the primary table reduced to the rows passing
// slice() and then the sigma band. Annotation groups are kept; declared
// quantity statistics are recomputed from the surviving rows at the declared
// quantile probabilities unless keep_stats (a quantity whose column has no
// non-null value left loses its stat params).
Document slice_document(const Document& doc, const std::vector<AxisInterval>& intervals,
                        const std::optional<SigmaSpec>& sigma, bool keep_stats);

}  // namespace tscube
