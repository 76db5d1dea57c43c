#include "tscube/cube_ops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

namespace tscube {

namespace {

std::size_t field_index(const RowSet& rows, const ColumnRef& column) {
    for (std::size_t i = 0; i < rows.fields.size(); ++i) {
        if (rows.fields[i].id == column.target) return i;
    }
    throw Error(ErrorKind::Lookup, "column '" + column.target + "' not found in table");
}

bool is_numeric(Datatype dt) { return dt == Datatype::Float64 || dt == Datatype::Int64; }

// Numeric value of one cell, nullopt when null (empty or NaN/Inf token).
std::optional<double> numeric_cell(const Cell& cell, Datatype dt, const std::string& column,
                                   std::size_t row) {
    if (cell.null || cell.raw.empty()) return std::nullopt;
    try {
        if (dt == Datatype::Int64) return static_cast<double>(parse_int_token(cell.raw));
        return parse_double_token(cell.raw);
    } catch (const Error& e) {
        throw Error(ErrorKind::Value,
                    "column '" + column + "' row " + std::to_string(row) + ": " + e.what());
    }
}

}  // namespace

RowSet make_rowset(const Table& table) { return RowSet{table.fields, table.rows}; }

std::vector<std::optional<double>> column_values(const RowSet& rows, const ColumnRef& column) {
    std::size_t index = field_index(rows, column);
    const Field& field = rows.fields[index];
    if (!is_numeric(field.datatype)) {
        throw Error(ErrorKind::Type, "column '" + column.target + "' has datatype " +
                                         to_string(field.datatype) + ", expected a numeric one");
    }
    std::vector<std::optional<double>> values;
    values.reserve(rows.rows.size());
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        const Row& row = rows.rows[r];
        if (index >= row.cells.size()) {
            throw Error(ErrorKind::Structure, "row " + std::to_string(r) +
                                                  " is missing a cell for column '" +
                                                  column.target + "'");
        }
        values.push_back(numeric_cell(row.cells[index], field.datatype, column.target, r));
    }
    return values;
}

Stats compute_stats(const std::vector<std::optional<double>>& values,
                    const std::vector<double>& probs) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
            throw Error(ErrorKind::Value,
                        "quantile probability " + render_double(probs[i]) + " outside [0, 1]");
        }
        if (i > 0 && !(probs[i - 1] < probs[i])) {
            throw Error(ErrorKind::Value, "quantile probabilities must be strictly increasing");
        }
    }

    std::vector<double> sorted;
    sorted.reserve(values.size());
    for (const auto& v : values) {
        if (v) sorted.push_back(*v);
    }
    if (sorted.empty()) {
        throw Error(ErrorKind::Value, "no non-null values to compute statistics over");
    }
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    long double sum = 0.0L;
    for (double v : sorted) sum += v;
    const double mean = static_cast<double>(sum / static_cast<long double>(n));

    double sigma = 0.0;
    if (n > 1) {
        long double ss = 0.0L;
        for (double v : sorted) {
            const long double d = static_cast<long double>(v) - static_cast<long double>(mean);
            ss += d * d;
        }
        sigma = static_cast<double>(
            std::sqrt(ss / static_cast<long double>(n - 1)));
    }

    Stats stats;
    stats.mean = mean;
    stats.sigma = sigma;
    stats.minimum = sorted.front();
    stats.maximum = sorted.back();
    for (double p : probs) {
        const double rank = p * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(rank);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = rank - static_cast<double>(lo);
        stats.quantiles.emplace_back(p, sorted[lo] + frac * (sorted[hi] - sorted[lo]));
    }
    return stats;
}

RowSet slice(const RowSet& rows, const std::vector<AxisInterval>& intervals) {
    struct Bound {
        std::size_t index;
        Datatype datatype;
        std::optional<double> lower;
        std::optional<double> upper;
    };
    std::vector<Bound> bounds;
    bounds.reserve(intervals.size());
    for (const AxisInterval& interval : intervals) {
        std::size_t index = field_index(rows, interval.column);
        const Field& field = rows.fields[index];
        if ((interval.lower || interval.upper) && !is_numeric(field.datatype)) {
            throw Error(ErrorKind::Type, "interval over column '" + interval.column.target +
                                             "' of datatype " + to_string(field.datatype));
        }
        if (interval.lower && interval.upper && *interval.lower > *interval.upper) {
            throw Error(ErrorKind::Value,
                        "interval over column '" + interval.column.target +
                            "' has lower bound above its upper bound");
        }
        bounds.push_back(Bound{index, field.datatype, interval.lower, interval.upper});
    }

    RowSet out;
    out.fields = rows.fields;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        const Row& row = rows.rows[r];
        bool keep = true;
        for (const Bound& bound : bounds) {
            if (bound.index >= row.cells.size()) {
                throw Error(ErrorKind::Structure,
                            "row " + std::to_string(r) + " is missing a cell for column '" +
                                rows.fields[bound.index].id + "'");
            }
            const Cell& cell = row.cells[bound.index];
            if (cell.null || cell.raw.empty()) {
                keep = false;
                break;
            }
            if (!bound.lower && !bound.upper) continue;
            auto value =
                numeric_cell(cell, bound.datatype, rows.fields[bound.index].id, r);
            if (!value || (bound.lower && *value < *bound.lower) ||
                (bound.upper && *value > *bound.upper)) {
                keep = false;
                break;
            }
        }
        if (keep) out.rows.push_back(row);
    }
    return out;
}

RowSet sigma_filter(const RowSet& rows, const ColumnRef& column, const Stats& stats,
                    double k_min, double k_max) {
    if (!(k_min >= 0.0) || !(k_min <= k_max)) {
        throw Error(ErrorKind::Value, "sigma filter requires 0 <= k_min <= k_max");
    }
    if (!(stats.sigma > 0.0)) {
        throw Error(ErrorKind::Value,
                    "degenerate distribution: sigma must be positive to filter by deviation");
    }
    std::vector<std::optional<double>> values = column_values(rows, column);
    RowSet out;
    out.fields = rows.fields;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        if (!values[r]) continue;
        const double k = std::fabs(*values[r] - stats.mean) / stats.sigma;
        if (k >= k_min && k <= k_max) out.rows.push_back(rows.rows[r]);
    }
    return out;
}

bool is_absolute_url(std::string_view text) {
    std::size_t scheme_end = text.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return false;
    if (!std::isalpha(static_cast<unsigned char>(text[0]))) return false;
    for (std::size_t i = 1; i < scheme_end; ++i) {
        char c = text[i];
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
            return false;
        }
    }
    std::string_view rest = text.substr(scheme_end + 3);
    if (rest.empty()) return false;
    for (char c : rest) {
        if (std::isspace(static_cast<unsigned char>(c)) ||
            std::iscntrl(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

LinkScan extract_links(const RowSet& rows, const ColumnRef& column) {
    std::size_t index = field_index(rows, column);
    const Field& field = rows.fields[index];
    if (field.datatype != Datatype::Text) {
        throw Error(ErrorKind::Type, "column '" + column.target + "' has datatype " +
                                         to_string(field.datatype) + ", expected text");
    }
    LinkScan scan;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        const Row& row = rows.rows[r];
        if (index >= row.cells.size()) {
            throw Error(ErrorKind::Structure, "row " + std::to_string(r) +
                                                  " is missing a cell for column '" +
                                                  column.target + "'");
        }
        const Cell& cell = row.cells[index];
        if (cell.null || cell.raw.empty()) continue;
        if (is_absolute_url(cell.raw)) {
            scan.links.emplace_back(r, cell.raw);
        } else {
            scan.warnings.emplace_back(r, cell.raw);
        }
    }
    return scan;
}

namespace {

void append_csv_cell(std::string& out, const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) {
        out += text;
        return;
    }
    out.push_back('"');
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

std::string export_csv(const RowSet& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.fields.size(); ++i) {
        if (i) out.push_back(',');
        append_csv_cell(out, rows.fields[i].name);
    }
    out += "\r\n";
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        const Row& row = rows.rows[r];
        for (std::size_t i = 0; i < rows.fields.size(); ++i) {
            if (i) out.push_back(',');
            if (i >= row.cells.size()) {
                throw Error(ErrorKind::Structure,
                            "row " + std::to_string(r) + " is missing a cell for column '" +
                                rows.fields[i].id + "'");
            }
            const Cell& cell = row.cells[i];
            if (cell.null || cell.raw.empty()) continue;
            switch (rows.fields[i].datatype) {
                case Datatype::Float64: {
                    auto value = numeric_cell(cell, Datatype::Float64, rows.fields[i].id, r);
                    if (value) append_csv_cell(out, render_double(*value));
                    break;
                }
                case Datatype::Int64:
                    try {
                        append_csv_cell(out, render_int(parse_int_token(cell.raw)));
                    } catch (const Error& e) {
                        throw Error(ErrorKind::Value, "column '" + rows.fields[i].id + "' row " +
                                                          std::to_string(r) + ": " + e.what());
                    }
                    break;
                case Datatype::Bool:
                    append_csv_cell(out, parse_bool_token(cell.raw) ? "true" : "false");
                    break;
                case Datatype::Text:
                    append_csv_cell(out, cell.raw);
                    break;
            }
        }
        out += "\r\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Document-level convenience

namespace {

bool is_stat_role(const std::optional<std::string>& dmrole) {
    if (!dmrole) return false;
    return *dmrole == dm::kMean || *dmrole == dm::kSigma || *dmrole == dm::kMin ||
           *dmrole == dm::kMax || parse_quantile_dmrole(*dmrole).has_value();
}

void for_each_quantity_group(Document& doc, const std::function<void(Group&)>& fn) {
    std::function<void(Group&)> walk = [&](Group& group) {
        if (dmtype_matches(group.dmtype, "Quantity")) fn(group);
        for (GroupItem& item : group.members) {
            if (Group* nested = std::get_if<Group>(&item.node)) walk(*nested);
        }
    };
    for (Resource& resource : doc.resources) {
        for (Group& group : resource.groups) walk(group);
        for (Table& table : resource.tables) {
            for (Group& group : table.groups) walk(group);
        }
    }
}

// Recomputes each quantity's declared statistics from the (filtered) table
// at the probabilities its quantile roles declare.
void rewrite_quantity_stats(Document& doc, const Table& table) {
    const RowSet rows = make_rowset(table);
    for_each_quantity_group(doc, [&](Group& group) {
        std::optional<std::string> value_column;
        std::vector<double> probs;
        bool any_stats = false;
        for (const GroupItem& item : group.members) {
            if (const FieldRef* ref = std::get_if<FieldRef>(&item.node)) {
                if (ref->dmrole && *ref->dmrole == dm::kValue) value_column = ref->ref;
            } else if (const Param* param = std::get_if<Param>(&item.node)) {
                if (is_stat_role(param->dmrole)) any_stats = true;
                if (param->dmrole) {
                    if (const auto prob = parse_quantile_dmrole(*param->dmrole)) {
                        probs.push_back(*prob);
                    }
                }
            }
        }
        if (!any_stats || !value_column) return;

        const std::vector<std::optional<double>> values =
            column_values(rows, ColumnRef{*value_column});
        const bool all_null =
            std::none_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
        if (all_null) {
            std::erase_if(group.members, [](const GroupItem& item) {
                const Param* param = std::get_if<Param>(&item.node);
                return param && is_stat_role(param->dmrole);
            });
            return;
        }

        const Stats stats = compute_stats(values, probs);
        std::size_t next_quantile = 0;
        for (GroupItem& item : group.members) {
            Param* param = std::get_if<Param>(&item.node);
            if (!param || !param->dmrole) continue;
            if (*param->dmrole == dm::kMean) {
                param->value = render_double(stats.mean);
            } else if (*param->dmrole == dm::kSigma) {
                param->value = render_double(stats.sigma);
            } else if (*param->dmrole == dm::kMin) {
                param->value = render_double(stats.minimum);
            } else if (*param->dmrole == dm::kMax) {
                param->value = render_double(stats.maximum);
            } else if (parse_quantile_dmrole(*param->dmrole)) {
                param->value = render_double(stats.quantiles[next_quantile++].second);
            }
        }
    });
}

Stats sigma_reference(const Document& doc, const RowSet& rows, const ColumnRef& column) {
    for (const Quantity& q : extract_quantities(doc)) {
        if (q.value == column && q.stats) return *q.stats;
    }
    return compute_stats(column_values(rows, column), {});
}

}  // namespace

const Table& primary_table(const Document& doc) {
    try {
        const TimeSeriesCube cube = extract_cube(doc);
        if (const Table* table = find_cube_table(doc, cube)) return *table;
    } catch (const Error&) {
    }
    const Table* only = nullptr;
    for (const Resource& resource : doc.resources) {
        for (const Table& table : resource.tables) {
            if (only) throw Error(ErrorKind::Lookup, "document has several tables and no cube");
            only = &table;
        }
    }
    if (!only) throw Error(ErrorKind::Lookup, "document has no table");
    return *only;
}

Document slice_document(const Document& doc, const std::vector<AxisInterval>& intervals,
                        const std::optional<SigmaSpec>& sigma, bool keep_stats) {
    Document out = doc;
    const Table* source = &primary_table(doc);
    // Locate the copied table by position.
    Table* table = nullptr;
    for (std::size_t r = 0; r < doc.resources.size() && !table; ++r) {
        for (std::size_t t = 0; t < doc.resources[r].tables.size(); ++t) {
            if (&doc.resources[r].tables[t] == source) {
                table = &out.resources[r].tables[t];
                break;
            }
        }
    }

    RowSet rows = make_rowset(*source);
    if (!intervals.empty()) rows = slice(rows, intervals);
    if (sigma) {
        rows = sigma_filter(rows, sigma->column, sigma_reference(doc, rows, sigma->column),
                            sigma->k_min, sigma->k_max);
    }
    table->rows = std::move(rows.rows);
    if (!keep_stats) rewrite_quantity_stats(out, *table);
    return out;
}

}  // namespace tscube
