#include "tscube/validate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include "tscube/cube_ops.hpp"

namespace tscube {

const char* to_string(Severity severity) {
    switch (severity) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Info: return "info";
    }
    return "error";
}

namespace {

constexpr const char* kRuleProductType = "TSC-001";
constexpr const char* kRuleAxisCollections = "TSC-002";
constexpr const char* kRuleRefResolution = "TSC-003";
constexpr const char* kRuleDisjointAxes = "TSC-004";
constexpr const char* kRuleQuantityShape = "TSC-005";
constexpr const char* kRuleFieldAnnotations = "TSC-006";
constexpr const char* kRuleNullToken = "TSC-007";
constexpr const char* kRuleRowArity = "TSC-008";
constexpr const char* kRuleNoDataset = "TSC-009";
constexpr const char* kRuleDependenceBroken = "TSC-010";
constexpr const char* kRuleDuplicateRows = "TSC-011";
constexpr const char* kRuleStatsDeviation = "TSC-020";
constexpr const char* kRuleStatsColumn = "TSC-021";

void add(std::vector<Diagnostic>& out, Severity severity, const char* code,
         std::string location, std::string message) {
    out.push_back(Diagnostic{severity, code, std::move(location), std::move(message)});
}

// Numeric-aware comparison: digit runs compare as numbers, so "row[2]" sorts
// before "row[10]".
bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ia = i, jb = j;
            while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia]))) ++ia;
            while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb]))) ++jb;
            std::string_view na = a.substr(i, ia - i);
            std::string_view nb = b.substr(j, jb - j);
            std::string_view ta = na.substr(std::min(na.find_first_not_of('0'), na.size() - 1));
            std::string_view tb = nb.substr(std::min(nb.find_first_not_of('0'), nb.size() - 1));
            if (ta.size() != tb.size()) return ta.size() < tb.size();
            if (ta != tb) return ta < tb;
            i = ia;
            j = jb;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

bool dmrole_is(const std::optional<std::string>& dmrole, std::string_view role) {
    return dmrole && *dmrole == role;
}

// The members of a group that are themselves groups, with their nested path.
std::vector<std::pair<const Group*, std::string>> subgroups(const Group& group,
                                                            const std::string& path) {
    std::vector<std::pair<const Group*, std::string>> out;
    std::size_t nested = 0;
    for (const GroupItem& item : group.members) {
        if (const Group* g = std::get_if<Group>(&item.node)) {
            out.emplace_back(g, path + "/group[" + std::to_string(nested) + "]");
            ++nested;
        }
    }
    return out;
}

// Tolerant dataProductType lookup: inline PARAM first, then PARAMref whose
// target is a PARAM. Unresolvable refs are left to TSC-003.
const Param* product_type_param(const Group& cube_group, const Document& doc) {
    for (const GroupItem& item : cube_group.members) {
        if (const Param* p = std::get_if<Param>(&item.node)) {
            if (dmrole_is(p->dmrole, dm::kDataProductType)) return p;
        } else if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) {
            if (!dmrole_is(pr->dmrole, dm::kDataProductType)) continue;
            RefTarget target = resolve_ref(doc, pr->ref);
            if (const Param* const* p = std::get_if<const Param*>(&target)) return *p;
        }
    }
    return nullptr;
}

void collect_axis_columns(const Group& collection, std::set<std::string>& columns) {
    for (const GroupItem& item : collection.members) {
        if (const Group* axis = std::get_if<Group>(&item.node)) {
            for (const GroupItem& member : axis->members) {
                if (const FieldRef* fr = std::get_if<FieldRef>(&member.node)) {
                    columns.insert(fr->ref);
                }
            }
        }
    }
}

void check_cube_group(const Group& cube, const std::string& path, const Document& doc,
                      std::vector<Diagnostic>& out) {
    if (const Param* dpt = product_type_param(cube, doc)) {
        if (dpt->value != dm::kTimeSeries) {
            add(out, Severity::Error, kRuleProductType, path,
                "dataProductType is '" + dpt->value + "', expected 'timeseries'");
        }
    } else {
        add(out, Severity::Error, kRuleProductType, path,
            "cube group has no dataProductType member");
    }

    const Group* collections[2] = {nullptr, nullptr};
    const char* roles[2] = {dm::kIndependentAxes, dm::kDependentAxes};
    for (int side = 0; side < 2; ++side) {
        std::size_t count = 0;
        std::string collection_path;
        for (const auto& [group, subpath] : subgroups(cube, path)) {
            if (!dmrole_is(group->dmrole, roles[side])) continue;
            ++count;
            collections[side] = group;
            collection_path = subpath;
        }
        if (count == 0) {
            add(out, Severity::Error, kRuleAxisCollections, path,
                std::string("cube group lacks the ") + roles[side] + " collection");
            continue;
        }
        if (count > 1) {
            add(out, Severity::Error, kRuleAxisCollections, path,
                "cube group has " + std::to_string(count) + " " + roles[side] +
                    " collections");
        }
        const Group& collection = *collections[side];
        auto axes = subgroups(collection, collection_path);
        if (axes.empty()) {
            add(out, Severity::Error, kRuleAxisCollections, collection_path,
                std::string("the ") + roles[side] + " collection holds no axes");
            continue;
        }
        for (const auto& [axis, axis_path] : axes) {
            bool any_column = std::any_of(
                axis->members.begin(), axis->members.end(),
                [](const GroupItem& item) { return std::holds_alternative<FieldRef>(item.node); });
            if (!any_column) {
                add(out, Severity::Error, kRuleAxisCollections, axis_path,
                    "axis group references no columns");
            }
        }
    }

    if (collections[0] && collections[1]) {
        std::set<std::string> independent, dependent;
        collect_axis_columns(*collections[0], independent);
        collect_axis_columns(*collections[1], dependent);
        for (const std::string& column : dependent) {
            if (independent.count(column)) {
                add(out, Severity::Error, kRuleDisjointAxes, path,
                    "column '" + column + "' appears in both independent and dependent axes");
            }
        }
    }
}

void check_group_refs(const Group& group, const std::string& path, const Document& doc,
                      std::vector<Diagnostic>& out) {
    auto check = [&](const char* element, const std::string& ref, auto kind_holds,
                     const char* kind_name) {
        RefTarget target = resolve_ref(doc, ref);
        if (std::holds_alternative<std::monostate>(target)) {
            add(out, Severity::Error, kRuleRefResolution, path,
                std::string(element) + " '" + ref + "' resolves to no element");
        } else if (!kind_holds(target)) {
            add(out, Severity::Error, kRuleRefResolution, path,
                std::string(element) + " '" + ref + "' does not name a " + kind_name);
        }
    };
    for (const GroupItem& item : group.members) {
        if (const FieldRef* fr = std::get_if<FieldRef>(&item.node)) {
            check("FIELDref", fr->ref,
                  [](const RefTarget& t) { return std::holds_alternative<const Field*>(t); },
                  "FIELD");
        } else if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) {
            check("PARAMref", pr->ref,
                  [](const RefTarget& t) { return std::holds_alternative<const Param*>(t); },
                  "PARAM");
        } else if (const GroupRef* gr = std::get_if<GroupRef>(&item.node)) {
            check("GROUPref", gr->ref,
                  [](const RefTarget& t) { return std::holds_alternative<const Group*>(t); },
                  "GROUP");
        }
    }
}

void check_quantity_group(const Group& group, const std::string& path, const Document& doc,
                          std::vector<Diagnostic>& out) {
    std::vector<std::string> values, errors;
    bool have[4] = {false, false, false, false};
    const char* stat_roles[4] = {dm::kMean, dm::kSigma, dm::kMin, dm::kMax};
    double stat_values[4] = {0, 0, 0, 0};
    std::vector<std::pair<double, double>> quantiles;
    bool stats_parse_ok = true;

    auto take_stat = [&](const Param& param, const std::string& role) {
        std::optional<double> value;
        try {
            value = parse_double_token(param.value);
        } catch (const Error&) {
            value = std::nullopt;
        }
        int slot = -1;
        for (int i = 0; i < 4; ++i) {
            if (role == stat_roles[i]) slot = i;
        }
        std::optional<double> prob;
        if (slot < 0) {
            try {
                prob = parse_quantile_dmrole(role);
            } catch (const Error& e) {
                add(out, Severity::Error, kRuleQuantityShape, path, e.what());
                stats_parse_ok = false;
                return;
            }
            if (!prob) return;  // not a statistics role
        }
        if (!value) {
            add(out, Severity::Error, kRuleQuantityShape, path,
                "quantity statistic '" + role + "' value '" + param.value +
                    "' is not a finite number");
            stats_parse_ok = false;
            return;
        }
        if (slot >= 0) {
            have[slot] = true;
            stat_values[slot] = *value;
        } else {
            quantiles.emplace_back(*prob, *value);
        }
    };

    for (const GroupItem& item : group.members) {
        if (const FieldRef* fr = std::get_if<FieldRef>(&item.node)) {
            if (dmrole_is(fr->dmrole, dm::kValue)) values.push_back(fr->ref);
            if (dmrole_is(fr->dmrole, dm::kError)) errors.push_back(fr->ref);
        } else if (const Param* p = std::get_if<Param>(&item.node)) {
            if (p->dmrole) take_stat(*p, *p->dmrole);
        } else if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) {
            if (!pr->dmrole) continue;
            RefTarget target = resolve_ref(doc, pr->ref);
            if (const Param* const* p = std::get_if<const Param*>(&target)) {
                take_stat(**p, *pr->dmrole);
            }
        }
    }

    if (values.empty()) {
        add(out, Severity::Error, kRuleQuantityShape, path, "quantity group has no value member");
    } else if (values.size() > 1) {
        add(out, Severity::Error, kRuleQuantityShape, path,
            "quantity group has " + std::to_string(values.size()) + " value members");
    }
    for (const std::string& error : errors) {
        if (!values.empty() && error == values.front()) {
            add(out, Severity::Error, kRuleQuantityShape, path,
                "quantity value and error reference the same column '" + error + "'");
        }
    }

    const bool any_stat = have[0] || have[1] || have[2] || have[3] || !quantiles.empty();
    if (!any_stat) return;
    for (int i = 0; i < 4; ++i) {
        if (!have[i]) {
            add(out, Severity::Error, kRuleQuantityShape, path,
                std::string("incomplete quantity statistics: missing '") + stat_roles[i] + "'");
            stats_parse_ok = false;
        }
    }
    if (!stats_parse_ok) return;
    if (stat_values[1] < 0) {
        add(out, Severity::Error, kRuleQuantityShape, path, "quantity sigma is negative");
    }
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
        if (i > 0 && !(quantiles[i - 1].first < quantiles[i].first)) {
            add(out, Severity::Error, kRuleQuantityShape, path,
                "quantile probabilities are not strictly increasing");
            break;
        }
    }
    for (const auto& [p, v] : quantiles) {
        if (v < stat_values[2] || v > stat_values[3]) {
            add(out, Severity::Error, kRuleQuantityShape, path,
                "quantile value " + render_double(v) + " outside [min, max]");
        }
    }
}

bool extra_is_values_with_null(const XmlExtra& extra, std::string* token) {
    std::string_view name = extra.name;
    if (auto pos = name.rfind(':'); pos != std::string_view::npos) name.remove_prefix(pos + 1);
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered != "values") return false;
    for (const auto& [attr, value] : extra.attributes) {
        if (attr == "null") {
            *token = value;
            return true;
        }
    }
    return false;
}

void check_fields(const Document& doc, std::vector<Diagnostic>& out) {
    for_each_table(doc, [&](const Table& table, const std::string& path) {
        for (std::size_t i = 0; i < table.fields.size(); ++i) {
            const Field& field = table.fields[i];
            const std::string location = path + "/field[" + std::to_string(i) + "]";
            if (!field.ucd || field.ucd->empty()) {
                add(out, Severity::Warning, kRuleFieldAnnotations, location,
                    "FIELD '" + field.id + "' has no ucd");
            }
            const bool numeric =
                field.datatype == Datatype::Float64 || field.datatype == Datatype::Int64;
            if (numeric && !field.unit) {
                add(out, Severity::Warning, kRuleFieldAnnotations, location,
                    "FIELD '" + field.id + "' has no unit");
            }
            for (const XmlExtra& extra : field.extras.children) {
                std::string token;
                if (extra_is_values_with_null(extra, &token)) {
                    add(out, Severity::Warning, kRuleNullToken, location,
                        "FIELD '" + field.id + "' declares null token '" + token +
                            "'; only empty cells are treated as null");
                }
            }
        }
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r].cells.size() != table.fields.size()) {
                add(out, Severity::Error, kRuleRowArity, path + "/row[" + std::to_string(r) + "]",
                    "row has " + std::to_string(table.rows[r].cells.size()) +
                        " cells, table has " + std::to_string(table.fields.size()) + " fields");
            }
        }
    });
}

}  // namespace

std::vector<Diagnostic> validate_document(const Document& doc) {
    std::vector<Diagnostic> out;

    std::vector<std::pair<const Group*, std::string>> cubes, datasets;
    for_each_group(doc, [&](const Group& group, const std::string& path) {
        check_group_refs(group, path, doc, out);
        if (dmtype_matches(group.dmtype, "Cube")) cubes.emplace_back(&group, path);
        if (dmtype_matches(group.dmtype, "Dataset")) datasets.emplace_back(&group, path);
        if (dmtype_matches(group.dmtype, "Quantity")) {
            check_quantity_group(group, path, doc, out);
        }
    });

    if (cubes.empty()) {
        add(out, Severity::Error, kRuleProductType, "document",
            "no cube group found; dataProductType is absent");
    }
    for (const auto& [cube, path] : cubes) check_cube_group(*cube, path, doc, out);

    if (datasets.empty()) {
        add(out, Severity::Info, kRuleNoDataset, "document", "document has no dataset group");
    }

    check_fields(doc, out);
    sort_diagnostics(out);
    return out;
}

std::vector<Diagnostic> check_functional_dependence(const TimeSeriesCube& cube,
                                                    const Table& table) {
    auto column_index = [&](const ColumnRef& column) {
        for (std::size_t i = 0; i < table.fields.size(); ++i) {
            if (table.fields[i].id == column.target) return i;
        }
        throw Error(ErrorKind::Lookup, "column '" + column.target + "' not found in table");
    };
    std::vector<std::size_t> independent, dependent;
    for (const CubeAxis& axis : cube.independent_axes) {
        for (const ColumnRef& column : axis.columns) independent.push_back(column_index(column));
    }
    for (const CubeAxis& axis : cube.dependent_axes) {
        for (const ColumnRef& column : axis.columns) dependent.push_back(column_index(column));
    }

    auto tuple_of = [&](const Row& row, const std::vector<std::size_t>& indices) {
        std::string key;
        for (std::size_t index : indices) {
            key += row.cells[index].raw;
            key.push_back('\x1f');
        }
        return key;
    };

    struct Bucket {
        std::vector<std::size_t> rows;
        std::string dependent_tuple;
        bool dependent_equal = true;
    };
    std::unordered_map<std::string, Bucket> buckets;
    std::vector<const std::string*> order;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Row& row = table.rows[r];
        const std::size_t needed = std::max(
            independent.empty() ? 0 : *std::max_element(independent.begin(), independent.end()),
            dependent.empty() ? 0 : *std::max_element(dependent.begin(), dependent.end()));
        if (row.cells.size() <= needed) continue;  // ragged row, reported by TSC-008
        std::string key = tuple_of(row, independent);
        auto [it, fresh] = buckets.try_emplace(key);
        if (fresh) order.push_back(&it->first);
        Bucket& bucket = it->second;
        std::string dep = tuple_of(row, dependent);
        if (bucket.rows.empty()) {
            bucket.dependent_tuple = std::move(dep);
        } else if (dep != bucket.dependent_tuple) {
            bucket.dependent_equal = false;
        }
        bucket.rows.push_back(r);
    }

    std::vector<Diagnostic> out;
    for (const std::string* key : order) {
        const Bucket& bucket = buckets.at(*key);
        if (bucket.rows.size() < 2) continue;
        std::string rows_text;
        for (std::size_t i = 0; i < bucket.rows.size(); ++i) {
            if (i) rows_text += ", ";
            rows_text += std::to_string(bucket.rows[i]);
        }
        std::string coords(*key);
        std::replace(coords.begin(), coords.end(), '\x1f', ' ');
        while (!coords.empty() && coords.back() == ' ') coords.pop_back();
        const std::string location = "row[" + std::to_string(bucket.rows[1]) + "]";
        if (bucket.dependent_equal) {
            add(out, Severity::Info, kRuleDuplicateRows, location,
                "rows " + rows_text + " duplicate independent coordinates (" + coords +
                    ") with identical dependent values");
        } else {
            add(out, Severity::Warning, kRuleDependenceBroken, location,
                "rows " + rows_text + " share independent coordinates (" + coords +
                    ") but dependent values differ");
        }
    }
    sort_diagnostics(out);
    return out;
}

std::vector<Diagnostic> check_quantity_statistics(const Quantity& q, const Table& table,
                                                  double rel_tol) {
    std::vector<Diagnostic> out;
    if (!q.stats) return out;
    const std::string location = "field[" + q.value.target + "]";

    const Field* field = nullptr;
    for (const Field& f : table.fields) {
        if (f.id == q.value.target) field = &f;
    }
    if (!field) {
        throw Error(ErrorKind::Lookup, "column '" + q.value.target + "' not found in table");
    }
    if (field->datatype != Datatype::Float64 && field->datatype != Datatype::Int64) {
        add(out, Severity::Error, kRuleStatsColumn, location,
            "column '" + q.value.target + "' has datatype " + to_string(field->datatype) +
                "; declared statistics cannot be verified");
        return out;
    }

    std::vector<std::optional<double>> values;
    try {
        values = column_values(make_rowset(table), q.value);
    } catch (const Error& e) {
        add(out, Severity::Error, kRuleStatsColumn, location, e.what());
        return out;
    }
    if (std::none_of(values.begin(), values.end(),
                     [](const std::optional<double>& v) { return v.has_value(); })) {
        add(out, Severity::Error, kRuleStatsColumn, location,
            "column '" + q.value.target + "' holds no values to verify statistics against");
        return out;
    }

    std::vector<double> probs;
    probs.reserve(q.stats->quantiles.size());
    for (const auto& [p, v] : q.stats->quantiles) probs.push_back(p);
    const Stats computed = compute_stats(values, probs);

    auto deviates = [rel_tol](double declared, double recomputed) {
        const double diff = std::fabs(declared - recomputed);
        if (diff <= 1e-12) return false;
        const double scale = std::max(std::fabs(declared), std::fabs(recomputed));
        return diff > rel_tol * scale;
    };
    auto compare = [&](const std::string& role, double declared, double recomputed) {
        if (deviates(declared, recomputed)) {
            add(out, Severity::Error, kRuleStatsDeviation, location,
                "declared " + role + " " + render_double(declared) +
                    " deviates from recomputed " + render_double(recomputed));
        }
    };
    compare(dm::kMean, q.stats->mean, computed.mean);
    compare(dm::kSigma, q.stats->sigma, computed.sigma);
    compare(dm::kMin, q.stats->minimum, computed.minimum);
    compare(dm::kMax, q.stats->maximum, computed.maximum);
    for (std::size_t i = 0; i < q.stats->quantiles.size(); ++i) {
        compare(quantile_dmrole(q.stats->quantiles[i].first), q.stats->quantiles[i].second,
                computed.quantiles[i].second);
    }
    sort_diagnostics(out);
    return out;
}

std::vector<Diagnostic> validate_full(const Document& doc, double rel_tol) {
    std::vector<Diagnostic> out = validate_document(doc);

    try {
        const TimeSeriesCube cube = extract_cube(doc);
        if (const Table* table = find_cube_table(doc, cube)) {
            auto more = check_functional_dependence(cube, *table);
            out.insert(out.end(), more.begin(), more.end());
        }
    } catch (const Error&) {
        // Structural problems already diagnosed by validate_document.
    }

    try {
        for (const Quantity& quantity : extract_quantities(doc)) {
            if (!quantity.stats) continue;
            const Table* table = locate_field(doc, quantity.value.target).first;
            if (!table) continue;
            auto more = check_quantity_statistics(quantity, *table, rel_tol);
            out.insert(out.end(), more.begin(), more.end());
        }
    } catch (const Error&) {
    }

    sort_diagnostics(out);
    return out;
}

void sort_diagnostics(std::vector<Diagnostic>& diagnostics) {
    std::stable_sort(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         if (a.code != b.code) return a.code < b.code;
                         if (a.location != b.location) return natural_less(a.location, b.location);
                         return a.message < b.message;
                     });
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format_text(const Diagnostic& diagnostic) {
    std::string severity = to_string(diagnostic.severity);
    std::transform(severity.begin(), severity.end(), severity.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return severity + " " + diagnostic.code + " " + diagnostic.location + ": " +
           diagnostic.message;
}

std::string format_record(const Diagnostic& diagnostic) {
    return std::string(to_string(diagnostic.severity)) + "\t" + diagnostic.code + "\t" +
           diagnostic.location + "\t" + diagnostic.message;
}

}  // namespace tscube
