#include "tscube/discovery.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <vector>

namespace tscube {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool has_prefix(const std::optional<std::string>& text, std::string_view prefix) {
    return text && text->size() >= prefix.size() &&
           std::string_view(*text).substr(0, prefix.size()) == prefix;
}

bool in_set(const std::string& id, std::initializer_list<std::string_view> ids) {
    const std::string key = lower(id);
    for (std::string_view candidate : ids) {
        if (key == candidate) return true;
    }
    return false;
}

std::optional<AxisClass> classify_column(const Field& field) {
    if (has_prefix(field.ucd, "time.")) return AxisClass::Time;
    if (has_prefix(field.ucd, "em.")) return AxisClass::Spectral;
    if (has_prefix(field.ucd, "pos.")) return AxisClass::Spatial;
    if (in_set(field.id, {"hjd", "mjd", "time", "t", "frequency", "freq"})) {
        return AxisClass::Time;
    }
    if (in_set(field.id, {"filter", "band", "wavelength", "lambda"})) {
        return AxisClass::Spectral;
    }
    if (in_set(field.id, {"ra", "dec", "lon", "lat"})) return AxisClass::Spatial;
    return std::nullopt;
}

const Field* field_by_id(const Table& table, const std::string& id) {
    for (const Field& field : table.fields) {
        if (field.id == id) return &field;
    }
    return nullptr;
}

// Canonical comparison text: numeric cells re-rendered so distinctness means
// value distinctness, text compared verbatim. Nullopt for null cells.
std::optional<std::string> canonical_text(const Cell& cell, Datatype datatype) {
    if (cell.null || cell.raw.empty()) return std::nullopt;
    switch (datatype) {
        case Datatype::Float64: {
            const std::optional<double> value = parse_double_token(cell.raw);
            if (!value) return std::nullopt;
            return render_double(*value);
        }
        case Datatype::Int64: {
            const std::optional<std::int64_t> value = parse_int_token(cell.raw);
            return value ? render_int(*value) : std::optional<std::string>(cell.raw);
        }
        case Datatype::Bool: {
            const std::optional<bool> value = parse_bool_token(cell.raw);
            if (!value) return std::optional<std::string>(cell.raw);
            return std::string(*value ? "true" : "false");
        }
        case Datatype::Text:
            return cell.raw;
    }
    return cell.raw;
}

std::size_t distinct_tuples(const CubeAxis& axis, const Table& table) {
    std::vector<std::size_t> indices;
    std::vector<Datatype> datatypes;
    for (const ColumnRef& column : axis.columns) {
        for (std::size_t i = 0; i < table.fields.size(); ++i) {
            if (table.fields[i].id == column.target) {
                indices.push_back(i);
                datatypes.push_back(table.fields[i].datatype);
                break;
            }
        }
    }
    if (indices.empty()) return 0;

    std::set<std::string> seen;
    for (const Row& row : table.rows) {
        std::string key;
        bool complete = true;
        for (std::size_t c = 0; c < indices.size() && complete; ++c) {
            if (indices[c] >= row.cells.size()) {
                complete = false;
                break;
            }
            const std::optional<std::string> text =
                canonical_text(row.cells[indices[c]], datatypes[c]);
            if (!text) {
                complete = false;
                break;
            }
            if (c) key += '\x1f';
            key += *text;
        }
        if (complete) seen.insert(std::move(key));
    }
    return seen.size();
}

std::optional<std::string> map_value(const std::map<std::string, std::string>& values,
                                     const std::string& key) {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

}  // namespace

AxisClass classify_axis(const CubeAxis& axis, const Table& table) {
    for (const ColumnRef& column : axis.columns) {
        const Field* field = field_by_id(table, column.target);
        if (!field) continue;
        if (const std::optional<AxisClass> cls = classify_column(*field)) return *cls;
    }
    return AxisClass::Other;
}

ObsCoreRecord derive_obscore(const Document& doc) {
    const TimeSeriesCube cube = extract_cube(doc);
    const Table* table = find_cube_table(doc, cube);
    if (!table) {
        throw Error(ErrorKind::Lookup, "cube axes reference no table column");
    }

    ObsCoreRecord rec;
    rec.dataproduct_type = cube.data_product_type;

    bool have_time = false, have_spectral = false, have_spatial = false;
    for (const CubeAxis& axis : cube.independent_axes) {
        switch (classify_axis(axis, *table)) {
            case AxisClass::Time:
                if (!have_time) {
                    rec.t_xel = distinct_tuples(axis, *table);
                    have_time = true;
                }
                break;
            case AxisClass::Spectral:
                if (!have_spectral) {
                    rec.em_xel = distinct_tuples(axis, *table);
                    have_spectral = true;
                }
                break;
            case AxisClass::Spatial:
                if (!have_spatial) {
                    rec.s_xel = distinct_tuples(axis, *table);
                    have_spatial = true;
                }
                break;
            case AxisClass::Other:
                break;
        }
    }

    if (const std::optional<DatasetMetadata> dataset = extract_dataset(doc)) {
        rec.obs_id = map_value(dataset->data_id, dm::kObservationId);
        rec.obs_publisher_did = map_value(dataset->curation, dm::kPublisherDid);
        rec.target_name = map_value(dataset->target, dm::kTargetName);
    }
    return rec;
}

std::string obscore_to_row(const ObsCoreRecord& rec) {
    std::string line = rec.dataproduct_type;
    line += '\t';
    line += rec.obs_id.value_or("");
    line += '\t';
    line += rec.obs_publisher_did.value_or("");
    line += '\t';
    line += rec.target_name.value_or("");
    line += '\t';
    line += std::to_string(rec.t_xel);
    line += '\t';
    line += std::to_string(rec.s_xel);
    line += '\t';
    line += std::to_string(rec.em_xel);
    return line;
}

}  // namespace tscube
