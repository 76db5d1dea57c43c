#include "tscube/votable.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace tscube {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Structure: return "structure";
        case ErrorKind::Lookup: return "lookup";
        case ErrorKind::Type: return "type";
        case ErrorKind::Value: return "value";
        case ErrorKind::Io: return "io";
        case ErrorKind::Usage: return "usage";
    }
    return "error";
}

const char* to_string(Datatype dt) {
    switch (dt) {
        case Datatype::Float64: return "float64";
        case Datatype::Int64: return "int64";
        case Datatype::Text: return "text";
        case Datatype::Bool: return "bool";
    }
    return "text";
}

std::optional<Datatype> datatype_from_token(std::string_view token) {
    if (token == "float64" || token == "double" || token == "float") return Datatype::Float64;
    if (token == "int64" || token == "long" || token == "int" || token == "short") return Datatype::Int64;
    if (token == "text" || token == "char" || token == "unicodeChar") return Datatype::Text;
    if (token == "bool" || token == "boolean") return Datatype::Bool;
    return std::nullopt;
}

Cell make_cell(std::string raw) {
    Cell cell;
    cell.null = raw.empty();
    cell.raw = std::move(raw);
    return cell;
}

bool Group::operator==(const Group& other) const {
    return id == other.id && name == other.name && dmtype == other.dmtype &&
           dmrole == other.dmrole && description == other.description &&
           members == other.members && extras == other.extras;
}

// ---------------------------------------------------------------------------
// Value text conversions

std::string render_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string render_int(std::int64_t v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

bool is_non_finite_token(std::string_view s) {
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
    return iequals(s, "nan") || iequals(s, "inf") || iequals(s, "infinity");
}

}  // namespace

std::optional<double> parse_double_token(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) throw Error(ErrorKind::Value, "empty text is not a number");
    if (is_non_finite_token(s)) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::Value, "'" + std::string(text) + "' is not a number");
    }
    return out;
}

std::int64_t parse_int_token(std::string_view text) {
    std::string_view s = trim(text);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::Value, "'" + std::string(text) + "' is not an integer");
    }
    return out;
}

bool parse_bool_token(std::string_view text) {
    std::string_view s = trim(text);
    if (iequals(s, "true") || s == "t" || s == "T" || s == "1") return true;
    if (iequals(s, "false") || s == "f" || s == "F" || s == "0") return false;
    throw Error(ErrorKind::Value, "'" + std::string(text) + "' is not a boolean");
}

// ---------------------------------------------------------------------------
// Traversal

namespace {

void walk_group(const Group& group, const std::string& path,
                const std::function<void(const Group&, const std::string&)>& fn) {
    fn(group, path);
    std::size_t nested = 0;
    for (const GroupItem& item : group.members) {
        if (const Group* g = std::get_if<Group>(&item.node)) {
            walk_group(*g, path + "/group[" + std::to_string(nested) + "]", fn);
            ++nested;
        }
    }
}

}  // namespace

void for_each_table(const Document& doc,
                    const std::function<void(const Table&, const std::string&)>& fn) {
    for (std::size_t r = 0; r < doc.resources.size(); ++r) {
        const Resource& resource = doc.resources[r];
        for (std::size_t t = 0; t < resource.tables.size(); ++t) {
            fn(resource.tables[t],
               "resource[" + std::to_string(r) + "]/table[" + std::to_string(t) + "]");
        }
    }
}

void for_each_group(const Document& doc,
                    const std::function<void(const Group&, const std::string&)>& fn) {
    for (std::size_t r = 0; r < doc.resources.size(); ++r) {
        const Resource& resource = doc.resources[r];
        std::string rpath = "resource[" + std::to_string(r) + "]";
        for (std::size_t g = 0; g < resource.groups.size(); ++g) {
            walk_group(resource.groups[g], rpath + "/group[" + std::to_string(g) + "]", fn);
        }
        for (std::size_t t = 0; t < resource.tables.size(); ++t) {
            const Table& table = resource.tables[t];
            std::string tpath = rpath + "/table[" + std::to_string(t) + "]";
            for (std::size_t g = 0; g < table.groups.size(); ++g) {
                walk_group(table.groups[g], tpath + "/group[" + std::to_string(g) + "]", fn);
            }
        }
    }
}

std::pair<const Table*, const Field*> locate_field(const Document& doc, std::string_view id) {
    for (const Resource& resource : doc.resources) {
        for (const Table& table : resource.tables) {
            for (const Field& field : table.fields) {
                if (field.id == id) return {&table, &field};
            }
        }
    }
    return {nullptr, nullptr};
}

// ---------------------------------------------------------------------------
// Ids, references, invariants

namespace {

enum class IdKind { Field, Param, Group };

struct IdEntry {
    IdKind kind;
    const void* element;
};

void collect_group_ids(const Group& group, std::unordered_map<std::string, IdEntry>& ids) {
    auto insert = [&ids](const std::string& id, IdKind kind, const void* el) {
        if (id.empty()) return;
        auto [it, fresh] = ids.emplace(id, IdEntry{kind, el});
        if (!fresh) throw Error(ErrorKind::Structure, "duplicate id '" + id + "'");
    };
    if (group.id) insert(*group.id, IdKind::Group, &group);
    for (const GroupItem& item : group.members) {
        if (const Param* p = std::get_if<Param>(&item.node)) {
            if (p->id) insert(*p->id, IdKind::Param, p);
        } else if (const Group* g = std::get_if<Group>(&item.node)) {
            collect_group_ids(*g, ids);
        }
    }
}

std::unordered_map<std::string, IdEntry> collect_ids(const Document& doc) {
    std::unordered_map<std::string, IdEntry> ids;
    auto insert = [&ids](const std::string& id, IdKind kind, const void* el) {
        if (id.empty()) return;
        auto [it, fresh] = ids.emplace(id, IdEntry{kind, el});
        if (!fresh) throw Error(ErrorKind::Structure, "duplicate id '" + id + "'");
    };
    for (const Resource& resource : doc.resources) {
        for (const Group& group : resource.groups) collect_group_ids(group, ids);
        for (const Table& table : resource.tables) {
            for (const Param& param : table.params) {
                if (param.id) insert(*param.id, IdKind::Param, &param);
            }
            for (const Field& field : table.fields) insert(field.id, IdKind::Field, &field);
            for (const Group& group : table.groups) collect_group_ids(group, ids);
        }
    }
    return ids;
}

void check_group_refs(const Group& group, const std::unordered_map<std::string, IdEntry>& ids) {
    for (const GroupItem& item : group.members) {
        const std::string* ref = nullptr;
        if (const FieldRef* fr = std::get_if<FieldRef>(&item.node)) ref = &fr->ref;
        if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) ref = &pr->ref;
        if (const GroupRef* gr = std::get_if<GroupRef>(&item.node)) ref = &gr->ref;
        if (ref && !ids.count(*ref)) {
            throw Error(ErrorKind::Structure, "reference to missing id '" + *ref + "'");
        }
        if (const Group* g = std::get_if<Group>(&item.node)) check_group_refs(*g, ids);
    }
}

}  // namespace

void check_references(const Document& doc) {
    auto ids = collect_ids(doc);
    for (const Resource& resource : doc.resources) {
        for (const Group& group : resource.groups) check_group_refs(group, ids);
        for (const Table& table : resource.tables) {
            for (const Group& group : table.groups) check_group_refs(group, ids);
        }
    }
}

void check_document(const Document& doc) {
    check_references(doc);
    for (const Resource& resource : doc.resources) {
        for (const Table& table : resource.tables) {
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                if (table.rows[i].cells.size() != table.fields.size()) {
                    throw Error(ErrorKind::Structure,
                                "row " + std::to_string(i) + " has " +
                                    std::to_string(table.rows[i].cells.size()) + " cells, table has " +
                                    std::to_string(table.fields.size()) + " fields");
                }
            }
        }
    }
}

RefTarget resolve_ref(const Document& doc, std::string_view id) {
    RefTarget found = std::monostate{};
    // Linear scan; documents are metadata-sized and lookups are rare.
    std::function<void(const Group&)> scan_group = [&](const Group& group) {
        if (group.id && *group.id == id) found = &group;
        for (const GroupItem& item : group.members) {
            if (const Param* p = std::get_if<Param>(&item.node)) {
                if (p->id && *p->id == id) found = p;
            } else if (const Group* g = std::get_if<Group>(&item.node)) {
                scan_group(*g);
            }
        }
    };
    for (const Resource& resource : doc.resources) {
        for (const Group& group : resource.groups) scan_group(group);
        for (const Table& table : resource.tables) {
            for (const Param& param : table.params) {
                if (param.id && *param.id == id) found = &param;
            }
            for (const Field& field : table.fields) {
                if (field.id == id) found = &field;
            }
            for (const Group& group : table.groups) scan_group(group);
        }
    }
    return found;
}

std::vector<Cell> read_column(const Table& table, const ColumnRef& ref) {
    std::size_t index = table.fields.size();
    for (std::size_t i = 0; i < table.fields.size(); ++i) {
        if (table.fields[i].id == ref.target) {
            index = i;
            break;
        }
    }
    if (index == table.fields.size()) {
        throw Error(ErrorKind::Lookup, "column '" + ref.target + "' not found in table");
    }
    const Datatype dt = table.fields[index].datatype;

    std::vector<Cell> cells;
    cells.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Row& row = table.rows[r];
        if (index >= row.cells.size()) {
            throw Error(ErrorKind::Structure,
                        "row " + std::to_string(r) + " is missing a cell for column '" +
                            ref.target + "'");
        }
        Cell cell = row.cells[index];
        cell.typed.reset();
        cell.null = cell.raw.empty();
        if (cell.null) {
            cells.push_back(std::move(cell));
            continue;
        }
        try {
            switch (dt) {
                case Datatype::Float64: {
                    auto v = parse_double_token(cell.raw);
                    if (!v) {
                        cell.null = true;  // NaN/Inf tokens map to null
                    } else {
                        cell.typed = *v;
                    }
                    break;
                }
                case Datatype::Int64:
                    cell.typed = parse_int_token(cell.raw);
                    break;
                case Datatype::Text:
                    cell.typed = cell.raw;
                    break;
                case Datatype::Bool:
                    cell.typed = parse_bool_token(cell.raw);
                    break;
            }
        } catch (const Error& e) {
            throw Error(ErrorKind::Value, "column '" + ref.target + "' row " + std::to_string(r) +
                                              ": " + e.what());
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace tscube
