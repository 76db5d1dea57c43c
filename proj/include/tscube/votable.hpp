// tscube/votable.hpp - the VOTable subset used by the time series cube
// serialization: document tree, parsing, canonical writing, reference
// resolution and typed column access.
//
// Only the TABLEDATA (TR/TD) row encoding is supported; BINARY, BINARY2 and
// FITS streams are rejected. Unknown elements and attributes are preserved
// verbatim so that parse/serialize round-trips foreign annotations.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tscube/error.hpp"

namespace tscube {

// ---------------------------------------------------------------------------
// Datatypes and cell values

enum class Datatype { Float64, Int64, Text, Bool };

// Canonical attribute token ("float64", "int64", "text", "bool").
const char* to_string(Datatype dt);

// Accepts the canonical tokens plus common VOTable spellings
// (double/float -> float64, long/int/short -> int64, char/unicodeChar -> text,
// boolean -> bool). Unknown tokens yield nullopt.
std::optional<Datatype> datatype_from_token(std::string_view token);

using Value = std::variant<double, std::int64_t, std::string, bool>;

// One table cell. `typed` is a conversion cache filled by read_column and is
// not part of the cell's identity; equality compares raw text and null flag.
struct Cell {
    std::string raw;
    std::optional<Value> typed;
    bool null = false;

    bool operator==(const Cell& other) const { return raw == other.raw && null == other.null; }
};

// Cell with the null flag derived from the text (empty raw <=> null).
Cell make_cell(std::string raw);

struct Row {
    std::vector<Cell> cells;
    bool operator==(const Row&) const = default;
};

// ---------------------------------------------------------------------------
// Preserved unknown content

// An unknown XML subtree kept opaque for round-tripping (e.g. VALUES, LINK).
struct XmlExtra {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;  // concatenated character data
    std::vector<XmlExtra> children;

    bool operator==(const XmlExtra&) const = default;
};

struct Extras {
    std::vector<std::pair<std::string, std::string>> attributes;  // unknown attributes, input order
    std::vector<XmlExtra> children;                               // unknown child elements, input order

    bool empty() const { return attributes.empty() && children.empty(); }
    bool operator==(const Extras&) const = default;
};

// ---------------------------------------------------------------------------
// Modeled elements

struct Field {
    std::string id;  // nonempty; unique document-wide
    std::string name;
    Datatype datatype = Datatype::Float64;
    std::optional<std::string> unit;
    std::optional<std::string> ucd;
    std::optional<std::string> utype;
    std::optional<std::string> description;
    Extras extras;

    bool operator==(const Field&) const = default;
};

struct Param {
    std::optional<std::string> id;
    std::string name;
    Datatype datatype = Datatype::Text;
    std::string value;  // always present, may be empty
    std::optional<std::string> unit;
    std::optional<std::string> ucd;
    std::optional<std::string> utype;
    std::optional<std::string> dmtype;
    std::optional<std::string> dmrole;
    std::optional<std::string> description;
    Extras extras;

    bool operator==(const Param&) const = default;
};

struct FieldRef {
    std::string ref;
    std::optional<std::string> dmrole;
    Extras extras;

    bool operator==(const FieldRef&) const = default;
};

struct ParamRef {
    std::string ref;
    std::optional<std::string> dmrole;
    Extras extras;

    bool operator==(const ParamRef&) const = default;
};

struct GroupRef {
    std::string ref;
    std::optional<std::string> dmrole;
    Extras extras;

    bool operator==(const GroupRef&) const = default;
};

struct GroupItem;

struct Group {
    std::optional<std::string> id;
    std::optional<std::string> name;
    std::optional<std::string> dmtype;
    std::optional<std::string> dmrole;
    std::optional<std::string> description;
    std::vector<GroupItem> members;  // order is semantic (axis column order)
    Extras extras;

    bool operator==(const Group&) const;
};

struct GroupItem {
    std::variant<Param, ParamRef, FieldRef, GroupRef, Group> node;

    bool operator==(const GroupItem&) const = default;
};

struct Table {
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::vector<Param> params;
    std::vector<Field> fields;
    std::vector<Group> groups;
    std::vector<Row> rows;
    Extras extras;

    bool operator==(const Table&) const = default;
};

struct Resource {
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::vector<Table> tables;
    std::vector<Group> groups;
    Extras extras;

    bool operator==(const Resource&) const = default;
};

struct Document {
    std::string version = "1.3";
    std::optional<std::string> description;
    std::vector<Resource> resources;
    Extras extras;

    bool operator==(const Document&) const = default;
};

// Reference to a serialized column: the id of a FIELD. This is the primitive
// every higher-level structure hangs on to instead of embedding metadata.
struct ColumnRef {
    std::string target;

    bool operator==(const ColumnRef&) const = default;
};

// ---------------------------------------------------------------------------
// Operations

// Parses a UTF-8 VOTable document. Throws Error(Parse) with line/column on
// malformed XML, Error(Structure) on duplicate ids or dangling references.
Document parse_document(std::string_view xml);

// Canonical serialization: fixed attribute order, fixed 2-space indentation.
// parse_document(serialize_document(d)) is structurally equal to d. Throws
// Error(Structure) when the document violates its invariants.
std::string serialize_document(const Document& doc);

// Identifier invariants (unique ids, references resolve); throws
// Error(Structure) on the first violation. Enforced at parse time.
void check_references(const Document& doc);

// Full invariant check: check_references plus row arity; throws
// Error(Structure) on the first violation. Enforced at serialize time.
void check_document(const Document& doc);

// Lookup by id. Not-found is a result, not an error, so builders can probe.
using RefTarget = std::variant<std::monostate, const Field*, const Param*, const Group*>;
RefTarget resolve_ref(const Document& doc, std::string_view id);

// One typed cell per row, converted according to the field's datatype.
// Throws Error(Lookup) when the ref does not name a field of the table and
// Error(Value) with the row index when a cell does not parse.
std::vector<Cell> read_column(const Table& table, const ColumnRef& ref);

// ---------------------------------------------------------------------------
// Traversal helpers

// Visits every table with a path like "resource[0]/table[1]".
void for_each_table(const Document& doc,
                    const std::function<void(const Table&, const std::string& path)>& fn);

// Visits every group (resource-level, table-level and nested) in document
// order with a path like "resource[0]/table[0]/group[2]/group[0]".
void for_each_group(const Document& doc,
                    const std::function<void(const Group&, const std::string& path)>& fn);

// Table and field owning the given field id, or {nullptr, nullptr}.
std::pair<const Table*, const Field*> locate_field(const Document& doc, std::string_view id);

// ---------------------------------------------------------------------------
// Value text conversions (shared by cells, generators, CSV and the CLI)

// Shortest decimal text that parses back to exactly the same double.
std::string render_double(double v);
std::string render_int(std::int64_t v);

// Accept decimal and scientific notation with optional sign and surrounding
// whitespace. NaN/Inf tokens yield nullopt (they map to null cells).
// Throws Error(Value) on anything else.
std::optional<double> parse_double_token(std::string_view text);
std::int64_t parse_int_token(std::string_view text);
bool parse_bool_token(std::string_view text);

}  // namespace tscube
