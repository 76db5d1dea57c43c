// Canonical VOTable writer. Output is deterministic: fixed attribute order,
// two-space indentation, one <TR> per line with inline <TD> cells.
#include <sstream>
#include <string>

#include "tscube/votable.hpp"

namespace tscube {

namespace {

void append_escaped(std::string& out, std::string_view text, bool in_attribute) {
    for (char c : text) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                if (in_attribute) {
                    out += "&quot;";
                } else {
                    out.push_back(c);
                }
                break;
            default:
                out.push_back(c);
        }
    }
}

class Writer {
public:
    std::string take() { return std::move(out_); }

    void write_document(const Document& doc) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        open("VOTABLE");
        attr("version", doc.version);
        attrs_from(doc.extras);
        begin_children();
        description(doc.description);
        for (const Resource& resource : doc.resources) write_resource(resource);
        children_from(doc.extras);
        close("VOTABLE");
    }

private:
    std::string out_;
    int depth_ = 0;
    bool tag_open_ = false;  // start tag emitted but not yet closed with '>'

    void indent() {
        for (int i = 0; i < depth_; ++i) out_ += "  ";
    }

    void open(std::string_view name) {
        indent();
        out_.push_back('<');
        out_ += name;
        tag_open_ = true;
    }

    void attr(std::string_view name, std::string_view value) {
        out_.push_back(' ');
        out_ += name;
        out_ += "=\"";
        append_escaped(out_, value, /*in_attribute=*/true);
        out_.push_back('"');
    }

    void attr_opt(std::string_view name, const std::optional<std::string>& value) {
        if (value) attr(name, *value);
    }

    void begin_children() {
        out_ += ">\n";
        tag_open_ = false;
        ++depth_;
    }

    // Closes the current element: self-closing when no children were emitted.
    void close(std::string_view name) {
        if (tag_open_) {
            out_ += "/>\n";
            tag_open_ = false;
            return;
        }
        --depth_;
        indent();
        out_ += "</";
        out_ += name;
        out_ += ">\n";
    }

    void text_element(std::string_view name, std::string_view text) {
        indent();
        out_.push_back('<');
        out_ += name;
        out_ += ">";
        append_escaped(out_, text, /*in_attribute=*/false);
        out_ += "</";
        out_ += name;
        out_ += ">\n";
    }

    void description(const std::optional<std::string>& text) {
        if (text) text_element("DESCRIPTION", *text);
    }

    void attrs_from(const Extras& extras) {
        for (const auto& [name, value] : extras.attributes) attr(name, value);
    }

    void children_from(const Extras& extras) {
        if (extras.children.empty()) return;
        if (tag_open_) begin_children();
        for (const XmlExtra& child : extras.children) write_extra(child);
    }

    // Unknown subtrees are emitted inline, byte-preserving their text: any
    // indentation added here would come back as fresh character data on the
    // next parse and break the round-trip identity.
    void write_extra(const XmlExtra& el) {
        indent();
        append_extra_inline(el);
        out_.push_back('\n');
    }

    void append_extra_inline(const XmlExtra& el) {
        out_.push_back('<');
        out_ += el.name;
        for (const auto& [name, value] : el.attributes) {
            out_.push_back(' ');
            out_ += name;
            out_ += "=\"";
            append_escaped(out_, value, /*in_attribute=*/true);
            out_.push_back('"');
        }
        if (el.children.empty() && el.text.empty()) {
            out_ += "/>";
            return;
        }
        out_.push_back('>');
        if (!el.text.empty()) append_escaped(out_, el.text, /*in_attribute=*/false);
        for (const XmlExtra& child : el.children) append_extra_inline(child);
        out_ += "</";
        out_ += el.name;
        out_.push_back('>');
    }

    // Emits DESCRIPTION plus extras children under an element that may
    // otherwise be empty.
    void body(const std::optional<std::string>& desc, const Extras& extras) {
        if (desc || !extras.children.empty()) {
            begin_children();
            description(desc);
            for (const XmlExtra& child : extras.children) write_extra(child);
        }
    }

    void write_field(const Field& field) {
        open("FIELD");
        attr("ID", field.id);
        attr("name", field.name);
        attr("datatype", to_string(field.datatype));
        attr_opt("unit", field.unit);
        attr_opt("ucd", field.ucd);
        attr_opt("utype", field.utype);
        attrs_from(field.extras);
        body(field.description, field.extras);
        close("FIELD");
    }

    void write_param(const Param& param) {
        open("PARAM");
        attr_opt("ID", param.id);
        attr("name", param.name);
        attr("datatype", to_string(param.datatype));
        attr("value", param.value);
        attr_opt("unit", param.unit);
        attr_opt("ucd", param.ucd);
        attr_opt("utype", param.utype);
        attr_opt("dmtype", param.dmtype);
        attr_opt("dmrole", param.dmrole);
        attrs_from(param.extras);
        body(param.description, param.extras);
        close("PARAM");
    }

    template <typename RefT>
    void write_ref(std::string_view tag, const RefT& ref) {
        open(tag);
        attr("ref", ref.ref);
        attr_opt("dmrole", ref.dmrole);
        attrs_from(ref.extras);
        body(std::nullopt, ref.extras);
        close(tag);
    }

    void write_group(const Group& group) {
        open("GROUP");
        attr_opt("ID", group.id);
        attr_opt("name", group.name);
        attr_opt("dmtype", group.dmtype);
        attr_opt("dmrole", group.dmrole);
        attrs_from(group.extras);
        if (group.description || !group.members.empty() || !group.extras.children.empty()) {
            begin_children();
            description(group.description);
            for (const GroupItem& item : group.members) {
                std::visit(
                    [this](const auto& node) {
                        using T = std::decay_t<decltype(node)>;
                        if constexpr (std::is_same_v<T, Param>) {
                            write_param(node);
                        } else if constexpr (std::is_same_v<T, ParamRef>) {
                            write_ref("PARAMref", node);
                        } else if constexpr (std::is_same_v<T, FieldRef>) {
                            write_ref("FIELDref", node);
                        } else if constexpr (std::is_same_v<T, GroupRef>) {
                            write_ref("GROUPref", node);
                        } else {
                            write_group(node);
                        }
                    },
                    item.node);
            }
            for (const XmlExtra& child : group.extras.children) write_extra(child);
        }
        close("GROUP");
    }

    void write_rows(const std::vector<Row>& rows) {
        open("DATA");
        begin_children();
        open("TABLEDATA");
        begin_children();
        for (const Row& row : rows) {
            indent();
            out_ += "<TR>";
            for (const Cell& cell : row.cells) {
                out_ += "<TD>";
                append_escaped(out_, cell.raw, /*in_attribute=*/false);
                out_ += "</TD>";
            }
            out_ += "</TR>\n";
        }
        close("TABLEDATA");
        close("DATA");
    }

    void write_table(const Table& table) {
        open("TABLE");
        attr_opt("name", table.name);
        attrs_from(table.extras);
        begin_children();
        description(table.description);
        for (const Param& param : table.params) write_param(param);
        for (const Field& field : table.fields) write_field(field);
        for (const Group& group : table.groups) write_group(group);
        children_from(table.extras);
        if (!table.rows.empty()) write_rows(table.rows);
        close("TABLE");
    }

    void write_resource(const Resource& resource) {
        open("RESOURCE");
        attr_opt("name", resource.name);
        attrs_from(resource.extras);
        begin_children();
        description(resource.description);
        for (const Group& group : resource.groups) write_group(group);
        for (const Table& table : resource.tables) write_table(table);
        children_from(resource.extras);
        close("RESOURCE");
    }
};

}  // namespace

std::string serialize_document(const Document& doc) {
    check_document(doc);
    Writer writer;
    writer.write_document(doc);
    return writer.take();
}

}  // namespace tscube
