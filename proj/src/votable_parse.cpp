// VOTable subset parser: recursive descent over UTF-8 text with line/column
// tracking. Recognized elements are mapped onto the document model; anything
// else is preserved as an opaque XmlExtra subtree.
#include <cctype>
#include <cstdint>

#include "tscube/votable.hpp"

namespace tscube {

namespace {

struct RawAttr {
    std::string name;
    std::string value;
};

struct RawElement {
    std::string name;
    std::vector<RawAttr> attributes;
    std::vector<RawElement> children;
    std::string text;  // concatenated character data
    int line = 0;
    int column = 0;
};

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

// Element recognition is namespace-agnostic and case-insensitive: match on
// the local name after any prefix.
bool is_element(const RawElement& el, std::string_view tag) {
    std::string_view name = el.name;
    if (auto pos = name.rfind(':'); pos != std::string_view::npos) name.remove_prefix(pos + 1);
    return iequals(name, tag);
}

class Scanner {
public:
    explicit Scanner(std::string_view input) : input_(input) {}

    RawElement parse_root() {
        skip_prolog();
        if (at_end()) fail("document contains no root element");
        RawElement root = parse_element();
        skip_misc();
        if (!at_end()) fail("content after the root element");
        return root;
    }

private:
    std::string_view input_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;

    [[noreturn]] void fail(const std::string& message) const {
        throw Error(ErrorKind::Parse,
                    message + " (line " + std::to_string(line_) + ", column " +
                        std::to_string(column_) + ")",
                    line_, column_);
    }

    bool at_end() const { return pos_ >= input_.size(); }
    char peek() const { return input_[pos_]; }
    bool starts_with(std::string_view s) const { return input_.compare(pos_, s.size(), s) == 0; }

    char advance() {
        char c = input_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void advance_n(std::size_t n) {
        for (std::size_t i = 0; i < n && !at_end(); ++i) advance();
    }

    void skip_whitespace() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    void skip_until(std::string_view terminator, const char* what) {
        while (!at_end()) {
            if (starts_with(terminator)) {
                advance_n(terminator.size());
                return;
            }
            advance();
        }
        fail(std::string("unterminated ") + what);
    }

    void skip_doctype() {
        // "<!DOCTYPE" already consumed; skip to the matching '>' honoring an
        // optional internal subset in brackets.
        int brackets = 0;
        while (!at_end()) {
            char c = advance();
            if (c == '[') ++brackets;
            if (c == ']') --brackets;
            if (c == '>' && brackets <= 0) return;
        }
        fail("unterminated DOCTYPE");
    }

    // Skips whitespace, the XML declaration, comments, PIs and DOCTYPE.
    void skip_prolog() {
        for (;;) {
            skip_whitespace();
            if (starts_with("<?")) {
                advance_n(2);
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!--")) {
                advance_n(4);
                skip_until("-->", "comment");
            } else if (starts_with("<!DOCTYPE")) {
                advance_n(9);
                skip_doctype();
            } else {
                return;
            }
        }
    }

    void skip_misc() {
        for (;;) {
            skip_whitespace();
            if (starts_with("<!--")) {
                advance_n(4);
                skip_until("-->", "comment");
            } else if (starts_with("<?")) {
                advance_n(2);
                skip_until("?>", "processing instruction");
            } else {
                return;
            }
        }
    }

    static bool is_name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
    }
    static bool is_name_char(char c) {
        return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
               c == '.';
    }

    std::string parse_name() {
        if (at_end() || !is_name_start(peek())) fail("expected a name");
        std::string name;
        while (!at_end() && is_name_char(peek())) name.push_back(advance());
        return name;
    }

    void append_char_ref(std::string& out) {
        // '&#' consumed.
        int base = 10;
        if (!at_end() && (peek() == 'x' || peek() == 'X')) {
            advance();
            base = 16;
        }
        std::uint32_t code = 0;
        bool any = false;
        while (!at_end() && peek() != ';') {
            char c = advance();
            int digit;
            if (c >= '0' && c <= '9') {
                digit = c - '0';
            } else if (base == 16 && c >= 'a' && c <= 'f') {
                digit = c - 'a' + 10;
            } else if (base == 16 && c >= 'A' && c <= 'F') {
                digit = c - 'A' + 10;
            } else {
                fail("bad character reference");
            }
            code = code * static_cast<std::uint32_t>(base) + static_cast<std::uint32_t>(digit);
            if (code > 0x10FFFF) fail("character reference out of range");
            any = true;
        }
        if (at_end() || !any) fail("unterminated character reference");
        advance();  // ';'
        // UTF-8 encode.
        if (code < 0x80) {
            out.push_back(static_cast<char>(code));
        } else if (code < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (code >> 6)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else if (code < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (code >> 12)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (code >> 18)));
            out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        }
    }

    void append_entity(std::string& out) {
        // '&' consumed.
        if (!at_end() && peek() == '#') {
            advance();
            append_char_ref(out);
            return;
        }
        std::string name;
        while (!at_end() && peek() != ';' && name.size() < 8) name.push_back(advance());
        if (at_end() || peek() != ';') fail("unterminated entity reference");
        advance();
        if (name == "amp") {
            out.push_back('&');
        } else if (name == "lt") {
            out.push_back('<');
        } else if (name == "gt") {
            out.push_back('>');
        } else if (name == "quot") {
            out.push_back('"');
        } else if (name == "apos") {
            out.push_back('\'');
        } else {
            fail("unknown entity '&" + name + ";'");
        }
    }

    std::string parse_attribute_value() {
        if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected a quoted attribute value");
        char quote = advance();
        std::string value;
        for (;;) {
            if (at_end()) fail("unterminated attribute value");
            char c = peek();
            if (c == quote) {
                advance();
                return value;
            }
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                advance();
                append_entity(value);
            } else {
                value.push_back(advance());
            }
        }
    }

    RawElement parse_element() {
        if (at_end() || peek() != '<') fail("expected an element");
        RawElement el;
        el.line = line_;
        el.column = column_;
        advance();  // '<'
        el.name = parse_name();

        for (;;) {
            skip_whitespace();
            if (at_end()) fail("unterminated start tag");
            if (peek() == '/') {
                advance();
                if (at_end() || peek() != '>') fail("expected '>' after '/'");
                advance();
                return el;  // self-closing
            }
            if (peek() == '>') {
                advance();
                break;
            }
            RawAttr attr;
            attr.name = parse_name();
            skip_whitespace();
            if (at_end() || peek() != '=') fail("expected '=' after attribute name");
            advance();
            skip_whitespace();
            attr.value = parse_attribute_value();
            for (const RawAttr& existing : el.attributes) {
                if (existing.name == attr.name) {
                    fail("duplicate attribute '" + attr.name + "'");
                }
            }
            el.attributes.push_back(std::move(attr));
        }

        // Content until the matching end tag.
        for (;;) {
            if (at_end()) fail("missing end tag for <" + el.name + ">");
            if (starts_with("<!--")) {
                advance_n(4);
                skip_until("-->", "comment");
                continue;
            }
            if (starts_with("<![CDATA[")) {
                advance_n(9);
                while (!at_end() && !starts_with("]]>")) el.text.push_back(advance());
                if (at_end()) fail("unterminated CDATA section");
                advance_n(3);
                continue;
            }
            if (starts_with("<?")) {
                advance_n(2);
                skip_until("?>", "processing instruction");
                continue;
            }
            if (starts_with("</")) {
                advance_n(2);
                std::string closing = parse_name();
                if (closing != el.name) {
                    fail("mismatched end tag </" + closing + ">, expected </" + el.name + ">");
                }
                skip_whitespace();
                if (at_end() || peek() != '>') fail("expected '>' in end tag");
                advance();
                return el;
            }
            if (peek() == '<') {
                el.children.push_back(parse_element());
                continue;
            }
            if (peek() == '&') {
                advance();
                append_entity(el.text);
                continue;
            }
            el.text.push_back(advance());
        }
    }
};

// ---------------------------------------------------------------------------
// Raw tree -> document model

XmlExtra to_extra(const RawElement& el) {
    XmlExtra extra;
    extra.name = el.name;
    for (const RawAttr& attr : el.attributes) extra.attributes.emplace_back(attr.name, attr.value);
    extra.text = el.text;
    for (const RawElement& child : el.children) extra.children.push_back(to_extra(child));
    return extra;
}

[[noreturn]] void fail_at(const RawElement& el, const std::string& message) {
    throw Error(ErrorKind::Parse,
                message + " (line " + std::to_string(el.line) + ", column " +
                    std::to_string(el.column) + ")",
                el.line, el.column);
}

struct AttrReader {
    const RawElement& el;
    std::vector<bool> used;

    explicit AttrReader(const RawElement& element) : el(element), used(element.attributes.size()) {}

    std::optional<std::string> take(std::string_view name, bool accept_upper_id = false) {
        for (std::size_t i = 0; i < el.attributes.size(); ++i) {
            if (used[i]) continue;
            const RawAttr& attr = el.attributes[i];
            if (attr.name == name || (accept_upper_id && attr.name == "ID")) {
                used[i] = true;
                return attr.value;
            }
        }
        return std::nullopt;
    }

    std::optional<std::string> take_id() { return take("id", /*accept_upper_id=*/true); }

    void rest_into(Extras& extras) {
        for (std::size_t i = 0; i < el.attributes.size(); ++i) {
            if (!used[i]) extras.attributes.emplace_back(el.attributes[i].name, el.attributes[i].value);
        }
    }
};

Datatype parse_datatype(const RawElement& el, const std::optional<std::string>& token,
                        bool required, Datatype fallback) {
    if (!token) {
        if (required) fail_at(el, "<" + el.name + "> requires a datatype attribute");
        return fallback;
    }
    auto dt = datatype_from_token(*token);
    if (!dt) fail_at(el, "unknown datatype '" + *token + "'");
    return *dt;
}

std::optional<std::string> read_description(const RawElement& el) {
    if (!is_element(el, "DESCRIPTION")) return std::nullopt;
    return el.text;
}

Field read_field(const RawElement& el) {
    Field field;
    AttrReader attrs(el);
    auto id = attrs.take_id();
    if (!id || id->empty()) fail_at(el, "FIELD requires a nonempty ID attribute");
    field.id = *id;
    field.name = attrs.take("name").value_or(field.id);
    field.datatype = parse_datatype(el, attrs.take("datatype"), /*required=*/true, Datatype::Text);
    field.unit = attrs.take("unit");
    field.ucd = attrs.take("ucd");
    field.utype = attrs.take("utype");
    attrs.rest_into(field.extras);
    for (const RawElement& child : el.children) {
        if (auto desc = read_description(child)) {
            field.description = std::move(desc);
        } else {
            field.extras.children.push_back(to_extra(child));
        }
    }
    return field;
}

Param read_param(const RawElement& el) {
    Param param;
    AttrReader attrs(el);
    param.id = attrs.take_id();
    param.name = attrs.take("name").value_or(param.id.value_or(""));
    param.datatype = parse_datatype(el, attrs.take("datatype"), /*required=*/false, Datatype::Text);
    auto value = attrs.take("value");
    if (!value) fail_at(el, "PARAM requires a value attribute");
    param.value = *value;
    param.unit = attrs.take("unit");
    param.ucd = attrs.take("ucd");
    param.utype = attrs.take("utype");
    param.dmtype = attrs.take("dmtype");
    param.dmrole = attrs.take("dmrole");
    attrs.rest_into(param.extras);
    for (const RawElement& child : el.children) {
        if (auto desc = read_description(child)) {
            param.description = std::move(desc);
        } else {
            param.extras.children.push_back(to_extra(child));
        }
    }
    return param;
}

template <typename RefT>
RefT read_ref(const RawElement& el) {
    RefT ref;
    AttrReader attrs(el);
    auto target = attrs.take("ref");
    if (!target || target->empty()) fail_at(el, "<" + el.name + "> requires a ref attribute");
    ref.ref = *target;
    ref.dmrole = attrs.take("dmrole");
    attrs.rest_into(ref.extras);
    for (const RawElement& child : el.children) ref.extras.children.push_back(to_extra(child));
    return ref;
}

Group read_group(const RawElement& el) {
    Group group;
    AttrReader attrs(el);
    group.id = attrs.take_id();
    group.name = attrs.take("name");
    group.dmtype = attrs.take("dmtype");
    group.dmrole = attrs.take("dmrole");
    attrs.rest_into(group.extras);
    for (const RawElement& child : el.children) {
        if (is_element(child, "PARAM")) {
            group.members.push_back(GroupItem{read_param(child)});
        } else if (is_element(child, "PARAMref")) {
            group.members.push_back(GroupItem{read_ref<ParamRef>(child)});
        } else if (is_element(child, "FIELDref")) {
            group.members.push_back(GroupItem{read_ref<FieldRef>(child)});
        } else if (is_element(child, "GROUPref")) {
            group.members.push_back(GroupItem{read_ref<GroupRef>(child)});
        } else if (is_element(child, "GROUP")) {
            group.members.push_back(GroupItem{read_group(child)});
        } else if (auto desc = read_description(child)) {
            group.description = std::move(desc);
        } else {
            group.extras.children.push_back(to_extra(child));
        }
    }
    return group;
}

std::vector<Row> read_data(const RawElement& el) {
    const RawElement* tabledata = nullptr;
    for (const RawElement& child : el.children) {
        if (is_element(child, "TABLEDATA")) {
            tabledata = &child;
        } else if (is_element(child, "BINARY") || is_element(child, "BINARY2") ||
                   is_element(child, "FITS")) {
            fail_at(child, "unsupported encoding <" + child.name + ">; only TABLEDATA is supported");
        }
    }
    std::vector<Row> rows;
    if (!tabledata) return rows;
    for (const RawElement& tr : tabledata->children) {
        if (!is_element(tr, "TR")) fail_at(tr, "expected <TR> inside TABLEDATA");
        Row row;
        for (const RawElement& td : tr.children) {
            if (!is_element(td, "TD")) fail_at(td, "expected <TD> inside TR");
            if (!td.children.empty()) fail_at(td, "unexpected element inside TD");
            row.cells.push_back(make_cell(td.text));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Table read_table(const RawElement& el) {
    Table table;
    AttrReader attrs(el);
    table.name = attrs.take("name");
    attrs.rest_into(table.extras);
    for (const RawElement& child : el.children) {
        if (is_element(child, "PARAM")) {
            table.params.push_back(read_param(child));
        } else if (is_element(child, "FIELD")) {
            table.fields.push_back(read_field(child));
        } else if (is_element(child, "GROUP")) {
            table.groups.push_back(read_group(child));
        } else if (is_element(child, "DATA")) {
            table.rows = read_data(child);
        } else if (auto desc = read_description(child)) {
            table.description = std::move(desc);
        } else {
            table.extras.children.push_back(to_extra(child));
        }
    }
    return table;
}

Resource read_resource(const RawElement& el) {
    Resource resource;
    AttrReader attrs(el);
    resource.name = attrs.take("name");
    attrs.rest_into(resource.extras);
    for (const RawElement& child : el.children) {
        if (is_element(child, "TABLE")) {
            resource.tables.push_back(read_table(child));
        } else if (is_element(child, "GROUP")) {
            resource.groups.push_back(read_group(child));
        } else if (auto desc = read_description(child)) {
            resource.description = std::move(desc);
        } else {
            resource.extras.children.push_back(to_extra(child));
        }
    }
    return resource;
}

}  // namespace

Document parse_document(std::string_view xml) {
    Scanner scanner(xml);
    RawElement root = scanner.parse_root();
    if (!is_element(root, "VOTABLE")) fail_at(root, "root element must be <VOTABLE>");

    Document doc;
    AttrReader attrs(root);
    doc.version = attrs.take("version").value_or("1.3");
    attrs.rest_into(doc.extras);
    for (const RawElement& child : root.children) {
        if (is_element(child, "RESOURCE")) {
            doc.resources.push_back(read_resource(child));
        } else if (auto desc = read_description(child)) {
            doc.description = std::move(desc);
        } else {
            doc.extras.children.push_back(to_extra(child));
        }
    }
    check_references(doc);
    return doc;
}

}  // namespace tscube
