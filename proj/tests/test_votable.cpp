#include <string>

#include "doctest.h"
#include "tscube/votable.hpp"

using namespace tscube;

namespace {

const char* kMinimal = R"(<?xml version="1.0" encoding="UTF-8"?>
<VOTABLE version="1.4">
  <RESOURCE>
    <TABLE name="obs">
      <FIELD ID="t" datatype="double" unit="d"/>
      <FIELD ID="flux" name="fluxDensity" datatype="float64" unit="mJy" ucd="phot.flux"/>
      <FIELD ID="label" datatype="char"/>
      <DATA>
        <TABLEDATA>
          <TR><TD>1.5</TD><TD>10</TD><TD>a</TD></TR>
          <TR><TD>2.5</TD><TD></TD><TD>b,c</TD></TR>
        </TABLEDATA>
      </DATA>
    </TABLE>
  </RESOURCE>
</VOTABLE>
)";

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a tscube::Error");
    return ErrorKind::Parse;
}

}  // namespace

TEST_SUITE("votable") {

TEST_CASE("minimal document parses with defaults") {
    const Document doc = parse_document(kMinimal);
    CHECK(doc.version == "1.4");
    REQUIRE(doc.resources.size() == 1);
    REQUIRE(doc.resources[0].tables.size() == 1);
    const Table& table = doc.resources[0].tables[0];
    CHECK(table.name == "obs");
    REQUIRE(table.fields.size() == 3);
    CHECK(table.fields[0].name == "t");               // name defaults to the id
    CHECK(table.fields[0].datatype == Datatype::Float64);  // "double" alias
    CHECK(table.fields[1].name == "fluxDensity");
    CHECK(table.fields[2].datatype == Datatype::Text);     // "char" alias
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1].cells[1].null);  // empty TD is a null cell
    CHECK(table.rows[1].cells[2].raw == "b,c");
}

TEST_CASE("version defaults to 1.3") {
    const Document doc = parse_document("<VOTABLE><RESOURCE/></VOTABLE>");
    CHECK(doc.version == "1.3");
}

TEST_CASE("serialize then parse is identity; serialize is idempotent") {
    const Document doc = parse_document(kMinimal);
    const std::string once = serialize_document(doc);
    const Document again = parse_document(once);
    CHECK(again == doc);
    CHECK(serialize_document(again) == once);
}

TEST_CASE("canonical form uses the enum datatype tokens") {
    const std::string xml = serialize_document(parse_document(kMinimal));
    CHECK(xml.find("datatype=\"float64\"") != std::string::npos);
    CHECK(xml.find("datatype=\"text\"") != std::string::npos);
    CHECK(xml.find("datatype=\"double\"") == std::string::npos);
}

TEST_CASE("escaping and entities round-trip") {
    Document doc = parse_document(kMinimal);
    Table& table = doc.resources[0].tables[0];
    table.description = "a < b & \"c\" > d";
    table.rows[0].cells[2] = make_cell("x <&> \"y\"");
    const std::string xml = serialize_document(doc);
    CHECK(parse_document(xml) == doc);
}

TEST_CASE("character references decode to UTF-8") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"s\" datatype=\"char\"/>"
        "<DATA><TABLEDATA><TR><TD>&#x03B1;&#945; &amp; &lt;&gt;</TD></TR></TABLEDATA></DATA>"
        "</TABLE></RESOURCE></VOTABLE>");
    CHECK(doc.resources[0].tables[0].rows[0].cells[0].raw == "\xce\xb1\xce\xb1 & <>");
}

TEST_CASE("CDATA is literal text") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"s\" datatype=\"char\"/>"
        "<DATA><TABLEDATA><TR><TD><![CDATA[<not-a-tag> & raw]]></TD></TR></TABLEDATA></DATA>"
        "</TABLE></RESOURCE></VOTABLE>");
    CHECK(doc.resources[0].tables[0].rows[0].cells[0].raw == "<not-a-tag> & raw");
}

TEST_CASE("malformed XML reports the position") {
    try {
        parse_document("<VOTABLE>\n  <RESOURCE>\n</VOTABLE>");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(e.line() > 0);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("structural rejects at parse time") {
    SUBCASE("duplicate id") {
        const auto kind = kind_of([] {
            parse_document(
                "<VOTABLE><RESOURCE><TABLE>"
                "<FIELD ID=\"x\" datatype=\"double\"/><FIELD ID=\"x\" datatype=\"double\"/>"
                "</TABLE></RESOURCE></VOTABLE>");
        });
        CHECK(kind == ErrorKind::Structure);
    }
    SUBCASE("dangling reference names the id") {
        try {
            parse_document(
                "<VOTABLE><RESOURCE><TABLE>"
                "<FIELD ID=\"x\" datatype=\"double\"/>"
                "<GROUP><FIELDref ref=\"ghost\"/></GROUP>"
                "</TABLE></RESOURCE></VOTABLE>");
            FAIL("expected a structural error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Structure);
            CHECK(std::string(e.what()).find("ghost") != std::string::npos);
        }
    }
    SUBCASE("duplicate attribute") {
        CHECK(kind_of([] {
                  parse_document("<VOTABLE version=\"1.3\" version=\"1.4\"/>");
              }) == ErrorKind::Parse);
    }
    SUBCASE("mismatched end tag") {
        CHECK(kind_of([] {
                  parse_document("<VOTABLE><RESOURCE></TABLE></VOTABLE>");
              }) == ErrorKind::Parse);
    }
}

TEST_CASE("only TABLEDATA encoding is supported") {
    try {
        parse_document(
            "<VOTABLE><RESOURCE><TABLE>"
            "<FIELD ID=\"x\" datatype=\"double\"/>"
            "<DATA><BINARY2><STREAM/></BINARY2></DATA>"
            "</TABLE></RESOURCE></VOTABLE>");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("BINARY2") != std::string::npos);
        CHECK(std::string(e.what()).find("TABLEDATA") != std::string::npos);
    }
}

TEST_CASE("row arity is a serialize-time invariant, not a parse-time one") {
    const char* ragged =
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"a\" datatype=\"double\"/><FIELD ID=\"b\" datatype=\"double\"/>"
        "<DATA><TABLEDATA><TR><TD>1</TD></TR></TABLEDATA></DATA>"
        "</TABLE></RESOURCE></VOTABLE>";
    const Document doc = parse_document(ragged);  // accepted
    CHECK(kind_of([&] { serialize_document(doc); }) == ErrorKind::Structure);
}

TEST_CASE("unknown elements and attributes survive round trips") {
    const char* xml =
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"x\" datatype=\"double\" width=\"8\">"
        "<VALUES null=\"-999\"><MIN value=\"0\"/></VALUES>"
        "</FIELD>"
        "</TABLE></RESOURCE></VOTABLE>";
    const Document doc = parse_document(xml);
    const Field& field = doc.resources[0].tables[0].fields[0];
    REQUIRE(field.extras.attributes.size() == 1);
    CHECK(field.extras.attributes[0] == std::pair<std::string, std::string>{"width", "8"});
    REQUIRE(field.extras.children.size() == 1);
    CHECK(field.extras.children[0].name == "VALUES");
    CHECK(parse_document(serialize_document(doc)) == doc);
}

TEST_CASE("resolve_ref finds fields, params and groups") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<PARAM ID=\"p\" name=\"p\" datatype=\"char\" value=\"v\"/>"
        "<FIELD ID=\"f\" datatype=\"double\"/>"
        "<GROUP ID=\"g\"/>"
        "</TABLE></RESOURCE></VOTABLE>");
    CHECK(std::holds_alternative<const Param*>(resolve_ref(doc, "p")));
    CHECK(std::holds_alternative<const Field*>(resolve_ref(doc, "f")));
    CHECK(std::holds_alternative<const Group*>(resolve_ref(doc, "g")));
    CHECK(std::holds_alternative<std::monostate>(resolve_ref(doc, "missing")));
}

TEST_CASE("read_column types cells and flags nulls") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"x\" datatype=\"double\"/>"
        "<DATA><TABLEDATA>"
        "<TR><TD>1.25</TD></TR><TR><TD>NaN</TD></TR><TR><TD></TD></TR>"
        "</TABLEDATA></DATA>"
        "</TABLE></RESOURCE></VOTABLE>");
    const Table& table = doc.resources[0].tables[0];
    const auto cells = read_column(table, ColumnRef{"x"});
    REQUIRE(cells.size() == 3);
    CHECK(std::get<double>(*cells[0].typed) == 1.25);
    CHECK(cells[1].null);  // NaN token maps to null
    CHECK(cells[2].null);

    CHECK(kind_of([&] { read_column(table, ColumnRef{"nope"}); }) == ErrorKind::Lookup);
}

TEST_CASE("read_column reports the failing row") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"n\" datatype=\"long\"/>"
        "<DATA><TABLEDATA><TR><TD>1</TD></TR><TR><TD>oops</TD></TR></TABLEDATA></DATA>"
        "</TABLE></RESOURCE></VOTABLE>");
    try {
        read_column(doc.resources[0].tables[0], ColumnRef{"n"});
        FAIL("expected a value error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Value);
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("render_double emits shortest exact text") {
    CHECK(render_double(0.1) == "0.1");
    CHECK(render_double(1.0) == "1");
    CHECK(render_double(-2.5) == "-2.5");
    CHECK(render_double(100.0) == "100");
    for (double v : {0.1, 1e300, -1e-300, 3.141592653589793, 2455197.5125}) {
        CHECK(parse_double_token(render_double(v)) == v);
    }
}

TEST_CASE("parse_double_token accepts signs and whitespace, rejects junk") {
    CHECK(parse_double_token("+1.5") == 1.5);
    CHECK(parse_double_token("  2e3 ") == 2000.0);
    CHECK(parse_double_token("-0.25") == -0.25);
    CHECK(!parse_double_token("NaN").has_value());
    CHECK(!parse_double_token("Inf").has_value());
    CHECK(kind_of([] { parse_double_token("12x"); }) == ErrorKind::Value);
    CHECK(kind_of([] { parse_double_token(""); }) == ErrorKind::Value);
}

TEST_CASE("traversal paths are stable") {
    const Document doc = parse_document(
        "<VOTABLE><RESOURCE><TABLE>"
        "<GROUP name=\"a\"><GROUP name=\"a0\"/></GROUP><GROUP name=\"b\"/>"
        "</TABLE></RESOURCE></VOTABLE>");
    std::vector<std::string> paths;
    for_each_group(doc, [&](const Group&, const std::string& path) { paths.push_back(path); });
    REQUIRE(paths.size() == 3);
    CHECK(paths[0] == "resource[0]/table[0]/group[0]");
    CHECK(paths[1] == "resource[0]/table[0]/group[0]/group[0]");
    CHECK(paths[2] == "resource[0]/table[0]/group[1]");
}

}  // TEST_SUITE
