// tscube - command line frontend over the library: parse, validate, inspect,
// stats, slice, export, links, generate, obscore.
//
// Exit codes: 0 success, 1 validation errors found, 2 usage/IO/parse failure.
// Every command accepts `-` for standard input/output.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tscube/corpus.hpp"
#include "tscube/cube_ops.hpp"
#include "tscube/discovery.hpp"
#include "tscube/model.hpp"
#include "tscube/validate.hpp"
#include "tscube/votable.hpp"

namespace {

using namespace tscube;

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        if (std::cin.bad()) throw Error(ErrorKind::Io, "failed to read standard input");
        return buffer.str();
    }
    std::ifstream stream(path, std::ios::binary);
    if (!stream) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    if (stream.bad()) throw Error(ErrorKind::Io, "failed to read '" + path + "'");
    return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        if (!std::cout) throw Error(ErrorKind::Io, "failed to write standard output");
        return;
    }
    std::ofstream stream(path, std::ios::binary);
    if (!stream) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    stream << content;
    if (!stream) throw Error(ErrorKind::Io, "failed to write '" + path + "'");
}

Document load_document(const std::string& path) { return parse_document(read_input(path)); }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    return parts;
}

std::optional<double> parse_bound(const std::string& text, const std::string& flag) {
    if (text.empty()) return std::nullopt;
    const std::optional<double> value = parse_double_token(text);
    if (!value) throw Error(ErrorKind::Usage, flag + ": bound '" + text + "' is not finite");
    return value;
}

AxisInterval parse_where(const std::string& text) {
    const std::vector<std::string> parts = split(text, ':');
    if (parts.size() != 3 || parts[0].empty()) {
        throw Error(ErrorKind::Usage, "--where expects column:lower:upper, got '" + text + "'");
    }
    AxisInterval interval;
    interval.column = ColumnRef{parts[0]};
    interval.lower = parse_bound(parts[1], "--where");
    interval.upper = parse_bound(parts[2], "--where");
    return interval;
}

std::vector<double> parse_probs(const std::string& text) {
    std::vector<double> probs;
    for (const std::string& token : split(text, ',')) {
        const std::optional<double> value = parse_double_token(token);
        if (!value) throw Error(ErrorKind::Usage, "--quantiles: '" + token + "' is not finite");
        probs.push_back(*value);
    }
    return probs;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& path, double stats_tol, const std::string& format) {
    const Document doc = load_document(path);
    const std::vector<Diagnostic> diags = validate_full(doc, stats_tol);
    for (const Diagnostic& diag : diags) {
        std::cout << (format == "records" ? format_record(diag) : format_text(diag)) << "\n";
    }
    return has_errors(diags) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// inspect

std::string column_list(const CubeAxis& axis) {
    std::string out;
    for (std::size_t i = 0; i < axis.columns.size(); ++i) {
        if (i) out += ',';
        out += axis.columns[i].target;
    }
    return out;
}

void print_axis(const char* role, const CubeAxis& axis) {
    std::cout << "  " << role << "\t" << column_list(axis);
    if (axis.model_ref) std::cout << "\tmodel=" << *axis.model_ref;
    std::cout << "\n";
}

void print_metadata_map(const std::map<std::string, std::string>& values) {
    for (const auto& [role, text] : values) std::cout << "  " << role << "\t" << text << "\n";
}

int cmd_inspect(const std::string& path) {
    const Document doc = load_document(path);
    if (const std::optional<DatasetMetadata> dataset = extract_dataset(doc)) {
        std::cout << "dataset\n";
        print_metadata_map(dataset->data_id);
        print_metadata_map(dataset->curation);
        print_metadata_map(dataset->provenance);
        print_metadata_map(dataset->target);
    } else {
        std::cout << "(no dataset)\n";
    }
    const TimeSeriesCube cube = extract_cube(doc);
    std::cout << "cube\tdataProductType=" << cube.data_product_type << "\n";
    for (const CubeAxis& axis : cube.independent_axes) print_axis("independent", axis);
    for (const CubeAxis& axis : cube.dependent_axes) print_axis("dependent", axis);
    const std::vector<Quantity> quantities = extract_quantities(doc);
    std::cout << "quantities\n";
    for (const Quantity& q : quantities) {
        std::cout << "  " << q.value.target << "\terror="
                  << (q.error ? q.error->target : "none") << "\tstats="
                  << (q.stats ? "yes" : "none") << "\n";
    }
    const Table* table = find_cube_table(doc, cube);
    std::cout << "rows\t" << (table ? table->rows.size() : 0) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(const std::string& path, const std::string& column, const std::string& quantiles) {
    const Document doc = load_document(path);
    const RowSet rows = make_rowset(primary_table(doc));
    const std::vector<std::optional<double>> values = column_values(rows, ColumnRef{column});
    std::size_t count = 0;
    for (const auto& value : values) count += value.has_value();
    const Stats stats = compute_stats(values, parse_probs(quantiles));
    std::cout << "count\t" << count << "\n";
    std::cout << "mean\t" << render_double(stats.mean) << "\n";
    std::cout << "sigma\t" << render_double(stats.sigma) << "\n";
    std::cout << "min\t" << render_double(stats.minimum) << "\n";
    std::cout << "max\t" << render_double(stats.maximum) << "\n";
    for (const auto& [prob, value] : stats.quantiles) {
        std::cout << quantile_dmrole(prob) << "\t" << render_double(value) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// slice

int cmd_slice(const std::string& path, const std::vector<std::string>& wheres,
              const std::string& sigma, const std::string& out, bool keep_stats) {
    const Document doc = load_document(path);

    std::vector<AxisInterval> intervals;
    intervals.reserve(wheres.size());
    for (const std::string& text : wheres) intervals.push_back(parse_where(text));

    std::optional<SigmaSpec> band;
    if (!sigma.empty()) {
        const std::vector<std::string> parts = split(sigma, ':');
        if (parts.size() != 3 || parts[0].empty()) {
            throw Error(ErrorKind::Usage, "--sigma expects column:kmin:kmax, got '" + sigma + "'");
        }
        const std::optional<double> k_min = parse_bound(parts[1], "--sigma");
        const std::optional<double> k_max = parse_bound(parts[2], "--sigma");
        if (!k_min || !k_max) {
            throw Error(ErrorKind::Usage, "--sigma bounds must both be given");
        }
        band = SigmaSpec{ColumnRef{parts[0]}, *k_min, *k_max};
    }

    write_output(out, serialize_document(slice_document(doc, intervals, band, keep_stats)));
    return 0;
}

// ---------------------------------------------------------------------------
// export / links / generate / obscore

int cmd_export(const std::string& path, const std::string& csv_out) {
    const Document doc = load_document(path);
    write_output(csv_out, export_csv(make_rowset(primary_table(doc))));
    return 0;
}

int cmd_links(const std::string& path, const std::string& column) {
    const Document doc = load_document(path);
    const LinkScan scan = extract_links(make_rowset(primary_table(doc)), ColumnRef{column});
    for (const auto& [row, url] : scan.links) std::cout << row << "\t" << url << "\n";
    for (const auto& [row, text] : scan.warnings) {
        std::cerr << "warning: row " << row << ": not an absolute URL: " << text << "\n";
    }
    return 0;
}

int cmd_generate(const std::string& name, std::uint64_t seed, std::size_t rows,
                 const std::string& filters, const std::string& base_url,
                 const std::string& samplings, const std::string& out) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.rows = rows;
    Document doc;
    if (name == "filters" && !filters.empty()) {
        doc = gen_filter_groups(spec, split(filters, ','));
    } else if (name == "provenance" && !base_url.empty()) {
        doc = gen_provenance_lightcurve(spec, base_url);
    } else if (name == "gravwave" && !samplings.empty()) {
        std::vector<double> values;
        for (const std::string& token : split(samplings, ',')) {
            const std::optional<double> value = parse_double_token(token);
            if (!value) {
                throw Error(ErrorKind::Usage, "--samplings: '" + token + "' is not finite");
            }
            values.push_back(*value);
        }
        doc = gen_gravwave(spec, values);
    } else {
        doc = generate_case(name, spec);
    }
    write_output(out, serialize_document(doc));
    return 0;
}

int cmd_obscore(const std::string& path) {
    const Document doc = load_document(path);
    std::cout << obscore_to_row(derive_obscore(doc)) << "\n";
    return 0;
}

int cmd_parse(const std::string& path, const std::string& out) {
    write_output(out, serialize_document(load_document(path)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time series cube documents: read, validate, query, write"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    std::string in_path = "-";
    std::string out_path = "-";
    double stats_tol = 1e-9;
    std::string format = "text";
    std::string column;
    std::string quantiles = "0.25,0.5,0.75";
    std::vector<std::string> wheres;
    std::string sigma;
    bool keep_stats = false;
    std::string gen_case;
    std::uint64_t seed = 42;
    std::size_t rows = 100;
    std::string filters;
    std::string base_url;
    std::string samplings;

    CLI::App* parse = app.add_subcommand("parse", "Parse and reprint in canonical form");
    parse->add_option("file", in_path, "Input document ('-' for stdin)");
    parse->add_option("--out", out_path, "Output path ('-' for stdout)");

    CLI::App* validate = app.add_subcommand("validate", "Run the conformance rules");
    validate->add_option("file", in_path, "Input document ('-' for stdin)");
    validate->add_option("--stats-tol", stats_tol,
                         "Relative tolerance for declared statistics (default 1e-9)");
    validate->add_option("--format", format, "Diagnostic format: text or records")
        ->check(CLI::IsMember({"text", "records"}));

    CLI::App* inspect = app.add_subcommand("inspect", "Print dataset, axes, quantities, rows");
    inspect->add_option("file", in_path, "Input document ('-' for stdin)");

    CLI::App* stats = app.add_subcommand("stats", "Column statistics");
    stats->add_option("file", in_path, "Input document ('-' for stdin)");
    stats->add_option("--column", column, "Column id")->required();
    stats->add_option("--quantiles", quantiles, "Probabilities (default 0.25,0.5,0.75)");

    CLI::App* slice = app.add_subcommand("slice", "Filter rows, keep annotation");
    slice->add_option("file", in_path, "Input document ('-' for stdin)");
    slice->add_option("--where", wheres, "column:lower:upper, repeatable; empty bound = open");
    slice->add_option("--sigma", sigma,
                      "column:kmin:kmax, keep rows kmin <= |x-mean|/sigma <= kmax "
                      "(declared stats when present)");
    slice->add_flag("--keep-stats", keep_stats, "Keep declared statistics unchanged");
    slice->add_option("--out", out_path, "Output path ('-' for stdout)");

    CLI::App* export_cmd = app.add_subcommand("export", "Write table data as CSV");
    export_cmd->add_option("file", in_path, "Input document ('-' for stdin)");
    export_cmd->add_option("--csv", out_path, "CSV output path ('-' for stdout)");

    CLI::App* links = app.add_subcommand("links", "Extract absolute URLs from a text column");
    links->add_option("file", in_path, "Input document ('-' for stdin)");
    links->add_option("--column", column, "Column id")->required();

    CLI::App* generate = app.add_subcommand("generate", "Emit a seeded corpus document");
    generate->add_option("case", gen_case, "simple | filters | hardness | provenance | gravwave")
        ->required();
    generate->add_option("--seed", seed, "Generator seed (default 42)");
    generate->add_option("--rows", rows, "Row budget per case (default 100)");
    generate->add_option("--filters", filters, "filters case: comma-separated band names");
    generate->add_option("--base-url", base_url, "provenance case: cutout service URL");
    generate->add_option("--samplings", samplings, "gravwave case: comma-separated rates");
    generate->add_option("--out", out_path, "Output path ('-' for stdout)");

    CLI::App* obscore = app.add_subcommand("obscore", "Print the discovery record line");
    obscore->add_option("file", in_path, "Input document ('-' for stdin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (parse->parsed()) return cmd_parse(in_path, out_path);
        if (validate->parsed()) return cmd_validate(in_path, stats_tol, format);
        if (inspect->parsed()) return cmd_inspect(in_path);
        if (stats->parsed()) return cmd_stats(in_path, column, quantiles);
        if (slice->parsed()) return cmd_slice(in_path, wheres, sigma, out_path, keep_stats);
        if (export_cmd->parsed()) return cmd_export(in_path, out_path);
        if (links->parsed()) return cmd_links(in_path, column);
        if (generate->parsed()) {
            return cmd_generate(gen_case, seed, rows, filters, base_url, samplings, out_path);
        }
        if (obscore->parsed()) return cmd_obscore(in_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
