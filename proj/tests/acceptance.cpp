// Acceptance gate: eight end-to-end criteria over the library and the CLI.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mutate.hpp"
#include "oracles.hpp"
#include "tscube/corpus.hpp"
#include "tscube/cube_ops.hpp"
#include "tscube/discovery.hpp"
#include "tscube/model.hpp"
#include "tscube/validate.hpp"
#include "tscube/votable.hpp"

using namespace tscube;

namespace {

struct Criterion {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (ok && !condition) {
            ok = false;
            detail = what;
        }
    }
};

GeneratorSpec spec_of(std::uint64_t seed, std::size_t rows) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.rows = rows;
    return spec;
}

bool annotation_group(const Group& group) {
    return dmtype_matches(group.dmtype, "Dataset") || dmtype_matches(group.dmtype, "Cube") ||
           dmtype_matches(group.dmtype, "Quantity");
}

// Rebuilds the document from its table content plus the extracted model;
// extract/annotate is an identity when the re-extracted model is unchanged.
bool model_identity(const Document& doc, std::string& detail) {
    const Table& table = doc.resources.at(0).tables.at(0);
    DocumentBuilder builder(table.name.value_or("table"));
    if (table.description) builder.set_description(*table.description);
    for (const Field& field : table.fields) builder.add_field(field);
    for (const Param& param : table.params) builder.add_param(param);
    for (const Group& group : table.groups) {
        if (!annotation_group(group)) builder.add_group(group);
    }
    for (const Row& row : table.rows) {
        std::vector<std::string> cells;
        for (const Cell& cell : row.cells) cells.push_back(cell.raw);
        builder.add_row(std::move(cells));
    }

    const std::optional<DatasetMetadata> dataset = extract_dataset(doc);
    DatasetMetadata meta = dataset.value_or(DatasetMetadata{});
    if (meta.cubes.empty()) meta.cubes.push_back(extract_cube(doc));
    const std::vector<Quantity> quantities = extract_quantities(doc);

    const Document rebuilt = annotate(std::move(builder), meta, quantities);
    if (extract_dataset(rebuilt) != dataset) {
        detail = "dataset metadata changed across annotate/extract";
        return false;
    }
    if (extract_cube(rebuilt) != extract_cube(doc)) {
        detail = "cube changed across annotate/extract";
        return false;
    }
    if (extract_quantities(rebuilt) != quantities) {
        detail = "quantities changed across annotate/extract";
        return false;
    }
    return true;
}

Criterion criterion_roundtrip() {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    std::size_t count = 0;
    for (std::uint64_t seed = 1; seed <= 40 && c.ok; ++seed) {
        for (const std::string& name : corpus_case_names()) {
            const GeneratorSpec spec = spec_of(seed, 3 + seed % 28);
            const Document doc = generate_case(name, spec);
            ++count;
            const std::string bytes = serialize_document(doc);
            if (parse_document(bytes) != doc) {
                c.require(false, name + " seed " + std::to_string(seed) +
                                     ": parse(serialize(doc)) != doc");
                break;
            }
            std::string detail;
            if (!model_identity(doc, detail)) {
                c.require(false, name + " seed " + std::to_string(seed) + ": " + detail);
                break;
            }
        }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(count >= 200, "only " + std::to_string(count) + " documents exercised");
    c.require(elapsed < 30.0, "round trips took " + std::to_string(elapsed) + "s");
    return c;
}

Criterion criterion_structure() {
    Criterion c;

    const Document simple = gen_simple_lightcurve(spec_of(17, 12));
    const TimeSeriesCube cube = extract_cube(simple);
    const Table& table = *find_cube_table(simple, cube);
    c.require(cube.independent_axes.size() == 2, "simple: expected 2 independent axes");
    if (c.ok) {
        c.require(classify_axis(cube.independent_axes[0], table) == AxisClass::Time,
                  "simple: first independent axis is not temporal");
        c.require(classify_axis(cube.independent_axes[1], table) == AxisClass::Spatial,
                  "simple: second independent axis is not spatial");
    }
    c.require(cube.dependent_axes.size() == 2, "simple: expected 2 dependent axes");
    const std::vector<Quantity> quantities = extract_quantities(simple);
    c.require(quantities.size() == 2, "simple: expected 2 quantities");
    for (const Quantity& q : quantities) {
        c.require(q.error.has_value(), "simple: quantity " + q.value.target + " lacks an error");
    }
    if (c.ok) {
        c.require(quantities[0].value.target == "flux" && quantities[1].value.target == "mag",
                  "simple: quantities are not flux and mag");
    }

    const Document ubvri = generate_case("filters", spec_of(17, 10));
    const ObsCoreRecord rec = derive_obscore(ubvri);
    c.require(rec.em_xel == 5, "filters: spectral axis has " + std::to_string(rec.em_xel) +
                                   " distinct values, expected 5");

    const Document gw = generate_case("gravwave", spec_of(17, 10));
    const TimeSeriesCube gw_cube = extract_cube(gw);
    c.require(gw_cube.independent_axes.size() == 2 &&
                  gw_cube.independent_axes[0].columns == std::vector<ColumnRef>{{"frequency"}} &&
                  gw_cube.independent_axes[1].columns ==
                      std::vector<ColumnRef>{{"sampling_frequency"}},
              "gravwave: independent axes are not {frequency, sampling_frequency}");
    const Table& gw_table = *find_cube_table(gw, gw_cube);
    std::set<std::string> samplings;
    bool decade_row = false;
    for (const Row& row : gw_table.rows) {
        samplings.insert(row.cells[1].raw);
        if (row.cells[0].raw == "100" && row.cells[1].raw == "4096") decade_row = true;
    }
    c.require(samplings == std::set<std::string>{"16384", "4096"},
              "gravwave: sampling values are not {4096, 16384}");
    c.require(decade_row, "gravwave: no row at (100 Hz, 4096 Hz)");
    return c;
}

Criterion criterion_mutations() {
    Criterion c;
    std::set<std::string> covered;
    for (const mutate::Mutation& mutation : mutate::catalog()) {
        Document doc = mutation.base();
        std::vector<std::string> baseline;
        for (const Diagnostic& d : validate_full(doc, 1e-9)) baseline.push_back(d.code);
        mutation.apply(doc);
        std::vector<std::string> mutated;
        for (const Diagnostic& d : validate_full(doc, 1e-9)) mutated.push_back(d.code);
        baseline.push_back(mutation.code);
        std::sort(baseline.begin(), baseline.end());
        std::sort(mutated.begin(), mutated.end());
        if (mutated != baseline) {
            std::string got;
            for (const std::string& code : mutated) got += code + " ";
            c.require(false, mutation.code + " mutation produced {" + got + "}");
            break;
        }
        covered.insert(mutation.code);
    }
    c.require(covered.size() >= 8,
              "only " + std::to_string(covered.size()) + " rule codes covered");
    for (std::uint64_t seed = 1; seed <= 3 && c.ok; ++seed) {
        for (const std::string& name : corpus_case_names()) {
            if (has_errors(validate_full(generate_case(name, spec_of(seed, 10)), 1e-9))) {
                c.require(false, name + " seed " + std::to_string(seed) + " has errors");
                break;
            }
        }
    }
    return c;
}

Criterion criterion_stats_oracle() {
    Criterion c;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> length(1, 10000);
    std::uniform_real_distribution<double> value(-1e6, 1e6);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::vector<double> probs = {0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0};

    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        std::size_t n = trial == 0 ? 1 : trial == 1 ? 10000 : length(rng);
        const bool ties = coin(rng) < 0.3;
        std::vector<std::optional<double>> values;
        values.reserve(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (coin(rng) < 0.05) {
                values.push_back(std::nullopt);
            } else {
                double v = value(rng);
                if (ties) v = std::round(v / 1e4) * 1e4;
                values.push_back(v);
                any = true;
            }
        }
        if (!any) values.push_back(1.25);

        const Stats got = compute_stats(values, probs);
        const oracle::BruteStats want = oracle::brute_stats(values, probs);
        const std::string at = "trial " + std::to_string(trial);
        c.require(oracle::close(got.mean, want.mean), at + ": mean deviates");
        c.require(oracle::close(got.sigma, want.sigma), at + ": sigma deviates");
        c.require(got.minimum == want.minimum && got.maximum == want.maximum,
                  at + ": extrema deviate");
        for (std::size_t i = 0; i < probs.size() && c.ok; ++i) {
            c.require(oracle::close(got.quantiles[i].second, want.quantile_values[i]),
                      at + ": quantile p" + std::to_string(probs[i]) + " deviates");
        }
    }
    return c;
}

Criterion criterion_slice_oracle() {
    Criterion c;
    RowSet rows;
    Field x;
    x.id = "x";
    x.name = "x";
    x.datatype = Datatype::Float64;
    Field y = x;
    y.id = "y";
    y.name = "y";
    rows.fields = {x, y};

    std::mt19937_64 rng(4096);
    std::uniform_real_distribution<double> xd(-100.0, 100.0);
    std::normal_distribution<double> yd(10.0, 4.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t i = 0; i < 1000; ++i) {
        Row row;
        row.cells.push_back(coin(rng) < 0.05 ? make_cell("") : make_cell(render_double(xd(rng))));
        row.cells.push_back(coin(rng) < 0.05 ? make_cell("") : make_cell(render_double(yd(rng))));
        rows.rows.push_back(row);
    }

    auto numeric = [](const Cell& cell) -> std::optional<double> {
        if (cell.null || cell.raw.empty()) return std::nullopt;
        return parse_double_token(cell.raw);
    };

    std::uniform_real_distribution<double> bound(-120.0, 120.0);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        std::vector<AxisInterval> intervals;
        const int arity = 1 + static_cast<int>(coin(rng) * 2.0);
        for (int i = 0; i < arity; ++i) {
            AxisInterval interval;
            interval.column = ColumnRef{coin(rng) < 0.5 ? "x" : "y"};
            double a = bound(rng), b = bound(rng);
            if (a > b) std::swap(a, b);
            if (coin(rng) < 0.75) interval.lower = a;
            if (coin(rng) < 0.75) interval.upper = b;
            intervals.push_back(interval);
        }

        const RowSet got = slice(rows, intervals);
        std::vector<Row> want;
        for (const Row& row : rows.rows) {
            bool keep = true;
            for (const AxisInterval& interval : intervals) {
                const std::size_t index = interval.column.target == "x" ? 0 : 1;
                const auto v = numeric(row.cells[index]);
                if (!v || (interval.lower && *v < *interval.lower) ||
                    (interval.upper && *v > *interval.upper)) {
                    keep = false;
                    break;
                }
            }
            if (keep) want.push_back(row);
        }
        c.require(got.rows == want, "slice trial " + std::to_string(trial) + " diverged");
    }

    const Stats stats = compute_stats(column_values(rows, ColumnRef{"y"}), {});
    std::uniform_real_distribution<double> kd(0.0, 5.0);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        double k_min = trial == 0 ? 3.0 : kd(rng);
        double k_max = trial == 0 ? 5.0 : kd(rng);
        if (k_min > k_max) std::swap(k_min, k_max);
        const RowSet got = sigma_filter(rows, ColumnRef{"y"}, stats, k_min, k_max);
        std::vector<Row> want;
        for (const Row& row : rows.rows) {
            const auto v = numeric(row.cells[1]);
            if (!v) continue;
            const double k = std::fabs(*v - stats.mean) / stats.sigma;
            if (k >= k_min && k <= k_max) want.push_back(row);
        }
        c.require(got.rows == want, "sigma trial " + std::to_string(trial) + " diverged");
    }
    return c;
}

std::size_t brute_xel(const CubeAxis& axis, const Table& table) {
    std::vector<std::size_t> indices;
    for (const ColumnRef& column : axis.columns) {
        for (std::size_t i = 0; i < table.fields.size(); ++i) {
            if (table.fields[i].id == column.target) indices.push_back(i);
        }
    }
    std::vector<std::vector<std::string>> tuples;
    for (const Row& row : table.rows) {
        std::vector<std::string> tuple;
        bool null = false;
        for (std::size_t index : indices) {
            const Cell& cell = row.cells[index];
            if (cell.null || cell.raw.empty()) null = true;
            tuple.push_back(cell.raw);
        }
        if (!null) tuples.push_back(tuple);
    }
    return oracle::distinct(tuples);
}

Criterion criterion_discovery_counts() {
    Criterion c;
    for (std::uint64_t seed = 1; seed <= 4 && c.ok; ++seed) {
        for (const std::string& name : corpus_case_names()) {
            Document doc = generate_case(name, spec_of(seed, 12));
            const ObsCoreRecord rec = derive_obscore(doc);

            const TimeSeriesCube cube = extract_cube(doc);
            const Table& table = *find_cube_table(doc, cube);
            std::size_t t = 0, s = 0, em = 0;
            bool t_seen = false, s_seen = false, em_seen = false;
            for (const CubeAxis& axis : cube.independent_axes) {
                switch (classify_axis(axis, table)) {
                    case AxisClass::Time:
                        if (!t_seen) t = brute_xel(axis, table);
                        t_seen = true;
                        break;
                    case AxisClass::Spatial:
                        if (!s_seen) s = brute_xel(axis, table);
                        s_seen = true;
                        break;
                    case AxisClass::Spectral:
                        if (!em_seen) em = brute_xel(axis, table);
                        em_seen = true;
                        break;
                    case AxisClass::Other:
                        break;
                }
            }
            const std::string at = name + " seed " + std::to_string(seed);
            c.require(rec.t_xel == t && rec.s_xel == s && rec.em_xel == em,
                      at + ": counts differ from brute force");

            Table& mutable_table = doc.resources[0].tables[0];
            const std::vector<Row> copy = mutable_table.rows;
            mutable_table.rows.insert(mutable_table.rows.end(), copy.begin(), copy.end());
            c.require(derive_obscore(doc) == rec, at + ": duplicated rows changed a count");
            if (!c.ok) break;
        }
    }
    return c;
}

Criterion criterion_provenance() {
    Criterion c;
    for (std::uint64_t seed = 1; seed <= 5 && c.ok; ++seed) {
        Document doc = gen_provenance_lightcurve(spec_of(seed, 15), "https://siap.example.org/q");
        const RowSet rows = make_rowset(*find_cube_table(doc, extract_cube(doc)));
        const auto ra = column_values(rows, ColumnRef{"ra"});
        const auto dec = column_values(rows, ColumnRef{"dec"});
        const LinkScan scan = extract_links(rows, ColumnRef{"siap_link"});
        const std::string at = "seed " + std::to_string(seed);

        c.require(scan.warnings.empty(), at + ": some links are not absolute URLs");
        c.require(scan.links.size() == rows.rows.size(),
                  at + ": expected one link per non-null row");
        for (const auto& [row, url] : scan.links) {
            const bool has_ra = url.find(render_double(*ra[row])) != std::string::npos;
            const bool has_dec = url.find(render_double(*dec[row])) != std::string::npos;
            c.require(has_ra && has_dec,
                      at + " row " + std::to_string(row) + ": URL lacks its coordinates");
            if (!c.ok) break;
        }

        const std::vector<ColumnRef> columns = cube_columns(extract_cube(doc));
        for (const ColumnRef& column : columns) {
            c.require(column.target != "siap_link", at + ": link column sits on a cube axis");
        }

        Table& table = doc.resources[0].tables[0];
        std::size_t link_index = 0;
        for (std::size_t i = 0; i < table.fields.size(); ++i) {
            if (table.fields[i].id == "siap_link") link_index = i;
        }
        table.rows[0].cells[link_index] = make_cell("");
        const LinkScan pruned =
            extract_links(make_rowset(table), ColumnRef{"siap_link"});
        c.require(pruned.links.size() == rows.rows.size() - 1,
                  at + ": null link cell still produced an entry");
    }
    return c;
}

int run_command(const std::string& command) {
    const int rc = std::system(command.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream stream(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    return buffer.str();
}

Criterion criterion_cli_pipeline() {
    Criterion c;
    const std::string cli = std::string("'") + TSCUBE_CLI_PATH + "'";
    const auto dir = std::filesystem::temp_directory_path();
    const std::string tag = "tscube_acceptance_" + std::to_string(::getpid());

    for (const std::string& name : corpus_case_names()) {
        const std::string in = (dir / (tag + "_" + name + "_in.xml")).string();
        const std::string sliced = (dir / (tag + "_" + name + "_sliced.xml")).string();
        const std::string csv = (dir / (tag + "_" + name + "_out.csv")).string();

        const Document preview = generate_case(name, spec_of(23, 16));
        const std::string first_column =
            cube_columns(extract_cube(preview)).at(0).target;

        const std::vector<std::string> steps = {
            cli + " generate " + name + " --seed 23 --rows 16 --out '" + in + "'",
            cli + " validate '" + in + "' > /dev/null",
            cli + " slice '" + in + "' --where " + first_column + ":: --out '" + sliced + "'",
            cli + " validate '" + sliced + "' > /dev/null",
            cli + " export '" + sliced + "' --csv '" + csv + "'",
        };
        for (const std::string& step : steps) {
            const int status = run_command(step);
            c.require(status == 0,
                      name + ": exit " + std::to_string(status) + " from: " + step);
            if (!c.ok) break;
        }
        if (!c.ok) break;

        const Document doc = parse_document(read_file(sliced));
        const Table& table = primary_table(doc);
        const auto records = oracle::parse_csv(read_file(csv));
        c.require(records.size() == table.rows.size() + 1,
                  name + ": CSV record count mismatch");
        if (!c.ok) break;
        for (std::size_t r = 0; r < table.rows.size() && c.ok; ++r) {
            c.require(records[r + 1].size() == table.fields.size(),
                      name + ": CSV row " + std::to_string(r) + " arity mismatch");
            for (std::size_t i = 0; i < table.fields.size() && c.ok; ++i) {
                const Cell& cell = table.rows[r].cells[i];
                std::string want;
                if (!cell.null && !cell.raw.empty()) {
                    switch (table.fields[i].datatype) {
                        case Datatype::Float64:
                            want = render_double(*parse_double_token(cell.raw));
                            break;
                        case Datatype::Int64:
                            want = render_int(parse_int_token(cell.raw));
                            break;
                        case Datatype::Bool:
                            want = parse_bool_token(cell.raw) ? "true" : "false";
                            break;
                        case Datatype::Text:
                            want = cell.raw;
                            break;
                    }
                }
                c.require(records[r + 1][i] == want,
                          name + ": CSV cell (" + std::to_string(r) + "," + std::to_string(i) +
                              ") is '" + records[r + 1][i] + "', expected '" + want + "'");
            }
        }

        std::filesystem::remove(in);
        std::filesystem::remove(sliced);
        std::filesystem::remove(csv);
    }
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* label;
        Criterion (*run)();
    };
    const Entry entries[] = {
        {"round-trip identity over 200 seeded corpus documents", criterion_roundtrip},
        {"structure fidelity of the simple, filter and gravwave cases", criterion_structure},
        {"each rule code triggered by exactly its targeted mutation", criterion_mutations},
        {"compute_stats matches the brute-force oracle on 1000 vectors", criterion_stats_oracle},
        {"slice and sigma_filter match naive predicate evaluation", criterion_slice_oracle},
        {"discovery counts equal brute-force distinct tuples", criterion_discovery_counts},
        {"provenance links embed coordinates and stay off the axes", criterion_provenance},
        {"CLI generate/validate/slice/validate/export round trip", criterion_cli_pipeline},
    };

    bool all_ok = true;
    int index = 1;
    for (const Entry& entry : entries) {
        const Criterion result = entry.run();
        std::cout << (result.ok ? "PASS" : "FAIL") << " " << index << " " << entry.label << "\n";
        if (!result.ok) {
            std::cout << "       " << result.detail << "\n";
            all_ok = false;
        }
        ++index;
    }
    return all_ok ? 0 : 1;
}
