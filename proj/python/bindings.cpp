// _tscube - python face of the library. Documents cross the boundary as XML
// text; structured results come back as plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tscube/corpus.hpp"
#include "tscube/cube_ops.hpp"
#include "tscube/discovery.hpp"
#include "tscube/model.hpp"
#include "tscube/validate.hpp"
#include "tscube/votable.hpp"

namespace py = pybind11;
using namespace tscube;

namespace {

py::dict stats_dict(const Stats& stats) {
    py::dict out;
    out["mean"] = stats.mean;
    out["sigma"] = stats.sigma;
    out["min"] = stats.minimum;
    out["max"] = stats.maximum;
    py::list quantiles;
    for (const auto& [prob, value] : stats.quantiles) {
        quantiles.append(py::make_tuple(prob, value));
    }
    out["quantiles"] = quantiles;
    return out;
}

py::dict axis_dict(const CubeAxis& axis) {
    py::dict out;
    py::list columns;
    for (const ColumnRef& column : axis.columns) columns.append(column.target);
    out["columns"] = columns;
    out["model"] = axis.model_ref ? py::cast(*axis.model_ref) : py::none();
    out["role"] = axis.role == AxisRole::Independent ? "independent" : "dependent";
    return out;
}

py::dict map_dict(const std::map<std::string, std::string>& values) {
    py::dict out;
    for (const auto& [key, value] : values) out[py::str(key)] = value;
    return out;
}

std::string py_canonical(const std::string& xml) {
    return serialize_document(parse_document(xml));
}

py::list py_validate(const std::string& xml, double stats_tol) {
    const Document doc = parse_document(xml);
    py::list out;
    for (const Diagnostic& diag : validate_full(doc, stats_tol)) {
        py::dict entry;
        entry["severity"] = diag.severity == Severity::Error     ? "error"
                            : diag.severity == Severity::Warning ? "warning"
                                                                 : "info";
        entry["code"] = diag.code;
        entry["location"] = diag.location;
        entry["message"] = diag.message;
        out.append(entry);
    }
    return out;
}

std::string py_generate(const std::string& name, std::uint64_t seed, std::size_t rows) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.rows = rows;
    return serialize_document(generate_case(name, spec));
}

py::dict py_describe(const std::string& xml) {
    const Document doc = parse_document(xml);
    py::dict out;
    if (const std::optional<DatasetMetadata> dataset = extract_dataset(doc)) {
        py::dict meta;
        meta["data_id"] = map_dict(dataset->data_id);
        meta["curation"] = map_dict(dataset->curation);
        meta["provenance"] = map_dict(dataset->provenance);
        meta["target"] = map_dict(dataset->target);
        out["dataset"] = meta;
    } else {
        out["dataset"] = py::none();
    }
    const TimeSeriesCube cube = extract_cube(doc);
    out["dataproduct_type"] = cube.data_product_type;
    py::list axes;
    for (const CubeAxis& axis : cube.independent_axes) axes.append(axis_dict(axis));
    for (const CubeAxis& axis : cube.dependent_axes) axes.append(axis_dict(axis));
    out["axes"] = axes;
    py::list quantities;
    for (const Quantity& q : extract_quantities(doc)) {
        py::dict entry;
        entry["value"] = q.value.target;
        entry["error"] = q.error ? py::cast(q.error->target) : py::none();
        entry["stats"] = q.stats ? stats_dict(*q.stats) : py::dict();
        if (!q.stats) entry["stats"] = py::none();
        quantities.append(entry);
    }
    out["quantities"] = quantities;
    const Table* table = find_cube_table(doc, cube);
    out["rows"] = table ? table->rows.size() : std::size_t{0};
    return out;
}

py::dict py_stats(const std::string& xml, const std::string& column,
                  const std::vector<double>& probs) {
    const Document doc = parse_document(xml);
    const RowSet rows = make_rowset(primary_table(doc));
    return stats_dict(compute_stats(column_values(rows, ColumnRef{column}), probs));
}

std::string py_slice(const std::string& xml,
                     const std::vector<std::tuple<std::string, std::optional<double>,
                                                  std::optional<double>>>& wheres,
                     const std::optional<std::tuple<std::string, double, double>>& sigma,
                     bool keep_stats) {
    const Document doc = parse_document(xml);
    std::vector<AxisInterval> intervals;
    intervals.reserve(wheres.size());
    for (const auto& [column, lower, upper] : wheres) {
        intervals.push_back(AxisInterval{ColumnRef{column}, lower, upper});
    }
    std::optional<SigmaSpec> band;
    if (sigma) {
        band = SigmaSpec{ColumnRef{std::get<0>(*sigma)}, std::get<1>(*sigma),
                         std::get<2>(*sigma)};
    }
    return serialize_document(slice_document(doc, intervals, band, keep_stats));
}

std::string py_export_csv(const std::string& xml) {
    const Document doc = parse_document(xml);
    return export_csv(make_rowset(primary_table(doc)));
}

py::list py_links(const std::string& xml, const std::string& column) {
    const Document doc = parse_document(xml);
    const LinkScan scan = extract_links(make_rowset(primary_table(doc)), ColumnRef{column});
    py::list out;
    for (const auto& [row, url] : scan.links) out.append(py::make_tuple(row, url));
    return out;
}

py::dict py_obscore(const std::string& xml) {
    const ObsCoreRecord rec = derive_obscore(parse_document(xml));
    py::dict out;
    out["dataproduct_type"] = rec.dataproduct_type;
    out["obs_id"] = rec.obs_id ? py::cast(*rec.obs_id) : py::none();
    out["obs_publisher_did"] =
        rec.obs_publisher_did ? py::cast(*rec.obs_publisher_did) : py::none();
    out["target_name"] = rec.target_name ? py::cast(*rec.target_name) : py::none();
    out["t_xel"] = rec.t_xel;
    out["s_xel"] = rec.s_xel;
    out["em_xel"] = rec.em_xel;
    return out;
}

std::string py_obscore_row(const std::string& xml) {
    return obscore_to_row(derive_obscore(parse_document(xml)));
}

py::dict py_compute_stats(const std::vector<std::optional<double>>& values,
                          const std::vector<double>& probs) {
    return stats_dict(compute_stats(values, probs));
}

}  // namespace

PYBIND11_MODULE(_tscube, m) {
    m.doc() = "Time series cube documents: read, validate, query, write";

    py::register_exception<Error>(m, "TscubeError");

    m.def("canonical", &py_canonical, py::arg("xml"),
          "Parse and reserialize in canonical form.");
    m.def("validate", &py_validate, py::arg("xml"), py::arg("stats_tol") = 1e-9,
          "Run the conformance rules; one dict per diagnostic.");
    m.def("generate", &py_generate, py::arg("case"), py::arg("seed") = 42,
          py::arg("rows") = 100, "Seeded corpus document as XML.");
    m.def("describe", &py_describe, py::arg("xml"),
          "Dataset metadata, axes, quantities and row count.");
    m.def("stats", &py_stats, py::arg("xml"), py::arg("column"),
          py::arg("quantiles") = std::vector<double>{0.25, 0.5, 0.75},
          "Statistics of one column of the primary table.");
    m.def("compute_stats", &py_compute_stats, py::arg("values"), py::arg("quantiles"),
          "Statistics of a value list (None = null).");
    m.def("slice", &py_slice, py::arg("xml"),
          py::arg("where") = std::vector<
              std::tuple<std::string, std::optional<double>, std::optional<double>>>{},
          py::arg("sigma") = std::nullopt, py::arg("keep_stats") = false,
          "Filter rows by closed intervals and a sigma band; returns XML.");
    m.def("export_csv", &py_export_csv, py::arg("xml"), "Primary table as CSV.");
    m.def("links", &py_links, py::arg("xml"), py::arg("column"),
          "(row, url) pairs of absolute URLs in a text column.");
    m.def("obscore", &py_obscore, py::arg("xml"), "Discovery record as a dict.");
    m.def("obscore_row", &py_obscore_row, py::arg("xml"),
          "Discovery record as the tab-separated line.");
    m.def("case_names", [] { return corpus_case_names(); }, "Known corpus case names.");
}
