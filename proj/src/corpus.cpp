#include "tscube/corpus.hpp"

#include <cmath>
#include <random>

#include "tscube/cube_ops.hpp"
#include "tscube/model.hpp"

namespace tscube {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Thin deterministic wrapper: all draws go through the same two functions so
// the value stream is pinned by the engine alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in (0, 1].
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
    }

    // Standard normal via Box-Muller (cosine branch only, no cached spare).
    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 engine_;
};

void check_spec(const GeneratorSpec& spec) {
    if (spec.rows < 1) {
        throw Error(ErrorKind::Value, "generator spec requires rows >= 1");
    }
}

Field make_field(std::string id, Datatype datatype, std::optional<std::string> unit,
                 std::optional<std::string> ucd) {
    Field field;
    field.id = std::move(id);
    field.name = field.id;
    field.datatype = datatype;
    field.unit = std::move(unit);
    field.ucd = std::move(ucd);
    return field;
}

Param plain_param(std::string name, std::string value, std::optional<std::string> unit) {
    Param param;
    param.name = std::move(name);
    param.datatype = Datatype::Text;
    param.value = std::move(value);
    param.unit = std::move(unit);
    return param;
}

Group model_group(std::string id, std::string dmtype,
                  std::vector<std::pair<std::string, std::string>> params) {
    Group group;
    group.id = std::move(id);
    group.name = group.id;
    group.dmtype = std::move(dmtype);
    for (auto& [name, value] : params) {
        group.members.push_back(
            GroupItem{plain_param(std::move(name), std::move(value), std::nullopt)});
    }
    return group;
}

CubeAxis axis(std::vector<std::string> columns, std::optional<std::string> model_ref,
              AxisRole role) {
    CubeAxis out;
    for (std::string& column : columns) out.columns.push_back(ColumnRef{std::move(column)});
    out.model_ref = std::move(model_ref);
    out.role = role;
    return out;
}

const std::vector<double> kQuantileProbs = {0.25, 0.5, 0.75};

// Statistics for a generated column, computed with the library's own oracle
// over the exact values that were written.
Stats column_stats(const std::vector<double>& values) {
    std::vector<std::optional<double>> boxed(values.begin(), values.end());
    return compute_stats(boxed, kQuantileProbs);
}

DatasetMetadata base_dataset(const std::string& case_tag, const GeneratorSpec& spec) {
    DatasetMetadata meta;
    const std::string seed_text = std::to_string(spec.seed);
    meta.data_id[dm::kCreator] = "Time Series Cube Corpus";
    meta.data_id[dm::kObservationId] = case_tag + "-" + seed_text;
    meta.curation[dm::kPublisherDid] = "ivo://example.org/tscube/" + case_tag + "#" + seed_text;
    meta.curation[dm::kReleaseDate] = "2020-01-01";
    meta.provenance[dm::kFacility] = "Synthetic Survey Telescope";
    meta.provenance[dm::kInstrument] = "SynthCam";
    meta.target[dm::kTargetName] = "SYN-" + std::to_string(spec.seed % 100000);
    return meta;
}

// Shared value model for the light-curve family.
struct LightCurveData {
    std::vector<double> hjd, ra, dec, flux, flux_error, mag, mag_error;
};

LightCurveData light_curve_data(const GeneratorSpec& spec, Rng& rng, bool drifting_position,
                                double band_offset = 0.0) {
    LightCurveData data;
    const double ra0 = 120.0 + 120.0 * rng.uniform();
    const double dec0 = -45.0 + 90.0 * rng.uniform();
    const double period = 12.0 + 8.0 * rng.uniform();
    for (std::size_t i = 0; i < spec.rows; ++i) {
        const double t = static_cast<double>(i);
        data.hjd.push_back(2455197.5 + 0.25 * t + 0.01 * rng.uniform());
        data.ra.push_back(drifting_position ? ra0 + 1e-5 * t : ra0);
        data.dec.push_back(drifting_position ? dec0 + 1e-5 * t : dec0);
        const double phase = std::sin(2.0 * kPi * t / period);
        const double flux = 1000.0 * (1.0 + 0.3 * phase) * (1.0 + band_offset) +
                            5.0 * rng.gaussian();
        data.flux.push_back(flux);
        data.flux_error.push_back(1.0 + std::fabs(rng.gaussian()));
        data.mag.push_back(15.0 - 2.5 * std::log10(flux / 1000.0) + 0.01 * rng.gaussian());
        data.mag_error.push_back(0.005 + 0.01 * std::fabs(rng.gaussian()));
    }
    return data;
}

void add_light_curve_fields(DocumentBuilder& builder) {
    builder.add_field(make_field("hjd", Datatype::Float64, "d", "time.epoch"));
    builder.add_field(make_field("ra", Datatype::Float64, "deg", "pos.eq.ra"));
    builder.add_field(make_field("dec", Datatype::Float64, "deg", "pos.eq.dec"));
    builder.add_field(make_field("flux", Datatype::Float64, "mJy", "phot.flux.density"));
    builder.add_field(
        make_field("flux_error", Datatype::Float64, "mJy", "stat.error;phot.flux.density"));
    builder.add_field(make_field("mag", Datatype::Float64, "mag", "phot.mag"));
    builder.add_field(make_field("mag_error", Datatype::Float64, "mag", "stat.error;phot.mag"));
}

void add_frame_groups(DocumentBuilder& builder) {
    builder.add_group(model_group("time_frame", "stc:TimeFrame",
                                  {{"timescale", "TT"}, {"refposition", "HELIOCENTER"}}));
    builder.add_group(model_group("space_frame", "stc:SpaceFrame",
                                  {{"frame", "ICRS"}, {"equinox", "J2000"}}));
}

Quantity quantity(std::string value, std::optional<std::string> error,
                  std::optional<Stats> stats) {
    Quantity q;
    q.value = ColumnRef{std::move(value)};
    if (error) q.error = ColumnRef{std::move(*error)};
    q.stats = std::move(stats);
    return q;
}

}  // namespace

Document gen_simple_lightcurve(const GeneratorSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    const LightCurveData data = light_curve_data(spec, rng, /*drifting_position=*/false);

    DocumentBuilder builder("simple_lightcurve");
    builder.set_description("Synthetic single-band light curve of one object.");
    add_light_curve_fields(builder);
    add_frame_groups(builder);
    builder.add_group(model_group("phot_system", "phot:PhotometryFilter",
                                  {{"bandName", "V"}, {"zeroPointFlux", "3631"}}));
    for (std::size_t i = 0; i < spec.rows; ++i) {
        builder.add_row({render_double(data.hjd[i]), render_double(data.ra[i]),
                         render_double(data.dec[i]), render_double(data.flux[i]),
                         render_double(data.flux_error[i]), render_double(data.mag[i]),
                         render_double(data.mag_error[i])});
    }

    DatasetMetadata meta = base_dataset("simple-lc", spec);
    TimeSeriesCube cube;
    cube.data_product_type = dm::kTimeSeries;
    cube.independent_axes = {axis({"hjd"}, "time_frame", AxisRole::Independent),
                             axis({"ra", "dec"}, "space_frame", AxisRole::Independent)};
    cube.dependent_axes = {axis({"flux"}, std::nullopt, AxisRole::Dependent),
                           axis({"mag"}, "phot_system", AxisRole::Dependent)};
    meta.cubes.push_back(std::move(cube));

    std::vector<Quantity> quantities = {
        quantity("flux", "flux_error", column_stats(data.flux)),
        quantity("mag", "mag_error", column_stats(data.mag)),
    };
    return annotate(std::move(builder), meta, quantities);
}

Document gen_filter_groups(const GeneratorSpec& spec, const std::vector<std::string>& filters) {
    check_spec(spec);
    if (filters.empty()) {
        throw Error(ErrorKind::Value, "filter list must not be empty");
    }
    Rng rng(spec.seed);

    DocumentBuilder builder("filter_groups");
    builder.set_description("Synthetic light curves of one object across photometric bands.");
    add_light_curve_fields(builder);
    builder.add_field(make_field("filter", Datatype::Text, std::nullopt, "instr.bandpass"));
    add_frame_groups(builder);
    std::vector<std::pair<std::string, std::string>> band_params;
    for (std::size_t f = 0; f < filters.size(); ++f) {
        band_params.emplace_back("band_" + std::to_string(f), filters[f]);
    }
    builder.add_group(model_group("filter_set", "phot:PhotometryFilter", std::move(band_params)));

    // One base curve per band, sharing the epoch grid.
    std::vector<LightCurveData> bands;
    bands.reserve(filters.size());
    {
        Rng epoch_rng(spec.seed);
        LightCurveData epochs = light_curve_data(spec, epoch_rng, false);
        for (std::size_t f = 0; f < filters.size(); ++f) {
            Rng band_rng(spec.seed + 1 + f);
            LightCurveData band =
                light_curve_data(spec, band_rng, false, 0.15 * static_cast<double>(f));
            band.hjd = epochs.hjd;
            band.ra = epochs.ra;
            band.dec = epochs.dec;
            bands.push_back(std::move(band));
        }
    }

    std::vector<double> flux_values, mag_values;
    for (std::size_t i = 0; i < spec.rows; ++i) {
        for (std::size_t f = 0; f < filters.size(); ++f) {
            const LightCurveData& band = bands[f];
            builder.add_row({render_double(band.hjd[i]), render_double(band.ra[i]),
                             render_double(band.dec[i]), render_double(band.flux[i]),
                             render_double(band.flux_error[i]), render_double(band.mag[i]),
                             render_double(band.mag_error[i]), filters[f]});
            flux_values.push_back(band.flux[i]);
            mag_values.push_back(band.mag[i]);
        }
    }

    DatasetMetadata meta = base_dataset("filter-groups", spec);
    TimeSeriesCube cube;
    cube.data_product_type = dm::kTimeSeries;
    cube.independent_axes = {axis({"hjd"}, "time_frame", AxisRole::Independent),
                             axis({"ra", "dec"}, "space_frame", AxisRole::Independent),
                             axis({"filter"}, "filter_set", AxisRole::Independent)};
    cube.dependent_axes = {axis({"flux"}, std::nullopt, AxisRole::Dependent),
                           axis({"mag"}, std::nullopt, AxisRole::Dependent)};
    meta.cubes.push_back(std::move(cube));

    std::vector<Quantity> quantities = {
        quantity("flux", "flux_error", column_stats(flux_values)),
        quantity("mag", "mag_error", column_stats(mag_values)),
        quantity("filter", std::nullopt, std::nullopt),
    };
    return annotate(std::move(builder), meta, quantities);
}

Document gen_hardness_ratio(const GeneratorSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);

    DocumentBuilder builder("hardness_ratio_series");
    builder.set_description(
        "Synthetic hardness ratio series; the ratio axis has no standardized model yet.");
    builder.add_field(make_field("time", Datatype::Float64, "d", "time.epoch"));
    // The ratio column deliberately carries no ucd (no standard model yet);
    // the empty unit marks it dimensionless.
    builder.add_field(make_field("hardnessRatio", Datatype::Float64, "", std::nullopt));
    builder.add_field(make_field("hr_error", Datatype::Float64, "", "stat.error"));
    builder.add_param(plain_param("soft_band", "0.5-2.0", "keV"));
    builder.add_param(plain_param("hard_band", "2.0-7.0", "keV"));
    builder.add_group(model_group("time_frame", "stc:TimeFrame",
                                  {{"timescale", "TT"}, {"refposition", "GEOCENTER"}}));

    std::vector<double> ratios;
    const double period = 6.0 + 6.0 * rng.uniform();
    for (std::size_t i = 0; i < spec.rows; ++i) {
        const double t = 58000.0 + 0.5 * static_cast<double>(i) + 0.005 * rng.uniform();
        double hr = 0.6 * std::sin(2.0 * kPi * static_cast<double>(i) / period) +
                    0.1 * rng.gaussian();
        hr = std::max(-0.95, std::min(0.95, hr));
        const double err = 0.02 + 0.03 * std::fabs(rng.gaussian());
        builder.add_row({render_double(t), render_double(hr), render_double(err)});
        ratios.push_back(hr);
    }

    DatasetMetadata meta = base_dataset("hardness", spec);
    TimeSeriesCube cube;
    cube.data_product_type = dm::kTimeSeries;
    cube.independent_axes = {axis({"time"}, "time_frame", AxisRole::Independent)};
    cube.dependent_axes = {axis({"hardnessRatio"}, std::nullopt, AxisRole::Dependent)};
    meta.cubes.push_back(std::move(cube));

    std::vector<Quantity> quantities = {
        quantity("hardnessRatio", "hr_error", column_stats(ratios)),
    };
    return annotate(std::move(builder), meta, quantities);
}

Document gen_provenance_lightcurve(const GeneratorSpec& spec, const std::string& base_url) {
    check_spec(spec);
    if (!is_absolute_url(base_url)) {
        throw Error(ErrorKind::Value, "base URL '" + base_url + "' is not an absolute URL");
    }
    Rng rng(spec.seed);
    const LightCurveData data = light_curve_data(spec, rng, /*drifting_position=*/true);

    DocumentBuilder builder("provenance_lightcurve");
    builder.set_description(
        "Synthetic light curve with per-row links to the originating image cutouts.");
    add_light_curve_fields(builder);
    builder.add_field(make_field("siap_link", Datatype::Text, std::nullopt, "meta.ref.url"));
    add_frame_groups(builder);

    for (std::size_t i = 0; i < spec.rows; ++i) {
        std::string url = base_url;
        if (url.back() != '?' && url.back() != '&') {
            url += url.find('?') == std::string::npos ? "?" : "&";
        }
        url += "POS=" + render_double(data.ra[i]) + "," + render_double(data.dec[i]) +
               "&SIZE=0.05";
        builder.add_row({render_double(data.hjd[i]), render_double(data.ra[i]),
                         render_double(data.dec[i]), render_double(data.flux[i]),
                         render_double(data.flux_error[i]), render_double(data.mag[i]),
                         render_double(data.mag_error[i]), url});
    }

    DatasetMetadata meta = base_dataset("provenance-lc", spec);
    TimeSeriesCube cube;
    cube.data_product_type = dm::kTimeSeries;
    cube.independent_axes = {axis({"hjd"}, "time_frame", AxisRole::Independent),
                             axis({"ra", "dec"}, "space_frame", AxisRole::Independent)};
    cube.dependent_axes = {axis({"flux"}, std::nullopt, AxisRole::Dependent),
                           axis({"mag"}, std::nullopt, AxisRole::Dependent)};
    meta.cubes.push_back(std::move(cube));

    std::vector<Quantity> quantities = {
        quantity("flux", "flux_error", column_stats(data.flux)),
        quantity("mag", "mag_error", column_stats(data.mag)),
    };
    return annotate(std::move(builder), meta, quantities);
}

Document gen_gravwave(const GeneratorSpec& spec, const std::vector<double>& samplings) {
    check_spec(spec);
    if (samplings.empty()) {
        throw Error(ErrorKind::Value, "sampling list must not be empty");
    }
    Rng rng(spec.seed);

    DocumentBuilder builder("gravwave_spectrum");
    builder.set_description(
        "Synthetic amplitude spectral density across frequency and sampling rate.");
    builder.add_field(make_field("frequency", Datatype::Float64, "Hz", "time.frequency"));
    builder.add_field(make_field("sampling_frequency", Datatype::Float64, "Hz", "instr.param"));
    builder.add_field(make_field("asd", Datatype::Float64, "Hz**-0.5", "stat.value"));

    std::vector<double> frequencies;
    for (std::size_t i = 0; i < spec.rows; ++i) {
        double exponent =
            spec.rows == 1
                ? 1.0
                : 1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(spec.rows - 1);
        // Snap near-integer exponents so decade points land exactly (100 Hz).
        if (std::fabs(exponent - std::round(exponent)) < 1e-9) {
            exponent = std::round(exponent);
        }
        frequencies.push_back(std::pow(10.0, exponent));
    }

    std::vector<double> asd_values;
    for (double frequency : frequencies) {
        for (double sampling : samplings) {
            const double shape = 1.0 + 40.0 / frequency + frequency / 2000.0;
            const double asd = 1e-23 * shape * (1.0 + 0.05 * std::fabs(rng.gaussian()));
            builder.add_row({render_double(frequency), render_double(sampling),
                             render_double(asd)});
            asd_values.push_back(asd);
        }
    }

    DatasetMetadata meta = base_dataset("gravwave", spec);
    meta.provenance[dm::kFacility] = "Synthetic Interferometer";
    meta.provenance[dm::kInstrument] = "SynthIFO";
    TimeSeriesCube cube;
    cube.data_product_type = dm::kTimeSeries;
    cube.independent_axes = {axis({"frequency"}, std::nullopt, AxisRole::Independent),
                             axis({"sampling_frequency"}, std::nullopt, AxisRole::Independent)};
    cube.dependent_axes = {axis({"asd"}, std::nullopt, AxisRole::Dependent)};
    meta.cubes.push_back(std::move(cube));

    std::vector<Quantity> quantities = {
        quantity("asd", std::nullopt, column_stats(asd_values)),
    };
    return annotate(std::move(builder), meta, quantities);
}

const std::vector<std::string>& corpus_case_names() {
    static const std::vector<std::string> names = {"simple", "filters", "hardness", "provenance",
                                                   "gravwave"};
    return names;
}

Document generate_case(const std::string& name, const GeneratorSpec& spec) {
    if (name == "simple") return gen_simple_lightcurve(spec);
    if (name == "filters") return gen_filter_groups(spec, {"U", "B", "V", "R", "I"});
    if (name == "hardness") return gen_hardness_ratio(spec);
    if (name == "provenance") {
        return gen_provenance_lightcurve(spec, "https://siap.example.org/cutout");
    }
    if (name == "gravwave") return gen_gravwave(spec, {4096.0, 16384.0});
    throw Error(ErrorKind::Usage, "unknown corpus case '" + name + "'");
}

}  // namespace tscube
