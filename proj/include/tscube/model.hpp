// tscube/model.hpp - the time series cube view over a VOTable document:
// dataset metadata, cube axes and quantities, plus the annotation path that
// writes the same structures back as GROUP trees.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tscube/votable.hpp"

namespace tscube {

// ---------------------------------------------------------------------------
// dm vocabulary. dmtype matching is suffix-tolerant (final colon-separated
// token); the constants below are the spellings the annotation path writes.

namespace dm {

inline constexpr const char* kDatasetType = "ds:Dataset";
inline constexpr const char* kDataIdType = "ds:DataID";
inline constexpr const char* kCurationType = "ds:Curation";
inline constexpr const char* kProvenanceType = "ds:Provenance";
inline constexpr const char* kTargetType = "ds:Target";
inline constexpr const char* kCubeType = "ndcube:Cube";
inline constexpr const char* kAxisType = "ndcube:CubeAxis";
inline constexpr const char* kQuantityType = "q:Quantity";

inline constexpr const char* kDataProductType = "dataProductType";
inline constexpr const char* kIndependentAxes = "independent_axes";
inline constexpr const char* kDependentAxes = "dependent_axes";
inline constexpr const char* kAxis = "axis";
inline constexpr const char* kModel = "model";

inline constexpr const char* kValue = "value";
inline constexpr const char* kError = "error";
inline constexpr const char* kMean = "mean";
inline constexpr const char* kSigma = "sigma";
inline constexpr const char* kMin = "min";
inline constexpr const char* kMax = "max";
inline constexpr const char* kQuantilePrefix = "quantile.p";

inline constexpr const char* kCreator = "creator";
inline constexpr const char* kObservationId = "observationID";
inline constexpr const char* kPublisherDid = "publisherDID";
inline constexpr const char* kReleaseDate = "releaseDate";
inline constexpr const char* kFacility = "facility";
inline constexpr const char* kInstrument = "instrument";
inline constexpr const char* kTargetName = "target.name";

inline constexpr const char* kTimeSeries = "timeseries";

}  // namespace dm

// True when the dmtype's final colon-separated token equals `tail`.
bool dmtype_matches(const std::optional<std::string>& dmtype, std::string_view tail);

// Encodes a probability in [0, 1] as the dmrole "quantile.pNN" where NN is
// the probability scaled by 100 (decimal shift on the rendered text, so the
// encoding is exact: 0.25 -> "quantile.p25", 0.125 -> "quantile.p12.5").
// Refuses probabilities whose shortest rendering needs scientific notation.
std::string quantile_dmrole(double probability);

// Inverse of quantile_dmrole; nullopt when the role is not a quantile role.
std::optional<double> parse_quantile_dmrole(std::string_view dmrole);

// ---------------------------------------------------------------------------
// Model types

enum class AxisRole { Independent, Dependent };

struct CubeAxis {
    std::vector<ColumnRef> columns;  // nonempty; multi-column axes (ra+dec) allowed
    std::optional<std::string> model_ref;  // id of an axis-domain GROUP
    AxisRole role = AxisRole::Independent;

    bool operator==(const CubeAxis&) const = default;
};

struct TimeSeriesCube {
    std::string data_product_type;
    std::vector<CubeAxis> independent_axes;
    std::vector<CubeAxis> dependent_axes;

    bool operator==(const TimeSeriesCube&) const = default;
};

// True iff data_product_type is exactly "timeseries".
bool is_time_series(const TimeSeriesCube& cube);

// All axis columns in document order, independent first.
std::vector<ColumnRef> cube_columns(const TimeSeriesCube& cube);

struct Stats {
    double mean = 0.0;
    double sigma = 0.0;
    double minimum = 0.0;
    double maximum = 0.0;
    std::vector<std::pair<double, double>> quantiles;  // (probability, value)

    bool operator==(const Stats&) const = default;
};

struct Quantity {
    ColumnRef value;
    std::optional<ColumnRef> error;
    std::optional<Stats> stats;

    bool operator==(const Quantity&) const = default;
};

struct DatasetMetadata {
    std::map<std::string, std::string> data_id;     // e.g. creator, observationID
    std::map<std::string, std::string> curation;    // e.g. publisherDID, releaseDate
    std::map<std::string, std::string> provenance;  // e.g. facility, instrument
    std::map<std::string, std::string> target;      // e.g. target.name
    std::vector<TimeSeriesCube> cubes;

    bool has_metadata() const {
        return !data_id.empty() || !curation.empty() || !provenance.empty() || !target.empty();
    }
    bool operator==(const DatasetMetadata&) const = default;
};

// ---------------------------------------------------------------------------
// Extraction

// Locates the dataset GROUP, collects PARAM values by dmrole into the four
// metadata maps and extracts the contained cubes. Returns nullopt when the
// document has no dataset group (cube-only documents stay usable); throws
// Error(Structure) when more than one dataset group exists.
std::optional<DatasetMetadata> extract_dataset(const Document& doc);

// Extracts the single cube GROUP of the document. Throws Error(Structure)
// when there is no cube group or more than one, when an axis collection is
// missing or empty, and Error(Lookup) when a FIELDref does not resolve.
TimeSeriesCube extract_cube(const Document& doc);

// One Quantity per GROUP with the quantity dmtype, in document order.
// Throws on a quantity group without a value member, a value/error clash or
// unparseable/incomplete statistics.
std::vector<Quantity> extract_quantities(const Document& doc);

// The table owning the cube's first axis column, or nullptr.
const Table* find_cube_table(const Document& doc, const TimeSeriesCube& cube);

// ---------------------------------------------------------------------------
// Building

// Accumulates a single-table document. Field ids must be unique; rows are
// arity-checked against the fields defined so far.
class DocumentBuilder {
public:
    explicit DocumentBuilder(std::string table_name);

    void set_description(std::string text);
    void add_field(Field field);
    void add_param(Param param);   // table-level descriptive PARAM
    void add_group(Group group);   // table-level opaque group (axis-domain model)
    void add_row(std::vector<std::string> raw_cells);

    bool has_field(std::string_view id) const;
    const Table& table() const { return table_; }
    Table& table() { return table_; }

    // Wraps the table into VOTABLE/RESOURCE and returns the document.
    Document build() &&;

private:
    Table table_;
};

// Appends the model GROUP trees to the builder's table and builds the
// document: a dataset GROUP holding the metadata maps and one cube GROUP per
// cube (the dataset GROUP is omitted when all four maps are empty, leaving
// the cube groups at table level), plus one quantity GROUP per Quantity.
// Throws Error(Lookup) on a ColumnRef that names no Field of the builder and
// Error(Value) on invariant violations (empty axis collections, value==error,
// malformed stats).
Document annotate(DocumentBuilder&& builder, const DatasetMetadata& dataset,
                  const std::vector<Quantity>& quantities);

}  // namespace tscube
