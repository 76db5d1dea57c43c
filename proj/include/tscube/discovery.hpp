#pragma once

// ObsCore-style discovery record derived from a cube document: the axis
// lengths a client wants before downloading, plus the dataset identifiers.

#include <cstddef>
#include <optional>
#include <string>

#include "tscube/model.hpp"
#include "tscube/votable.hpp"

namespace tscube {

// Discovery-relevant classes of an independent axis.
enum class AxisClass { Time, Spectral, Spatial, Other };

// Classifies by the ucd prefix of the axis columns ("time.", "em.", "pos."),
// falling back to well-known column ids (hjd, filter, ra, ...) when no ucd
// prefix matches. The first column that yields a class decides.
AxisClass classify_axis(const CubeAxis& axis, const Table& table);

struct ObsCoreRecord {
    std::string dataproduct_type;
    std::optional<std::string> obs_id;
    std::optional<std::string> obs_publisher_did;
    std::optional<std::string> target_name;
    std::size_t t_xel = 0;
    std::size_t s_xel = 0;
    std::size_t em_xel = 0;

    bool operator==(const ObsCoreRecord&) const = default;
};

// Derives the discovery record: dataproduct_type from the cube; t_xel,
// em_xel, s_xel as the count of distinct non-null coordinate tuples of the
// first independent axis of each class (0 when absent); identifiers copied
// from the dataset metadata when present. Throws like extract_cube when the
// document has no extractable cube.
ObsCoreRecord derive_obscore(const Document& doc);

// One tab-separated line, no trailing newline, fixed column order:
// dataproduct_type, obs_id, obs_publisher_did, target_name, t_xel, s_xel,
// em_xel. Absent optionals render as empty slots; counts as decimal.
std::string obscore_to_row(const ObsCoreRecord& rec);

}  // namespace tscube
