#include "tscube/model.hpp"

#include <algorithm>

namespace tscube {

bool dmtype_matches(const std::optional<std::string>& dmtype, std::string_view tail) {
    if (!dmtype) return false;
    std::string_view s = *dmtype;
    if (auto pos = s.rfind(':'); pos != std::string_view::npos) s.remove_prefix(pos + 1);
    return s == tail;
}

// ---------------------------------------------------------------------------
// Quantile role encoding. The probability is scaled by 100 with a decimal
// shift on its shortest rendering, so encode/decode are exact inverses.

namespace {

// Rebuilds a decimal string from digits and the position of the decimal
// point within them (may fall outside), then trims redundant zeros.
std::string place_point(std::string digits, int point) {
    std::string text;
    if (point <= 0) {
        text = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
    } else if (static_cast<std::size_t>(point) >= digits.size()) {
        text = digits + std::string(static_cast<std::size_t>(point) - digits.size(), '0');
    } else {
        text = digits.substr(0, static_cast<std::size_t>(point)) + "." +
               digits.substr(static_cast<std::size_t>(point));
    }
    if (text.find('.') != std::string::npos) {
        while (text.back() == '0') text.pop_back();
        if (text.back() == '.') text.pop_back();
    }
    std::size_t keep = 0;
    while (keep + 1 < text.size() && text[keep] == '0' && text[keep + 1] != '.') ++keep;
    return text.substr(keep);
}

}  // namespace

std::string quantile_dmrole(double probability) {
    if (!(probability >= 0.0 && probability <= 1.0)) {
        throw Error(ErrorKind::Value,
                    "quantile probability " + render_double(probability) + " outside [0, 1]");
    }
    std::string text = render_double(probability);
    if (text.find('e') != std::string::npos || text.find('E') != std::string::npos) {
        throw Error(ErrorKind::Value,
                    "quantile probability " + text + " has no plain decimal rendering");
    }
    auto dot = text.find('.');
    std::string digits = dot == std::string::npos
                             ? text
                             : text.substr(0, dot) + text.substr(dot + 1);
    int point = static_cast<int>(dot == std::string::npos ? text.size() : dot) + 2;
    return std::string(dm::kQuantilePrefix) + place_point(std::move(digits), point);
}

std::optional<double> parse_quantile_dmrole(std::string_view dmrole) {
    std::string_view prefix = dm::kQuantilePrefix;
    if (dmrole.substr(0, prefix.size()) != prefix) return std::nullopt;
    std::string_view body = dmrole.substr(prefix.size());
    if (body.empty()) throw Error(ErrorKind::Value, "empty quantile probability in dmrole");
    std::string digits;
    int dot = -1;
    for (char c : body) {
        if (c == '.' && dot < 0) {
            dot = static_cast<int>(digits.size());
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
        } else {
            throw Error(ErrorKind::Value,
                        "bad quantile dmrole '" + std::string(dmrole) + "'");
        }
    }
    int point = (dot < 0 ? static_cast<int>(digits.size()) : dot) - 2;
    auto value = parse_double_token(place_point(std::move(digits), point));
    if (!value || *value > 1.0) {
        throw Error(ErrorKind::Value, "quantile probability outside [0, 1] in dmrole '" +
                                          std::string(dmrole) + "'");
    }
    return *value;
}

// ---------------------------------------------------------------------------
// Model helpers

bool is_time_series(const TimeSeriesCube& cube) {
    return cube.data_product_type == dm::kTimeSeries;
}

std::vector<ColumnRef> cube_columns(const TimeSeriesCube& cube) {
    std::vector<ColumnRef> columns;
    for (const CubeAxis& axis : cube.independent_axes) {
        columns.insert(columns.end(), axis.columns.begin(), axis.columns.end());
    }
    for (const CubeAxis& axis : cube.dependent_axes) {
        columns.insert(columns.end(), axis.columns.begin(), axis.columns.end());
    }
    return columns;
}

const Table* find_cube_table(const Document& doc, const TimeSeriesCube& cube) {
    std::vector<ColumnRef> columns = cube_columns(cube);
    if (columns.empty()) return nullptr;
    return locate_field(doc, columns.front().target).first;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

std::vector<const Group*> groups_with_dmtype(const Document& doc, std::string_view tail) {
    std::vector<const Group*> found;
    for_each_group(doc, [&](const Group& group, const std::string&) {
        if (dmtype_matches(group.dmtype, tail)) found.push_back(&group);
    });
    return found;
}

bool dmrole_is(const std::optional<std::string>& dmrole, std::string_view role) {
    return dmrole && *dmrole == role;
}

// The PARAM carrying a dmrole within a group, following a ParamRef if the
// value is stored at table level.
const Param* find_role_param(const Group& group, const Document& doc, std::string_view role) {
    for (const GroupItem& item : group.members) {
        if (const Param* p = std::get_if<Param>(&item.node)) {
            if (dmrole_is(p->dmrole, role)) return p;
        } else if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) {
            if (!dmrole_is(pr->dmrole, role)) continue;
            RefTarget target = resolve_ref(doc, pr->ref);
            if (const Param* const* p = std::get_if<const Param*>(&target)) return *p;
            throw Error(ErrorKind::Lookup,
                        "PARAMref '" + pr->ref + "' does not resolve to a PARAM");
        }
    }
    return nullptr;
}

const Field& resolve_field(const Document& doc, const std::string& ref, const char* what) {
    RefTarget target = resolve_ref(doc, ref);
    if (const Field* const* field = std::get_if<const Field*>(&target)) return **field;
    throw Error(ErrorKind::Lookup,
                std::string(what) + " '" + ref + "' does not resolve to a FIELD");
}

CubeAxis extract_axis(const Group& axis_group, const Document& doc, AxisRole role) {
    CubeAxis axis;
    axis.role = role;
    for (const GroupItem& item : axis_group.members) {
        if (const FieldRef* fr = std::get_if<FieldRef>(&item.node)) {
            resolve_field(doc, fr->ref, "axis column");
            axis.columns.push_back(ColumnRef{fr->ref});
        } else if (const GroupRef* gr = std::get_if<GroupRef>(&item.node)) {
            if (axis.model_ref) {
                throw Error(ErrorKind::Structure, "axis group has multiple model references");
            }
            RefTarget target = resolve_ref(doc, gr->ref);
            if (!std::holds_alternative<const Group*>(target)) {
                throw Error(ErrorKind::Lookup,
                            "axis model '" + gr->ref + "' does not resolve to a GROUP");
            }
            axis.model_ref = gr->ref;
        }
    }
    if (axis.columns.empty()) {
        throw Error(ErrorKind::Structure, "axis group references no columns");
    }
    return axis;
}

std::vector<CubeAxis> extract_axis_collection(const Group& cube_group, const Document& doc,
                                              const char* collection_role, AxisRole role) {
    const Group* collection = nullptr;
    for (const GroupItem& item : cube_group.members) {
        const Group* g = std::get_if<Group>(&item.node);
        if (!g || !dmrole_is(g->dmrole, collection_role)) continue;
        if (collection) {
            throw Error(ErrorKind::Structure,
                        std::string("cube group has multiple ") + collection_role +
                            " collections");
        }
        collection = g;
    }
    if (!collection) {
        throw Error(ErrorKind::Structure,
                    std::string("cube group lacks the ") + collection_role + " collection");
    }
    std::vector<CubeAxis> axes;
    for (const GroupItem& item : collection->members) {
        if (const Group* g = std::get_if<Group>(&item.node)) {
            axes.push_back(extract_axis(*g, doc, role));
        }
    }
    if (axes.empty()) {
        throw Error(ErrorKind::Structure,
                    std::string("the ") + collection_role + " collection holds no axes");
    }
    return axes;
}

TimeSeriesCube extract_cube_group(const Group& cube_group, const Document& doc) {
    TimeSeriesCube cube;
    const Param* dpt = find_role_param(cube_group, doc, dm::kDataProductType);
    if (!dpt) {
        throw Error(ErrorKind::Structure, "cube group has no dataProductType member");
    }
    cube.data_product_type = dpt->value;
    cube.independent_axes =
        extract_axis_collection(cube_group, doc, dm::kIndependentAxes, AxisRole::Independent);
    cube.dependent_axes =
        extract_axis_collection(cube_group, doc, dm::kDependentAxes, AxisRole::Dependent);
    return cube;
}

// Routes a dataset-level PARAM into one of the four metadata maps by its
// dmrole; unknown roles land in data_id verbatim.
std::map<std::string, std::string>* map_for_role(DatasetMetadata& meta, std::string_view role) {
    if (role == dm::kCreator || role == dm::kObservationId) return &meta.data_id;
    if (role == dm::kPublisherDid || role == dm::kReleaseDate) return &meta.curation;
    if (role == dm::kFacility || role == dm::kInstrument) return &meta.provenance;
    if (role == dm::kTargetName || role.substr(0, 7) == "target.") return &meta.target;
    return &meta.data_id;
}

void insert_role(std::map<std::string, std::string>& map, const std::string& role,
                 const std::string& value) {
    auto [it, fresh] = map.emplace(role, value);
    if (!fresh) {
        throw Error(ErrorKind::Structure, "duplicate dataset role '" + role + "'");
    }
}

void collect_metadata_params(const Group& group, std::map<std::string, std::string>& map) {
    for (const GroupItem& item : group.members) {
        const Param* p = std::get_if<Param>(&item.node);
        if (p && p->dmrole) insert_role(map, *p->dmrole, p->value);
    }
}

}  // namespace

std::optional<DatasetMetadata> extract_dataset(const Document& doc) {
    std::vector<const Group*> groups = groups_with_dmtype(doc, "Dataset");
    if (groups.empty()) return std::nullopt;
    if (groups.size() > 1) {
        throw Error(ErrorKind::Structure,
                    std::to_string(groups.size()) + " dataset groups found, expected one");
    }
    const Group& dataset_group = *groups.front();

    DatasetMetadata meta;
    for (const GroupItem& item : dataset_group.members) {
        if (const Param* p = std::get_if<Param>(&item.node)) {
            if (p->dmrole) insert_role(*map_for_role(meta, *p->dmrole), *p->dmrole, p->value);
        } else if (const Group* g = std::get_if<Group>(&item.node)) {
            if (dmtype_matches(g->dmtype, "DataID")) {
                collect_metadata_params(*g, meta.data_id);
            } else if (dmtype_matches(g->dmtype, "Curation")) {
                collect_metadata_params(*g, meta.curation);
            } else if (dmtype_matches(g->dmtype, "Provenance")) {
                collect_metadata_params(*g, meta.provenance);
            } else if (dmtype_matches(g->dmtype, "Target")) {
                collect_metadata_params(*g, meta.target);
            } else if (dmtype_matches(g->dmtype, "Cube")) {
                meta.cubes.push_back(extract_cube_group(*g, doc));
            }
        }
    }
    return meta;
}

TimeSeriesCube extract_cube(const Document& doc) {
    std::vector<const Group*> groups = groups_with_dmtype(doc, "Cube");
    if (groups.empty()) {
        throw Error(ErrorKind::Structure, "no cube group found");
    }
    if (groups.size() > 1) {
        throw Error(ErrorKind::Structure,
                    std::to_string(groups.size()) + " cube groups found, expected one");
    }
    return extract_cube_group(*groups.front(), doc);
}

namespace {

double parse_stat_value(const Param& param, const std::string& role) {
    std::optional<double> value;
    try {
        value = parse_double_token(param.value);
    } catch (const Error&) {
        value = std::nullopt;
    }
    if (!value) {
        throw Error(ErrorKind::Value,
                    "quantity statistic '" + role + "' value '" + param.value +
                        "' is not a finite number");
    }
    return *value;
}

void check_stats(const Stats& stats) {
    if (stats.sigma < 0) {
        throw Error(ErrorKind::Value, "quantity sigma is negative");
    }
    for (std::size_t i = 0; i < stats.quantiles.size(); ++i) {
        const auto& [p, v] = stats.quantiles[i];
        if (i > 0 && !(stats.quantiles[i - 1].first < p)) {
            throw Error(ErrorKind::Value, "quantile probabilities are not strictly increasing");
        }
        if (v < stats.minimum || v > stats.maximum) {
            throw Error(ErrorKind::Value,
                        "quantile value " + render_double(v) + " outside [min, max]");
        }
    }
}

Quantity extract_quantity_group(const Group& group, const Document& doc) {
    Quantity quantity;
    bool have_value = false;
    bool have_mean = false, have_sigma = false, have_min = false, have_max = false;
    Stats stats;

    auto take_stat = [&](const Param& param, const std::string& role) {
        if (role == dm::kMean) {
            stats.mean = parse_stat_value(param, role);
            have_mean = true;
        } else if (role == dm::kSigma) {
            stats.sigma = parse_stat_value(param, role);
            have_sigma = true;
        } else if (role == dm::kMin) {
            stats.minimum = parse_stat_value(param, role);
            have_min = true;
        } else if (role == dm::kMax) {
            stats.maximum = parse_stat_value(param, role);
            have_max = true;
        } else if (auto p = parse_quantile_dmrole(role)) {
            stats.quantiles.emplace_back(*p, parse_stat_value(param, role));
        }
    };

    for (const GroupItem& item : group.members) {
        if (const FieldRef* fr = std::get_if<FieldRef>(&item.node)) {
            if (dmrole_is(fr->dmrole, dm::kValue)) {
                if (have_value) {
                    throw Error(ErrorKind::Structure, "quantity group has two value members");
                }
                resolve_field(doc, fr->ref, "quantity value column");
                quantity.value = ColumnRef{fr->ref};
                have_value = true;
            } else if (dmrole_is(fr->dmrole, dm::kError)) {
                if (quantity.error) {
                    throw Error(ErrorKind::Structure, "quantity group has two error members");
                }
                resolve_field(doc, fr->ref, "quantity error column");
                quantity.error = ColumnRef{fr->ref};
            }
        } else if (const Param* p = std::get_if<Param>(&item.node)) {
            if (p->dmrole) take_stat(*p, *p->dmrole);
        } else if (const ParamRef* pr = std::get_if<ParamRef>(&item.node)) {
            if (!pr->dmrole) continue;
            RefTarget target = resolve_ref(doc, pr->ref);
            if (const Param* const* p = std::get_if<const Param*>(&target)) {
                take_stat(**p, *pr->dmrole);
            } else {
                throw Error(ErrorKind::Lookup,
                            "PARAMref '" + pr->ref + "' does not resolve to a PARAM");
            }
        }
    }

    if (!have_value) {
        throw Error(ErrorKind::Structure, "quantity group has no value member");
    }
    if (quantity.error && quantity.error->target == quantity.value.target) {
        throw Error(ErrorKind::Value, "quantity value and error reference the same column '" +
                                          quantity.value.target + "'");
    }
    bool any_stat = have_mean || have_sigma || have_min || have_max || !stats.quantiles.empty();
    if (any_stat) {
        if (!have_mean || !have_sigma || !have_min || !have_max) {
            std::string missing = !have_mean    ? dm::kMean
                                  : !have_sigma ? dm::kSigma
                                  : !have_min   ? dm::kMin
                                                : dm::kMax;
            throw Error(ErrorKind::Value, "incomplete quantity statistics: missing '" +
                                              missing + "'");
        }
        check_stats(stats);
        quantity.stats = std::move(stats);
    }
    return quantity;
}

}  // namespace

std::vector<Quantity> extract_quantities(const Document& doc) {
    std::vector<Quantity> quantities;
    for (const Group* group : groups_with_dmtype(doc, "Quantity")) {
        quantities.push_back(extract_quantity_group(*group, doc));
    }
    return quantities;
}

// ---------------------------------------------------------------------------
// Building

DocumentBuilder::DocumentBuilder(std::string table_name) { table_.name = std::move(table_name); }

void DocumentBuilder::set_description(std::string text) { table_.description = std::move(text); }

void DocumentBuilder::add_field(Field field) {
    if (field.id.empty()) {
        throw Error(ErrorKind::Value, "field id must be nonempty");
    }
    if (has_field(field.id)) {
        throw Error(ErrorKind::Structure, "duplicate id '" + field.id + "'");
    }
    if (field.name.empty()) field.name = field.id;
    table_.fields.push_back(std::move(field));
}

void DocumentBuilder::add_param(Param param) { table_.params.push_back(std::move(param)); }

void DocumentBuilder::add_group(Group group) { table_.groups.push_back(std::move(group)); }

void DocumentBuilder::add_row(std::vector<std::string> raw_cells) {
    if (raw_cells.size() != table_.fields.size()) {
        throw Error(ErrorKind::Structure,
                    "row has " + std::to_string(raw_cells.size()) + " cells, table has " +
                        std::to_string(table_.fields.size()) + " fields");
    }
    Row row;
    row.cells.reserve(raw_cells.size());
    for (std::string& raw : raw_cells) row.cells.push_back(make_cell(std::move(raw)));
    table_.rows.push_back(std::move(row));
}

bool DocumentBuilder::has_field(std::string_view id) const {
    return std::any_of(table_.fields.begin(), table_.fields.end(),
                       [&](const Field& f) { return f.id == id; });
}

Document DocumentBuilder::build() && {
    Document doc;
    Resource resource;
    resource.tables.push_back(std::move(table_));
    doc.resources.push_back(std::move(resource));
    return doc;
}

namespace {

Param text_param(std::string name, std::string value, std::string dmrole) {
    Param param;
    param.name = std::move(name);
    param.datatype = Datatype::Text;
    param.value = std::move(value);
    param.dmrole = std::move(dmrole);
    return param;
}

Param stat_param(std::string dmrole, double value) {
    Param param;
    param.name = dmrole;
    param.datatype = Datatype::Float64;
    param.value = render_double(value);
    param.dmrole = std::move(dmrole);
    return param;
}

Group metadata_group(const char* dmtype, const std::map<std::string, std::string>& map) {
    Group group;
    group.dmtype = dmtype;
    for (const auto& [role, value] : map) {
        group.members.push_back(GroupItem{text_param(role, value, role)});
    }
    return group;
}

class Annotator {
public:
    explicit Annotator(DocumentBuilder& builder) : builder_(builder) {}

    Group cube_group(const TimeSeriesCube& cube) {
        check_disjointness(cube);
        Group group;
        group.dmtype = dm::kCubeType;
        group.members.push_back(GroupItem{text_param(
            dm::kDataProductType, cube.data_product_type, dm::kDataProductType)});
        group.members.push_back(
            GroupItem{axis_collection(dm::kIndependentAxes, cube.independent_axes,
                                      AxisRole::Independent)});
        group.members.push_back(GroupItem{
            axis_collection(dm::kDependentAxes, cube.dependent_axes, AxisRole::Dependent)});
        return group;
    }

    Group quantity_group(const Quantity& quantity) {
        require_field(quantity.value.target, "quantity value column");
        Group group;
        group.dmtype = dm::kQuantityType;
        group.members.push_back(GroupItem{FieldRef{quantity.value.target, dm::kValue, {}}});
        if (quantity.error) {
            require_field(quantity.error->target, "quantity error column");
            if (quantity.error->target == quantity.value.target) {
                throw Error(ErrorKind::Value,
                            "quantity value and error reference the same column '" +
                                quantity.value.target + "'");
            }
            group.members.push_back(GroupItem{FieldRef{quantity.error->target, dm::kError, {}}});
        }
        if (quantity.stats) {
            check_stats(*quantity.stats);
            group.members.push_back(GroupItem{stat_param(dm::kMean, quantity.stats->mean)});
            group.members.push_back(GroupItem{stat_param(dm::kSigma, quantity.stats->sigma)});
            group.members.push_back(GroupItem{stat_param(dm::kMin, quantity.stats->minimum)});
            group.members.push_back(GroupItem{stat_param(dm::kMax, quantity.stats->maximum)});
            for (const auto& [p, v] : quantity.stats->quantiles) {
                group.members.push_back(GroupItem{stat_param(quantile_dmrole(p), v)});
            }
        }
        return group;
    }

private:
    DocumentBuilder& builder_;

    static void check_disjointness(const TimeSeriesCube& cube) {
        std::vector<std::string> independent;
        for (const CubeAxis& axis : cube.independent_axes) {
            for (const ColumnRef& column : axis.columns) independent.push_back(column.target);
        }
        for (const CubeAxis& axis : cube.dependent_axes) {
            for (const ColumnRef& column : axis.columns) {
                if (std::find(independent.begin(), independent.end(), column.target) !=
                    independent.end()) {
                    throw Error(ErrorKind::Value, "column '" + column.target +
                                                      "' appears on both axis collections");
                }
            }
        }
    }

    void require_field(const std::string& id, const char* what) {
        if (!builder_.has_field(id)) {
            throw Error(ErrorKind::Lookup,
                        std::string(what) + " '" + id + "' is not defined in the table");
        }
    }

    Group axis_group(const CubeAxis& axis, AxisRole collection_role) {
        if (axis.columns.empty()) {
            throw Error(ErrorKind::Value, "axis has no columns");
        }
        if (axis.role != collection_role) {
            throw Error(ErrorKind::Value, "axis role does not match its collection");
        }
        Group group;
        group.dmtype = dm::kAxisType;
        group.dmrole = dm::kAxis;
        for (const ColumnRef& column : axis.columns) {
            require_field(column.target, "axis column");
            group.members.push_back(GroupItem{FieldRef{column.target, std::nullopt, {}}});
        }
        if (axis.model_ref) {
            bool defined = std::any_of(
                builder_.table().groups.begin(), builder_.table().groups.end(),
                [&](const Group& g) { return g.id && *g.id == *axis.model_ref; });
            if (!defined) {
                throw Error(ErrorKind::Lookup, "axis model group '" + *axis.model_ref +
                                                   "' is not defined in the table");
            }
            group.members.push_back(GroupItem{GroupRef{*axis.model_ref, dm::kModel, {}}});
        }
        return group;
    }

    Group axis_collection(const char* dmrole, const std::vector<CubeAxis>& axes, AxisRole role) {
        if (axes.empty()) {
            throw Error(ErrorKind::Value,
                        std::string("the ") + dmrole + " collection must not be empty");
        }
        Group group;
        group.dmrole = dmrole;
        for (const CubeAxis& axis : axes) {
            group.members.push_back(GroupItem{axis_group(axis, role)});
        }
        return group;
    }
};

}  // namespace

Document annotate(DocumentBuilder&& builder, const DatasetMetadata& dataset,
                  const std::vector<Quantity>& quantities) {
    Annotator annotator(builder);

    std::vector<Group> cube_groups;
    cube_groups.reserve(dataset.cubes.size());
    for (const TimeSeriesCube& cube : dataset.cubes) {
        cube_groups.push_back(annotator.cube_group(cube));
    }

    if (dataset.has_metadata()) {
        Group group;
        group.dmtype = dm::kDatasetType;
        if (!dataset.data_id.empty()) {
            group.members.push_back(GroupItem{metadata_group(dm::kDataIdType, dataset.data_id)});
        }
        if (!dataset.curation.empty()) {
            group.members.push_back(
                GroupItem{metadata_group(dm::kCurationType, dataset.curation)});
        }
        if (!dataset.provenance.empty()) {
            group.members.push_back(
                GroupItem{metadata_group(dm::kProvenanceType, dataset.provenance)});
        }
        if (!dataset.target.empty()) {
            group.members.push_back(GroupItem{metadata_group(dm::kTargetType, dataset.target)});
        }
        for (Group& cube_group : cube_groups) {
            group.members.push_back(GroupItem{std::move(cube_group)});
        }
        builder.add_group(std::move(group));
    } else {
        for (Group& cube_group : cube_groups) {
            builder.add_group(std::move(cube_group));
        }
    }

    for (const Quantity& quantity : quantities) {
        builder.add_group(annotator.quantity_group(quantity));
    }
    return std::move(builder).build();
}

}  // namespace tscube
