// tscube/corpus.hpp - deterministic, seedable generators for the five
// science-case document families. Same spec, same bytes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tscube/votable.hpp"

namespace tscube {

struct GeneratorSpec {
    std::uint64_t seed = 0;
    std::size_t rows = 1;  // >= 1; for gravwave this is the frequency point count
};

// Light curve of one object: fields (hjd, ra, dec, flux, flux_error, mag,
// mag_error); independent axes time (hjd) and position (ra, dec), dependent
// axes flux and mag, each described by a Quantity with an error column and
// computed statistics.
Document gen_simple_lightcurve(const GeneratorSpec& spec);

// Simple light curve plus a text spectral axis of filter names; rows
// enumerate time x filter. The filter Quantity carries only a value member.
// Throws Error(Value) on an empty filter list.
Document gen_filter_groups(const GeneratorSpec& spec, const std::vector<std::string>& filters);

// Generic time series: time plus a dimensionless hardnessRatio axis whose
// FIELD deliberately lacks a ucd and whose axis has no model reference;
// ad-hoc metadata rides in plain table PARAMs.
Document gen_hardness_ratio(const GeneratorSpec& spec);

// Simple light curve with drifting coordinates plus a siap_link column whose
// URL embeds each row's ra/dec; the link column stays outside the cube.
// Throws Error(Value) when base_url is not an absolute URL.
Document gen_provenance_lightcurve(const GeneratorSpec& spec, const std::string& base_url);

// Frequency-based series: independent axes frequency (log-spaced across
// 10^1..10^4 Hz) and sampling_frequency, dependent asd; one row per
// (frequency x sampling). Throws Error(Value) on empty samplings.
Document gen_gravwave(const GeneratorSpec& spec, const std::vector<double>& samplings);

// Case names accepted by generate_case and the CLI: "simple", "filters",
// "hardness", "provenance", "gravwave".
const std::vector<std::string>& corpus_case_names();

// Dispatches by case name using the documented default parameters
// (filters U,B,V,R,I; base URL https://siap.example.org/cutout;
// samplings 4096, 16384). Throws Error(Usage) on an unknown name.
Document generate_case(const std::string& name, const GeneratorSpec& spec);

}  // namespace tscube
