#pragma once

// File formats shared by the command-line tools.
//
// Scan:      <name>.csv with header `alpha_deg,intensity`, plus a sidecar
//            <name>.meta.json holding circular intensities, parameters,
//            prepared state, noise settings and seed.
// Result:    tomography result JSON, complex entries as {"re", "im"}.
// Sweep:     `alpha_deg,entropy_sum,entropic_bound,deviation_product,
//            robertson_bound,coherence_sum,coherence_bound`.
// Pattern:   same CSV schema as a scan.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "valleyqt/dynamics.hpp"
#include "valleyqt/plmodel.hpp"
#include "valleyqt/tomography.hpp"
#include "valleyqt/uncertainty.hpp"

namespace valleyqt::io {

/// Shortest round-trip representation; -0 prints as 0.
std::string format_number(double x);
/// Radians in, degrees out, 12 significant digits.
std::string format_angle_deg(double rad);

std::string format_scan_csv(const PLScan& scan);
std::string format_pattern_csv(std::span<const double> angles, std::span<const double> values);

/// Fills angles (converted to radians) and intensities. Throws ParseError
/// naming the offending 1-based line.
void parse_scan_csv(std::istream& in, PLScan& scan);

nlohmann::json scan_metadata_json(const PLScan& scan);
/// Strict: unknown keys and wrong types are rejected with ParseError.
void apply_scan_metadata(const nlohmann::json& meta, PLScan& scan);

/// scan.csv -> scan.meta.json
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Reads the CSV and its sidecar; IoError when either is unreadable.
PLScan load_scan(const std::filesystem::path& csv_path);

nlohmann::json matrix_json(const ComplexMatrix2& m);
ComplexMatrix2 matrix_from_json(const nlohmann::json& j);

nlohmann::json tomography_result_json(const TomographyResult& result);

/// Accepts a tomography result (uses its "rho") or a bare 2x2 matrix.
/// Throws DomainError listing violated invariants.
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

std::string format_sweep_csv(std::span<const UncertaintyReport> reports);

nlohmann::json precession_summary_json(const PrecessionResult& result);

std::string read_file(const std::filesystem::path& path);

/// Writes every file to a temporary sibling, then renames them into place.
/// On failure nothing is left behind (IoError).
void atomic_write_files(std::span<const std::pair<std::filesystem::path, std::string>> files);

}  // namespace valleyqt::io
