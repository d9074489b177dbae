#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kema/align.hpp"
#include "kema/eval.hpp"
#include "kema/graphs.hpp"
#include "kema/stability.hpp"

namespace kema {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kConfigFormatVersion = 1;

/// Dataset CSV: header label,f0,...,f{d-1}; one sample per row.
DomainDataset read_dataset_csv(const fs::path& path, const std::string& domain_id);
void write_dataset_csv(const fs::path& path, const DomainDataset& ds);

/// Square numeric CSV without header.
Matrix read_matrix_csv(const fs::path& path);
void write_matrix_csv(const fs::path& path, const Matrix& m);

// Doubles as C99 hex-float strings; exact in both directions.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const json& j);

json model_to_json(const AlignmentModel& model);
AlignmentModel model_from_json(const json& j);
void save_model(const fs::path& path, const AlignmentModel& model);
AlignmentModel load_model(const fs::path& path);

json bounds_to_json(const BoundsReport& r);

void write_eigenvalues_csv(const fs::path& path, const Vector& values);
Vector read_eigenvalues_csv(const fs::path& path);

void write_curves_csv(const fs::path& path, const std::vector<ErrorCurve>& curves);

/// Flat config grammar: first non-blank line "kema-config <version>", then
/// "key = value" lines; '#' starts a comment; keys are [a-z0-9_-]+; values
/// run to end of line with surrounding blanks trimmed.
using FlatConfig = std::map<std::string, std::string>;
FlatConfig read_config(const fs::path& path);
FlatConfig parse_config(const std::string& text);
std::string format_config(const FlatConfig& cfg);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const json& j);

struct ScatterPoint {
  double x, y;
  int group;
};

/// Minimal SVG: scatter points colored by group, optional title.
std::string svg_scatter(const std::vector<ScatterPoint>& pts, const std::string& title);
/// Minimal SVG with one polyline per series.
std::string svg_polylines(const std::vector<std::vector<std::pair<double, double>>>& series,
                          const std::vector<std::string>& names, const std::string& title);

}  // namespace kema
