#pragma once

#include "ocd/applications.hpp"
#include "ocd/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ocd {

/// Sample matrices as CSV: one header line naming the columns (x1,...,xn),
/// then one row per sample. Values are written in the shortest decimal form
/// that reads back to the same double. LF and CRLF line endings are accepted.
/// Parse failures throw ParseError naming the line and column; unreadable
/// files throw IoError.
Matrix parse_samples_csv(std::string_view text, std::string_view source = "<memory>");
Matrix read_samples_csv(const std::string& path);
std::string format_samples_csv(const Matrix& m, std::string_view prefix = "x");
void write_samples_csv(const Matrix& m, const std::string& path, std::string_view prefix = "x");

/// Pairs (x_i, y_i) as 2n columns x1..xn,y1..yn.
void write_pairs_csv(const Matrix& x, const Matrix& y, const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// PPM (P6 binary or P3 ASCII, maxval <= 255) read into [0, 1] RGB rows.
ImageSamples read_ppm(const std::string& path);
/// Writes P6 (binary = true) or P3; channels are clamped and rounded to 0..255.
void write_ppm(const ImageSamples& image, const std::string& path, bool binary = true);

/// PGM (P5 or P2) as a height x width intensity matrix in [0, 1].
SquareMatrix read_pgm(const std::string& path);
void write_pgm(const SquareMatrix& image, const std::string& path, bool binary = true);

/// One diagnostics record as a JSON object with keys step, time, cost,
/// min_sym_eig, drift_x, drift_y, n_clusters_x, n_clusters_y.
nlohmann::json diagnostics_json(const StepDiagnostics& d);
void write_diagnostics_line(std::ostream& out, const StepDiagnostics& d);

nlohmann::json config_json(const SolverConfig& config);
SolverConfig config_from_json(const nlohmann::json& j);

inline constexpr std::string_view kManifestFormat = "ocd-manifest/1";

/// Everything needed to repeat a CLI run: the subcommand, its resolved
/// options, input files and the output directory.
struct RunManifest {
  std::string command;
  SolverConfig config;
  std::map<std::string, std::string> inputs;
  std::string output_dir;
  nlohmann::json options = nlohmann::json::object();
};

nlohmann::json manifest_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

/// Whole file as a string; IoError if it cannot be read.
std::string read_text_file(const std::string& path);
/// Writes (or replaces) a file; IoError on failure.
void write_text_file(const std::string& path, std::string_view content);

}  // namespace ocd
