#pragma once

// Artifact persistence: CSV tables, binary trace arrays with JSON sidecars,
// JSON-lines logs, gnuplot-ready column dumps, and run manifests.  All
// floating-point text is written with 17 significant digits so reruns can be
// compared bytewise; manifests checksum every artifact with 64-bit FNV-1a.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "elab/boundary_distance.hpp"
#include "elab/inversion.hpp"
#include "elab/picking.hpp"
#include "elab/rigidity.hpp"
#include "elab/wave.hpp"

namespace elab {

using ordered_json = nlohmann::ordered_json;

std::string format_g17(double v);
uint64_t fnv1a(const void* data, size_t n);
uint64_t fnv1a_file(const std::string& path);
std::string hex64(uint64_t v);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const ordered_json& j);
ordered_json read_json(const std::string& path);

// Gnuplot-compatible columns: '#'-prefixed header naming the columns, then
// one whitespace-separated row per matrix row.
void write_columns(const std::string& path,
                   const std::vector<std::string>& names, const MatX& cols);

// Distance table: CSV with a parameter header row and the m x m matrix,
// plus a JSON sidecar carrying mode, symmetry defect, and trapped-ray count.
void write_table(const std::string& csv_path, const std::string& sidecar_path,
                 const TravelTimeTable& t);
TravelTimeTable read_table(const std::string& csv_path,
                           const std::string& sidecar_path);

// Arrival table CSV: source_id, receiver_id, mode, t_pick, confidence.
void write_arrivals(const std::string& path, const std::vector<Arrival>& a);
std::vector<Arrival> read_arrivals(const std::string& path);

// Traces on disk: row-major [source][receiver][time][component] little-endian
// 64-bit floats, with a JSON manifest holding the shape, the config hash, and
// the source/receiver/clock catalogs.  Energy logs are not part of the array
// file; read_dn returns them empty.
void write_dn(const std::string& bin_path, const std::string& manifest_path,
              const DNDataset& d, const std::string& config_hash);
DNDataset read_dn(const std::string& bin_path,
                  const std::string& manifest_path);

// One JSON object per accepted or rejected iteration.
void write_inversion_log(const std::string& path, const InversionResult& r);

ordered_json rigidity_report_json(const RigidityReport& rep);

struct ManifestEntry {
  std::string path;      // relative to the manifest directory
  std::string checksum;  // hex FNV-1a of the file bytes
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<ManifestEntry> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds; not hashed
};

// Records the file and its checksum; path must already exist on disk.
void manifest_add(RunManifest& m, const std::string& dir,
                  const std::string& relpath);
void write_manifest(const std::string& path, const RunManifest& m);

} // namespace elab
