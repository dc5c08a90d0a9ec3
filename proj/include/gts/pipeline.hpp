#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gts/log_io.hpp"
#include "gts/oracle.hpp"
#include "gts/patterns.hpp"
#include "gts/sim.hpp"
#include "gts/transform.hpp"

namespace gts {

struct NamedSet {
  std::string id;
  std::vector<PatternApplication> apps;
};

struct NamedConfig {
  std::string id;
  SimConfig config;
};

/// product: every behavioral set with every recording set.
/// isolated: non-empty behavioral sets alone, then non-empty recording sets
/// on top of the empty behavioral set; the all-empty cell is left out.
enum class Pairing { product, isolated };

struct GridSpec {
  std::uint64_t master_seed = 0;
  Pairing pairing = Pairing::product;
  std::vector<NamedSet> behavioral_sets;
  std::vector<NamedSet> recording_sets;
  std::vector<NamedConfig> configs;
};

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

struct Cell {
  std::size_t index = 0;
  std::size_t behavioral = 0;
  std::size_t recording = 0;
  std::size_t config = 0;
  std::string id;
  std::uint64_t seed = 0;
};

/// Deterministic order: behavioral index, then recording index, then config.
std::vector<Cell> enumerate_cells(const GridSpec& grid);

struct CellOutput {
  Net ms;
  Net ml;
  ProvenanceLedger ledger;
  GroundTruthTrace trace;
  ObservedLog log;
  DeviationReport report;
};

/// Transform and simulate one cell in memory.
CellOutput run_cell(const Net& m0, const GridSpec& grid, const Cell& cell);

struct CellEntry {
  Cell cell;
  std::string behavioral_set;
  std::string recording_set;
  std::string config;
  std::map<std::string, std::string> digests;  // M0, MS, ML, trace, log
  std::map<std::string, std::string> files;    // relative to the dataset root
  std::map<std::string, std::size_t> counts;   // application id -> occurrences
  std::map<std::string, std::size_t> counts_by_code;
  std::map<std::string, std::size_t> objects_by_type;
  std::size_t events = 0;
  std::size_t firings = 0;
  std::string termination;
  std::string error;  // non-empty for failed cells (--keep-going)
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  std::string m0_digest;
  std::vector<CellEntry> cells;
};

nlohmann::json to_json(const DatasetManifest& m);

struct GenerateOptions {
  unsigned jobs = 1;
  bool keep_going = false;
};

/// Runs every cell and writes per-cell files plus manifest.json under
/// `out_dir`. Without keep_going the first failing cell aborts with an
/// Error naming the cell.
DatasetManifest generate(const Net& m0, const GridSpec& grid, const std::filesystem::path& out_dir,
                         const GenerateOptions& options = {});

}  // namespace gts
