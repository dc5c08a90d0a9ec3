#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gts/net.hpp"
#include "gts/patterns.hpp"
#include "gts/sim.hpp"
#include "gts/transform.hpp"

namespace gts {

struct ObservedEvent {
  std::string event_id;
  std::string timestamp;  // RFC 3339, UTC, millisecond precision
  std::string activity;
  std::vector<Identifier> objects;
  std::string run_id;

  auto operator<=>(const ObservedEvent&) const = default;
  bool operator==(const ObservedEvent&) const = default;
};

struct ObservedLog {
  std::string run_id;
  std::map<Identifier, std::string> objects;  // identifier -> object type
  std::vector<ObservedEvent> events;

  bool operator==(const ObservedLog&) const = default;
};

/// "<run_id>:<seq_no as 8 digits>".
std::string event_id(const std::string& run_id, std::size_t seq_no);
/// RFC 3339 rendering of epoch + seconds (rounded to milliseconds).
std::string render_timestamp(const std::string& epoch, double seconds);

/// The log a tool under assessment sees: labeled firings only, recorded
/// objects only, recorded (possibly coarsened) timestamps.
ObservedLog project_observed(const GroundTruthTrace& trace, const Net& ml);

// ---- models
nlohmann::json to_json(const Net& net);
Net net_from_json(const nlohmann::json& j);
std::string net_digest(const Net& net);
Marking marking_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Marking& m);

// ---- pattern applications and ledgers
nlohmann::json to_json(const PatternApplication& app);
PatternApplication application_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<PatternApplication>& apps);
std::vector<PatternApplication> applications_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProvenanceLedger& ledger);
ProvenanceLedger ledger_from_json(const nlohmann::json& j);

// ---- traces (JSON Lines: header, then one record per line)
void write_trace(std::ostream& out, const GroundTruthTrace& trace);
/// When `ml` is given, every record's transition must exist in it.
GroundTruthTrace read_trace(std::istream& in, const Net* ml = nullptr);
std::string trace_to_string(const GroundTruthTrace& trace);

// ---- observed logs
void write_log_jsonl(std::ostream& out, const ObservedLog& log);
ObservedLog read_log_jsonl(std::istream& in);
void write_log_csv(std::ostream& out, const ObservedLog& log);
/// CSV carries no object universe; `objects` stays empty.
ObservedLog read_log_csv(std::istream& in);

// ---- files
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace gts
