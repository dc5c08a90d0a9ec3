#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gts/log_io.hpp"
#include "gts/net.hpp"
#include "gts/sim.hpp"

namespace gts {

enum class MoveKind { synchronous, log, model, silent_model };

std::string to_string(MoveKind kind);
MoveKind move_kind_from_string(const std::string& s);

struct Cause {
  std::string code;
  std::string application_id;

  bool operator==(const Cause&) const = default;
};

struct Move {
  MoveKind kind = MoveKind::synchronous;
  std::string activity;  // empty for silent model moves
  std::vector<Identifier> objects;
  std::string event_id;    // log side
  std::string transition;  // model side
  std::optional<Cause> cause;
  // Object-level recording errors on synchronous moves.
  std::vector<Identifier> missing_objects;
  std::vector<Identifier> wrong_objects;

  bool operator==(const Move&) const = default;
};

/// System-level move list plus its projection onto every object.
struct GtAlignment {
  std::vector<Move> system;
  std::map<Identifier, std::vector<Move>> per_object;
};

/// Ground-truth alignment of `log` against the base model. Throws
/// LogTraceMismatch unless `log` is the projection of `trace`.
GtAlignment gt_alignment(const Net& m0, const GroundTruthTrace& trace, const ObservedLog& log);

struct DeviationEntry {
  std::string application_id;
  std::string code;
  std::size_t occurrences = 0;
  std::set<Identifier> responsible;
  std::set<Identifier> affected;

  bool operator==(const DeviationEntry&) const = default;
};

struct DeviationReport {
  std::map<std::string, DeviationEntry> by_application;

  std::size_t total() const;
  std::size_t occurrences(const std::string& application_id) const;
};

DeviationReport deviation_report(const GroundTruthTrace& trace);

/// Per-object alignments as exchanged with external checkers. The object
/// "*" holds system-level moves and is not scored.
using ObjectAlignments = std::map<Identifier, std::vector<Move>>;

/// Normalized per-object edit distance over (kind, activity, object set),
/// averaged over objects. Throws CoverageMismatch when the two sides do not
/// cover the same observed events.
double move_distance(const ObjectAlignments& candidate, const GtAlignment& gt);

void write_alignment(std::ostream& out, const GtAlignment& a);
ObjectAlignments read_alignment(std::istream& in);
nlohmann::json to_json(const DeviationReport& r);

}  // namespace gts
