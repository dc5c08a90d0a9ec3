#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gts/error.hpp"

namespace gts {

using Identifier = std::string;
using Token = std::vector<Identifier>;

enum class PlaceRole { regular, resource_idle, resource_busy, queue, correlation, other };

std::string to_string(PlaceRole role);
PlaceRole place_role_from_string(const std::string& s);

struct Place {
  std::string id;
  std::vector<std::string> type_tuple;
  PlaceRole role = PlaceRole::regular;

  bool operator==(const Place&) const = default;
};

enum class Origin { base, behavioral, recording };

std::string to_string(Origin origin);
Origin origin_from_string(const std::string& s);

/// Whether a created transition marks an occurrence of its pattern or only
/// supports one (undo, bypass, repair).
enum class CreatedRole { occurrence, helper };

struct Provenance {
  Origin origin = Origin::base;
  std::string application_id;
  std::string pattern_code;
  std::string shadow_of;  // base transition duplicated or skipped, if any
  CreatedRole role = CreatedRole::occurrence;
  // Arc variables naming the objects responsible for / affected by a firing.
  std::vector<std::string> responsible;
  std::vector<std::string> affected;

  bool operator==(const Provenance&) const = default;
};

struct Transition {
  std::string id;
  std::optional<std::string> label;  // absent: silent
  Provenance provenance;
  // Variables whose bound identifiers are recorded; absent means all.
  std::optional<std::vector<std::string>> record_spec;

  bool silent() const { return !label.has_value(); }
  bool operator==(const Transition&) const = default;
};

struct Variable {
  std::string name;
  std::string object_type;
  bool fresh = false;

  bool operator==(const Variable&) const = default;
};

struct Arc {
  std::string source;
  std::string target;
  std::vector<Variable> inscription;

  bool operator==(const Arc&) const = default;
};

/// Per-place multisets of identifier tuples.
class Marking {
 public:
  using Bag = std::map<Token, std::size_t>;

  void add(const std::string& place, const Token& token, std::size_t n = 1);
  /// Removes n copies; returns false (and leaves the marking untouched) when
  /// fewer are present.
  bool remove(const std::string& place, const Token& token, std::size_t n = 1);
  std::size_t count(const std::string& place, const Token& token) const;
  const Bag& tokens(const std::string& place) const;
  const std::map<std::string, Bag>& places() const { return bags_; }
  std::size_t size() const;
  bool empty() const { return bags_.empty(); }
  std::set<Identifier> identifiers() const;

  bool operator==(const Marking&) const = default;

 private:
  std::map<std::string, Bag> bags_;
};

struct DelaySpec {
  enum class Kind { constant, normal, exponential, uniform, pareto };
  Kind kind = Kind::constant;
  // constant: a=c; normal: a=mean, b=variance; exponential: a=rate;
  // uniform: [a, b]; pareto: a=scale, b=shape.
  double a = 0.0;
  double b = 0.0;

  static DelaySpec constant(double c) { return {Kind::constant, c, 0.0}; }
  static DelaySpec normal(double mean, double variance) { return {Kind::normal, mean, variance}; }
  static DelaySpec exponential(double rate) { return {Kind::exponential, rate, 0.0}; }
  static DelaySpec uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static DelaySpec pareto(double scale, double shape) { return {Kind::pareto, scale, shape}; }

  bool operator==(const DelaySpec&) const = default;
};

/// Timing behaviour attached by timing-only patterns.
struct TimingOverride {
  enum class Kind { coarsen_timestamps, long_duration };
  Kind kind = Kind::coarsen_timestamps;
  std::string application_id;
  std::string pattern_code;
  std::vector<std::string> transitions;
  double window = 3600.0;       // coarsen_timestamps
  double probability = 0.0;     // long_duration
  DelaySpec delay;              // long_duration

  bool operator==(const TimingOverride&) const = default;
};

/// Simulation hints carried by the model (defaults; a SimConfig overrides).
struct SimAnnotations {
  std::map<std::string, double> weight_defaults;
  std::map<std::string, DelaySpec> delay_defaults;
  std::vector<TimingOverride> timing_overrides;

  bool operator==(const SimAnnotations&) const = default;
};

struct Net {
  std::vector<std::string> object_types;
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<Arc> arcs;
  Marking initial_marking;
  std::optional<Marking> final_marking;
  SimAnnotations annotations;

  const Place* find_place(const std::string& id) const;
  const Transition* find_transition(const std::string& id) const;
  bool has_object_type(const std::string& name) const;

  /// Arcs into / out of a transition, in declaration order.
  std::vector<const Arc*> preset(const std::string& transition) const;
  std::vector<const Arc*> postset(const std::string& transition) const;
  /// Distinct variables of a transition, in first-appearance order.
  std::vector<Variable> variables(const std::string& transition) const;
  /// The variables recorded by a transition's events.
  std::vector<std::string> record_variables(const std::string& transition) const;

  bool operator==(const Net&) const = default;
};

std::vector<Diagnostic> validate_net(const Net& net);

/// Precomputed place/transition indices for the hot simulation path.
class NetIndex {
 public:
  struct ArcRef {
    std::string place;
    std::vector<Variable> vars;
  };
  struct Entry {
    const Transition* transition = nullptr;
    std::vector<ArcRef> pre;
    std::vector<ArcRef> post;
    std::vector<Variable> variables;
    std::vector<std::string> record_vars;
  };

  explicit NetIndex(const Net& net);

  const Net& net() const { return *net_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(const std::string& transition) const;

 private:
  const Net* net_;
  std::vector<Entry> entries_;  // sorted by transition id
  std::map<std::string, std::size_t> by_id_;
};

}  // namespace gts
