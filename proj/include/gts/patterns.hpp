#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gts/net.hpp"

namespace gts {

enum class WildcardKind { place, transition, transition_set, object_type_set, label, variable };

std::string to_string(WildcardKind kind);

/// Machine-checkable condition on a wildcard's image.
struct Requirement {
  enum class Kind {
    labeled,             // transition carries an activity label
    role_in,             // place role is one of `roles`
    arity_at_least,      // place arity >= n
    arity_equals,        // place arity == n
    contains_type_of,    // place's types contain the (single) type of `other`
    same_type_tuple,     // identical type tuple to `other`
    different_type,      // arity-1 places of different type
    distinct_from,       // maps to a different element than `other`
    label_exists,        // label is an activity of some other transition
    label_differs,       // label differs from `other`'s label
    variable_of,         // names a variable of transition `other`
    objects_bypassable,  // object set can be bypassed around transition `other`
    multi_arc_from,      // transition `other` consumes >= 2 tokens from this place
    read_by,             // transition `other` both consumes from and produces to this place
    post_pre_overlap,    // post(this) and pre(`other`) share a place
    holds_type_of_variable,  // place type tuple contains the type of variable `other` of t
  };
  std::string wildcard;
  Kind kind;
  std::vector<PlaceRole> roles;
  std::size_t n = 0;
  std::string other;
  std::string description;
};

struct Wildcard {
  std::string name;
  WildcardKind kind;
  std::vector<Requirement> requirements;
};

struct CreatedElement {
  std::string name_template;  // e.g. "tau_skip-{t}"
  bool silent = true;         // transitions only
  CreatedRole role = CreatedRole::occurrence;
};

struct PatternFragment {
  std::string code;
  Origin origin = Origin::behavioral;
  std::string description;
  std::vector<Wildcard> wildcards;
  std::vector<CreatedElement> created_places;
  std::vector<CreatedElement> created_transitions;
  /// Arc rules of the blueprint in words; the transformer realizes them
  /// against the mapped elements.
  std::vector<std::string> created_arcs;
  std::map<std::string, double> weight_defaults;     // keyed by name template
  std::map<std::string, DelaySpec> delay_defaults;   // keyed by name template
  std::vector<TimingOverride> timing_overrides;
  nlohmann::json params = nlohmann::json::object();

  bool timing_only() const { return created_places.empty() && created_transitions.empty(); }
};

/// One use of a pattern: where it goes (mapping h) and how it is tuned.
struct PatternApplication {
  std::string application_id;
  std::string code;
  std::map<std::string, std::vector<std::string>> mapping;
  nlohmann::json params = nlohmann::json::object();

  /// Single-element mapping value, or "" when absent.
  std::string at(const std::string& wildcard) const;
};

struct CatalogEntry {
  std::string code;
  std::string description;
  std::map<std::string, WildcardKind> signature;
};

/// Default weight of deviation-entering transitions relative to base ones.
inline constexpr double kDefaultDeviationWeight = 0.05;

std::vector<CatalogEntry> catalog();
bool is_known_pattern(const std::string& code);
Origin pattern_origin(const std::string& code);

PatternFragment instantiate(const std::string& code, const nlohmann::json& params = nlohmann::json::object());
std::vector<Requirement> wildcard_requirements(const std::string& code,
                                               const nlohmann::json& params = nlohmann::json::object());

}  // namespace gts
