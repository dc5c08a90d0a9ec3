#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gts/net.hpp"

namespace gts {

/// Assignment of identifiers to a transition's arc variables. Fresh
/// variables stay unassigned until the firing happens.
struct Binding {
  std::map<std::string, Identifier> values;
  std::set<std::string> fresh;

  auto operator<=>(const Binding&) const = default;
  bool operator==(const Binding&) const = default;
};

std::string to_string(const Binding& b);

struct Firing {
  std::string transition;
  Binding binding;

  auto operator<=>(const Firing&) const = default;
  bool operator==(const Firing&) const = default;
};

struct PlacedToken {
  std::string place;
  Token token;

  auto operator<=>(const PlacedToken&) const = default;
  bool operator==(const PlacedToken&) const = default;
};

/// What a single firing did: the complete binding (fresh ids resolved) and
/// the tokens moved. Production order follows the transition's out-arcs.
struct FiringEffect {
  std::string transition;
  Binding binding;
  std::vector<PlacedToken> consumed;
  std::vector<PlacedToken> produced;
};

/// Generates type-prefixed identifiers ("courier_3") never seen before.
class IdGenerator {
 public:
  IdGenerator() = default;
  explicit IdGenerator(const std::set<Identifier>& used) : used_(used) {}

  Identifier next(const std::string& object_type);
  void reserve(const Identifier& id) { used_.insert(id); }
  bool used(const Identifier& id) const { return used_.count(id) != 0; }
  const std::map<std::string, std::size_t>& counters() const { return counters_; }

 private:
  std::map<std::string, std::size_t> counters_;
  std::set<Identifier> used_;
};

/// Every (transition, binding) enabled in `marking`, sorted by transition
/// id and then binding.
std::vector<Firing> enabled_bindings(const Net& net, const Marking& marking);
std::vector<Firing> enabled_bindings(const NetIndex& index, const Marking& marking);
/// Bindings of a single transition.
std::vector<Firing> enabled_bindings(const NetIndex::Entry& entry, const Marking& marking);
/// Whether at least one binding exists; stops at the first one found.
bool is_enabled(const NetIndex::Entry& entry, const Marking& marking);

/// Fires `firing` on a copy of `marking`. Fresh variables already carrying a
/// value in the binding keep it (replay); others draw from `ids`.
std::pair<Marking, FiringEffect> fire(const Net& net, const Marking& marking,
                                      const Firing& firing, IdGenerator& ids);
/// In-place variant used by the simulator. Production is returned, not
/// applied, so the caller can delay it.
FiringEffect fire_consume(const NetIndex& index, Marking& marking, const Firing& firing,
                          IdGenerator& ids);

/// An environment change recorded alongside firings (arrivals, schedules).
struct EnvironmentStep {
  enum class Kind { add, remove };
  Kind kind = Kind::add;
  PlacedToken token;

  bool operator==(const EnvironmentStep&) const = default;
};

using TraceStep = std::variant<Firing, EnvironmentStep>;

bool replay(const Net& net, const std::vector<Firing>& trace);
bool replay(const Net& net, const std::vector<TraceStep>& trace);

using FiringSequence = std::vector<std::string>;

struct LanguageOptions {
  int depth = 4;
  std::size_t state_cap = 1'000'000;
};

/// All firing sequences of length <= depth from the initial marking, each
/// step encoded as "transition{var=id,...}" with fresh ids canonicalized by
/// generation order along the sequence.
std::set<FiringSequence> bounded_language(const Net& net, const LanguageOptions& opts = {});
inline std::set<FiringSequence> bounded_language(const Net& net, int depth) {
  return bounded_language(net, LanguageOptions{depth});
}

}  // namespace gts
