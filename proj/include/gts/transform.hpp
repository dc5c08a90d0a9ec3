#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gts/net.hpp"
#include "gts/patterns.hpp"

namespace gts {

/// Attribution of one created element to the application that created it.
struct LedgerEntry {
  std::string element;
  std::string kind;  // "place", "transition" or "object_type"
  std::string application_id;
  std::string code;

  bool operator==(const LedgerEntry&) const = default;
};

struct ProvenanceLedger {
  std::vector<LedgerEntry> entries;

  const LedgerEntry* find(const std::string& element) const;
  std::vector<std::string> applications() const;
};

/// Mapping values for a wildcard; label/variable/object wildcards may also
/// be given through the application's params.
std::vector<std::string> mapped_values(const PatternApplication& app, const std::string& wildcard);

/// The fragment an application instantiates; label, object and variable
/// wildcards given in the mapping count as params.
PatternFragment fragment_for(const PatternApplication& app);

std::vector<Diagnostic> validate_mapping(const Net& net, const PatternFragment& fragment,
                                         const PatternApplication& app);

/// Net with the fragment's created elements added under "<name>#<application_id>".
Net apply(const Net& net, const PatternFragment& fragment, const PatternApplication& app);
Net apply(const Net& net, const PatternApplication& app);

/// Left fold of apply. Behavioral applications must come first.
std::pair<Net, ProvenanceLedger> apply_sequence(const Net& net,
                                                const std::vector<PatternApplication>& apps);

/// Equality after sorting every element list by id (nets built by different
/// application orders compare equal when they have the same elements).
bool same_up_to_order(const Net& a, const Net& b);

}  // namespace gts
