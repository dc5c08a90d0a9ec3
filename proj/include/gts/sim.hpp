#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gts/net.hpp"
#include "gts/rng.hpp"
#include "gts/semantics.hpp"

namespace gts {

inline constexpr int kSchemaVersion = 1;

struct WeightPiece {
  double from = 0.0;
  double weight = 1.0;

  bool operator==(const WeightPiece&) const = default;
};

struct ArrivalSpec {
  std::string object_type;
  std::string place;
  DelaySpec interarrival = DelaySpec::exponential(1.0 / 600.0);
  std::size_t count = 0;
  double start = 0.0;

  bool operator==(const ArrivalSpec&) const = default;
};

/// A resource identifier that joins `place` at `start` and leaves it at `stop`.
struct ScheduleSpec {
  std::string place;
  Identifier id;
  double start = 0.0;
  std::optional<double> stop;

  bool operator==(const ScheduleSpec&) const = default;
};

struct SimConfig {
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<WeightPiece>> weights;
  double default_weight = 1.0;
  /// Replaces the low model-suggested weights of deviation entry transitions.
  std::optional<double> deviation_weight;
  std::map<std::string, DelaySpec> delays;  // "t" or "t->p"
  /// Used for transitions without any configured or annotated delay.
  std::optional<DelaySpec> default_delay;
  std::vector<ArrivalSpec> arrivals;
  std::vector<ScheduleSpec> schedules;
  std::optional<std::size_t> firing_limit;
  std::optional<double> time_horizon;
  std::string epoch = "2024-01-01T00:00:00Z";

  bool operator==(const SimConfig&) const = default;
};

nlohmann::json to_json(const DelaySpec& d);
DelaySpec delay_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const nlohmann::json& j);
std::string config_digest(const SimConfig& c);

/// Problems with a config against a model; empty when runnable.
std::vector<Diagnostic> validate_config(const Net& net, const SimConfig& config);

struct FiringRecord {
  std::size_t seq_no = 0;
  double time = 0.0;
  double recorded_time = 0.0;
  std::string transition;
  std::optional<std::string> label;
  Binding binding;
  Provenance provenance;
  std::vector<PlacedToken> consumed;
  std::vector<PlacedToken> produced;
  std::vector<Identifier> recorded_objects;
  std::vector<std::string> tags;  // application ids of timing patterns that touched this firing

  bool operator==(const FiringRecord&) const = default;
};

struct EnvironmentRecord {
  std::size_t seq_no = 0;
  double time = 0.0;
  EnvironmentStep step;

  bool operator==(const EnvironmentRecord&) const = default;
};

struct TraceMetadata {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string rng = Rng::kName;
  std::string epoch = "2024-01-01T00:00:00Z";
  std::string config_digest;
  std::map<std::string, std::string> model_digests;  // "M0", "MS", "ML"
  std::map<std::string, std::string> timing_patterns;  // application id -> code, for record tags
  std::string termination;  // final_marking | firing_limit | time_horizon | deadlock
  double end_time = 0.0;
  std::size_t pending_at_end = 0;

  bool operator==(const TraceMetadata&) const = default;
};

struct GroundTruthTrace {
  TraceMetadata meta;
  std::vector<FiringRecord> firings;
  std::vector<EnvironmentRecord> environment;

  /// Firings and environment steps merged in sequence order.
  std::vector<TraceStep> steps() const;
  bool operator==(const GroundTruthTrace&) const = default;
};

using WeightFn = std::function<double(const std::string& transition, double time)>;

/// Draws one index with probability weights[i] / sum(weights). Throws Error
/// when the total is not positive.
std::size_t sample_index(const std::vector<double>& weights, Rng& rng);

/// Categorical choice over enabled firings: a transition with probability
/// proportional to its weight, then one of its bindings uniformly.
Firing sample_firing(const std::vector<Firing>& enabled, const WeightFn& weight, double time, Rng& rng);

struct RunOptions {
  std::string run_id;
  std::map<std::string, std::string> model_digests;
  /// Called before every firing with the positively weighted enabled
  /// transitions and the chosen one.
  std::function<void(const std::vector<std::string>& enabled, const std::string& chosen)> observer;
  /// Extension point for marking-conditioned weights; multiplies the
  /// configured weight when set.
  std::function<double(const std::string& transition, double time, const Marking& marking)> weight_hook;
};

GroundTruthTrace run(const Net& ml, const SimConfig& config, const RunOptions& options = {});

}  // namespace gts
