#include "gts/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace gts {

// ---------------------------------------------------------------- config I/O

nlohmann::json to_json(const DelaySpec& d) {
  using K = DelaySpec::Kind;
  switch (d.kind) {
    case K::constant: return {{"kind", "constant"}, {"value", d.a}};
    case K::normal: return {{"kind", "normal"}, {"mean", d.a}, {"variance", d.b}};
    case K::exponential: return {{"kind", "exponential"}, {"rate", d.a}};
    case K::uniform: return {{"kind", "uniform"}, {"low", d.a}, {"high", d.b}};
    case K::pareto: return {{"kind", "pareto"}, {"scale", d.a}, {"shape", d.b}};
  }
  return nullptr;
}

DelaySpec delay_from_json(const nlohmann::json& j) {
  if (j.is_number()) return DelaySpec::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind")) throw ConfigInvalid("delay spec needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number())
      throw ConfigInvalid("delay spec '" + kind + "' needs numeric '" + key + "'");
    return j[key].get<double>();
  };
  DelaySpec d;
  if (kind == "constant") d = DelaySpec::constant(num("value"));
  else if (kind == "normal") d = DelaySpec::normal(num("mean"), num("variance"));
  else if (kind == "exponential") d = DelaySpec::exponential(num("rate"));
  else if (kind == "uniform") d = DelaySpec::uniform(num("low"), num("high"));
  else if (kind == "pareto") d = DelaySpec::pareto(num("scale"), num("shape"));
  else throw ConfigInvalid("unknown delay kind '" + kind + "'");

  if (d.kind == DelaySpec::Kind::normal && d.b < 0) throw ConfigInvalid("normal variance must be >= 0");
  if (d.kind == DelaySpec::Kind::exponential && d.a <= 0) throw ConfigInvalid("exponential rate must be > 0");
  if (d.kind == DelaySpec::Kind::uniform && d.b < d.a) throw ConfigInvalid("uniform needs low <= high");
  if (d.kind == DelaySpec::Kind::pareto && (d.a <= 0 || d.b <= 0))
    throw ConfigInvalid("pareto scale and shape must be > 0");
  return d;
}

nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = c.seed;
  j["weights"] = nlohmann::json::object();
  for (const auto& [t, pieces] : c.weights) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pieces) arr.push_back({p.from, p.weight});
    j["weights"][t] = arr;
  }
  j["default_weight"] = c.default_weight;
  j["deviation_weight"] = c.deviation_weight ? nlohmann::json(*c.deviation_weight) : nlohmann::json();
  j["delays"] = nlohmann::json::object();
  for (const auto& [k, d] : c.delays) j["delays"][k] = to_json(d);
  j["default_delay"] = c.default_delay ? to_json(*c.default_delay) : nlohmann::json();
  j["arrivals"] = nlohmann::json::array();
  for (const auto& a : c.arrivals)
    j["arrivals"].push_back({{"object_type", a.object_type},
                             {"place", a.place},
                             {"interarrival", to_json(a.interarrival)},
                             {"count", a.count},
                             {"start", a.start}});
  j["schedules"] = nlohmann::json::array();
  for (const auto& s : c.schedules)
    j["schedules"].push_back({{"place", s.place},
                              {"id", s.id},
                              {"start", s.start},
                              {"stop", s.stop ? nlohmann::json(*s.stop) : nlohmann::json()}});
  j["firing_limit"] = c.firing_limit ? nlohmann::json(*c.firing_limit) : nlohmann::json();
  j["time_horizon"] = c.time_horizon ? nlohmann::json(*c.time_horizon) : nlohmann::json();
  j["epoch"] = c.epoch;
  return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
    throw SchemaVersionMismatch("config schema_version " + j["schema_version"].dump() + " (expected " +
                                std::to_string(kSchemaVersion) + ")");
  SimConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("weights")) {
      for (const auto& [t, w] : j["weights"].items()) {
        std::vector<WeightPiece> pieces;
        if (w.is_number()) {
          pieces.push_back({0.0, w.get<double>()});
        } else {
          for (const auto& p : w) pieces.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        c.weights[t] = pieces;
      }
    }
    c.default_weight = j.value("default_weight", 1.0);
    if (j.contains("deviation_weight") && !j["deviation_weight"].is_null())
      c.deviation_weight = j["deviation_weight"].get<double>();
    if (j.contains("delays"))
      for (const auto& [k, d] : j["delays"].items()) c.delays[k] = delay_from_json(d);
    if (j.contains("default_delay") && !j["default_delay"].is_null())
      c.default_delay = delay_from_json(j["default_delay"]);
    if (j.contains("arrivals"))
      for (const auto& a : j["arrivals"]) {
        ArrivalSpec s;
        s.object_type = a.at("object_type").get<std::string>();
        s.place = a.at("place").get<std::string>();
        if (a.contains("interarrival")) s.interarrival = delay_from_json(a["interarrival"]);
        s.count = a.value("count", std::size_t{0});
        s.start = a.value("start", 0.0);
        c.arrivals.push_back(s);
      }
    if (j.contains("schedules"))
      for (const auto& a : j["schedules"]) {
        ScheduleSpec s;
        s.place = a.at("place").get<std::string>();
        s.id = a.at("id").get<std::string>();
        s.start = a.value("start", 0.0);
        if (a.contains("stop") && !a["stop"].is_null()) s.stop = a["stop"].get<double>();
        c.schedules.push_back(s);
      }
    if (j.contains("firing_limit") && !j["firing_limit"].is_null())
      c.firing_limit = j["firing_limit"].get<std::size_t>();
    if (j.contains("time_horizon") && !j["time_horizon"].is_null())
      c.time_horizon = j["time_horizon"].get<double>();
    c.epoch = j.value("epoch", c.epoch);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("malformed config: ") + e.what());
  }
  return c;
}

std::string config_digest(const SimConfig& c) { return hex64(fnv1a(to_json(c).dump())); }

std::vector<Diagnostic> validate_config(const Net& net, const SimConfig& c) {
  std::vector<Diagnostic> out;
  if (!c.firing_limit && !c.time_horizon && !net.final_marking)
    out.push_back({"NoTermination", "config", "set firing_limit, time_horizon, or a final marking"});
  // Ids of created elements ("name#application") may be absent: one config
  // is shared by models that apply different pattern sets.
  auto known_t = [&](const std::string& t) {
    return net.find_transition(t) != nullptr || t.find('#') != std::string::npos;
  };
  for (const auto& [t, pieces] : c.weights) {
    if (!known_t(t)) out.push_back({"UnresolvedElement", t, "weight for unknown transition"});
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (pieces[i].weight < 0 || !std::isfinite(pieces[i].weight))
        out.push_back({"NegativeWeight", t, "weights must be finite and >= 0"});
      if (i && pieces[i].from <= pieces[i - 1].from)
        out.push_back({"UnsortedWeights", t, "weight pieces must be sorted by from_time"});
    }
  }
  if (c.default_weight < 0) out.push_back({"NegativeWeight", "default_weight", "must be >= 0"});
  if (c.deviation_weight && *c.deviation_weight < 0)
    out.push_back({"NegativeWeight", "deviation_weight", "must be >= 0"});
  for (const auto& [k, _] : c.delays) {
    auto arrow = k.find("->");
    if (arrow == std::string::npos) {
      if (!known_t(k)) out.push_back({"UnresolvedElement", k, "delay for unknown transition"});
    } else if (!known_t(k.substr(0, arrow)) ||
               (!net.find_place(k.substr(arrow + 2)) && k.find('#') == std::string::npos)) {
      out.push_back({"UnresolvedElement", k, "delay for unknown arc"});
    }
  }
  for (const auto& a : c.arrivals) {
    const Place* p = net.find_place(a.place);
    if (!p || p->type_tuple != std::vector<std::string>{a.object_type})
      out.push_back({"UnresolvedElement", a.place, "arrival place must hold single '" + a.object_type + "' objects"});
  }
  for (const auto& s : c.schedules) {
    const Place* p = net.find_place(s.place);
    if (!p || p->type_tuple.size() != 1) out.push_back({"UnresolvedElement", s.place, "schedule place must have arity 1"});
    if (s.stop && *s.stop < s.start) out.push_back({"InvalidSchedule", s.id, "stop precedes start"});
  }
  return out;
}

std::vector<TraceStep> GroundTruthTrace::steps() const {
  std::vector<TraceStep> out;
  out.reserve(firings.size() + environment.size());
  std::size_t i = 0, k = 0;
  while (i < firings.size() || k < environment.size()) {
    if (k == environment.size() || (i < firings.size() && firings[i].seq_no < environment[k].seq_no)) {
      out.push_back(Firing{firings[i].transition, firings[i].binding});
      ++i;
    } else {
      out.push_back(environment[k++].step);
    }
  }
  return out;
}

// ---------------------------------------------------------------- sampling

std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw Error("all weights are zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

Firing sample_firing(const std::vector<Firing>& enabled, const WeightFn& weight, double time, Rng& rng) {
  if (enabled.empty()) throw Error("no enabled firing to sample");
  std::vector<std::string> names;
  std::vector<std::vector<const Firing*>> groups;
  for (const auto& f : enabled) {
    if (names.empty() || names.back() != f.transition) {
      names.push_back(f.transition);
      groups.emplace_back();
    }
    groups.back().push_back(&f);
  }
  std::vector<double> w;
  for (const auto& n : names) w.push_back(weight(n, time));
  const auto& group = groups[sample_index(w, rng)];
  return *group[rng.below(group.size())];
}

// ---------------------------------------------------------------- engine

namespace {

struct Pending {
  double at;
  std::size_t order;
  PlacedToken token;

  bool operator>(const Pending& o) const { return at != o.at ? at > o.at : order > o.order; }
};

struct ScheduleEvent {
  double at;
  std::size_t order;
  EnvironmentStep::Kind kind;
  PlacedToken token;
};

class Engine {
 public:
  Engine(const Net& net, const SimConfig& cfg, const RunOptions& opt)
      : net_(net), index_(net), cfg_(cfg), opt_(opt), rng_(cfg.seed), marking_(net.initial_marking),
        ids_(net.initial_marking.identifiers()) {
    prepare();
  }

  GroundTruthTrace run();

 private:
  struct TransitionInfo {
    const std::vector<WeightPiece>* pieces = nullptr;
    double fallback = 1.0;
    std::vector<const TimingOverride*> long_duration;
    const TimingOverride* coarsen = nullptr;
  };

  void prepare();
  double weight(std::size_t i, double time) const;
  void materialize();
  std::optional<double> next_time() const;
  std::optional<DelaySpec> delay_spec(const std::string& t, const std::string& p, bool& arc_level) const;
  void fire(std::size_t entry_index);
  void environment(EnvironmentStep::Kind kind, PlacedToken token);

  const Net& net_;
  NetIndex index_;
  const SimConfig& cfg_;
  const RunOptions& opt_;
  Rng rng_;
  Marking marking_;
  IdGenerator ids_;
  double now_ = 0.0;
  std::size_t seq_ = 0;
  std::size_t order_ = 0;
  std::size_t fired_ = 0;

  std::vector<TransitionInfo> info_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
  struct ArrivalState {
    double next;
    std::size_t remaining;
  };
  std::vector<ArrivalState> arrivals_;
  std::vector<ScheduleEvent> schedule_;  // sorted, consumed from schedule_pos_
  std::size_t schedule_pos_ = 0;
  std::vector<PlacedToken> deferred_removals_;
  std::set<double> breakpoints_;
  GroundTruthTrace trace_;
};

void Engine::prepare() {
  for (const auto& e : index_.entries()) {
    TransitionInfo ti;
    const std::string& id = e.transition->id;
    if (auto it = cfg_.weights.find(id); it != cfg_.weights.end()) ti.pieces = &it->second;
    ti.fallback = cfg_.default_weight;
    if (auto it = net_.annotations.weight_defaults.find(id); it != net_.annotations.weight_defaults.end()) {
      ti.fallback = it->second;
      if (cfg_.deviation_weight && it->second < 1.0) ti.fallback = *cfg_.deviation_weight;
    }
    for (const auto& o : net_.annotations.timing_overrides) {
      if (std::find(o.transitions.begin(), o.transitions.end(), id) == o.transitions.end()) continue;
      if (o.kind == TimingOverride::Kind::long_duration)
        ti.long_duration.push_back(&o);
      else if (!ti.coarsen)
        ti.coarsen = &o;
    }
    info_.push_back(ti);
  }
  for (const auto& [_, pieces] : cfg_.weights)
    for (const auto& p : pieces) breakpoints_.insert(p.from);

  for (const auto& a : cfg_.arrivals) arrivals_.push_back({a.start, a.count});

  for (const auto& s : cfg_.schedules) {
    schedule_.push_back({s.start, order_++, EnvironmentStep::Kind::add, {s.place, {s.id}}});
    if (s.stop) schedule_.push_back({*s.stop, order_++, EnvironmentStep::Kind::remove, {s.place, {s.id}}});
  }
  std::stable_sort(schedule_.begin(), schedule_.end(),
                   [](const ScheduleEvent& a, const ScheduleEvent& b) { return a.at < b.at; });
}

double Engine::weight(std::size_t i, double time) const {
  const TransitionInfo& ti = info_[i];
  double w = ti.fallback;
  if (ti.pieces)
    for (const auto& p : *ti.pieces)
      if (p.from <= time) w = p.weight;
  if (opt_.weight_hook) w *= opt_.weight_hook(index_.entries()[i].transition->id, time, marking_);
  return w;
}

void Engine::environment(EnvironmentStep::Kind kind, PlacedToken token) {
  EnvironmentRecord r;
  r.seq_no = seq_++;
  r.time = now_;
  r.step = {kind, std::move(token)};
  trace_.environment.push_back(std::move(r));
}

void Engine::materialize() {
  while (!pending_.empty() && pending_.top().at <= now_) {
    const auto& top = pending_.top();
    marking_.add(top.token.place, top.token.token);
    pending_.pop();
  }
  for (std::size_t i = 0; i < arrivals_.size(); ++i) {
    auto& st = arrivals_[i];
    const auto& spec = cfg_.arrivals[i];
    while (st.remaining > 0 && st.next <= now_) {
      PlacedToken tok{spec.place, {ids_.next(spec.object_type)}};
      marking_.add(tok.place, tok.token);
      environment(EnvironmentStep::Kind::add, tok);
      --st.remaining;
      st.next += rng_.sample(spec.interarrival);
    }
  }
  while (schedule_pos_ < schedule_.size() && schedule_[schedule_pos_].at <= now_) {
    const auto& ev = schedule_[schedule_pos_++];
    if (ev.kind == EnvironmentStep::Kind::add) {
      for (const auto& id : ev.token.token) ids_.reserve(id);
      marking_.add(ev.token.place, ev.token.token);
      environment(ev.kind, ev.token);
    } else {
      deferred_removals_.push_back(ev.token);
    }
  }
  // A resource scheduled to leave while busy leaves once it is idle again.
  for (auto it = deferred_removals_.begin(); it != deferred_removals_.end();) {
    if (marking_.remove(it->place, it->token)) {
      environment(EnvironmentStep::Kind::remove, *it);
      it = deferred_removals_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<double> Engine::next_time() const {
  std::optional<double> best;
  auto take = [&](double t) {
    if (t > now_ && (!best || t < *best)) best = t;
  };
  if (!pending_.empty()) take(pending_.top().at);
  for (const auto& st : arrivals_)
    if (st.remaining > 0) take(st.next);
  if (schedule_pos_ < schedule_.size()) take(schedule_[schedule_pos_].at);
  if (auto it = breakpoints_.upper_bound(now_); it != breakpoints_.end()) take(*it);
  return best;
}

std::optional<DelaySpec> Engine::delay_spec(const std::string& t, const std::string& p, bool& arc_level) const {
  auto lookup = [&](const std::string& id) -> std::optional<DelaySpec> {
    if (auto it = cfg_.delays.find(id + "->" + p); it != cfg_.delays.end()) {
      arc_level = true;
      return it->second;
    }
    arc_level = false;
    if (auto it = cfg_.delays.find(id); it != cfg_.delays.end()) return it->second;
    if (auto it = net_.annotations.delay_defaults.find(id); it != net_.annotations.delay_defaults.end())
      return it->second;
    return std::nullopt;
  };
  if (auto d = lookup(t)) return d;
  const Transition* tr = net_.find_transition(t);
  if (tr && !tr->provenance.shadow_of.empty() && tr->provenance.shadow_of != t)
    if (auto d = lookup(tr->provenance.shadow_of)) return d;
  arc_level = false;
  return cfg_.default_delay;
}

void Engine::fire(std::size_t entry_index) {
  const auto& entry = index_.entries()[entry_index];
  const TransitionInfo& ti = info_[entry_index];
  auto bindings = enabled_bindings(entry, marking_);
  const Firing chosen = bindings[rng_.below(bindings.size())];

  FiringEffect eff = fire_consume(index_, marking_, chosen, ids_);
  ++fired_;

  FiringRecord rec;
  rec.seq_no = seq_++;
  rec.time = now_;
  rec.recorded_time = now_;
  rec.transition = entry.transition->id;
  rec.label = entry.transition->label;
  rec.provenance = entry.transition->provenance;

  std::optional<double> long_delay;
  for (const TimingOverride* o : ti.long_duration) {
    if (rng_.uniform() < o->probability && !long_delay) {
      long_delay = rng_.sample(o->delay);
      rec.tags.push_back(o->application_id);
    }
  }
  if (ti.coarsen) {
    rec.recorded_time = std::floor(now_ / ti.coarsen->window) * ti.coarsen->window;
    rec.tags.push_back(ti.coarsen->application_id);
  }

  std::optional<double> transition_delay;
  for (const auto& tok : eff.produced) {
    double delay = 0.0;
    if (long_delay) {
      delay = *long_delay;
    } else {
      bool arc_level = false;
      if (auto spec = delay_spec(rec.transition, tok.place, arc_level)) {
        if (arc_level) {
          delay = rng_.sample(*spec);
        } else {
          if (!transition_delay) transition_delay = rng_.sample(*spec);
          delay = *transition_delay;
        }
      }
    }
    if (delay <= 0.0)
      marking_.add(tok.place, tok.token);
    else
      pending_.push({now_ + delay, order_++, tok});
  }

  if (rec.label)
    for (const auto& v : entry.record_vars)
      if (auto it = eff.binding.values.find(v); it != eff.binding.values.end())
        rec.recorded_objects.push_back(it->second);
  rec.binding = std::move(eff.binding);
  rec.consumed = std::move(eff.consumed);
  rec.produced = std::move(eff.produced);
  trace_.firings.push_back(std::move(rec));
}

GroundTruthTrace Engine::run() {
  std::string termination;
  std::vector<std::size_t> enabled;
  std::vector<double> weights;
  for (;;) {
    materialize();
    if (net_.final_marking && pending_.empty() && marking_ == *net_.final_marking) {
      termination = "final_marking";
      break;
    }
    if (cfg_.firing_limit && fired_ >= *cfg_.firing_limit) {
      termination = "firing_limit";
      break;
    }
    enabled.clear();
    weights.clear();
    const auto& entries = index_.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double w = weight(i, now_);
      if (w > 0.0 && is_enabled(entries[i], marking_)) {
        enabled.push_back(i);
        weights.push_back(w);
      }
    }
    if (!enabled.empty()) {
      const std::size_t pick = enabled[sample_index(weights, rng_)];
      if (opt_.observer) {
        std::vector<std::string> names;
        for (std::size_t i : enabled) names.push_back(entries[i].transition->id);
        opt_.observer(names, entries[pick].transition->id);
      }
      fire(pick);
      continue;
    }
    auto next = next_time();
    if (!next) {
      termination = "deadlock";
      break;
    }
    if (cfg_.time_horizon && *next > *cfg_.time_horizon) {
      termination = "time_horizon";
      break;
    }
    now_ = *next;
  }

  trace_.meta.seed = cfg_.seed;
  trace_.meta.epoch = cfg_.epoch;
  trace_.meta.config_digest = config_digest(cfg_);
  trace_.meta.model_digests = opt_.model_digests;
  for (const auto& o : net_.annotations.timing_overrides) trace_.meta.timing_patterns[o.application_id] = o.pattern_code;
  trace_.meta.run_id = opt_.run_id.empty() ? "run-" + hex64(cfg_.seed) : opt_.run_id;
  trace_.meta.termination = termination;
  trace_.meta.end_time = now_;
  trace_.meta.pending_at_end = pending_.size();
  return std::move(trace_);
}

}  // namespace

GroundTruthTrace run(const Net& ml, const SimConfig& config, const RunOptions& options) {
  auto diags = validate_config(ml, config);
  if (!diags.empty()) {
    std::string msg = "invalid simulation config";
    for (const auto& d : diags) msg += "; " + to_string(d);
    throw ConfigInvalid(msg);
  }
  return Engine(ml, config, options).run();
}

}  // namespace gts
