#include "gts/oracle.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace gts {

using nlohmann::json;

std::string to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::synchronous: return "synchronous";
    case MoveKind::log: return "log";
    case MoveKind::model: return "model";
    case MoveKind::silent_model: return "silent_model";
  }
  return "synchronous";
}

MoveKind move_kind_from_string(const std::string& s) {
  for (auto k : {MoveKind::synchronous, MoveKind::log, MoveKind::model, MoveKind::silent_model})
    if (to_string(k) == s) return k;
  throw ParseError("unknown move kind '" + s + "'");
}

namespace {

std::vector<Identifier> values_of(const Binding& b, const std::vector<std::string>& names) {
  std::vector<Identifier> out;
  for (const auto& n : names)
    if (auto it = b.values.find(n); it != b.values.end()) out.push_back(it->second);
  return out;
}

std::vector<Identifier> bound_objects(const Binding& b) {
  std::vector<Identifier> out;
  for (const auto& [name, id] : b.values)
    if (!b.fresh.count(name) && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  return out;
}

bool code_in(const std::string& code, std::initializer_list<const char*> codes) {
  return std::any_of(codes.begin(), codes.end(), [&](const char* c) { return code == c; });
}

std::vector<ObservedEvent> expected_events(const GroundTruthTrace& trace) {
  std::vector<ObservedEvent> out;
  for (const auto& r : trace.firings)
    if (r.label)
      out.push_back({event_id(trace.meta.run_id, r.seq_no), render_timestamp(trace.meta.epoch, r.recorded_time),
                     *r.label, r.recorded_objects, trace.meta.run_id});
  return out;
}

}  // namespace

GtAlignment gt_alignment(const Net& m0, const GroundTruthTrace& trace, const ObservedLog& log) {
  {
    auto want = expected_events(trace);
    auto got = log.events;
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    if (want != got)
      throw LogTraceMismatch("observed log has " + std::to_string(got.size()) + " events but the trace projects to " +
                             std::to_string(want.size()) + " different ones");
  }

  GtAlignment a;
  for (const auto& r : trace.firings) {
    const Provenance& pv = r.provenance;
    const std::optional<Cause> cause =
        pv.origin == Origin::base ? std::nullopt : std::optional<Cause>(Cause{pv.pattern_code, pv.application_id});
    const std::string eid = event_id(trace.meta.run_id, r.seq_no);

    const Transition* shadow = pv.shadow_of.empty() ? nullptr : m0.find_transition(pv.shadow_of);
    auto shadow_objects = [&] {
      return shadow ? values_of(r.binding, m0.record_variables(shadow->id)) : bound_objects(r.binding);
    };

    if (pv.origin == Origin::base || !cause) {
      if (r.label) a.system.push_back({MoveKind::synchronous, *r.label, r.recorded_objects, eid, r.transition, {}, {}, {}});
      continue;
    }
    const std::string& code = pv.pattern_code;

    if (code_in(code, {"RI_in^e", "RI_in^a"}) && r.label) {
      a.system.push_back({MoveKind::log, *r.label, r.recorded_objects, eid, {}, cause, {}, {}});
      a.system.push_back({MoveKind::model, shadow && shadow->label ? *shadow->label : *r.label, shadow_objects(), {},
                          r.transition, cause, {}, {}});
    } else if (code_in(code, {"RI_mi^e", "BI_3"}) && !r.label) {
      a.system.push_back({MoveKind::model, shadow && shadow->label ? *shadow->label : std::string(), shadow_objects(),
                          {}, r.transition, cause, {}, {}});
    } else if (r.label) {
      // Object-level recording errors and batch logging keep a synchronous
      // move; the discrepancy is carried as annotation.
      Move m{MoveKind::synchronous, *r.label, r.recorded_objects, eid, r.transition, cause, {}, {}};
      if (code == "RI_mi^o") m.missing_objects = values_of(r.binding, pv.responsible);
      if (code == "RI_in^o") {
        m.missing_objects = values_of(r.binding, pv.responsible);
        auto legit = values_of(r.binding, pv.affected);
        for (const auto& o : r.recorded_objects)
          if (std::find(legit.begin(), legit.end(), o) == legit.end()) m.wrong_objects.push_back(o);
      }
      a.system.push_back(std::move(m));
    } else if (pv.origin == Origin::behavioral) {
      auto objs = values_of(r.binding, pv.responsible);
      for (const auto& o : values_of(r.binding, pv.affected)) objs.push_back(o);
      a.system.push_back({MoveKind::silent_model, {}, objs, {}, r.transition, cause, {}, {}});
    }
    // Silent recording helpers (bypass and batch-end transitions) leave no move.
  }

  for (const auto& m : a.system) {
    std::vector<Identifier> objs = m.objects;
    for (const auto& o : m.missing_objects)
      if (std::find(objs.begin(), objs.end(), o) == objs.end()) objs.push_back(o);
    for (const auto& o : objs) a.per_object[o].push_back(m);
  }
  return a;
}

// ---------------------------------------------------------------- report

std::size_t DeviationReport::total() const {
  std::size_t n = 0;
  for (const auto& [_, e] : by_application) n += e.occurrences;
  return n;
}

std::size_t DeviationReport::occurrences(const std::string& application_id) const {
  auto it = by_application.find(application_id);
  return it == by_application.end() ? 0 : it->second.occurrences;
}

DeviationReport deviation_report(const GroundTruthTrace& trace) {
  DeviationReport rep;
  for (const auto& r : trace.firings) {
    const Provenance& pv = r.provenance;
    if (pv.origin != Origin::base && pv.role == CreatedRole::occurrence) {
      auto& e = rep.by_application[pv.application_id];
      e.application_id = pv.application_id;
      e.code = pv.pattern_code;
      ++e.occurrences;
      for (const auto& o : values_of(r.binding, pv.responsible)) e.responsible.insert(o);
      for (const auto& o : values_of(r.binding, pv.affected)) e.affected.insert(o);
    }
    for (const auto& tag : r.tags) {
      auto& e = rep.by_application[tag];
      e.application_id = tag;
      if (auto it = trace.meta.timing_patterns.find(tag); it != trace.meta.timing_patterns.end()) e.code = it->second;
      ++e.occurrences;
      for (const auto& o : r.recorded_objects) e.responsible.insert(o);
    }
  }
  for (auto& [_, e] : rep.by_application)
    for (const auto& o : e.responsible) e.affected.erase(o);
  return rep;
}

json to_json(const DeviationReport& r) {
  json j = json::object();
  for (const auto& [id, e] : r.by_application)
    j[id] = {{"code", e.code}, {"occurrences", e.occurrences}, {"responsible", e.responsible}, {"affected", e.affected}};
  return j;
}

// ---------------------------------------------------------------- distance

namespace {

using MoveKey = std::tuple<MoveKind, std::string, std::vector<Identifier>>;

MoveKey key(const Move& m) {
  auto objs = m.objects;
  std::sort(objs.begin(), objs.end());
  return {m.kind, m.activity, objs};
}

std::size_t levenshtein(const std::vector<MoveKey>& a, const std::vector<MoveKey>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::set<std::string> covered_events(const ObjectAlignments& a) {
  std::set<std::string> out;
  for (const auto& [_, moves] : a)
    for (const auto& m : moves)
      if (m.kind != MoveKind::model && m.kind != MoveKind::silent_model && !m.event_id.empty()) out.insert(m.event_id);
  return out;
}

}  // namespace

double move_distance(const ObjectAlignments& candidate, const GtAlignment& gt) {
  const auto cand_events = covered_events(candidate);
  const auto gt_events = covered_events(gt.per_object);
  if (!cand_events.empty() && cand_events != gt_events)
    throw CoverageMismatch("candidate covers " + std::to_string(cand_events.size()) + " events, ground truth " +
                           std::to_string(gt_events.size()));

  std::set<Identifier> objects;
  for (const auto& [o, _] : candidate) objects.insert(o);
  for (const auto& [o, _] : gt.per_object) objects.insert(o);
  objects.erase("*");
  if (objects.empty()) return 0.0;

  double sum = 0.0;
  for (const auto& o : objects) {
    std::vector<MoveKey> a, b;
    if (auto it = candidate.find(o); it != candidate.end())
      for (const auto& m : it->second) a.push_back(key(m));
    if (auto it = gt.per_object.find(o); it != gt.per_object.end())
      for (const auto& m : it->second) b.push_back(key(m));
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest) sum += static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
  }
  return sum / static_cast<double>(objects.size());
}

// ---------------------------------------------------------------- interchange

namespace {

json move_json(const std::string& object, const Move& m) {
  json j = {{"object", object}, {"kind", to_string(m.kind)}, {"activity", m.activity}, {"objects", m.objects}};
  if (!m.event_id.empty()) j["event_id"] = m.event_id;
  if (!m.transition.empty()) j["transition"] = m.transition;
  if (m.cause) j["cause"] = {{"code", m.cause->code}, {"application_id", m.cause->application_id}};
  if (!m.missing_objects.empty()) j["missing_objects"] = m.missing_objects;
  if (!m.wrong_objects.empty()) j["wrong_objects"] = m.wrong_objects;
  return j;
}

}  // namespace

void write_alignment(std::ostream& out, const GtAlignment& a) {
  for (const auto& m : a.system) out << move_json("*", m).dump() << '\n';
  for (const auto& [o, moves] : a.per_object)
    for (const auto& m : moves) out << move_json(o, m).dump() << '\n';
}

ObjectAlignments read_alignment(std::istream& in) {
  ObjectAlignments out;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Move m;
      const std::string object = j.at("object");
      m.kind = move_kind_from_string(j.at("kind"));
      m.activity = j.value("activity", "");
      m.objects = j.contains("objects") ? j["objects"].get<std::vector<Identifier>>() : std::vector<Identifier>{object};
      m.event_id = j.value("event_id", "");
      m.transition = j.value("transition", "");
      if (j.contains("cause")) m.cause = Cause{j["cause"].at("code"), j["cause"].at("application_id")};
      m.missing_objects = j.value("missing_objects", std::vector<Identifier>{});
      m.wrong_objects = j.value("wrong_objects", std::vector<Identifier>{});
      out[object].push_back(std::move(m));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed alignment line: ") + e.what(), n);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

}  // namespace gts
