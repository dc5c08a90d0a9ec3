#include "gts/log_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gts {

using nlohmann::json;

std::string event_id(const std::string& run_id, std::size_t seq_no) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08zu", seq_no);
  return run_id + ":" + buf;
}

namespace {

std::chrono::sys_seconds parse_epoch(const std::string& s) {
  int y, mo, d, h, mi, se;
  char z = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &se, &z) != 7 || z != 'Z')
    throw ConfigInvalid("epoch must look like 2024-01-01T00:00:00Z, got '" + s + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ConfigInvalid("invalid epoch date '" + s + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

}  // namespace

std::string render_timestamp(const std::string& epoch, double seconds) {
  using namespace std::chrono;
  const auto ms = milliseconds{static_cast<long long>(std::llround(seconds * 1000.0))};
  const auto tp = time_point_cast<milliseconds>(parse_epoch(epoch)) + ms;
  const auto day_tp = floor<days>(tp);
  const year_month_day ymd{day_tp};
  const hh_mm_ss hms{tp - day_tp};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), static_cast<int>(hms.subseconds().count()));
  return buf;
}

ObservedLog project_observed(const GroundTruthTrace& trace, const Net& ml) {
  ObservedLog log;
  log.run_id = trace.meta.run_id;
  for (const auto& r : trace.firings) {
    if (!r.label) continue;
    ObservedEvent e;
    e.event_id = event_id(trace.meta.run_id, r.seq_no);
    e.timestamp = render_timestamp(trace.meta.epoch, r.recorded_time);
    e.activity = *r.label;
    e.objects = r.recorded_objects;
    e.run_id = trace.meta.run_id;
    // Object types come from the variables that recorded them.
    const auto vars = ml.variables(r.transition);
    for (const auto& name : ml.record_variables(r.transition)) {
      auto it = r.binding.values.find(name);
      if (it == r.binding.values.end()) continue;
      for (const auto& v : vars)
        if (v.name == name) log.objects.emplace(it->second, v.object_type);
    }
    log.events.push_back(std::move(e));
  }
  std::stable_sort(log.events.begin(), log.events.end(), [](const ObservedEvent& a, const ObservedEvent& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.event_id < b.event_id;
  });
  return log;
}

// ---------------------------------------------------------------- models

json to_json(const Marking& m) {
  json j = json::object();
  for (const auto& [place, bag] : m.places()) {
    json tokens = json::array();
    for (const auto& [token, n] : bag)
      for (std::size_t k = 0; k < n; ++k) tokens.push_back(token);
    j[place] = tokens;
  }
  return j;
}

Marking marking_from_json(const json& j) {
  Marking m;
  if (!j.is_object()) throw ParseError("marking must be an object");
  for (const auto& [place, tokens] : j.items())
    for (const auto& t : tokens) m.add(place, t.get<Token>());
  return m;
}

namespace {

json vars_json(const std::vector<Variable>& vars) {
  json a = json::array();
  for (const auto& v : vars) a.push_back({{"name", v.name}, {"type", v.object_type}, {"fresh", v.fresh}});
  return a;
}

std::vector<Variable> vars_from(const json& j) {
  std::vector<Variable> out;
  for (const auto& v : j) out.push_back({v.at("name"), v.at("type"), v.value("fresh", false)});
  return out;
}

json provenance_json(const Provenance& p) {
  return {{"origin", to_string(p.origin)},
          {"application_id", p.application_id},
          {"pattern_code", p.pattern_code},
          {"shadow_of", p.shadow_of},
          {"role", p.role == CreatedRole::occurrence ? "occurrence" : "helper"},
          {"responsible", p.responsible},
          {"affected", p.affected}};
}

Provenance provenance_from(const json& j) {
  Provenance p;
  p.origin = origin_from_string(j.value("origin", "base"));
  p.application_id = j.value("application_id", "");
  p.pattern_code = j.value("pattern_code", "");
  p.shadow_of = j.value("shadow_of", "");
  p.role = j.value("role", "occurrence") == "helper" ? CreatedRole::helper : CreatedRole::occurrence;
  p.responsible = j.value("responsible", std::vector<std::string>{});
  p.affected = j.value("affected", std::vector<std::string>{});
  return p;
}

json override_json(const TimingOverride& o) {
  return {{"kind", o.kind == TimingOverride::Kind::coarsen_timestamps ? "coarsen_timestamps" : "long_duration"},
          {"application_id", o.application_id},
          {"pattern_code", o.pattern_code},
          {"transitions", o.transitions},
          {"window", o.window},
          {"probability", o.probability},
          {"delay", to_json(o.delay)}};
}

TimingOverride override_from(const json& j) {
  TimingOverride o;
  o.kind = j.at("kind") == "long_duration" ? TimingOverride::Kind::long_duration
                                           : TimingOverride::Kind::coarsen_timestamps;
  o.application_id = j.at("application_id");
  o.pattern_code = j.value("pattern_code", "");
  o.transitions = j.at("transitions").get<std::vector<std::string>>();
  o.window = j.value("window", 3600.0);
  o.probability = j.value("probability", 0.0);
  if (j.contains("delay")) o.delay = delay_from_json(j["delay"]);
  return o;
}

void check_schema(const json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
  if (!j.contains("schema_version")) throw ParseError(std::string(what) + " lacks schema_version");
  if (j["schema_version"] != kSchemaVersion)
    throw SchemaVersionMismatch(std::string(what) + " schema_version " + j["schema_version"].dump() +
                                " (expected " + std::to_string(kSchemaVersion) + ")");
}

}  // namespace

json to_json(const Net& net) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["object_types"] = net.object_types;
  j["places"] = json::array();
  for (const auto& p : net.places)
    j["places"].push_back({{"id", p.id}, {"types", p.type_tuple}, {"role", to_string(p.role)}});
  j["transitions"] = json::array();
  for (const auto& t : net.transitions)
    j["transitions"].push_back({{"id", t.id},
                                {"label", t.label ? json(*t.label) : json()},
                                {"provenance", provenance_json(t.provenance)},
                                {"record_spec", t.record_spec ? json(*t.record_spec) : json()}});
  j["arcs"] = json::array();
  for (const auto& a : net.arcs)
    j["arcs"].push_back({{"source", a.source}, {"target", a.target}, {"inscription", vars_json(a.inscription)}});
  j["initial_marking"] = to_json(net.initial_marking);
  j["final_marking"] = net.final_marking ? to_json(*net.final_marking) : json();
  json ann;
  ann["weight_defaults"] = net.annotations.weight_defaults;
  ann["delay_defaults"] = json::object();
  for (const auto& [k, d] : net.annotations.delay_defaults) ann["delay_defaults"][k] = to_json(d);
  ann["timing_overrides"] = json::array();
  for (const auto& o : net.annotations.timing_overrides) ann["timing_overrides"].push_back(override_json(o));
  j["annotations"] = ann;
  return j;
}

Net net_from_json(const json& j) {
  check_schema(j, "model");
  Net net;
  try {
    net.object_types = j.at("object_types").get<std::vector<std::string>>();
    for (const auto& p : j.at("places"))
      net.places.push_back({p.at("id"), p.at("types").get<std::vector<std::string>>(),
                            place_role_from_string(p.value("role", "regular"))});
    for (const auto& t : j.at("transitions")) {
      Transition x;
      x.id = t.at("id");
      if (t.contains("label") && !t["label"].is_null()) x.label = t["label"].get<std::string>();
      if (t.contains("provenance")) x.provenance = provenance_from(t["provenance"]);
      if (t.contains("record_spec") && !t["record_spec"].is_null())
        x.record_spec = t["record_spec"].get<std::vector<std::string>>();
      net.transitions.push_back(std::move(x));
    }
    for (const auto& a : j.at("arcs")) net.arcs.push_back({a.at("source"), a.at("target"), vars_from(a.at("inscription"))});
    if (j.contains("initial_marking")) net.initial_marking = marking_from_json(j["initial_marking"]);
    if (j.contains("final_marking") && !j["final_marking"].is_null())
      net.final_marking = marking_from_json(j["final_marking"]);
    if (j.contains("annotations")) {
      const auto& ann = j["annotations"];
      if (ann.contains("weight_defaults"))
        net.annotations.weight_defaults = ann["weight_defaults"].get<std::map<std::string, double>>();
      if (ann.contains("delay_defaults"))
        for (const auto& [k, d] : ann["delay_defaults"].items()) net.annotations.delay_defaults[k] = delay_from_json(d);
      if (ann.contains("timing_overrides"))
        for (const auto& o : ann["timing_overrides"]) net.annotations.timing_overrides.push_back(override_from(o));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  } catch (const ConfigInvalid& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
  return net;
}

std::string net_digest(const Net& net) { return hex64(fnv1a(to_json(net).dump())); }

json to_json(const PatternApplication& app) {
  return {{"application_id", app.application_id}, {"code", app.code}, {"mapping", app.mapping}, {"params", app.params}};
}

PatternApplication application_from_json(const json& j) {
  PatternApplication a;
  try {
    a.application_id = j.at("application_id");
    a.code = j.at("code");
    for (const auto& [k, v] : j.at("mapping").items())
      a.mapping[k] = v.is_string() ? std::vector<std::string>{v.get<std::string>()} : v.get<std::vector<std::string>>();
    a.params = j.value("params", json::object());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed pattern application: ") + e.what());
  }
  return a;
}

json to_json(const std::vector<PatternApplication>& apps) {
  json a = json::array();
  for (const auto& x : apps) a.push_back(to_json(x));
  return a;
}

std::vector<PatternApplication> applications_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("pattern applications must be a JSON list");
  std::vector<PatternApplication> out;
  for (const auto& x : j) out.push_back(application_from_json(x));
  return out;
}

json to_json(const ProvenanceLedger& ledger) {
  json a = json::array();
  for (const auto& e : ledger.entries)
    a.push_back({{"element", e.element}, {"kind", e.kind}, {"application_id", e.application_id}, {"code", e.code}});
  return a;
}

ProvenanceLedger ledger_from_json(const json& j) {
  ProvenanceLedger l;
  try {
    for (const auto& e : j) l.entries.push_back({e.at("element"), e.at("kind"), e.at("application_id"), e.at("code")});
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ledger: ") + e.what());
  }
  return l;
}

// ---------------------------------------------------------------- traces

namespace {

json tokens_json(const std::vector<PlacedToken>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back({t.place, t.token});
  return a;
}

std::vector<PlacedToken> tokens_from(const json& j) {
  std::vector<PlacedToken> out;
  for (const auto& t : j) out.push_back({t.at(0).get<std::string>(), t.at(1).get<Token>()});
  return out;
}

json meta_json(const TraceMetadata& m) {
  return {{"schema_version", kSchemaVersion}, {"kind", "trace_header"},  {"run_id", m.run_id},
          {"seed", m.seed},                  {"rng", m.rng},            {"epoch", m.epoch},
          {"config_digest", m.config_digest}, {"model_digests", m.model_digests},
          {"timing_patterns", m.timing_patterns},
          {"termination", m.termination},    {"end_time", m.end_time}, {"pending_at_end", m.pending_at_end}};
}

}  // namespace

void write_trace(std::ostream& out, const GroundTruthTrace& trace) {
  out << meta_json(trace.meta).dump() << '\n';
  std::size_t i = 0, k = 0;
  while (i < trace.firings.size() || k < trace.environment.size()) {
    const bool firing = k == trace.environment.size() ||
                        (i < trace.firings.size() && trace.firings[i].seq_no < trace.environment[k].seq_no);
    json j;
    if (firing) {
      const auto& r = trace.firings[i++];
      j = {{"kind", "firing"},
           {"seq_no", r.seq_no},
           {"time", r.time},
           {"recorded_time", r.recorded_time},
           {"transition", r.transition},
           {"label", r.label ? json(*r.label) : json()},
           {"binding", r.binding.values},
           {"fresh", r.binding.fresh},
           {"provenance", provenance_json(r.provenance)},
           {"consumed", tokens_json(r.consumed)},
           {"produced", tokens_json(r.produced)},
           {"recorded_objects", r.recorded_objects},
           {"tags", r.tags}};
    } else {
      const auto& e = trace.environment[k++];
      j = {{"kind", "environment"},
           {"seq_no", e.seq_no},
           {"time", e.time},
           {"op", e.step.kind == EnvironmentStep::Kind::add ? "add" : "remove"},
           {"place", e.step.token.place},
           {"token", e.step.token.token}};
    }
    out << j.dump() << '\n';
  }
}

std::string trace_to_string(const GroundTruthTrace& trace) {
  std::ostringstream s;
  write_trace(s, trace);
  return s.str();
}

GroundTruthTrace read_trace(std::istream& in, const Net* ml) {
  GroundTruthTrace t;
  std::string line;
  long n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n);
    }
    try {
      if (!header) {
        if (j.value("kind", "") != "trace_header") throw ParseError("first line must be the trace header", n);
        check_schema(j, "trace");
        auto& m = t.meta;
        m.run_id = j.at("run_id");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.rng = j.value("rng", m.rng);
        m.epoch = j.value("epoch", m.epoch);
        m.config_digest = j.value("config_digest", "");
        m.model_digests = j.value("model_digests", std::map<std::string, std::string>{});
        m.timing_patterns = j.value("timing_patterns", std::map<std::string, std::string>{});
        m.termination = j.value("termination", "");
        m.end_time = j.value("end_time", 0.0);
        m.pending_at_end = j.value("pending_at_end", std::size_t{0});
        header = true;
        continue;
      }
      const std::string kind = j.at("kind");
      if (kind == "firing") {
        FiringRecord r;
        r.seq_no = j.at("seq_no");
        r.time = j.at("time");
        r.recorded_time = j.at("recorded_time");
        r.transition = j.at("transition");
        if (!j.at("label").is_null()) r.label = j["label"].get<std::string>();
        r.binding.values = j.at("binding").get<std::map<std::string, Identifier>>();
        r.binding.fresh = j.at("fresh").get<std::set<std::string>>();
        r.provenance = provenance_from(j.at("provenance"));
        r.consumed = tokens_from(j.at("consumed"));
        r.produced = tokens_from(j.at("produced"));
        r.recorded_objects = j.at("recorded_objects").get<std::vector<Identifier>>();
        r.tags = j.at("tags").get<std::vector<std::string>>();
        if (ml && !ml->find_transition(r.transition))
          throw ParseError("unknown transition '" + r.transition + "'", n);
        t.firings.push_back(std::move(r));
      } else if (kind == "environment") {
        EnvironmentRecord e;
        e.seq_no = j.at("seq_no");
        e.time = j.at("time");
        e.step.kind = j.at("op") == "remove" ? EnvironmentStep::Kind::remove : EnvironmentStep::Kind::add;
        e.step.token = {j.at("place").get<std::string>(), j.at("token").get<Token>()};
        if (ml && !ml->find_place(e.step.token.place))
          throw ParseError("unknown place '" + e.step.token.place + "'", n);
        t.environment.push_back(std::move(e));
      } else {
        throw ParseError("unknown record kind '" + kind + "'", n);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed trace record: ") + e.what(), n);
    }
  }
  if (!header) throw ParseError("empty trace file", n);
  return t;
}

// ---------------------------------------------------------------- logs

void write_log_jsonl(std::ostream& out, const ObservedLog& log) {
  out << json{{"schema_version", kSchemaVersion}, {"kind", "log_header"}, {"run_id", log.run_id}, {"objects", log.objects}}
             .dump()
      << '\n';
  for (const auto& e : log.events)
    out << json{{"event_id", e.event_id},
                {"timestamp", e.timestamp},
                {"activity", e.activity},
                {"objects", e.objects},
                {"run_id", e.run_id}}
               .dump()
        << '\n';
}

ObservedLog read_log_jsonl(std::istream& in) {
  ObservedLog log;
  std::string line;
  long n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!header) {
        if (j.value("kind", "") != "log_header") throw ParseError("first line must be the log header", n);
        check_schema(j, "log");
        log.run_id = j.at("run_id");
        log.objects = j.at("objects").get<std::map<Identifier, std::string>>();
        header = true;
        continue;
      }
      ObservedEvent e{j.at("event_id"), j.at("timestamp"), j.at("activity"),
                      j.at("objects").get<std::vector<Identifier>>(), j.at("run_id")};
      if (e.activity.empty()) throw ParseError("event with empty activity", n);
      log.events.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed log line: ") + e.what(), n);
    }
  }
  if (!header) throw ParseError("empty log file", n);
  return log;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line, long n) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else out.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", n);
  return out;
}

}  // namespace

void write_log_csv(std::ostream& out, const ObservedLog& log) {
  out << "event_id,timestamp,activity,objects,run_id\n";
  for (const auto& e : log.events) {
    std::string objs;
    for (std::size_t i = 0; i < e.objects.size(); ++i) objs += (i ? ";" : "") + e.objects[i];
    out << csv_field(e.event_id) << ',' << e.timestamp << ',' << csv_field(e.activity) << ',' << csv_field(objs) << ','
        << csv_field(e.run_id) << '\n';
  }
}

ObservedLog read_log_csv(std::istream& in) {
  ObservedLog log;
  std::string line;
  long n = 0;
  if (!std::getline(in, line) || line != "event_id,timestamp,activity,objects,run_id")
    throw ParseError("missing CSV header", 1);
  n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = csv_split(line, n);
    if (f.size() != 5) throw ParseError("expected 5 columns", n);
    ObservedEvent e{f[0], f[1], f[2], {}, f[4]};
    std::stringstream objs(f[3]);
    for (std::string o; std::getline(objs, o, ';');) e.objects.push_back(o);
    log.run_id = e.run_id;
    log.events.push_back(std::move(e));
  }
  return log;
}

// ---------------------------------------------------------------- files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory for '" + path.string() + "'");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write '" + path.string() + "'");
  }
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what(), -1);
  }
}

}  // namespace gts
