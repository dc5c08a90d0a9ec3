#include "gts/patterns.hpp"

#include <algorithm>

namespace gts {

std::string to_string(WildcardKind kind) {
  switch (kind) {
    case WildcardKind::place: return "place";
    case WildcardKind::transition: return "transition";
    case WildcardKind::transition_set: return "transition_set";
    case WildcardKind::object_type_set: return "object_type_set";
    case WildcardKind::label: return "label";
    case WildcardKind::variable: return "variable";
  }
  return "place";
}

std::string PatternApplication::at(const std::string& wildcard) const {
  auto it = mapping.find(wildcard);
  if (it == mapping.end() || it->second.empty()) return {};
  return it->second.front();
}

namespace {

using RK = Requirement::Kind;
using Roles = std::vector<PlaceRole>;

Requirement req(std::string wc, RK kind, std::string description, std::string other = {},
                std::size_t n = 0, Roles roles = {}) {
  return Requirement{std::move(wc), kind, std::move(roles), n, std::move(other), std::move(description)};
}

CreatedElement silent(std::string name, CreatedRole role = CreatedRole::occurrence) {
  return {std::move(name), true, role};
}
CreatedElement labeled(std::string name, CreatedRole role = CreatedRole::occurrence) {
  return {std::move(name), false, role};
}
CreatedElement place(std::string name) { return {std::move(name), true, CreatedRole::helper}; }

double param_number(const nlohmann::json& params, const char* key, double fallback) {
  if (params.contains(key) && params[key].is_number()) return params[key].get<double>();
  return fallback;
}

std::string param_string(const nlohmann::json& params, const char* key, const std::string& fallback) {
  if (params.contains(key) && params[key].is_string()) return params[key].get<std::string>();
  return fallback;
}

void require_param(const std::string& code, const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) throw MissingParam(code, key);
}

Requirement labeled_req(const std::string& wc) {
  return req(wc, RK::labeled, "<" + wc + "> must be a labeled transition");
}

struct Spec {
  std::string code;
  std::string description;
};

const std::vector<Spec>& specs() {
  static const std::vector<Spec> kSpecs = {
      {"RI_mi^e", "missing event: the activity happens but is not recorded"},
      {"RI_in^e", "incorrect event: an intended activity is recorded as another existing activity"},
      {"RI_in^a", "incorrect activity name: the event is recorded under a different label"},
      {"RI_mi^o", "missing object(s): the event is recorded without some involved objects"},
      {"RI_in^o", "incorrect object: the event is recorded with a wrong object"},
      {"RI_in^p", "incorrect position: batch logging shifts when events appear to happen"},
      {"RI_mi^p", "missing position: coarse timestamps lose the ordering of events"},
      {"BI_1", "changing correlation: an object is handed over to another resource"},
      {"BI_2", "multitasking: a resource is released early and claimed back later"},
      {"BI_3", "skipping an activity"},
      {"BI_5", "overtaking in a first-in-first-out queue"},
      {"BI_6", "decreasing or increasing the capacity of an object"},
      {"BI_7", "switching roles of a resource object"},
      {"BI_9", "different resource memory: a later step uses another resource than memorized"},
      {"BI_10", "ignoring batching: a batch is released or extended outside its condition"},
      {"BI_11", "long duration: an activity takes exceptionally long"},
  };
  return kSpecs;
}

}  // namespace

bool is_known_pattern(const std::string& code) {
  const auto& s = specs();
  return std::any_of(s.begin(), s.end(), [&](const Spec& x) { return x.code == code; });
}

Origin pattern_origin(const std::string& code) {
  if (!is_known_pattern(code)) throw UnknownPattern(code);
  return code.rfind("BI_", 0) == 0 ? Origin::behavioral : Origin::recording;
}

PatternFragment instantiate(const std::string& code, const nlohmann::json& params_in) {
  if (!is_known_pattern(code)) throw UnknownPattern(code);
  const nlohmann::json params = params_in.is_null() ? nlohmann::json::object() : params_in;

  PatternFragment f;
  f.code = code;
  f.origin = pattern_origin(code);
  f.params = params;
  for (const auto& s : specs())
    if (s.code == code) f.description = s.description;

  auto wc = [&](std::string name, WildcardKind kind, std::vector<Requirement> reqs = {}) {
    f.wildcards.push_back({std::move(name), kind, std::move(reqs)});
  };
  auto weights = [&] {
    for (const auto& t : f.created_transitions)
      f.weight_defaults[t.name_template] =
          t.role == CreatedRole::occurrence ? kDefaultDeviationWeight : 1.0;
  };

  if (code == "RI_mi^e" || code == "BI_3") {
    wc("t", WildcardKind::transition, {labeled_req("t")});
    f.created_transitions = {silent(code == "BI_3" ? "tau_skip-{t}" : "tau_missing-{t}")};
    f.created_arcs = {"copy every arc of <t> onto the silent transition"};
  } else if (code == "RI_in^e" || code == "RI_in^a") {
    require_param(code, params, "label");
    wc("t", WildcardKind::transition, {labeled_req("t")});
    std::vector<Requirement> lr = {req("label", RK::label_differs, "label must differ from <t>'s", "t")};
    if (code == "RI_in^e")
      lr.push_back(req("label", RK::label_exists, "label must be the activity of another transition", "t"));
    wc("label", WildcardKind::label, lr);
    f.created_transitions = {labeled(code == "RI_in^e" ? "incorrect_event-{t}" : "incorrect_activity-{t}")};
    f.created_arcs = {"copy every arc of <t> onto the duplicate transition"};
  } else if (code == "RI_mi^o") {
    require_param(code, params, "objects");
    wc("t", WildcardKind::transition, {labeled_req("t")});
    wc("O", WildcardKind::object_type_set,
       {req("O", RK::objects_bypassable,
            "objects must occur on arcs of <t> whose place types consist of <O> only, in pre- and post-set",
            "t")});
    f.created_places = {place("p_bypass_pre-{t}"), place("p_bypass_post-{t}")};
    f.created_transitions = {silent("tau_bypass_pre-{t}", CreatedRole::helper),
                             labeled("{t}_missing_objects"),
                             silent("tau_bypass_post-{t}", CreatedRole::helper)};
    f.created_arcs = {"pre(<t>)|<O> -> tau_bypass_pre -> p_bypass_pre",
                      "pre(<t>)|<O>^C + p_bypass_pre -> <t>_missing -> post(<t>)|<O>^C + p_bypass_post",
                      "p_bypass_post -> tau_bypass_post -> post(<t>)|<O>"};
  } else if (code == "RI_in^o") {
    require_param(code, params, "variable");
    wc("t", WildcardKind::transition, {labeled_req("t")});
    wc("variable", WildcardKind::variable,
       {req("variable", RK::variable_of, "must name an arc variable of <t>", "t")});
    wc("p_w", WildcardKind::place,
       {req("p_w", RK::holds_type_of_variable, "must hold objects of the substituted variable's type",
            "variable")});
    f.created_transitions = {labeled("{t}_incorrect_object")};
    f.created_arcs = {"copy every arc of <t>", "read a token from <p_w> (consume and reproduce)",
                      "record the read object in place of <variable>"};
  } else if (code == "RI_in^p") {
    wc("t1", WildcardKind::transition,
       {labeled_req("t1"), req("t1", RK::post_pre_overlap, "post(<t1>) and pre(<t2>) must overlap", "t2")});
    wc("t2", WildcardKind::transition,
       {labeled_req("t2"), req("t2", RK::distinct_from, "<t2> must differ from <t1>", "t1")});
    f.created_places = {place("p_batch_log-{overlap}")};
    f.created_transitions = {labeled("{t1}_batch_log"), labeled("{t2}_batch_log", CreatedRole::helper)};
    f.created_arcs = {"<t1>_batch_log copies <t1>, producing into copies of post(<t1>) ∩ pre(<t2>)",
                      "<t2>_batch_log copies <t2>, using the copies instead"};
    const double batch = param_number(params, "batch_duration", 1800.0);
    f.delay_defaults["{t1}_batch_log"] = DelaySpec::constant(batch);
    f.delay_defaults["{t2}_batch_log"] = DelaySpec::constant(0.0);
  } else if (code == "RI_mi^p") {
    wc("T", WildcardKind::transition_set, {labeled_req("T")});
    TimingOverride o;
    o.kind = TimingOverride::Kind::coarsen_timestamps;
    o.pattern_code = code;
    o.window = param_number(params, "window", 3600.0);
    if (o.window <= 0) throw ConfigInvalid("RI_mi^p window must be positive");
    f.timing_overrides.push_back(o);
  } else if (code == "BI_1") {
    wc("p", WildcardKind::place,
       {req("p", RK::arity_at_least, "<p> must correlate at least two objects", {}, 2),
        req("p", RK::contains_type_of, "<p> must contain the resource type of <p_r>", "p_r")});
    wc("p_r", WildcardKind::place,
       {req("p_r", RK::role_in, "<p_r> must be an idle resource place", {}, 0, {PlaceRole::resource_idle}),
        req("p_r", RK::arity_equals, "<p_r> must hold single resources", {}, 1)});
    f.created_transitions = {silent("tau_change_correlation-{p}-{p_r}")};
    f.created_arcs = {"<p>(.., r_old) + <p_r>(r_new) -> tau -> <p>(.., r_new) + <p_r>(r_old)"};
  } else if (code == "BI_2") {
    wc("p1", WildcardKind::place,
       {req("p1", RK::role_in, "<p1> must be a correlation/busy place", {}, 0,
            {PlaceRole::correlation, PlaceRole::resource_busy}),
        req("p1", RK::arity_at_least, "<p1> must correlate at least two objects", {}, 2),
        req("p1", RK::contains_type_of, "<p1> must contain the resource type of <p2>", "p2")});
    wc("p2", WildcardKind::place,
       {req("p2", RK::role_in, "<p2> must be the matching idle place", {}, 0, {PlaceRole::resource_idle}),
        req("p2", RK::arity_equals, "<p2> must hold single resources", {}, 1)});
    f.created_places = {place("p_multitask-{p1}")};
    f.created_transitions = {silent("tau_early_release-{p1}-{p2}"),
                             silent("tau_late_claim-{p1}-{p2}", CreatedRole::helper)};
    f.created_arcs = {"<p1>(x, r) -> early_release -> <p2>(r) + memory(x, r)",
                      "memory(x, r) + <p2>(r) -> late_claim -> <p1>(x, r)"};
  } else if (code == "BI_5") {
    wc("p_q1", WildcardKind::place,
       {req("p_q1", RK::role_in, "<p_q1> must be a queue position", {}, 0, {PlaceRole::queue}),
        req("p_q1", RK::arity_at_least, "queue places correlate an item with a position", {}, 2)});
    wc("p_q2", WildcardKind::place,
       {req("p_q2", RK::role_in, "<p_q2> must be a queue position", {}, 0, {PlaceRole::queue}),
        req("p_q2", RK::same_type_tuple, "<p_q2> must have <p_q1>'s types", "p_q1"),
        req("p_q2", RK::distinct_from, "<p_q2> must differ from <p_q1>", "p_q1")});
    f.created_places = {place("p_overtake_guard-{p_q1}")};
    f.created_transitions = {silent("tau_overtake-{p_q1}-{p_q2}")};
    f.created_arcs = {"<p_q1>(x, a) + <p_q2>(y, b) + guard(g) -> tau_overtake -> <p_q1>(y, a) + <p_q2>(x, b)"};
    if (param_number(params, "budget", 1.0) < 1.0) throw ConfigInvalid("BI_5 budget must be >= 1");
  } else if (code == "BI_6") {
    const std::string variant = param_string(params, "variant", "both");
    if (variant != "both" && variant != "increase" && variant != "decrease")
      throw ConfigInvalid("BI_6 variant must be both, increase or decrease");
    wc("p_c", WildcardKind::place,
       {req("p_c", RK::arity_equals, "<p_c> must hold single capacity objects", {}, 1)});
    if (variant != "increase") {
      f.created_places.push_back(place("p_capacity_minus-{p_c}"));
      f.created_transitions.push_back(silent("tau_capacity_minus-{p_c}"));
      f.created_transitions.push_back(silent("tau_capacity_minus_undo-{p_c}", CreatedRole::helper));
      f.created_arcs.push_back("<p_c>(x) -> minus -> memory(x) -> undo -> <p_c>(x)");
    }
    if (variant != "decrease") {
      f.created_places.push_back(place("p_capacity_plus-{p_c}"));
      f.created_transitions.push_back(silent("tau_capacity_plus-{p_c}"));
      f.created_transitions.push_back(silent("tau_capacity_plus_undo-{p_c}", CreatedRole::helper));
      f.created_arcs.push_back("<p_c>(x) -> plus -> 2x <p_c>(x) + memory(x); <p_c>(x) + memory(x) -> undo");
    }
  } else if (code == "BI_7") {
    wc("p_r1", WildcardKind::place,
       {req("p_r1", RK::role_in, "<p_r1> must be an idle resource place", {}, 0, {PlaceRole::resource_idle}),
        req("p_r1", RK::arity_equals, "<p_r1> must hold single resources", {}, 1)});
    wc("p_r2", WildcardKind::place,
       {req("p_r2", RK::role_in, "<p_r2> must be an idle resource place", {}, 0, {PlaceRole::resource_idle}),
        req("p_r2", RK::arity_equals, "<p_r2> must hold single resources", {}, 1),
        req("p_r2", RK::different_type, "the two roles must have different types", "p_r1")});
    f.created_places = {place("p_switch_role-{p_r1}-{p_r2}")};
    f.created_transitions = {silent("tau_switch_role-{p_r1}-{p_r2}"),
                             silent("tau_switch_role_back-{p_r1}-{p_r2}", CreatedRole::helper)};
    f.created_arcs = {"<p_r1>(r) -> switch -> <p_r2>(ν n) + memory(r, n)",
                      "memory(r, n) + <p_r2>(n) -> switch_back -> <p_r1>(r)"};
  } else if (code == "BI_9") {
    wc("p_m", WildcardKind::place,
       {req("p_m", RK::arity_at_least, "<p_m> must memorize a resource next to an object", {}, 2),
        req("p_m", RK::contains_type_of, "<p_m> must contain the resource type of <p_r>", "p_r")});
    wc("p_r", WildcardKind::place,
       {req("p_r", RK::role_in, "<p_r> must be an idle resource place", {}, 0, {PlaceRole::resource_idle}),
        req("p_r", RK::arity_equals, "<p_r> must hold single resources", {}, 1)});
    f.created_transitions = {silent("tau_change_memory-{p_m}-{p_r}")};
    f.created_arcs = {"<p_m>(.., r) + <p_r>(r) + <p_r>(s) -> tau -> <p_m>(.., s) + <p_r>(r) + <p_r>(s)"};
  } else if (code == "BI_10") {
    const std::string variant = param_string(params, "variant", "partial_batch");
    wc("t", WildcardKind::transition);
    if (variant == "partial_batch") {
      wc("p_b", WildcardKind::place,
         {req("p_b", RK::multi_arc_from, "<t> must take a batch (>= 2 tokens) from <p_b>", "t")});
      f.created_transitions = {labeled("{t}_partial_batch")};
      f.created_arcs = {"copy of <t> taking a single token from <p_b>; arcs of the dropped batch members removed"};
    } else if (variant == "gate_bypass") {
      wc("p_gate", WildcardKind::place,
         {req("p_gate", RK::read_by, "<t> must read its batch condition from <p_gate>", "t")});
      wc("p_alt", WildcardKind::place,
         {req("p_alt", RK::same_type_tuple, "<p_alt> must have <p_gate>'s types", "p_gate"),
          req("p_alt", RK::distinct_from, "<p_alt> must differ from <p_gate>", "p_gate")});
      f.created_transitions = {labeled("{t}_ignore_batch")};
      f.created_arcs = {"copy of <t> reading <p_alt> instead of <p_gate>"};
    } else {
      throw ConfigInvalid("BI_10 variant must be partial_batch or gate_bypass");
    }
  } else if (code == "BI_11") {
    wc("t", WildcardKind::transition, {labeled_req("t")});
    TimingOverride o;
    o.kind = TimingOverride::Kind::long_duration;
    o.pattern_code = code;
    o.probability = param_number(params, "probability", kDefaultDeviationWeight / (1.0 + kDefaultDeviationWeight));
    if (o.probability < 0 || o.probability > 1) throw ConfigInvalid("BI_11 probability must lie in [0, 1]");
    o.delay = DelaySpec::pareto(param_number(params, "scale", 3600.0), param_number(params, "shape", 1.5));
    f.timing_overrides.push_back(o);
  }
  weights();
  return f;
}

std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> out;
  for (const auto& s : specs()) {
    nlohmann::json params = {{"label", "x"}, {"objects", nlohmann::json::array()}, {"variable", "x"}};
    PatternFragment f = instantiate(s.code, params);
    CatalogEntry e{s.code, s.description, {}};
    for (const auto& w : f.wildcards) e.signature[w.name] = w.kind;
    if (s.code == "BI_6") e.description += " (variants: increase, decrease)";
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Requirement> wildcard_requirements(const std::string& code, const nlohmann::json& params) {
  nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  for (const char* k : {"label", "objects", "variable"})
    if (!p.contains(k)) p[k] = "";
  std::vector<Requirement> out;
  for (const auto& w : instantiate(code, p).wildcards)
    out.insert(out.end(), w.requirements.begin(), w.requirements.end());
  return out;
}

}  // namespace gts
