#include "gts/transform.hpp"

#include <algorithm>
#include <set>

namespace gts {

const LedgerEntry* ProvenanceLedger::find(const std::string& element) const {
  for (const auto& e : entries)
    if (e.element == element) return &e;
  return nullptr;
}

std::vector<std::string> ProvenanceLedger::applications() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.application_id) == out.end())
      out.push_back(e.application_id);
  return out;
}

std::vector<std::string> mapped_values(const PatternApplication& app, const std::string& wildcard) {
  if (auto it = app.mapping.find(wildcard); it != app.mapping.end()) return it->second;
  // Parameter-style wildcards.
  const char* key = wildcard == "O" ? "objects" : wildcard.c_str();
  if (!app.params.is_object() || !app.params.contains(key)) return {};
  const auto& v = app.params[key];
  if (v.is_string()) return {v.get<std::string>()};
  std::vector<std::string> out;
  if (v.is_array())
    for (const auto& x : v)
      if (x.is_string()) out.push_back(x.get<std::string>());
  return out;
}

namespace {

bool has(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

std::vector<Variable> input_variables(const Net& net, const std::string& t) {
  std::vector<Variable> out;
  for (const Arc* a : net.preset(t))
    for (const auto& v : a->inscription)
      if (std::none_of(out.begin(), out.end(), [&](const Variable& w) { return w.name == v.name; }))
        out.push_back(v);
  return out;
}

/// Variables of `t` selected by an object set given as type names or variable names.
std::vector<Variable> object_variables(const Net& net, const std::string& t,
                                       const std::vector<std::string>& objects) {
  std::vector<Variable> out;
  for (const auto& v : input_variables(net, t))
    if (has(objects, v.object_type) || has(objects, v.name)) out.push_back(v);
  return out;
}

bool pure_in(const Arc& a, const std::vector<Variable>& vars) {
  return std::all_of(a.inscription.begin(), a.inscription.end(), [&](const Variable& v) {
    return std::any_of(vars.begin(), vars.end(), [&](const Variable& w) { return w.name == v.name; });
  });
}

std::set<std::string> places_of(const std::vector<const Arc*>& arcs, bool source) {
  std::set<std::string> out;
  for (const Arc* a : arcs) out.insert(source ? a->source : a->target);
  return out;
}

struct Checker {
  const Net& net;
  const PatternApplication& app;
  std::vector<Diagnostic> out;

  void fail(const Requirement& r, const std::string& element, bool role = false) {
    out.push_back({role ? "RoleMismatch" : "RequirementViolated", element,
                   app.application_id + " " + app.code + ": " + r.description});
  }

  std::string first(const std::string& wc) const {
    auto v = mapped_values(app, wc);
    return v.empty() ? std::string() : v.front();
  }

  void check(const Requirement& r, const std::string& value) {
    const Place* p = net.find_place(value);
    const Transition* t = net.find_transition(value);
    const std::string other = first(r.other);
    switch (r.kind) {
      case Requirement::Kind::labeled:
        if (t && t->silent()) fail(r, value);
        break;
      case Requirement::Kind::role_in:
        if (p && std::find(r.roles.begin(), r.roles.end(), p->role) == r.roles.end()) fail(r, value, true);
        break;
      case Requirement::Kind::arity_at_least:
        if (p && p->type_tuple.size() < r.n) fail(r, value);
        break;
      case Requirement::Kind::arity_equals:
        if (p && p->type_tuple.size() != r.n) fail(r, value);
        break;
      case Requirement::Kind::contains_type_of: {
        const Place* q = net.find_place(other);
        if (p && q && (q->type_tuple.size() != 1 || !has(p->type_tuple, q->type_tuple[0]))) fail(r, value);
        break;
      }
      case Requirement::Kind::same_type_tuple: {
        const Place* q = net.find_place(other);
        if (p && q && p->type_tuple != q->type_tuple) fail(r, value);
        break;
      }
      case Requirement::Kind::different_type: {
        const Place* q = net.find_place(other);
        if (p && q && p->type_tuple == q->type_tuple) fail(r, value);
        break;
      }
      case Requirement::Kind::distinct_from:
        if (value == other) fail(r, value);
        break;
      case Requirement::Kind::label_exists: {
        bool found = false;
        for (const auto& x : net.transitions)
          if (x.id != other && x.label == value) found = true;
        if (!found) fail(r, value);
        break;
      }
      case Requirement::Kind::label_differs: {
        const Transition* ot = net.find_transition(other);
        if (value.empty() || (ot && ot->label == value)) fail(r, value);
        break;
      }
      case Requirement::Kind::variable_of: {
        auto vars = input_variables(net, other);
        if (std::none_of(vars.begin(), vars.end(), [&](const Variable& v) { return v.name == value; }))
          fail(r, value);
        break;
      }
      case Requirement::Kind::holds_type_of_variable: {
        const std::string var = first(r.other);
        const std::string tid = first("t");
        auto vars = net.variables(tid);
        auto it = std::find_if(vars.begin(), vars.end(), [&](const Variable& v) { return v.name == var; });
        if (p && (it == vars.end() || !has(p->type_tuple, it->object_type))) fail(r, value);
        break;
      }
      case Requirement::Kind::multi_arc_from: {
        int n = 0;
        for (const Arc* a : net.preset(other)) n += a->source == value;
        if (p && n < 2) fail(r, value);
        break;
      }
      case Requirement::Kind::read_by:
        if (p && (!places_of(net.preset(other), true).count(value) ||
                  !places_of(net.postset(other), false).count(value)))
          fail(r, value);
        break;
      case Requirement::Kind::post_pre_overlap: {
        auto post = places_of(net.postset(value), false);
        auto pre = places_of(net.preset(other), true);
        if (t && std::none_of(post.begin(), post.end(), [&](const std::string& x) { return pre.count(x) > 0; }))
          fail(r, value);
        break;
      }
      case Requirement::Kind::objects_bypassable:
        break;  // handled on the whole set
    }
  }

  void check_objects(const Requirement& r, const std::vector<std::string>& objects) {
    const std::string tid = first(r.other);
    if (!net.find_transition(tid)) return;
    auto vars = object_variables(net, tid, objects);
    bool pure_pre = false;
    for (const Arc* a : net.preset(tid)) pure_pre = pure_pre || pure_in(*a, vars);
    if (vars.empty() || !pure_pre) fail(r, tid);
  }
};

}  // namespace

namespace {

nlohmann::json effective_params(const PatternApplication& app) {
  nlohmann::json params = app.params.is_object() ? app.params : nlohmann::json::object();
  for (const auto& [wc, key] : {std::pair<std::string, std::string>{"label", "label"},
                                {"O", "objects"},
                                {"variable", "variable"}}) {
    auto it = app.mapping.find(wc);
    if (it == app.mapping.end() || params.contains(key)) continue;
    if (key == "objects")
      params[key] = it->second;
    else if (!it->second.empty())
      params[key] = it->second.front();
  }
  return params;
}

}  // namespace

PatternFragment fragment_for(const PatternApplication& app) {
  return instantiate(app.code, effective_params(app));
}

std::vector<Diagnostic> validate_mapping(const Net& net, const PatternFragment& fragment,
                                         const PatternApplication& app) {
  Checker c{net, app, {}};
  if (app.code != fragment.code)
    c.out.push_back({"RequirementViolated", app.application_id, "application code differs from fragment"});
  if (app.application_id.empty())
    c.out.push_back({"MissingWildcard", app.code, "application id is empty"});

  std::map<WildcardKind, std::map<std::string, std::string>> seen;  // kind -> element -> wildcard
  bool resolved = true;
  for (const auto& w : fragment.wildcards) {
    auto values = mapped_values(app, w.name);
    if (values.empty()) {
      c.out.push_back({"MissingWildcard", w.name, app.application_id + ": wildcard is not mapped"});
      resolved = false;
      continue;
    }
    if (values.size() > 1 && w.kind != WildcardKind::transition_set && w.kind != WildcardKind::object_type_set)
      c.out.push_back({"RequirementViolated", w.name, "wildcard takes a single element"});
    for (const auto& v : values) {
      bool ok = true;
      if (w.kind == WildcardKind::place) ok = net.find_place(v) != nullptr;
      if (w.kind == WildcardKind::transition || w.kind == WildcardKind::transition_set)
        ok = net.find_transition(v) != nullptr;
      if (!ok) {
        c.out.push_back({"UnresolvedElement", v, app.application_id + ": <" + w.name + "> does not resolve"});
        resolved = false;
      }
      if (w.kind == WildcardKind::place || w.kind == WildcardKind::transition) {
        auto [it, inserted] = seen[w.kind].emplace(v, w.name);
        if (!inserted)
          c.out.push_back({"NonInjective", v, "<" + it->second + "> and <" + w.name + "> map to the same element"});
      }
    }
  }
  if (!resolved) return c.out;

  for (const auto& w : fragment.wildcards) {
    auto values = mapped_values(app, w.name);
    for (const auto& r : w.requirements) {
      if (r.kind == Requirement::Kind::objects_bypassable) {
        c.check_objects(r, values);
        continue;
      }
      for (const auto& v : values) c.check(r, v);
    }
  }
  return c.out;
}

// ---------------------------------------------------------------- apply

namespace {

/// Adds the created elements of one application to a copy of the net.
class Builder {
 public:
  Builder(const Net& net, const PatternFragment& f, const PatternApplication& app)
      : net_(net), f_(f), app_(app) {}

  Net build();

 private:
  std::string name(std::string tmpl, const std::map<std::string, std::string>& extra = {}) const {
    auto subst = [&](const std::string& key, const std::string& value) {
      const std::string pat = "{" + key + "}";
      for (auto pos = tmpl.find(pat); pos != std::string::npos; pos = tmpl.find(pat, pos + value.size()))
        tmpl.replace(pos, pat.size(), value);
    };
    for (const auto& [k, v] : extra) subst(k, v);
    for (const auto& w : f_.wildcards) {
      auto vals = mapped_values(app_, w.name);
      if (!vals.empty()) subst(w.name, vals.front());
    }
    return tmpl + "#" + app_.application_id;
  }

  std::string at(const std::string& wc) const {
    auto v = mapped_values(app_, wc);
    return v.empty() ? std::string() : v.front();
  }

  const Place& place(const std::string& id) const { return *net_.find_place(id); }
  const Transition& transition(const std::string& id) const { return *net_.find_transition(id); }

  std::string shadow(const std::string& t) const {
    const Transition& x = transition(t);
    return x.provenance.shadow_of.empty() ? x.id : x.provenance.shadow_of;
  }

  /// Resource types: types of arity-1 idle-resource places.
  std::set<std::string> resource_types() const {
    std::set<std::string> out;
    for (const auto& p : out_.places)
      if (p.role == PlaceRole::resource_idle && p.type_tuple.size() == 1) out.insert(p.type_tuple[0]);
    return out;
  }

  /// Split of a variable list into responsible (resource-typed, or all when
  /// none is) and affected, unless the params name the responsible ones.
  void blame(Provenance& pv, const std::vector<Variable>& vars) const {
    std::vector<std::string> chosen;
    if (app_.params.contains("responsible") && app_.params["responsible"].is_array()) {
      for (const auto& x : app_.params["responsible"]) chosen.push_back(x.get<std::string>());
    } else {
      auto rt = resource_types();
      for (const auto& v : vars)
        if (!v.fresh && rt.count(v.object_type)) chosen.push_back(v.name);
      if (chosen.empty())
        for (const auto& v : vars)
          if (!v.fresh) chosen.push_back(v.name);
    }
    blame_exact(pv, vars, chosen);
  }

  static void blame_exact(Provenance& pv, const std::vector<Variable>& vars,
                          const std::vector<std::string>& responsible) {
    pv.responsible.clear();
    pv.affected.clear();
    for (const auto& v : vars) {
      if (v.fresh) continue;
      if (has(responsible, v.name))
        pv.responsible.push_back(v.name);
      else
        pv.affected.push_back(v.name);
    }
  }

  Provenance provenance(CreatedRole role, const std::string& shadow_of = {}) const {
    Provenance pv;
    pv.origin = f_.origin;
    pv.application_id = app_.application_id;
    pv.pattern_code = f_.code;
    pv.shadow_of = shadow_of;
    pv.role = role;
    return pv;
  }

  Transition& add_transition(const std::string& id, std::optional<std::string> label, Provenance pv,
                             double weight) {
    out_.transitions.push_back({id, std::move(label), std::move(pv), std::nullopt});
    out_.annotations.weight_defaults[id] = weight;
    created_.push_back(id);
    return out_.transitions.back();
  }

  Place& add_place(const std::string& id, std::vector<std::string> types, PlaceRole role = PlaceRole::other) {
    out_.places.push_back({id, std::move(types), role});
    return out_.places.back();
  }

  void arc(const std::string& s, const std::string& t, std::vector<Variable> vars) {
    out_.arcs.push_back({s, t, std::move(vars)});
  }

  /// Copies every arc of `from` onto `to`, mapping places through `redirect`.
  void copy_arcs(const std::string& from, const std::string& to,
                 const std::map<std::string, std::string>& redirect_in = {},
                 const std::map<std::string, std::string>& redirect_out = {}) {
    auto look = [](const std::map<std::string, std::string>& m, const std::string& p) {
      auto it = m.find(p);
      return it == m.end() ? p : it->second;
    };
    for (const Arc* a : net_.preset(from)) arc(look(redirect_in, a->source), to, a->inscription);
    for (const Arc* a : net_.postset(from)) arc(to, look(redirect_out, a->target), a->inscription);
  }

  double weight_for(const std::string& tmpl, double fallback) const {
    auto it = f_.weight_defaults.find(tmpl);
    return it == f_.weight_defaults.end() ? fallback : it->second;
  }

  const CreatedElement& created(std::size_t i) const { return f_.created_transitions.at(i); }
  std::string created_id(std::size_t i, const std::map<std::string, std::string>& extra = {}) const {
    return name(created(i).name_template, extra);
  }
  double created_weight(std::size_t i) const {
    return weight_for(created(i).name_template,
                      created(i).role == CreatedRole::occurrence ? kDefaultDeviationWeight : 1.0);
  }

  std::vector<Variable> vars_of(const std::string& t) const { return out_.variables(t); }

  void copy_transition(std::size_t i, bool silent_copy, std::optional<std::string> label = std::nullopt);
  void missing_objects();
  void incorrect_object();
  void batch_logging();
  void change_correlation();
  void multitasking();
  void overtaking();
  void capacity();
  void switch_role();
  void resource_memory();
  void ignore_batching();
  void timing();
  void add_budget();

  const Net& net_;
  const PatternFragment& f_;
  const PatternApplication& app_;
  Net out_;
  std::vector<std::string> created_;
};

std::vector<Variable> tuple_vars(const std::vector<std::string>& types, const std::string& prefix) {
  std::vector<Variable> out;
  for (std::size_t k = 0; k < types.size(); ++k)
    out.push_back({prefix + std::to_string(k + 1), types[k], false});
  return out;
}

std::size_t index_of(const std::vector<std::string>& types, const std::string& type) {
  return static_cast<std::size_t>(std::find(types.begin(), types.end(), type) - types.begin());
}

}  // namespace

void Builder::copy_transition(std::size_t i, bool silent_copy, std::optional<std::string> label) {
  const std::string t = at("t");
  const std::string id = created_id(i);
  const Transition& base = transition(t);
  if (!silent_copy && !label) label = base.label;
  Transition& nt = add_transition(id, silent_copy ? std::nullopt : label,
                                  provenance(created(i).role, shadow(t)), created_weight(i));
  if (!silent_copy) nt.record_spec = base.record_spec;
  copy_arcs(t, id);
  blame(out_.transitions.back().provenance, vars_of(id));
}

void Builder::missing_objects() {
  const std::string t = at("t");
  const Transition& base = transition(t);
  auto ovars = object_variables(net_, t, mapped_values(app_, "O"));

  std::vector<const Arc*> pure_pre, rest_pre, pure_post, rest_post;
  for (const Arc* a : net_.preset(t)) (pure_in(*a, ovars) ? pure_pre : rest_pre).push_back(a);
  for (const Arc* a : net_.postset(t)) (pure_in(*a, ovars) ? pure_post : rest_post).push_back(a);

  auto collect = [](const std::vector<const Arc*>& arcs, std::vector<Variable>& into) {
    for (const Arc* a : arcs)
      for (const auto& v : a->inscription)
        if (!v.fresh && std::none_of(into.begin(), into.end(), [&](const Variable& w) { return w.name == v.name; }))
          into.push_back(v);
  };
  std::vector<Variable> carried_pre, carried_post;
  collect(pure_pre, carried_pre);
  carried_post = carried_pre;
  collect(pure_post, carried_post);
  auto types = [](const std::vector<Variable>& vs) {
    std::vector<std::string> out;
    for (const auto& v : vs) out.push_back(v.object_type);
    return out;
  };

  const std::string p_pre = name(f_.created_places[0].name_template);
  const std::string p_post = name(f_.created_places[1].name_template);
  add_place(p_pre, types(carried_pre));
  add_place(p_post, types(carried_post));

  const std::string t_pre = created_id(0), t_mid = created_id(1), t_post = created_id(2);
  add_transition(t_pre, std::nullopt, provenance(CreatedRole::helper, shadow(t)), kDefaultDeviationWeight);
  for (const Arc* a : pure_pre) arc(a->source, t_pre, a->inscription);
  arc(t_pre, p_pre, carried_pre);

  add_transition(t_mid, base.label, provenance(CreatedRole::occurrence, shadow(t)), 1.0);
  for (const Arc* a : rest_pre) arc(a->source, t_mid, a->inscription);
  arc(p_pre, t_mid, carried_pre);
  for (const Arc* a : rest_post) arc(t_mid, a->target, a->inscription);
  arc(t_mid, p_post, carried_post);

  add_transition(t_post, std::nullopt, provenance(CreatedRole::helper, shadow(t)), 1.0);
  arc(p_post, t_post, carried_post);
  for (const Arc* a : pure_post) arc(t_post, a->target, a->inscription);

  std::vector<std::string> recorded, dropped;
  for (const auto& name : net_.record_variables(t)) {
    bool is_o = std::any_of(ovars.begin(), ovars.end(), [&](const Variable& v) { return v.name == name; });
    (is_o ? dropped : recorded).push_back(name);
  }
  Transition& mid = *std::find_if(out_.transitions.begin(), out_.transitions.end(),
                                  [&](const Transition& x) { return x.id == t_mid; });
  mid.record_spec = recorded;
  blame_exact(mid.provenance, vars_of(t_mid), dropped);
}

void Builder::incorrect_object() {
  const std::string t = at("t");
  const std::string var = at("variable");
  const Place& pw = place(at("p_w"));
  const std::string id = created_id(0);
  const Transition& base = transition(t);

  auto vars = net_.variables(t);
  auto it = std::find_if(vars.begin(), vars.end(), [&](const Variable& v) { return v.name == var; });
  std::vector<Variable> read;
  for (std::size_t k = 0; k < pw.type_tuple.size(); ++k) {
    std::string n = "wrong_" + std::to_string(k + 1);
    while (std::any_of(vars.begin(), vars.end(), [&](const Variable& v) { return v.name == n; })) n += "_";
    read.push_back({n, pw.type_tuple[k], false});
  }
  const std::string wrong = read[index_of(pw.type_tuple, it->object_type)].name;

  add_transition(id, base.label, provenance(CreatedRole::occurrence, shadow(t)), created_weight(0));
  copy_arcs(t, id);
  arc(pw.id, id, read);
  arc(id, pw.id, read);

  std::vector<std::string> recorded = net_.record_variables(t);
  for (auto& r : recorded)
    if (r == var) r = wrong;
  Transition& nt = out_.transitions.back();
  nt.record_spec = recorded;
  blame_exact(nt.provenance, vars, {var});
}

void Builder::batch_logging() {
  const std::string t1 = at("t1"), t2 = at("t2");
  std::vector<std::string> overlap;
  auto pre2 = places_of(net_.preset(t2), true);
  for (const Arc* a : net_.postset(t1))
    if (pre2.count(a->target) && !has(overlap, a->target)) overlap.push_back(a->target);

  std::map<std::string, std::string> copies;
  for (const auto& p : overlap) {
    copies[p] = name(f_.created_places[0].name_template, {{"overlap", p}});
    add_place(copies[p], place(p).type_tuple);
  }

  const std::string b1 = created_id(0), b2 = created_id(1);
  add_transition(b1, transition(t1).label, provenance(CreatedRole::occurrence, shadow(t1)), created_weight(0));
  out_.transitions.back().record_spec = transition(t1).record_spec;
  copy_arcs(t1, b1, {}, copies);
  blame(out_.transitions.back().provenance, vars_of(b1));

  add_transition(b2, transition(t2).label, provenance(CreatedRole::helper, shadow(t2)), created_weight(1));
  out_.transitions.back().record_spec = transition(t2).record_spec;
  copy_arcs(t2, b2, copies, {});
  blame(out_.transitions.back().provenance, vars_of(b2));

  for (const auto& [tmpl, spec] : f_.delay_defaults) out_.annotations.delay_defaults[name(tmpl)] = spec;
}

void Builder::change_correlation() {
  const Place& p = place(at("p"));
  const Place& pr = place(at("p_r"));
  const std::string id = created_id(0);
  auto vs = tuple_vars(p.type_tuple, "o");
  const std::size_t k = index_of(p.type_tuple, pr.type_tuple[0]);
  vs[k].name = "r_old";
  Variable r_new{"r_new", pr.type_tuple[0], false};
  auto after = vs;
  after[k] = r_new;

  add_transition(id, std::nullopt, provenance(CreatedRole::occurrence), created_weight(0));
  arc(p.id, id, vs);
  arc(pr.id, id, {r_new});
  arc(id, p.id, after);
  arc(id, pr.id, {vs[k]});
  blame_exact(out_.transitions.back().provenance, vars_of(id), {"r_old", "r_new"});
}

void Builder::multitasking() {
  const Place& p1 = place(at("p1"));
  const Place& p2 = place(at("p2"));
  auto vs = tuple_vars(p1.type_tuple, "o");
  const std::size_t k = index_of(p1.type_tuple, p2.type_tuple[0]);
  vs[k].name = "r";
  const std::string mem = name(f_.created_places[0].name_template);
  add_place(mem, p1.type_tuple);

  const std::string release = created_id(0), claim = created_id(1);
  add_transition(release, std::nullopt, provenance(CreatedRole::occurrence), created_weight(0));
  arc(p1.id, release, vs);
  arc(release, p2.id, {vs[k]});
  arc(release, mem, vs);
  blame_exact(out_.transitions.back().provenance, vs, {"r"});

  add_transition(claim, std::nullopt, provenance(CreatedRole::helper), created_weight(1));
  arc(mem, claim, vs);
  arc(p2.id, claim, {vs[k]});
  arc(claim, p1.id, vs);
  blame_exact(out_.transitions.back().provenance, vs, {"r"});
}

void Builder::overtaking() {
  const Place& q1 = place(at("p_q1"));
  const Place& q2 = place(at("p_q2"));
  if (!out_.has_object_type("control")) out_.object_types.push_back("control");
  const std::string guard = name(f_.created_places[0].name_template);
  add_place(guard, {"control"});
  const auto budget = static_cast<std::size_t>(app_.params.value("budget", 1.0));
  out_.initial_marking.add(guard, {"permit#" + app_.application_id}, budget);

  auto a = tuple_vars(q1.type_tuple, "a");
  auto b = tuple_vars(q2.type_tuple, "b");
  a[0].name = "x";
  b[0].name = "y";
  auto a_after = a, b_after = b;
  a_after[0] = b[0];
  b_after[0] = a[0];
  Variable g{"g", "control", false};

  const std::string id = created_id(0);
  add_transition(id, std::nullopt, provenance(CreatedRole::occurrence), created_weight(0));
  arc(q1.id, id, a);
  arc(q2.id, id, b);
  arc(guard, id, {g});
  arc(id, q1.id, a_after);
  arc(id, q2.id, b_after);
  auto vs = a;
  vs.insert(vs.end(), b.begin(), b.end());
  blame_exact(out_.transitions.back().provenance, vs, {"x"});
}

void Builder::capacity() {
  const Place& pc = place(at("p_c"));
  Variable x{"x", pc.type_tuple[0], false};
  std::size_t i = 0, pl = 0;
  const std::string variant = app_.params.value("variant", std::string("both"));
  if (variant != "increase") {
    const std::string mem = name(f_.created_places[pl++].name_template);
    add_place(mem, pc.type_tuple);
    const std::string minus = created_id(i), undo = created_id(i + 1);
    add_transition(minus, std::nullopt, provenance(CreatedRole::occurrence), created_weight(i));
    arc(pc.id, minus, {x});
    arc(minus, mem, {x});
    blame_exact(out_.transitions.back().provenance, {x}, {"x"});
    add_transition(undo, std::nullopt, provenance(CreatedRole::helper), created_weight(i + 1));
    arc(mem, undo, {x});
    arc(undo, pc.id, {x});
    blame_exact(out_.transitions.back().provenance, {x}, {"x"});
    i += 2;
  }
  if (variant != "decrease") {
    const std::string mem = name(f_.created_places[pl].name_template);
    add_place(mem, pc.type_tuple);
    const std::string plus = created_id(i), undo = created_id(i + 1);
    add_transition(plus, std::nullopt, provenance(CreatedRole::occurrence), created_weight(i));
    arc(pc.id, plus, {x});
    arc(plus, pc.id, {x});
    arc(plus, pc.id, {x});
    arc(plus, mem, {x});
    blame_exact(out_.transitions.back().provenance, {x}, {"x"});
    add_transition(undo, std::nullopt, provenance(CreatedRole::helper), created_weight(i + 1));
    arc(pc.id, undo, {x});
    arc(mem, undo, {x});
    blame_exact(out_.transitions.back().provenance, {x}, {"x"});
  }
}

void Builder::switch_role() {
  const Place& r1 = place(at("p_r1"));
  const Place& r2 = place(at("p_r2"));
  Variable r{"r", r1.type_tuple[0], false};
  Variable n_new{"n", r2.type_tuple[0], true};
  Variable n{"n", r2.type_tuple[0], false};
  const std::string mem = name(f_.created_places[0].name_template);
  add_place(mem, {r.object_type, n.object_type});

  const std::string sw = created_id(0), back = created_id(1);
  add_transition(sw, std::nullopt, provenance(CreatedRole::occurrence), created_weight(0));
  arc(r1.id, sw, {r});
  arc(sw, r2.id, {n_new});
  arc(sw, mem, {r, n_new});
  blame_exact(out_.transitions.back().provenance, {r, n_new}, {"r"});

  add_transition(back, std::nullopt, provenance(CreatedRole::helper), created_weight(1));
  arc(mem, back, {r, n});
  arc(r2.id, back, {n});
  arc(back, r1.id, {r});
  blame_exact(out_.transitions.back().provenance, {r, n}, {"r"});
}

void Builder::resource_memory() {
  const Place& pm = place(at("p_m"));
  const Place& pr = place(at("p_r"));
  auto vs = tuple_vars(pm.type_tuple, "o");
  const std::size_t k = index_of(pm.type_tuple, pr.type_tuple[0]);
  vs[k].name = "r_old";
  Variable s{"r_new", pr.type_tuple[0], false};
  auto after = vs;
  after[k] = s;

  const std::string id = created_id(0);
  add_transition(id, std::nullopt, provenance(CreatedRole::occurrence), created_weight(0));
  arc(pm.id, id, vs);
  arc(pr.id, id, {vs[k]});
  arc(pr.id, id, {s});
  arc(id, pm.id, after);
  arc(id, pr.id, {vs[k]});
  arc(id, pr.id, {s});
  blame_exact(out_.transitions.back().provenance, vars_of(id), {"r_old", "r_new"});
}

void Builder::ignore_batching() {
  const std::string t = at("t");
  const std::string id = created_id(0);
  const std::string variant = app_.params.value("variant", std::string("partial_batch"));

  if (variant == "gate_bypass") {
    add_transition(id, net_.find_transition(t)->label, provenance(CreatedRole::occurrence, shadow(t)),
                   created_weight(0));
    std::map<std::string, std::string> redirect{{at("p_gate"), at("p_alt")}};
    copy_arcs(t, id, redirect, redirect);
    blame(out_.transitions.back().provenance, vars_of(id));
    return;
  }

  // Keep the first arc from p_b, drop the remaining batch members and
  // whatever depended on them until the copy is well-formed again.
  const std::string pb = at("p_b");
  std::vector<const Arc*> pre = net_.preset(t), post = net_.postset(t);
  std::vector<bool> keep_pre(pre.size(), true), keep_post(post.size(), true);
  std::size_t anchor = pre.size();
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre[i]->source != pb) continue;
    if (anchor == pre.size())
      anchor = i;
    else
      keep_pre[i] = false;
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::set<std::string> bound, kept_out;
    for (std::size_t i = 0; i < pre.size(); ++i)
      if (keep_pre[i])
        for (const auto& v : pre[i]->inscription) bound.insert(v.name);
    for (std::size_t i = 0; i < post.size(); ++i) {
      if (!keep_post[i]) continue;
      for (const auto& v : post[i]->inscription)
        if (!v.fresh && !bound.count(v.name)) keep_post[i] = false, changed = true;
    }
    for (std::size_t i = 0; i < post.size(); ++i)
      if (keep_post[i])
        for (const auto& v : post[i]->inscription) kept_out.insert(v.name);
    std::set<std::string> orphans;
    for (std::size_t i = 0; i < post.size(); ++i)
      if (!keep_post[i])
        for (const auto& v : post[i]->inscription)
          if (!v.fresh && !kept_out.count(v.name)) orphans.insert(v.name);
    for (std::size_t i = 0; i < pre.size(); ++i) {
      if (!keep_pre[i] || i == anchor) continue;
      for (const auto& v : pre[i]->inscription)
        if (orphans.count(v.name)) {
          keep_pre[i] = false;
          changed = true;
          break;
        }
    }
  }

  add_transition(id, net_.find_transition(t)->label, provenance(CreatedRole::occurrence, shadow(t)),
                 created_weight(0));
  for (std::size_t i = 0; i < pre.size(); ++i)
    if (keep_pre[i]) arc(pre[i]->source, id, pre[i]->inscription);
  for (std::size_t i = 0; i < post.size(); ++i)
    if (keep_post[i]) arc(id, post[i]->target, post[i]->inscription);
  blame(out_.transitions.back().provenance, vars_of(id));
}

void Builder::timing() {
  for (auto o : f_.timing_overrides) {
    o.application_id = app_.application_id;
    o.transitions = mapped_values(app_, o.kind == TimingOverride::Kind::coarsen_timestamps ? "T" : "t");
    out_.annotations.timing_overrides.push_back(std::move(o));
  }
}

/// Caps the number of deviation entries per run: every entry transition
/// consumes one permit from a guard place.
void Builder::add_budget() {
  const double budget = app_.params["budget"].get<double>();
  if (budget < 1) throw ConfigInvalid(app_.application_id + ": budget must be >= 1");
  if (!out_.has_object_type("control")) out_.object_types.push_back("control");
  const std::string guard = "p_budget#" + app_.application_id;
  add_place(guard, {"control"});
  out_.initial_marking.add(guard, {"permit#" + app_.application_id}, static_cast<std::size_t>(budget));
  for (const auto& id : created_) {
    const Transition& t = *out_.find_transition(id);
    const bool entry = f_.code == "RI_mi^o" ? t.silent() && t.provenance.role == CreatedRole::helper &&
                                                  id.rfind("tau_bypass_pre", 0) == 0
                                            : t.provenance.role == CreatedRole::occurrence;
    if (!entry) continue;
    // The permit is bookkeeping and must not show up in recorded events.
    if (!t.silent() && !t.record_spec) {
      std::vector<std::string> names;
      for (const auto& v : out_.variables(id)) names.push_back(v.name);
      for (auto& tr : out_.transitions)
        if (tr.id == id) tr.record_spec = names;
    }
    arc(guard, id, {{"budget_permit", "control", false}});
  }
}

Net Builder::build() {
  out_ = net_;
  const std::string& c = f_.code;
  if (c == "RI_mi^e" || c == "BI_3") copy_transition(0, true);
  else if (c == "RI_in^e" || c == "RI_in^a") copy_transition(0, false, at("label"));
  else if (c == "RI_mi^o") missing_objects();
  else if (c == "RI_in^o") incorrect_object();
  else if (c == "RI_in^p") batch_logging();
  else if (c == "BI_1") change_correlation();
  else if (c == "BI_2") multitasking();
  else if (c == "BI_5") overtaking();
  else if (c == "BI_6") capacity();
  else if (c == "BI_7") switch_role();
  else if (c == "BI_9") resource_memory();
  else if (c == "BI_10") ignore_batching();
  if (c != "BI_5" && app_.params.contains("budget")) add_budget();
  timing();
  return std::move(out_);
}


Net apply(const Net& net, const PatternFragment& fragment, const PatternApplication& app) {
  auto diags = validate_mapping(net, fragment, app);
  if (!diags.empty()) throw InvalidMapping(std::move(diags));
  PatternApplication normalized = app;
  normalized.params = effective_params(app);
  Net out = Builder(net, fragment, normalized).build();
  // Created ids may not collide with anything already present.
  std::set<std::string> ids;
  std::vector<Diagnostic> clashes;
  for (const auto& p : out.places)
    if (!ids.insert(p.id).second) clashes.push_back({"DuplicateId", p.id, "created element already exists"});
  for (const auto& t : out.transitions)
    if (!ids.insert(t.id).second) clashes.push_back({"DuplicateId", t.id, "created element already exists"});
  if (!clashes.empty()) throw InvalidMapping(std::move(clashes));
  return out;
}


Net apply(const Net& net, const PatternApplication& app) {
  return apply(net, fragment_for(app), app);
}

std::pair<Net, ProvenanceLedger> apply_sequence(const Net& net, const std::vector<PatternApplication>& apps) {
  bool seen_recording = false;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    const Origin o = pattern_origin(apps[i].code);
    if (o == Origin::recording) seen_recording = true;
    if (o == Origin::behavioral && seen_recording)
      throw OrderViolation("behavioral application '" + apps[i].application_id + "' (index " +
                           std::to_string(i) + ") follows a recording application");
  }

  Net cur = net;
  ProvenanceLedger ledger;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    Net next;
    try {
      next = apply(cur, apps[i]);
    } catch (const InvalidMapping& e) {
      throw InvalidMapping(e.diagnostics(), static_cast<long>(i));
    }
    std::set<std::string> before;
    for (const auto& p : cur.places) before.insert(p.id);
    for (const auto& t : cur.transitions) before.insert(t.id);
    auto note = [&](const std::string& id, const char* kind) {
      if (!before.count(id)) ledger.entries.push_back({id, kind, apps[i].application_id, apps[i].code});
    };
    for (const auto& ty : next.object_types)
      if (!cur.has_object_type(ty)) ledger.entries.push_back({ty, "object_type", apps[i].application_id, apps[i].code});
    for (const auto& p : next.places) note(p.id, "place");
    for (const auto& t : next.transitions) note(t.id, "transition");
    cur = std::move(next);
  }
  return {std::move(cur), std::move(ledger)};
}

bool same_up_to_order(const Net& a, const Net& b) {
  auto canon = [](Net n) {
    std::sort(n.object_types.begin(), n.object_types.end());
    std::sort(n.places.begin(), n.places.end(), [](const Place& x, const Place& y) { return x.id < y.id; });
    std::sort(n.transitions.begin(), n.transitions.end(),
              [](const Transition& x, const Transition& y) { return x.id < y.id; });
    auto key = [](const Arc& x) {
      std::string k = x.source + "\x1f" + x.target;
      for (const auto& v : x.inscription) k += "\x1f" + v.name + ":" + v.object_type + (v.fresh ? "!" : "");
      return k;
    };
    std::sort(n.arcs.begin(), n.arcs.end(), [&](const Arc& x, const Arc& y) { return key(x) < key(y); });
    std::sort(n.annotations.timing_overrides.begin(), n.annotations.timing_overrides.end(),
              [](const TimingOverride& x, const TimingOverride& y) { return x.application_id < y.application_id; });
    return n;
  };
  return canon(a) == canon(b);
}

}  // namespace gts
