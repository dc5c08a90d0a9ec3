#include "gts/net.hpp"

#include <algorithm>

namespace gts {

std::string to_string(const Diagnostic& d) {
  return d.code + (d.element.empty() ? "" : "(" + d.element + ")") +
         (d.message.empty() ? "" : ": " + d.message);
}

InvalidMapping::InvalidMapping(std::vector<Diagnostic> diagnostics, long index)
    : Error([&] {
        std::string msg = "invalid mapping";
        if (index >= 0) msg += " at application " + std::to_string(index);
        for (const auto& d : diagnostics) msg += "; " + to_string(d);
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)),
      index_(index) {}

std::string to_string(PlaceRole role) {
  switch (role) {
    case PlaceRole::regular: return "regular";
    case PlaceRole::resource_idle: return "resource_idle";
    case PlaceRole::resource_busy: return "resource_busy";
    case PlaceRole::queue: return "queue";
    case PlaceRole::correlation: return "correlation";
    case PlaceRole::other: return "other";
  }
  return "other";
}

PlaceRole place_role_from_string(const std::string& s) {
  for (auto r : {PlaceRole::regular, PlaceRole::resource_idle, PlaceRole::resource_busy,
                 PlaceRole::queue, PlaceRole::correlation, PlaceRole::other}) {
    if (to_string(r) == s) return r;
  }
  throw ParseError("unknown place role '" + s + "'");
}

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::base: return "base";
    case Origin::behavioral: return "behavioral";
    case Origin::recording: return "recording";
  }
  return "base";
}

Origin origin_from_string(const std::string& s) {
  if (s == "base") return Origin::base;
  if (s == "behavioral") return Origin::behavioral;
  if (s == "recording") return Origin::recording;
  throw ParseError("unknown provenance origin '" + s + "'");
}

// ---------------------------------------------------------------- Marking

void Marking::add(const std::string& place, const Token& token, std::size_t n) {
  if (n == 0) return;
  bags_[place][token] += n;
}

bool Marking::remove(const std::string& place, const Token& token, std::size_t n) {
  auto bag = bags_.find(place);
  if (bag == bags_.end()) return n == 0;
  auto it = bag->second.find(token);
  if (it == bag->second.end() || it->second < n) return n == 0;
  it->second -= n;
  if (it->second == 0) bag->second.erase(it);
  if (bag->second.empty()) bags_.erase(bag);
  return true;
}

std::size_t Marking::count(const std::string& place, const Token& token) const {
  auto bag = bags_.find(place);
  if (bag == bags_.end()) return 0;
  auto it = bag->second.find(token);
  return it == bag->second.end() ? 0 : it->second;
}

const Marking::Bag& Marking::tokens(const std::string& place) const {
  static const Bag kEmpty;
  auto bag = bags_.find(place);
  return bag == bags_.end() ? kEmpty : bag->second;
}

std::size_t Marking::size() const {
  std::size_t n = 0;
  for (const auto& [_, bag] : bags_)
    for (const auto& [_, k] : bag) n += k;
  return n;
}

std::set<Identifier> Marking::identifiers() const {
  std::set<Identifier> ids;
  for (const auto& [_, bag] : bags_)
    for (const auto& [token, _] : bag) ids.insert(token.begin(), token.end());
  return ids;
}

// ---------------------------------------------------------------- Net

const Place* Net::find_place(const std::string& id) const {
  for (const auto& p : places)
    if (p.id == id) return &p;
  return nullptr;
}

const Transition* Net::find_transition(const std::string& id) const {
  for (const auto& t : transitions)
    if (t.id == id) return &t;
  return nullptr;
}

bool Net::has_object_type(const std::string& name) const {
  return std::find(object_types.begin(), object_types.end(), name) != object_types.end();
}

std::vector<const Arc*> Net::preset(const std::string& transition) const {
  std::vector<const Arc*> out;
  for (const auto& a : arcs)
    if (a.target == transition) out.push_back(&a);
  return out;
}

std::vector<const Arc*> Net::postset(const std::string& transition) const {
  std::vector<const Arc*> out;
  for (const auto& a : arcs)
    if (a.source == transition) out.push_back(&a);
  return out;
}

std::vector<Variable> Net::variables(const std::string& transition) const {
  std::vector<Variable> vars;
  auto visit = [&](const std::vector<const Arc*>& arcs_) {
    for (const Arc* a : arcs_)
      for (const auto& v : a->inscription)
        if (std::none_of(vars.begin(), vars.end(),
                         [&](const Variable& w) { return w.name == v.name; }))
          vars.push_back(v);
  };
  visit(preset(transition));
  visit(postset(transition));
  return vars;
}

std::vector<std::string> Net::record_variables(const std::string& transition) const {
  const Transition* t = find_transition(transition);
  if (t && t->record_spec) return *t->record_spec;
  std::vector<std::string> names;
  for (const auto& v : variables(transition)) names.push_back(v.name);
  return names;
}

namespace {

void check_duplicates(const std::vector<std::string>& ids, const std::string& what,
                      std::vector<Diagnostic>& out) {
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second)
      out.push_back({"DuplicateId", id, "duplicate " + what + " id"});
}

void check_marking(const Net& net, const Marking& m, const std::string& which,
                   std::vector<Diagnostic>& out) {
  for (const auto& [pid, bag] : m.places()) {
    const Place* p = net.find_place(pid);
    if (!p) {
      out.push_back({"UnresolvedElement", pid, which + " marks an unknown place"});
      continue;
    }
    for (const auto& [token, _] : bag)
      if (token.size() != p->type_tuple.size())
        out.push_back({"MarkingTypeMismatch", pid,
                       which + " token arity " + std::to_string(token.size()) +
                           " does not match place arity " +
                           std::to_string(p->type_tuple.size())});
  }
}

}  // namespace

std::vector<Diagnostic> validate_net(const Net& net) {
  std::vector<Diagnostic> out;

  check_duplicates(net.object_types, "object type", out);
  {
    std::vector<std::string> ids;
    for (const auto& p : net.places) ids.push_back(p.id);
    for (const auto& t : net.transitions) ids.push_back(t.id);
    check_duplicates(ids, "node", out);
  }

  for (const auto& p : net.places) {
    if (p.type_tuple.empty()) out.push_back({"EmptyTypeTuple", p.id, "place has no type"});
    for (const auto& ty : p.type_tuple)
      if (!net.has_object_type(ty))
        out.push_back({"UnknownObjectType", p.id, "type '" + ty + "' is not declared"});
  }

  std::map<std::string, std::map<std::string, std::string>> var_types;  // t -> var -> type
  std::map<std::string, std::set<std::string>> input_vars;
  std::set<std::string> connected;

  for (std::size_t i = 0; i < net.arcs.size(); ++i) {
    const Arc& a = net.arcs[i];
    const std::string arc_id = a.source + "->" + a.target;
    const Place* sp = net.find_place(a.source);
    const Place* tp = net.find_place(a.target);
    const Transition* st = net.find_transition(a.source);
    const Transition* tt = net.find_transition(a.target);
    if ((!sp && !st) || (!tp && !tt)) {
      out.push_back({"UnresolvedElement", arc_id, "arc endpoint does not exist"});
      continue;
    }
    if ((sp && tp) || (st && tt)) {
      out.push_back({"NotBipartite", arc_id, "arc must connect a place and a transition"});
      continue;
    }
    const Place* place = sp ? sp : tp;
    const std::string tid = st ? st->id : tt->id;
    const bool input = sp != nullptr;
    connected.insert(tid);

    if (a.inscription.size() != place->type_tuple.size()) {
      out.push_back({"ArityMismatch", arc_id,
                     "inscription arity " + std::to_string(a.inscription.size()) +
                         " vs place arity " + std::to_string(place->type_tuple.size())});
      continue;
    }
    for (std::size_t k = 0; k < a.inscription.size(); ++k) {
      const Variable& v = a.inscription[k];
      if (v.object_type != place->type_tuple[k])
        out.push_back({"TypeMismatch", arc_id,
                       "variable '" + v.name + "' has type '" + v.object_type +
                           "' but place expects '" + place->type_tuple[k] + "'"});
      if (v.fresh && input)
        out.push_back({"FreshOnInputArc", arc_id,
                       "fresh variable '" + v.name + "' on a place-to-transition arc"});
      auto [it, inserted] = var_types[tid].emplace(v.name, v.object_type);
      if (!inserted && it->second != v.object_type)
        out.push_back({"InconsistentVariableType", tid,
                       "variable '" + v.name + "' bound at types '" + it->second +
                           "' and '" + v.object_type + "'"});
      if (input) input_vars[tid].insert(v.name);
    }
  }

  for (const auto& a : net.arcs) {
    const Transition* st = net.find_transition(a.source);
    if (!st || !net.find_place(a.target)) continue;
    for (const auto& v : a.inscription)
      if (!v.fresh && !input_vars[st->id].count(v.name))
        out.push_back({"UnboundOutputVariable", st->id,
                       "variable '" + v.name + "' is produced but never consumed"});
  }

  for (const auto& t : net.transitions) {
    if (!connected.count(t.id))
      out.push_back({"IsolatedTransition", t.id, "transition has no arcs"});
    if (t.label && t.label->empty())
      out.push_back({"EmptyLabel", t.id, "labels must be non-empty; omit for silent"});
    if (t.record_spec)
      for (const auto& name : *t.record_spec)
        if (!var_types[t.id].count(name))
          out.push_back({"RecordSpecUnknownVariable", t.id,
                         "record_spec names '" + name + "' which is not an arc variable"});
    if (t.provenance.origin == Origin::base && !t.provenance.pattern_code.empty())
      out.push_back({"ProvenanceInconsistent", t.id, "base transition carries a pattern code"});
    if (t.provenance.origin != Origin::base && t.provenance.application_id.empty())
      out.push_back({"ProvenanceInconsistent", t.id, "created transition lacks an application id"});
  }

  check_marking(net, net.initial_marking, "initial marking", out);
  if (net.final_marking) check_marking(net, *net.final_marking, "final marking", out);
  return out;
}

// ---------------------------------------------------------------- NetIndex

NetIndex::NetIndex(const Net& net) : net_(&net) {
  std::vector<const Transition*> ts;
  for (const auto& t : net.transitions) ts.push_back(&t);
  std::sort(ts.begin(), ts.end(),
            [](const Transition* a, const Transition* b) { return a->id < b->id; });
  std::map<std::string, std::size_t> pos;
  for (const Transition* t : ts) {
    Entry e;
    e.transition = t;
    pos[t->id] = entries_.size();
    entries_.push_back(std::move(e));
  }
  for (const auto& a : net.arcs) {
    if (auto it = pos.find(a.target); it != pos.end())
      entries_[it->second].pre.push_back({a.source, a.inscription});
    else if (auto it2 = pos.find(a.source); it2 != pos.end())
      entries_[it2->second].post.push_back({a.target, a.inscription});
  }
  for (auto& e : entries_) {
    e.variables = net.variables(e.transition->id);
    e.record_vars = net.record_variables(e.transition->id);
  }
  by_id_ = std::move(pos);
}

const NetIndex::Entry* NetIndex::find(const std::string& transition) const {
  auto it = by_id_.find(transition);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

}  // namespace gts
