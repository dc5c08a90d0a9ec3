#include "gts/semantics.hpp"

#include <algorithm>
#include <functional>

namespace gts {

std::string to_string(const Binding& b) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : b.values) {
    if (!first) s += ",";
    first = false;
    s += k + "=" + v;
  }
  for (const auto& f : b.fresh)
    if (!b.values.count(f)) s += std::string(first ? "" : ",") + f + "=ν", first = false;
  return s + "}";
}

Identifier IdGenerator::next(const std::string& object_type) {
  auto& n = counters_[object_type];
  for (;;) {
    Identifier id = object_type + "_" + std::to_string(++n);
    if (used_.insert(id).second) return id;
  }
}

// ---------------------------------------------------------------- enabling

namespace {

struct Search {
  const NetIndex::Entry& entry;
  const Marking& marking;
  std::map<std::string, Identifier> values;
  std::map<std::pair<std::string, Token>, std::size_t> used;  // only for places read by several arcs
  std::set<Binding> found;
  bool first_only = false;
  std::vector<bool> done = std::vector<bool>(entry.pre.size(), false);

  bool shared(std::size_t arc) const {
    for (std::size_t i = 0; i < entry.pre.size(); ++i)
      if (i != arc && entry.pre[i].place == entry.pre[arc].place) return true;
    return false;
  }

  // Fully bound arcs first (a lookup), then the arc with the fewest tokens.
  std::size_t pick() const {
    std::size_t best = entry.pre.size();
    std::size_t best_size = 0;
    for (std::size_t i = 0; i < entry.pre.size(); ++i) {
      if (done[i]) continue;
      const auto& ref = entry.pre[i];
      bool bound = true;
      for (const auto& v : ref.vars) bound = bound && values.count(v.name);
      const std::size_t size = bound ? 0 : marking.tokens(ref.place).size() + 1;
      if (best == entry.pre.size() || size < best_size) best = i, best_size = size;
    }
    return best;
  }

  void complete() {
    Binding b;
    for (const auto& v : entry.variables) {
      if (v.fresh) {
        b.fresh.insert(v.name);
      } else if (!values.count(v.name)) {
        return;  // output variable with nothing to bind it
      }
    }
    b.values = values;
    found.insert(std::move(b));
  }

  bool take(std::size_t arc, const Token& token, std::size_t count) {
    if (!shared(arc)) return count > 0;
    auto& n = used[{entry.pre[arc].place, token}];
    if (n >= count) return false;
    ++n;
    return true;
  }

  void give_back(std::size_t arc, const Token& token) {
    if (shared(arc)) --used[{entry.pre[arc].place, token}];
  }

  void run() {
    if (first_only && !found.empty()) return;
    const std::size_t arc = pick();
    if (arc == entry.pre.size()) return complete();
    const auto& ref = entry.pre[arc];
    done[arc] = true;

    bool bound = true;
    for (const auto& v : ref.vars) bound = bound && values.count(v.name);
    if (bound) {
      Token token;
      for (const auto& v : ref.vars) token.push_back(values.at(v.name));
      const std::size_t count = marking.count(ref.place, token);
      if (take(arc, token, count)) {
        run();
        give_back(arc, token);
      }
      done[arc] = false;
      return;
    }

    for (const auto& [token, count] : marking.tokens(ref.place)) {
      if (token.size() != ref.vars.size()) continue;
      std::vector<std::string> bound_here;
      bool ok = true;
      for (std::size_t k = 0; k < token.size() && ok; ++k) {
        const auto& name = ref.vars[k].name;
        auto it = values.find(name);
        if (it == values.end()) {
          values.emplace(name, token[k]);
          bound_here.push_back(name);
        } else if (it->second != token[k]) {
          ok = false;
        }
      }
      if (ok && take(arc, token, count)) {
        run();
        give_back(arc, token);
      }
      for (const auto& name : bound_here) values.erase(name);
      if (first_only && !found.empty()) break;
    }
    done[arc] = false;
  }
};

Token instantiate(const std::vector<Variable>& vars, const std::map<std::string, Identifier>& values) {
  Token t;
  t.reserve(vars.size());
  for (const auto& v : vars) {
    auto it = values.find(v.name);
    if (it == values.end()) throw NotEnabled("variable '" + v.name + "' is unbound");
    t.push_back(it->second);
  }
  return t;
}

}  // namespace

std::vector<Firing> enabled_bindings(const NetIndex::Entry& entry, const Marking& marking) {
  std::vector<Firing> out;
  if (entry.pre.empty()) {
    // Source transitions are enabled once with only fresh assignments; a
    // non-fresh output variable can never be bound.
    Binding b;
    for (const auto& v : entry.variables) {
      if (!v.fresh) return out;
      b.fresh.insert(v.name);
    }
    out.push_back({entry.transition->id, std::move(b)});
    return out;
  }
  Search s{entry, marking, {}, {}, {}};
  s.run();
  out.reserve(s.found.size());
  for (const auto& b : s.found) out.push_back({entry.transition->id, b});
  return out;
}

bool is_enabled(const NetIndex::Entry& entry, const Marking& marking) {
  if (entry.pre.empty())
    return std::all_of(entry.variables.begin(), entry.variables.end(),
                       [](const Variable& v) { return v.fresh; });
  Search s{entry, marking, {}, {}, {}, true};
  s.run();
  return !s.found.empty();
}

std::vector<Firing> enabled_bindings(const NetIndex& index, const Marking& marking) {
  std::vector<Firing> out;
  for (const auto& e : index.entries()) {
    auto part = enabled_bindings(e, marking);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<Firing> enabled_bindings(const Net& net, const Marking& marking) {
  NetIndex index(net);
  return enabled_bindings(index, marking);
}

// ---------------------------------------------------------------- firing

FiringEffect fire_consume(const NetIndex& index, Marking& marking, const Firing& firing,
                          IdGenerator& ids) {
  const NetIndex::Entry* e = index.find(firing.transition);
  if (!e) throw NotEnabled("unknown transition '" + firing.transition + "'");

  FiringEffect eff;
  eff.transition = firing.transition;
  eff.binding.values = firing.binding.values;

  std::map<std::pair<std::string, Token>, std::size_t> need;
  for (const auto& ref : e->pre) {
    Token t = instantiate(ref.vars, firing.binding.values);
    ++need[{ref.place, t}];
    eff.consumed.push_back({ref.place, std::move(t)});
  }
  for (const auto& [key, n] : need)
    if (marking.count(key.first, key.second) < n)
      throw NotEnabled("transition '" + firing.transition + "' is not enabled under " +
                       to_string(firing.binding));
  for (const auto& [key, n] : need) marking.remove(key.first, key.second, n);

  for (const auto& v : e->variables) {
    if (!v.fresh) {
      if (!eff.binding.values.count(v.name))
        throw NotEnabled("variable '" + v.name + "' of '" + firing.transition + "' is unbound");
      continue;
    }
    eff.binding.fresh.insert(v.name);
    auto it = eff.binding.values.find(v.name);
    if (it == eff.binding.values.end()) {
      eff.binding.values.emplace(v.name, ids.next(v.object_type));
    } else {
      ids.reserve(it->second);
    }
  }
  for (const auto& ref : e->post)
    eff.produced.push_back({ref.place, instantiate(ref.vars, eff.binding.values)});
  return eff;
}

std::pair<Marking, FiringEffect> fire(const Net& net, const Marking& marking,
                                      const Firing& firing, IdGenerator& ids) {
  NetIndex index(net);
  Marking next = marking;
  FiringEffect eff = fire_consume(index, next, firing, ids);
  for (const auto& p : eff.produced) next.add(p.place, p.token);
  return {std::move(next), std::move(eff)};
}

// ---------------------------------------------------------------- replay

bool replay(const Net& net, const std::vector<TraceStep>& trace) {
  NetIndex index(net);
  Marking m = net.initial_marking;
  IdGenerator ids(m.identifiers());
  for (const auto& step : trace) {
    if (const auto* env = std::get_if<EnvironmentStep>(&step)) {
      if (env->kind == EnvironmentStep::Kind::add) {
        m.add(env->token.place, env->token.token);
        for (const auto& id : env->token.token) ids.reserve(id);
      } else if (!m.remove(env->token.place, env->token.token)) {
        return false;
      }
      continue;
    }
    const auto& f = std::get<Firing>(step);
    const auto* e = index.find(f.transition);
    if (!e) return false;
    // Fresh values in a replayed trace must still be fresh.
    for (const auto& v : e->variables) {
      if (!v.fresh) continue;
      auto it = f.binding.values.find(v.name);
      if (it != f.binding.values.end() && ids.used(it->second)) return false;
    }
    try {
      FiringEffect eff = fire_consume(index, m, f, ids);
      for (const auto& p : eff.produced) m.add(p.place, p.token);
    } catch (const NotEnabled&) {
      return false;
    }
  }
  return true;
}

bool replay(const Net& net, const std::vector<Firing>& trace) {
  std::vector<TraceStep> steps(trace.begin(), trace.end());
  return replay(net, steps);
}

// ---------------------------------------------------------------- language

std::set<FiringSequence> bounded_language(const Net& net, const LanguageOptions& opts) {
  if (opts.depth < 0 || opts.depth > 12)
    throw ExplosionGuard("bounded_language depth must lie in [0, 12]");
  NetIndex index(net);
  std::set<FiringSequence> language;
  std::size_t states = 0;
  FiringSequence prefix;

  std::function<void(const Marking&, const IdGenerator&)> dfs =
      [&](const Marking& m, const IdGenerator& ids) {
        if (++states > opts.state_cap)
          throw ExplosionGuard("bounded_language visited more than " +
                               std::to_string(opts.state_cap) + " states");
        language.insert(prefix);
        if (static_cast<int>(prefix.size()) == opts.depth) return;
        for (const auto& f : enabled_bindings(index, m)) {
          Marking next = m;
          IdGenerator next_ids = ids;
          FiringEffect eff = fire_consume(index, next, f, next_ids);
          for (const auto& p : eff.produced) next.add(p.place, p.token);
          Binding shown;
          shown.values = eff.binding.values;
          prefix.push_back(f.transition + to_string(shown));
          dfs(next, next_ids);
          prefix.pop_back();
        }
      };
  dfs(net.initial_marking, IdGenerator(net.initial_marking.identifiers()));
  return language;
}

}  // namespace gts
