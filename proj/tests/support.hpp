#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gts/net.hpp"
#include "gts/semantics.hpp"

namespace gts::testing {

inline Variable var(const std::string& name, const std::string& type, bool fresh = false) {
  return {name, type, fresh};
}

inline Transition labeled(const std::string& id, const std::string& label) {
  Transition t;
  t.id = id;
  t.label = label;
  return t;
}

inline Transition silent(const std::string& id) {
  Transition t;
  t.id = id;
  return t;
}

/// order(x) -> p_ready(x); p_ready(x) + p_idle(r) -> serve -> p_busy(x, r);
/// p_busy(x, r) -> finish -> p_done(x) + p_idle(r).
inline Net service_net(std::size_t customers = 2, std::size_t servers = 1) {
  Net n;
  n.object_types = {"customer", "server"};
  n.places = {{"p_new", {"customer"}, PlaceRole::regular},
              {"p_ready", {"customer"}, PlaceRole::regular},
              {"p_idle", {"server"}, PlaceRole::resource_idle},
              {"p_busy", {"customer", "server"}, PlaceRole::resource_busy},
              {"p_done", {"customer"}, PlaceRole::regular}};
  n.transitions = {labeled("order", "place order"), labeled("serve", "serve"), labeled("finish", "finish")};
  const auto x = var("x", "customer"), r = var("r", "server");
  n.arcs = {{"p_new", "order", {x}},    {"order", "p_ready", {x}},  {"p_ready", "serve", {x}},
            {"p_idle", "serve", {r}},   {"serve", "p_busy", {x, r}}, {"p_busy", "finish", {x, r}},
            {"finish", "p_done", {x}},  {"finish", "p_idle", {r}}};
  for (std::size_t i = 1; i <= customers; ++i) n.initial_marking.add("p_new", {"c" + std::to_string(i)});
  for (std::size_t i = 1; i <= servers; ++i) n.initial_marking.add("p_idle", {"s" + std::to_string(i)});
  return n;
}

/// Brute force: try every assignment of marking identifiers to the
/// transition's non-fresh variables and keep those whose consumption fits.
inline std::vector<Firing> naive_bindings(const Net& net, const std::string& transition, const Marking& m) {
  std::vector<Variable> vars;
  for (const auto& v : net.variables(transition))
    if (!v.fresh) vars.push_back(v);
  std::set<std::string> fresh;
  for (const auto& v : net.variables(transition))
    if (v.fresh) fresh.insert(v.name);
  const auto ids_set = m.identifiers();
  const std::vector<Identifier> ids(ids_set.begin(), ids_set.end());

  std::vector<Firing> out;
  std::map<std::string, Identifier> assign;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == vars.size()) {
      std::map<std::pair<std::string, Token>, std::size_t> need;
      for (const Arc* a : net.preset(transition)) {
        Token t;
        for (const auto& v : a->inscription) t.push_back(assign.at(v.name));
        ++need[{a->source, t}];
      }
      for (const auto& [key, n] : need)
        if (m.count(key.first, key.second) < n) return;
      Binding b;
      b.values = assign;
      b.fresh = fresh;
      out.push_back({transition, b});
      return;
    }
    for (const auto& id : ids) {
      assign[vars[i].name] = id;
      go(i + 1);
    }
    assign.erase(vars[i].name);
  };
  // Output-only variables can never be bound, so such transitions are dead.
  std::set<std::string> input_vars;
  for (const Arc* a : net.preset(transition))
    for (const auto& v : a->inscription) input_vars.insert(v.name);
  for (const auto& v : vars)
    if (!input_vars.count(v.name)) return out;
  if (net.preset(transition).empty()) {
    if (vars.empty()) out.push_back({transition, Binding{{}, fresh}});
    return out;
  }
  go(0);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Firing> naive_enabled(const Net& net, const Marking& m) {
  std::vector<Firing> out;
  std::vector<std::string> ids;
  for (const auto& t : net.transitions) ids.push_back(t.id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids)
    for (auto& f : naive_bindings(net, id, m)) out.push_back(std::move(f));
  return out;
}

}  // namespace gts::testing
