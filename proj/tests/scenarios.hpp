#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gts/fixtures.hpp"
#include "gts/net.hpp"
#include "gts/patterns.hpp"

namespace gts::testing {

/// One catalog pattern on a fixture net whose marking is cut down to the
/// region the pattern touches (at most six identifiers).
struct Scenario {
  std::string code;
  Net net;
  PatternApplication app;
};

inline Net with_marking(Net net, const std::vector<std::pair<std::string, Token>>& tokens) {
  net.initial_marking = Marking{};
  for (const auto& [p, t] : tokens) net.initial_marking.add(p, t);
  return net;
}

inline std::vector<Scenario> reduced_scenarios() {
  const Net pkg = package_delivery_net();
  const Net energy = energy_contract_net();
  const Net assembly = assembly_net();
  auto app = [](const std::string& code, std::map<std::string, std::vector<std::string>> mapping,
                nlohmann::json params = nlohmann::json::object()) {
    return PatternApplication{"a1", code, std::move(mapping), std::move(params)};
  };
  const std::vector<std::pair<std::string, Token>> out_home = {{"p_out", {"p1", "c1"}}, {"p_home", {"p1"}}};
  std::vector<Scenario> s;
  s.push_back({"RI_mi^e", with_marking(pkg, {{"p_picked", {"p1", "we1"}}, {"p_van", {"v1"}}}),
               app("RI_mi^e", {{"t", {"load"}}})});
  s.push_back({"RI_in^e", with_marking(pkg, {{"p_new", {"p1"}}}),
               app("RI_in^e", {{"t", {"order_home"}}, {"label", {"order depot"}}})});
  s.push_back({"RI_in^a", with_marking(pkg, {{"p_new", {"p1"}}}),
               app("RI_in^a", {{"t", {"order_home"}}, {"label", {"order at home"}}})});
  s.push_back({"RI_mi^o", with_marking(pkg, {{"p_picked", {"p1", "we1"}}, {"p_van", {"v1"}}}),
               app("RI_mi^o", {{"t", {"load"}}, {"O", {"van"}}})});
  s.push_back({"RI_in^o",
               with_marking(pkg, {{"p_out", {"p1", "c1"}}, {"p_home", {"p1"}}, {"p_out", {"p2", "c2"}}}),
               app("RI_in^o", {{"t", {"ring"}}, {"variable", {"c"}}, {"p_w", {"p_out"}}})});
  s.push_back({"RI_in^p",
               with_marking(energy, {{"p_prepared", {"a1"}},
                                     {"p_managers", {"m1"}},
                                     {"p_assigned", {"a1", "g1"}},
                                     {"p_agents", {"g1"}}}),
               app("RI_in^p", {{"t1", {"approve"}}, {"t2", {"sign"}}})});
  s.push_back({"RI_mi^p", with_marking(pkg, {{"p_reg", {"p1", "d1"}}, {"p_carry", {"p1", "c1"}}, {"p_depots", {"d1"}}}),
               app("RI_mi^p", {{"T", {"deliver_depot", "collect"}}})});
  auto bi1 = out_home;
  bi1.push_back({"p_c", {"c2"}});
  s.push_back({"BI_1", with_marking(pkg, bi1), app("BI_1", {{"p", {"p_out"}}, {"p_r", {"p_c"}}})});
  s.push_back({"BI_2", with_marking(pkg, out_home), app("BI_2", {{"p1", {"p_out"}}, {"p2", {"p_c"}}})});
  s.push_back({"BI_3", with_marking(pkg, out_home), app("BI_3", {{"t", {"ring"}}})});
  s.push_back({"BI_5", with_marking(pkg, {{"p_q2", {"p1", "q2"}}, {"p_q3", {"p2", "q3"}}, {"p_q1_free", {"q1"}}}),
               app("BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q3"}}})});
  s.push_back({"BI_6",
               with_marking(assembly, {{"p_in_E", {"pr1"}}, {"p_cap_E", {"cap_E"}}, {"p_welder", {"o3"}}}),
               app("BI_6", {{"p_c", {"p_cap_E"}}})});
  s.push_back({"BI_7", with_marking(pkg, {{"p_c", {"c1"}}, {"p_we", {"w1"}}, {"p_q1", {"p1", "q1"}}}),
               app("BI_7", {{"p_r1", {"p_c"}}, {"p_r2", {"p_we"}}})});
  s.push_back({"BI_9",
               with_marking(pkg, {{"p_reg", {"p1", "d1"}},
                                  {"p_carry", {"p1", "c1"}},
                                  {"p_depots", {"d1"}},
                                  {"p_depots", {"d2"}}}),
               app("BI_9", {{"p_m", {"p_reg"}}, {"p_r", {"p_depots"}}})});
  s.push_back({"BI_10",
               with_marking(pkg, {{"p_in_van", {"p1", "v1"}},
                                  {"p_in_van", {"p2", "v1"}},
                                  {"p_c", {"c1"}},
                                  {"p_c", {"c2"}}}),
               app("BI_10", {{"t", {"depart"}}, {"p_b", {"p_in_van"}}})});
  s.push_back({"BI_11", with_marking(energy, {{"p_signed", {"a1"}}, {"p_batch_open", {"m1"}}}),
               app("BI_11", {{"t", {"add_meter"}}})});
  return s;
}

inline bool is_subset(const Marking& a, const Marking& b) {
  for (const auto& [p, bag] : a.places())
    for (const auto& [t, n] : bag)
      if (b.count(p, t) < n) return false;
  return true;
}

/// Every element of `base` appears unchanged in `ext`.
inline bool element_superset(const Net& base, const Net& ext) {
  auto contains = [](const auto& xs, const auto& x) { return std::find(xs.begin(), xs.end(), x) != xs.end(); };
  for (const auto& t : base.object_types)
    if (!contains(ext.object_types, t)) return false;
  for (const auto& p : base.places)
    if (!contains(ext.places, p)) return false;
  for (const auto& t : base.transitions)
    if (!contains(ext.transitions, t)) return false;
  std::vector<Arc> arcs = ext.arcs;
  for (const auto& a : base.arcs) {
    auto it = std::find(arcs.begin(), arcs.end(), a);
    if (it == arcs.end()) return false;
    arcs.erase(it);
  }
  return is_subset(base.initial_marking, ext.initial_marking);
}

}  // namespace gts::testing
