#include "gts/fixtures.hpp"

namespace gts {

namespace {

Variable v(const std::string& name, const std::string& type) { return {name, type, false}; }

class NetBuilder {
 public:
  explicit NetBuilder(std::vector<std::string> types) { net_.object_types = std::move(types); }

  NetBuilder& place(const std::string& id, std::vector<std::string> types, PlaceRole role = PlaceRole::regular) {
    net_.places.push_back({id, std::move(types), role});
    return *this;
  }

  NetBuilder& transition(const std::string& id, std::optional<std::string> label,
                         std::optional<std::vector<std::string>> record = std::nullopt) {
    Transition t;
    t.id = id;
    t.label = std::move(label);
    t.record_spec = std::move(record);
    net_.transitions.push_back(std::move(t));
    return *this;
  }

  NetBuilder& in(const std::string& place, const std::string& t, std::vector<Variable> vars) {
    net_.arcs.push_back({place, t, std::move(vars)});
    return *this;
  }

  NetBuilder& out(const std::string& t, const std::string& place, std::vector<Variable> vars) {
    net_.arcs.push_back({t, place, std::move(vars)});
    return *this;
  }

  NetBuilder& token(const std::string& place, Token tok, std::size_t n = 1) {
    net_.initial_marking.add(place, tok, n);
    return *this;
  }

  Net build() const {
    if (auto diags = validate_net(net_); !diags.empty())
      throw Error("fixture net invalid: " + diags.front().element + ": " + diags.front().message);
    return net_;
  }

 private:
  Net net_;
};

PatternApplication app(std::string id, std::string code, std::map<std::string, std::vector<std::string>> mapping,
                       nlohmann::json params = nlohmann::json::object()) {
  return {std::move(id), std::move(code), std::move(mapping), std::move(params)};
}

}  // namespace

Net package_delivery_net() {
  const auto x = v("x", "package"), y = v("y", "package");
  const auto q = v("q", "queue"), r = v("r", "queue");
  const auto w = v("w", "warehouse_employee"), van = v("v", "van");
  const auto c = v("c", "courier"), k = v("k", "courier"), d = v("d", "depot");
  NetBuilder b({"package", "queue", "warehouse_employee", "van", "courier", "depot"});
  b.place("p_new", {"package"})
      .place("p_wait", {"package"})
      .place("p_home", {"package"})
      .place("p_depot", {"package"})
      .place("p_q3_free", {"queue"})
      .place("p_q2_free", {"queue"})
      .place("p_q1_free", {"queue"})
      .place("p_q3", {"package", "queue"}, PlaceRole::queue)
      .place("p_q2", {"package", "queue"}, PlaceRole::queue)
      .place("p_q1", {"package", "queue"}, PlaceRole::queue)
      .place("p_we", {"warehouse_employee"}, PlaceRole::resource_idle)
      .place("p_picked", {"package", "warehouse_employee"}, PlaceRole::resource_busy)
      .place("p_van", {"van"})
      .place("p_in_van", {"package", "van"})
      .place("p_c", {"courier"}, PlaceRole::resource_idle)
      .place("p_out", {"package", "courier"}, PlaceRole::correlation)
      .place("p_rung", {"package", "courier"}, PlaceRole::correlation)
      .place("p_depots", {"depot"}, PlaceRole::resource_idle)
      .place("p_reg", {"package", "depot"}, PlaceRole::correlation)
      .place("p_carry", {"package", "courier"}, PlaceRole::correlation)
      .place("p_at_depot", {"package", "depot"})
      .place("p_done", {"package"});

  b.transition("order_home", "order home").in("p_new", "order_home", {x}).out("order_home", "p_wait", {x}).out(
      "order_home", "p_home", {x});
  b.transition("order_depot", "order depot").in("p_new", "order_depot", {x}).out("order_depot", "p_wait", {x}).out(
      "order_depot", "p_depot", {x});
  b.transition("enqueue", std::nullopt)
      .in("p_wait", "enqueue", {x})
      .in("p_q3_free", "enqueue", {q})
      .out("enqueue", "p_q3", {x, q});
  b.transition("advance_3", std::nullopt)
      .in("p_q3", "advance_3", {x, q})
      .in("p_q2_free", "advance_3", {r})
      .out("advance_3", "p_q2", {x, r})
      .out("advance_3", "p_q3_free", {q});
  b.transition("advance_2", std::nullopt)
      .in("p_q2", "advance_2", {x, q})
      .in("p_q1_free", "advance_2", {r})
      .out("advance_2", "p_q1", {x, r})
      .out("advance_2", "p_q2_free", {q});
  b.transition("pick", "pick package", std::vector<std::string>{"x", "w"})
      .in("p_q1", "pick", {x, q})
      .in("p_we", "pick", {w})
      .out("pick", "p_picked", {x, w})
      .out("pick", "p_q1_free", {q});
  b.transition("load", "load")
      .in("p_picked", "load", {x, w})
      .in("p_van", "load", {van})
      .out("load", "p_in_van", {x, van})
      .out("load", "p_van", {van})
      .out("load", "p_we", {w});
  b.transition("depart", "depart")
      .in("p_in_van", "depart", {x, van})
      .in("p_in_van", "depart", {y, van})
      .in("p_c", "depart", {c})
      .in("p_c", "depart", {k})
      .out("depart", "p_out", {x, c})
      .out("depart", "p_out", {y, k});
  b.transition("ring", "ring").in("p_out", "ring", {x, c}).in("p_home", "ring", {x}).out("ring", "p_rung", {x, c});
  b.transition("deliver_home", "deliver home")
      .in("p_rung", "deliver_home", {x, c})
      .out("deliver_home", "p_done", {x})
      .out("deliver_home", "p_c", {c});
  b.transition("register_absent", "register")
      .in("p_rung", "register_absent", {x, c})
      .in("p_depots", "register_absent", {d})
      .out("register_absent", "p_reg", {x, d})
      .out("register_absent", "p_carry", {x, c})
      .out("register_absent", "p_depots", {d});
  b.transition("register", "register")
      .in("p_out", "register", {x, c})
      .in("p_depot", "register", {x})
      .in("p_depots", "register", {d})
      .out("register", "p_reg", {x, d})
      .out("register", "p_carry", {x, c})
      .out("register", "p_depots", {d});
  b.transition("deliver_depot", "deliver depot")
      .in("p_reg", "deliver_depot", {x, d})
      .in("p_carry", "deliver_depot", {x, c})
      .in("p_depots", "deliver_depot", {d})
      .out("deliver_depot", "p_at_depot", {x, d})
      .out("deliver_depot", "p_c", {c})
      .out("deliver_depot", "p_depots", {d});
  b.transition("collect", "collect").in("p_at_depot", "collect", {x, d}).out("collect", "p_done", {x});

  b.token("p_q3_free", {"q3"}).token("p_q2_free", {"q2"}).token("p_q1_free", {"q1"});
  b.token("p_we", {"we1"}).token("p_we", {"we2"});
  b.token("p_van", {"v1"});
  b.token("p_c", {"c1"}).token("p_c", {"c2"});
  b.token("p_depots", {"d1"}).token("p_depots", {"d2"});
  return b.build();
}

Net energy_contract_net() {
  const auto a = v("a", "application"), g = v("g", "agent"), m = v("m", "manager");
  NetBuilder b({"application", "agent", "manager"});
  b.place("p_new", {"application"})
      .place("p_received", {"application"})
      .place("p_checking", {"application", "agent"}, PlaceRole::correlation)
      .place("p_prepared", {"application"})
      .place("p_assigned", {"application", "agent"}, PlaceRole::correlation)
      .place("p_approved", {"application"})
      .place("p_signed", {"application"})
      .place("p_metered", {"application"})
      .place("p_done", {"application"})
      .place("p_agents", {"agent"}, PlaceRole::resource_idle)
      .place("p_managers", {"manager"}, PlaceRole::resource_idle)
      .place("p_batch_open", {"manager"});

  b.transition("receive", "receive request").in("p_new", "receive", {a}).out("receive", "p_received", {a});
  b.transition("check", "check application")
      .in("p_received", "check", {a})
      .in("p_agents", "check", {g})
      .out("check", "p_checking", {a, g});
  b.transition("prepare", "prepare contract")
      .in("p_checking", "prepare", {a, g})
      .out("prepare", "p_prepared", {a})
      .out("prepare", "p_assigned", {a, g})
      .out("prepare", "p_agents", {g});
  b.transition("approve", "approve contract")
      .in("p_prepared", "approve", {a})
      .in("p_managers", "approve", {m})
      .out("approve", "p_approved", {a})
      .out("approve", "p_managers", {m});
  b.transition("sign", "sign contract")
      .in("p_approved", "sign", {a})
      .in("p_assigned", "sign", {a, g})
      .in("p_agents", "sign", {g})
      .out("sign", "p_signed", {a})
      .out("sign", "p_agents", {g});
  // Meters are added in batches: the manager opens a window, then closes it.
  b.transition("open_batch", std::nullopt).in("p_managers", "open_batch", {m}).out("open_batch", "p_batch_open", {m});
  b.transition("close_batch", std::nullopt)
      .in("p_batch_open", "close_batch", {m})
      .out("close_batch", "p_managers", {m});
  b.transition("add_meter", "add meter", std::vector<std::string>{"a"})
      .in("p_signed", "add_meter", {a})
      .in("p_batch_open", "add_meter", {m})
      .out("add_meter", "p_metered", {a})
      .out("add_meter", "p_batch_open", {m});
  b.transition("notify", "notify customer").in("p_metered", "notify", {a}).out("notify", "p_done", {a});

  b.token("p_agents", {"g1"}).token("p_agents", {"g2"}).token("p_agents", {"g3"});
  b.token("p_managers", {"m1"});
  return b.build();
}

Net assembly_net() {
  const auto p = v("p", "product"), k = v("k", "capacity");
  NetBuilder b({"product", "capacity", "finisher", "fitter", "welder"});
  const std::vector<std::pair<char, std::string>> stages = {{'A', "finisher"}, {'B', "fitter"}, {'C', "welder"},
                                                            {'D', "welder"},   {'E', "welder"}, {'F', "fitter"},
                                                            {'G', "finisher"}};
  for (const char* op : {"finisher", "fitter", "welder"})
    b.place(std::string("p_") + op, {op}, PlaceRole::resource_idle);
  for (const auto& [s, op] : stages) {
    const std::string x(1, s);
    b.place("p_in_" + x, {"product"})
        .place("p_cap_" + x, {"capacity"})
        .place("p_busy_" + x, {"product", op, "capacity"}, PlaceRole::resource_busy);
  }
  b.place("p_done", {"product"});

  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& [s, op] = stages[i];
    const std::string x(1, s);
    const auto o = v("o", op);
    const std::string next = i + 1 < stages.size() ? "p_in_" + std::string(1, stages[i + 1].first) : "p_done";
    b.transition("start_" + x, "start " + x, std::vector<std::string>{"p", "o"})
        .in("p_in_" + x, "start_" + x, {p})
        .in("p_cap_" + x, "start_" + x, {k})
        .in("p_" + op, "start_" + x, {o})
        .out("start_" + x, "p_busy_" + x, {p, o, k});
    b.transition("complete_" + x, "complete " + x, std::vector<std::string>{"p", "o"})
        .in("p_busy_" + x, "complete_" + x, {p, o, k})
        .out("complete_" + x, next, {p})
        .out("complete_" + x, "p_" + op, {o})
        .out("complete_" + x, "p_cap_" + x, {k});
    b.token("p_cap_" + x, {"cap_" + x}, 2);
  }
  b.token("p_finisher", {"o1"}).token("p_fitter", {"o2"}).token("p_welder", {"o3"});
  return b.build();
}

namespace {

// Pinned so that every isolated package cell shows its pattern at least once.
constexpr std::uint64_t kPackageSeed = 194;
constexpr std::uint64_t kEnergySeed = 1;
constexpr std::uint64_t kAssemblySeed = 1;

NamedSet single(std::string id, PatternApplication a) {
  std::vector<PatternApplication> apps;
  apps.push_back(std::move(a));
  return {std::move(id), std::move(apps)};
}

Fixture package_delivery() {
  Fixture f;
  f.name = "package_delivery";
  f.m0 = package_delivery_net();
  const nlohmann::json once = {{"budget", 1}};

  GridSpec& g = f.grid;
  g.master_seed = kPackageSeed;
  g.pairing = Pairing::isolated;
  g.behavioral_sets = {
      {"none", {}},
      single("bi5", app("bi5", "BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q3"}}})),
      single("bi7", app("bi7", "BI_7", {{"p_r1", {"p_c"}}, {"p_r2", {"p_we"}}}, once)),
      single("bi10", app("bi10", "BI_10", {{"t", {"depart"}}, {"p_b", {"p_in_van"}}}, once)),
      single("bi3", app("bi3", "BI_3", {{"t", {"ring"}}}, once)),
      single("bi9", app("bi9", "BI_9", {{"p_m", {"p_reg"}}, {"p_r", {"p_depots"}}}, once)),
      single("bi2", app("bi2", "BI_2", {{"p1", {"p_out"}}, {"p2", {"p_c"}}}, once)),
  };
  g.recording_sets = {
      {"none", {}},
      single("ri_in_e1", app("ri_in_e1", "RI_in^e", {{"t", {"order_home"}}, {"label", {"order depot"}}}, once)),
      single("ri_in_e2", app("ri_in_e2", "RI_in^e", {{"t", {"order_depot"}}, {"label", {"order home"}}}, once)),
      single("ri_mi_e", app("ri_mi_e", "RI_mi^e", {{"t", {"load"}}}, once)),
      single("ri_mi_o", app("ri_mi_o", "RI_mi^o", {{"t", {"load"}}, {"O", {"van"}}}, once)),
      single("ri_in_o", app("ri_in_o", "RI_in^o", {{"t", {"ring"}}, {"variable", {"c"}}, {"p_w", {"p_out"}}}, once)),
      single("ri_mi_p", app("ri_mi_p", "RI_mi^p", {{"T", {"deliver_depot", "collect"}}})),
  };

  SimConfig c;
  c.deviation_weight = 1.0;
  c.default_delay = DelaySpec::exponential(1.0 / 60.0);
  c.delays = {{"order_home", DelaySpec::uniform(30, 120)},   {"order_depot", DelaySpec::uniform(30, 120)},
              {"pick", DelaySpec::normal(300, 3600)},        {"load", DelaySpec::normal(120, 900)},
              {"depart", DelaySpec::normal(900, 3600)},      {"ring", DelaySpec::normal(600, 3600)},
              {"deliver_home", DelaySpec::constant(120)},    {"register_absent", DelaySpec::constant(300)},
              {"register", DelaySpec::constant(300)},        {"deliver_depot", DelaySpec::normal(1800, 90000)},
              {"collect", DelaySpec::exponential(1.0 / 7200)}, {"enqueue", DelaySpec::constant(0)},
              {"advance_3->p_q3_free", DelaySpec::constant(0)}, {"advance_2->p_q2_free", DelaySpec::constant(0)}};
  c.arrivals = {{"package", "p_new", DelaySpec::constant(0), 2, 0.0}};
  c.firing_limit = 400;
  c.time_horizon = 7 * 86400.0;
  g.configs = {{"k0", c}};
  return f;
}

Fixture energy_contract() {
  Fixture f;
  f.name = "energy_contract";
  f.m0 = energy_contract_net();

  GridSpec& g = f.grid;
  g.master_seed = kEnergySeed;
  g.pairing = Pairing::product;
  g.behavioral_sets = {
      {"none", {}},
      {"all",
       {app("bi7", "BI_7", {{"p_r1", {"p_agents"}}, {"p_r2", {"p_managers"}}}, {{"budget", 400}}),
        app("bi9", "BI_9", {{"p_m", {"p_assigned"}}, {"p_r", {"p_agents"}}}),
        app("bi10", "BI_10", {{"t", {"add_meter"}}, {"p_gate", {"p_batch_open"}}, {"p_alt", {"p_managers"}}},
            {{"variant", "gate_bypass"}}),
        app("bi2", "BI_2", {{"p1", {"p_checking"}}, {"p2", {"p_agents"}}}),
        app("bi11", "BI_11", {{"t", {"add_meter"}}})}},
  };
  g.recording_sets = {
      {"none", {}},
      {"all",
       {app("ri_mi_e", "RI_mi^e", {{"t", {"notify"}}}),
        app("ri_in_o_check", "RI_in^o", {{"t", {"check"}}, {"variable", {"g"}}, {"p_w", {"p_assigned"}}}),
        app("ri_in_o_sign", "RI_in^o", {{"t", {"sign"}}, {"variable", {"g"}}, {"p_w", {"p_assigned"}}}),
        app("ri_in_p", "RI_in^p", {{"t1", {"approve"}}, {"t2", {"sign"}}})}},
  };
  f.choice_points = {
      {"bi7", "tau_switch_role-p_agents-p_managers#bi7", "check"},
      {"bi9", "tau_change_memory-p_assigned-p_agents#bi9", "sign"},
      {"bi10", "add_meter_ignore_batch#bi10", "approve"},
      {"bi2", "tau_early_release-p_checking-p_agents#bi2", "prepare"},
      {"bi11", "add_meter", ""},
      {"ri_mi_e", "tau_missing-notify#ri_mi_e", "notify"},
      {"ri_in_o_check", "check_incorrect_object#ri_in_o_check", "check"},
      {"ri_in_o_sign", "sign_incorrect_object#ri_in_o_sign", "sign"},
      {"ri_in_p", "approve_batch_log#ri_in_p", "approve"},
  };

  SimConfig c;
  c.weights = {{"open_batch", {{0.0, 0.1}}}, {"add_meter", {{0.0, 20.0}}}};
  c.default_delay = DelaySpec::exponential(1.0 / 300.0);
  c.delays = {{"receive", DelaySpec::constant(60)},        {"check", DelaySpec::normal(600, 14400)},
              {"prepare", DelaySpec::normal(300, 3600)},   {"approve", DelaySpec::normal(180, 900)},
              {"sign", DelaySpec::normal(300, 3600)},      {"open_batch", DelaySpec::constant(900)},
              {"close_batch", DelaySpec::constant(0)},     {"add_meter", DelaySpec::normal(600, 14400)},
              {"notify", DelaySpec::constant(60)},         {"add_meter->p_batch_open", DelaySpec::constant(0)}};
  c.arrivals = {{"application", "p_new", DelaySpec::exponential(1.0 / 600.0), 2000, 0.0}};
  c.firing_limit = 200000;
  c.time_horizon = 1.3e6;
  g.configs = {{"k0", c}};
  return f;
}

Fixture assembly() {
  Fixture f;
  f.name = "assembly";
  f.m0 = assembly_net();

  GridSpec& g = f.grid;
  g.master_seed = kAssemblySeed;
  g.pairing = Pairing::product;
  g.behavioral_sets = {
      {"none", {}},
      single("bi6", app("bi6", "BI_6", {{"p_c", {"p_cap_E"}}})),
      single("bi7", app("bi7", "BI_7", {{"p_r1", {"p_finisher"}}, {"p_r2", {"p_welder"}}})),
      single("bi2", app("bi2", "BI_2", {{"p1", {"p_busy_D"}}, {"p2", {"p_welder"}}})),
  };
  g.recording_sets = {
      {"none", {}},
      single("ri_in_o", app("ri_in_o", "RI_in^o", {{"t", {"complete_D"}}, {"variable", {"p"}}, {"p_w", {"p_in_D"}}})),
      single("ri_in_p", app("ri_in_p", "RI_in^p", {{"t1", {"start_D"}}, {"t2", {"complete_D"}}})),
  };

  SimConfig c;
  c.default_delay = DelaySpec::exponential(1.0 / 600.0);
  for (char s = 'A'; s <= 'G'; ++s) {
    c.delays["start_" + std::string(1, s)] = DelaySpec::normal(60, 100);
    c.delays["complete_" + std::string(1, s)] = DelaySpec::normal(900, 40000);
  }
  c.arrivals = {{"product", "p_in_A", DelaySpec::exponential(1.0 / 1800.0), 40, 0.0}};
  c.firing_limit = 20000;
  c.time_horizon = 2.5e5;
  g.configs = {{"k0", c}};
  return f;
}

}  // namespace

std::vector<std::string> fixture_names() { return {"package_delivery", "energy_contract", "assembly"}; }

Fixture fixture(const std::string& name) {
  if (name == "package_delivery") return package_delivery();
  if (name == "energy_contract") return energy_contract();
  if (name == "assembly") return assembly();
  throw UnknownFixture(name);
}

}  // namespace gts
