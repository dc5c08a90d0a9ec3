#include <gtest/gtest.h>

#include "gts/fixtures.hpp"
#include "gts/transform.hpp"
#include "scenarios.hpp"

namespace gts {
namespace {

using testing::element_superset;
using testing::reduced_scenarios;

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

std::vector<Diagnostic> mapping_errors(const Net& net, const PatternApplication& app) {
  return validate_mapping(net, fragment_for(app), app);
}

TEST(Apply, EveryScenarioIsAValidSuperset) {
  for (const auto& s : reduced_scenarios()) {
    SCOPED_TRACE(s.code);
    ASSERT_TRUE(mapping_errors(s.net, s.app).empty());
    const Net out = apply(s.net, s.app);
    EXPECT_TRUE(validate_net(out).empty());
    EXPECT_TRUE(element_superset(s.net, out));
  }
}

TEST(Apply, BaseLanguageIsKept) {
  for (const auto& s : reduced_scenarios()) {
    SCOPED_TRACE(s.code);
    const auto base = bounded_language(s.net, 4);
    const auto ext = bounded_language(apply(s.net, s.app), 4);
    EXPECT_TRUE(std::includes(ext.begin(), ext.end(), base.begin(), base.end()));
    EXPECT_GT(base.size(), 1u);
  }
}

TEST(Apply, CreatedElementsCarryProvenance) {
  for (const auto& s : reduced_scenarios()) {
    SCOPED_TRACE(s.code);
    const Net out = apply(s.net, s.app);
    for (const auto& t : out.transitions) {
      if (s.net.find_transition(t.id)) continue;
      EXPECT_EQ(t.provenance.origin, pattern_origin(s.code));
      EXPECT_EQ(t.provenance.pattern_code, s.code);
      EXPECT_EQ(t.provenance.application_id, "a1");
      EXPECT_NE(t.id.find("#a1"), std::string::npos);
    }
  }
}

TEST(Apply, SkipCopiesArcsWithoutLabel) {
  const Net m = package_delivery_net();
  const Net out = apply(m, PatternApplication{"s", "BI_3", {{"t", {"ring"}}}, {}});
  const Transition* t = out.find_transition("tau_skip-ring#s");
  ASSERT_NE(t, nullptr);
  EXPECT_TRUE(t->silent());
  EXPECT_EQ(t->provenance.shadow_of, "ring");
  ASSERT_EQ(out.preset(t->id).size(), m.preset("ring").size());
  for (std::size_t i = 0; i < m.preset("ring").size(); ++i) {
    EXPECT_EQ(out.preset(t->id)[i]->source, m.preset("ring")[i]->source);
    EXPECT_EQ(out.preset(t->id)[i]->inscription, m.preset("ring")[i]->inscription);
  }
}

TEST(Apply, IncorrectEventRelabelsCopy) {
  const Net m = package_delivery_net();
  const Net out = apply(m, PatternApplication{"e", "RI_in^e", {{"t", {"order_home"}}, {"label", {"order depot"}}}, {}});
  const Transition* t = out.find_transition("incorrect_event-order_home#e");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->label, std::optional<std::string>("order depot"));
  EXPECT_EQ(t->provenance.origin, Origin::recording);
}

TEST(Apply, MissingObjectDropsVanFromRecord) {
  const Net m = package_delivery_net();
  const Net out = apply(m, PatternApplication{"o", "RI_mi^o", {{"t", {"load"}}, {"O", {"van"}}}, {}});
  const Transition* t = out.find_transition("load_missing_objects#o");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(out.record_variables(t->id), (std::vector<std::string>{"x", "w"}));
  EXPECT_EQ(t->provenance.responsible, std::vector<std::string>{"v"});
}

TEST(Apply, PartialBatchDropsSecondMember) {
  const Net m = package_delivery_net();
  const Net out = apply(m, PatternApplication{"b", "BI_10", {{"t", {"depart"}}, {"p_b", {"p_in_van"}}}, {}});
  const std::string id = "depart_partial_batch#b";
  ASSERT_NE(out.find_transition(id), nullptr);
  std::vector<std::string> pre, post;
  for (const Arc* a : out.preset(id)) pre.push_back(a->source);
  for (const Arc* a : out.postset(id)) post.push_back(a->target);
  EXPECT_EQ(pre, (std::vector<std::string>{"p_in_van", "p_c"}));
  EXPECT_EQ(post, (std::vector<std::string>{"p_out"}));
}

TEST(Apply, OvertakeGuardHoldsBudget) {
  const Net m = package_delivery_net();
  const Net out =
      apply(m, PatternApplication{"q", "BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q3"}}}, {{"budget", 3}}});
  const auto& bag = out.initial_marking.tokens("p_overtake_guard-p_q2#q");
  std::size_t permits = 0;
  for (const auto& [_, n] : bag) permits += n;
  EXPECT_EQ(permits, 3u);
  EXPECT_TRUE(out.has_object_type("control"));
}

TEST(Apply, BudgetGuardsEntryTransitionsOnly) {
  const Net m = package_delivery_net();
  const Net out =
      apply(m, PatternApplication{"r", "BI_7", {{"p_r1", {"p_c"}}, {"p_r2", {"p_we"}}}, {{"budget", 2}}});
  auto reads_guard = [&](const std::string& t) {
    for (const Arc* a : out.preset(t))
      if (a->source == "p_budget#r") return true;
    return false;
  };
  EXPECT_TRUE(reads_guard("tau_switch_role-p_c-p_we#r"));
  EXPECT_FALSE(reads_guard("tau_switch_role_back-p_c-p_we#r"));
  EXPECT_EQ(out.initial_marking.count("p_budget#r", {"permit#r"}), 2u);
}

TEST(ValidateMapping, RoleMismatch) {
  const Net m = package_delivery_net();
  auto d = mapping_errors(m, PatternApplication{"x", "BI_7", {{"p_r1", {"p_new"}}, {"p_r2", {"p_we"}}}, {}});
  EXPECT_TRUE(has_code(d, "RoleMismatch"));
}

TEST(ValidateMapping, MissingAndUnresolved) {
  const Net m = package_delivery_net();
  EXPECT_TRUE(has_code(mapping_errors(m, PatternApplication{"x", "BI_3", {}, {}}), "MissingWildcard"));
  EXPECT_TRUE(
      has_code(mapping_errors(m, PatternApplication{"x", "BI_3", {{"t", {"nope"}}}, {}}), "UnresolvedElement"));
}

TEST(ValidateMapping, NonInjectivePlaces) {
  const Net m = package_delivery_net();
  auto d = mapping_errors(m, PatternApplication{"x", "BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q2"}}}, {}});
  EXPECT_TRUE(has_code(d, "NonInjective"));
}

TEST(ValidateMapping, IncorrectLabelMustDiffer) {
  const Net m = package_delivery_net();
  auto same = mapping_errors(m, PatternApplication{"x", "RI_in^e", {{"t", {"ring"}}, {"label", {"ring"}}}, {}});
  EXPECT_TRUE(has_code(same, "RequirementViolated"));
  auto unknown =
      mapping_errors(m, PatternApplication{"x", "RI_in^e", {{"t", {"ring"}}, {"label", {"juggle"}}}, {}});
  EXPECT_TRUE(has_code(unknown, "RequirementViolated"));
  EXPECT_TRUE(
      mapping_errors(m, PatternApplication{"x", "RI_in^a", {{"t", {"ring"}}, {"label", {"juggle"}}}, {}}).empty());
}

TEST(ValidateMapping, BatchNeedsTwoTokens) {
  const Net m = package_delivery_net();
  auto d = mapping_errors(m, PatternApplication{"x", "BI_10", {{"t", {"load"}}, {"p_b", {"p_picked"}}}, {}});
  EXPECT_TRUE(has_code(d, "RequirementViolated"));
}

TEST(Apply, InvalidMappingThrowsWithDiagnostics) {
  const Net m = package_delivery_net();
  try {
    apply(m, PatternApplication{"x", "BI_3", {{"t", {"nope"}}}, {}});
    FAIL() << "expected InvalidMapping";
  } catch (const InvalidMapping& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST(ApplySequence, RecordingBeforeBehavioralIsRejected) {
  const Net m = package_delivery_net();
  std::vector<PatternApplication> apps = {{"r", "RI_mi^e", {{"t", {"load"}}}, {}},
                                          {"b", "BI_3", {{"t", {"ring"}}}, {}}};
  EXPECT_THROW(apply_sequence(m, apps), OrderViolation);
  std::swap(apps[0], apps[1]);
  EXPECT_NO_THROW(apply_sequence(m, apps));
}

TEST(ApplySequence, ReportsFailingIndex) {
  const Net m = package_delivery_net();
  std::vector<PatternApplication> apps = {{"b", "BI_3", {{"t", {"ring"}}}, {}},
                                          {"c", "BI_3", {{"t", {"nope"}}}, {}}};
  try {
    apply_sequence(m, apps);
    FAIL() << "expected InvalidMapping";
  } catch (const InvalidMapping& e) {
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(ApplySequence, LedgerListsCreatedElements) {
  const Net m = package_delivery_net();
  auto [out, ledger] = apply_sequence(m, {{"q", "BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q3"}}}, {}}});
  const LedgerEntry* e = ledger.find("tau_overtake-p_q2-p_q3#q");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->code, "BI_5");
  EXPECT_NE(ledger.find("p_overtake_guard-p_q2#q"), nullptr);
  EXPECT_NE(ledger.find("control"), nullptr);
  EXPECT_EQ(ledger.find("ring"), nullptr);
  EXPECT_EQ(ledger.applications(), std::vector<std::string>{"q"});
}

TEST(ApplySequence, DisjointApplicationsCommute) {
  const Net m = package_delivery_net();
  const std::vector<std::pair<PatternApplication, PatternApplication>> pairs = {
      {{"a", "BI_3", {{"t", {"ring"}}}, {}}, {"b", "BI_9", {{"p_m", {"p_reg"}}, {"p_r", {"p_depots"}}}, {}}},
      {{"a", "BI_5", {{"p_q1", {"p_q2"}}, {"p_q2", {"p_q3"}}}, {}},
       {"b", "BI_7", {{"p_r1", {"p_c"}}, {"p_r2", {"p_we"}}}, {}}},
      {{"a", "RI_mi^e", {{"t", {"load"}}}, {}}, {"b", "RI_mi^p", {{"T", {"deliver_depot", "collect"}}}, {}}},
  };
  for (const auto& [x, y] : pairs) {
    SCOPED_TRACE(x.code + " / " + y.code);
    const Net xy = apply(apply(m, x), y);
    const Net yx = apply(apply(m, y), x);
    EXPECT_TRUE(same_up_to_order(xy, yx));
  }
}

TEST(ApplySequence, ChainedSupersets) {
  const Fixture f = fixture("energy_contract");
  const auto& b = f.grid.behavioral_sets[1].apps;
  const auto& r = f.grid.recording_sets[1].apps;
  auto [ms, lb] = apply_sequence(f.m0, b);
  auto [ml, lr] = apply_sequence(ms, r);
  EXPECT_TRUE(testing::element_superset(f.m0, ms));
  EXPECT_TRUE(testing::element_superset(ms, ml));
  EXPECT_TRUE(validate_net(ml).empty());
}

}  // namespace
}  // namespace gts
