#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "gts/error.hpp"
#include "gts/fixtures.hpp"
#include "gts/pipeline.hpp"
#include "support.hpp"

using namespace gts;
using namespace gts::testing;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gts_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

GridSpec service_grid() {
  GridSpec g;
  g.master_seed = 11;
  g.behavioral_sets = {{"none", {}}, {"early", {{"b1", "BI_2", {{"p1", {"p_busy"}}, {"p2", {"p_idle"}}}, {}}}}};
  g.recording_sets = {{"none", {}}, {"miss", {{"r1", "RI_mi^e", {{"t", {"finish"}}}, {}}}}};
  SimConfig c;
  c.firing_limit = 200;
  c.deviation_weight = 1.0;
  c.arrivals.push_back({"customer", "p_new", DelaySpec::exponential(0.01), 5, 0});
  c.delays["serve"] = DelaySpec::constant(50);
  g.configs = {{"k0", c}};
  return g;
}

}  // namespace

TEST(Cells, ProductEnumeratesAllCombinations) {
  GridSpec g = service_grid();
  g.configs.push_back({"k1", g.configs[0].config});
  const auto cells = enumerate_cells(g);
  ASSERT_EQ(cells.size(), 2u * 2u * 2u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(cells[i].index, i);
    ids.insert(cells[i].id);
  }
  EXPECT_EQ(ids.size(), cells.size());
  EXPECT_EQ(cells.front().id, "none.none.k0");
  EXPECT_EQ(cells.back().id, "early.miss.k1");
}

TEST(Cells, IsolatedSkipsMixedAndEmptyCells) {
  GridSpec g = service_grid();
  g.pairing = Pairing::isolated;
  const auto cells = enumerate_cells(g);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].id, "early.none.k0");
  EXPECT_EQ(cells[1].id, "none.miss.k0");
}

TEST(Cells, IsolatedNeedsEmptySets) {
  GridSpec g = service_grid();
  g.pairing = Pairing::isolated;
  g.behavioral_sets.erase(g.behavioral_sets.begin());
  EXPECT_THROW(enumerate_cells(g), ConfigInvalid);
}

TEST(Cells, SeedsDependOnMasterSeedAndId) {
  GridSpec g = service_grid();
  const auto a = enumerate_cells(g);
  g.master_seed = 12;
  const auto b = enumerate_cells(g);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NE(a[i].seed, b[i].seed);
    seeds.insert(a[i].seed);
  }
  EXPECT_EQ(seeds.size(), a.size());
}

TEST(Grid, JsonRoundTrip) {
  const GridSpec g = service_grid();
  EXPECT_EQ(to_json(grid_from_json(to_json(g))), to_json(g));
  auto j = to_json(g);
  j["pairing"] = "zip";
  EXPECT_THROW(grid_from_json(j), ParseError);
  j = to_json(g);
  j["configs"] = nlohmann::json::array();
  EXPECT_THROW(grid_from_json(j), ConfigInvalid);
}

TEST(Generate, WritesManifestAndFiles) {
  const auto dir = scratch("files");
  const Net m0 = service_net(0, 1);
  const auto m = generate(m0, service_grid(), dir, {2, false});
  ASSERT_EQ(m.cells.size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "m0.json"));
  for (const auto& e : m.cells) {
    EXPECT_TRUE(e.error.empty());
    for (const char* key : {"ms", "ml", "ledger", "trace", "log", "log_csv", "report", "alignment"})
      EXPECT_TRUE(fs::exists(dir / e.files.at(key))) << e.cell.id << " " << key;
    EXPECT_EQ(e.digests.at("M0"), m.m0_digest);
    EXPECT_EQ(e.digests.at("trace"), hex64(fnv1a(read_file(dir / e.files.at("trace")))));
    EXPECT_EQ(e.objects_by_type.at("customer"), 5u);
  }
  const auto manifest = read_json_file(dir / "manifest.json");
  EXPECT_EQ(manifest["cells"].size(), 4u);
  EXPECT_EQ(manifest["cells"][3]["counts"]["b1"], m.cells[3].counts.at("b1"));
  fs::remove_all(dir);
}

TEST(Generate, ParallelRunsMatchSerial) {
  const auto d1 = scratch("serial");
  const auto d2 = scratch("parallel");
  const Net m0 = service_net(0, 1);
  const auto a = generate(m0, service_grid(), d1, {1, false});
  const auto b = generate(m0, service_grid(), d2, {4, false});
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].digests, b.cells[i].digests);
  EXPECT_EQ(read_file(d1 / "manifest.json"), read_file(d2 / "manifest.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Generate, FailingCellAbortsOrIsRecorded) {
  GridSpec g = service_grid();
  g.recording_sets.push_back({"broken", {{"x", "RI_mi^e", {{"t", {"no_such_transition"}}}, {}}}});
  const Net m0 = service_net(0, 1);
  const auto d1 = scratch("failfast");
  try {
    generate(m0, g, d1);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("none.broken.k0"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(d1 / "manifest.json"));

  const auto d2 = scratch("keepgoing");
  const auto m = generate(m0, g, d2, {1, true});
  std::size_t failed = 0;
  for (const auto& e : m.cells) failed += !e.error.empty();
  EXPECT_EQ(failed, 2u);
  EXPECT_EQ(read_json_file(d2 / "manifest.json")["cells"][2]["status"], "failed");
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Fixtures, PackageGridHasTwelveIsolatedCells) {
  const auto f = fixture("package_delivery");
  const auto cells = enumerate_cells(f.grid);
  EXPECT_EQ(cells.size(), 12u);
  std::set<std::string> codes;
  for (const auto& c : cells) {
    const auto& b = f.grid.behavioral_sets[c.behavioral].apps;
    const auto& r = f.grid.recording_sets[c.recording].apps;
    EXPECT_EQ(b.size() + r.size(), 1u) << c.id;
    for (const auto* set : {&b, &r})
      for (const auto& a : *set) codes.insert(a.code);
  }
  EXPECT_EQ(codes.size(), 11u);  // RI_in^e appears twice
}

TEST(Fixtures, AllValidate) {
  for (const auto& name : fixture_names()) {
    const auto f = fixture(name);
    EXPECT_TRUE(validate_net(f.m0).empty()) << name;
    for (const auto& c : f.grid.configs) EXPECT_TRUE(validate_config(f.m0, c.config).empty()) << name;
  }
  EXPECT_THROW(fixture("nope"), UnknownFixture);
}

TEST(Fixtures, CheckedInFilesMatchCode) {
  const fs::path root = fs::path(GTS_SOURCE_DIR) / "fixtures";
  for (const auto& name : fixture_names()) {
    const auto f = fixture(name);
    EXPECT_EQ(net_digest(net_from_json(read_json_file(root / name / "m0.json"))), net_digest(f.m0)) << name;
    EXPECT_EQ(read_json_file(root / name / "grid.json"), to_json(f.grid)) << name;
  }
}

TEST(Fixtures, PackagesReachTheEndOnTheBaseModel) {
  const auto f = fixture("package_delivery");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig c = f.grid.configs[0].config;
    c.seed = seed;
    const auto t = run(f.m0, c);
    ASSERT_TRUE(replay(f.m0, t.steps())) << seed;
    Marking m = f.m0.initial_marking;
    IdGenerator ids;
    for (const auto& s : t.steps()) {
      if (const auto* e = std::get_if<EnvironmentStep>(&s))
        e->kind == EnvironmentStep::Kind::add ? m.add(e->token.place, e->token.token)
                                              : static_cast<void>(m.remove(e->token.place, e->token.token));
      else
        m = fire(f.m0, m, std::get<Firing>(s), ids).first;
    }
    std::size_t done = 0;
    for (const auto& [place, bag] : m.places())
      for (const auto& [tok, n] : bag)
        if (place == "p_done") done += n;
    EXPECT_EQ(done, 2u) << "seed " << seed;
  }
}

TEST(Fixtures, EnergyCombinedCellShowsEveryPattern) {
  const auto f = fixture("energy_contract");
  const auto cells = enumerate_cells(f.grid);
  const auto& full = cells.back();
  ASSERT_FALSE(f.grid.behavioral_sets[full.behavioral].apps.empty());
  ASSERT_FALSE(f.grid.recording_sets[full.recording].apps.empty());
  const auto out = run_cell(f.m0, f.grid, full);
  std::size_t apps = 0;
  for (const auto* set : {&f.grid.behavioral_sets[full.behavioral], &f.grid.recording_sets[full.recording]})
    for (const auto& a : set->apps) {
      ++apps;
      EXPECT_GE(out.report.occurrences(a.application_id), 1u) << a.application_id;
    }
  EXPECT_EQ(apps, 9u);
}
