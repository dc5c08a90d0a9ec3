#include "gts/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

namespace gts {

using nlohmann::json;

json to_json(const GridSpec& g) {
  auto sets = [](const std::vector<NamedSet>& xs) {
    json a = json::array();
    for (const auto& s : xs) a.push_back({{"id", s.id}, {"applications", to_json(s.apps)}});
    return a;
  };
  json configs = json::array();
  for (const auto& c : g.configs) configs.push_back({{"id", c.id}, {"config", to_json(c.config)}});
  return {{"schema_version", kSchemaVersion},
          {"master_seed", g.master_seed},
          {"pairing", g.pairing == Pairing::product ? "product" : "isolated"},
          {"behavioral_sets", sets(g.behavioral_sets)},
          {"recording_sets", sets(g.recording_sets)},
          {"configs", configs}};
}

GridSpec grid_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("grid must be a JSON object");
  if (j.value("schema_version", kSchemaVersion) != kSchemaVersion)
    throw SchemaVersionMismatch("grid schema_version " + j["schema_version"].dump());
  GridSpec g;
  try {
    g.master_seed = j.value("master_seed", std::uint64_t{0});
    const std::string pairing = j.value("pairing", "product");
    if (pairing != "product" && pairing != "isolated") throw ParseError("pairing must be product or isolated");
    g.pairing = pairing == "product" ? Pairing::product : Pairing::isolated;
    auto sets = [](const json& a) {
      std::vector<NamedSet> out;
      for (const auto& s : a) out.push_back({s.at("id"), applications_from_json(s.at("applications"))});
      return out;
    };
    g.behavioral_sets = sets(j.at("behavioral_sets"));
    g.recording_sets = sets(j.at("recording_sets"));
    for (const auto& c : j.at("configs")) g.configs.push_back({c.at("id"), sim_config_from_json(c.at("config"))});
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed grid: ") + e.what());
  }
  if (g.behavioral_sets.empty() || g.recording_sets.empty() || g.configs.empty())
    throw ConfigInvalid("grid needs at least one behavioral set, recording set and config");
  return g;
}

std::vector<Cell> enumerate_cells(const GridSpec& grid) {
  std::vector<Cell> cells;
  auto add = [&](std::size_t b, std::size_t r, std::size_t k) {
    Cell c;
    c.index = cells.size();
    c.behavioral = b;
    c.recording = r;
    c.config = k;
    const auto& bs = grid.behavioral_sets[b];
    const auto& rs = grid.recording_sets[r];
    const auto& cs = grid.configs[k];
    c.id = bs.id + "." + rs.id + "." + cs.id;
    c.seed = mix_seed(grid.master_seed, c.id + "|" + std::to_string(cs.config.seed));
    cells.push_back(std::move(c));
  };

  if (grid.pairing == Pairing::product) {
    for (std::size_t b = 0; b < grid.behavioral_sets.size(); ++b)
      for (std::size_t r = 0; r < grid.recording_sets.size(); ++r)
        for (std::size_t k = 0; k < grid.configs.size(); ++k) add(b, r, k);
    return cells;
  }

  auto first_empty = [](const std::vector<NamedSet>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i].apps.empty()) return i;
    throw ConfigInvalid("isolated pairing needs an empty set on both axes");
  };
  const std::size_t b0 = first_empty(grid.behavioral_sets);
  const std::size_t r0 = first_empty(grid.recording_sets);
  for (std::size_t b = 0; b < grid.behavioral_sets.size(); ++b)
    if (!grid.behavioral_sets[b].apps.empty())
      for (std::size_t k = 0; k < grid.configs.size(); ++k) add(b, r0, k);
  for (std::size_t r = 0; r < grid.recording_sets.size(); ++r)
    if (!grid.recording_sets[r].apps.empty())
      for (std::size_t k = 0; k < grid.configs.size(); ++k) add(b0, r, k);
  return cells;
}

CellOutput run_cell(const Net& m0, const GridSpec& grid, const Cell& cell) {
  CellOutput out;
  auto [ms, ledger_b] = apply_sequence(m0, grid.behavioral_sets.at(cell.behavioral).apps);
  auto [ml, ledger_r] = apply_sequence(ms, grid.recording_sets.at(cell.recording).apps);
  out.ledger = std::move(ledger_b);
  out.ledger.entries.insert(out.ledger.entries.end(), ledger_r.entries.begin(), ledger_r.entries.end());
  out.ms = std::move(ms);
  out.ml = std::move(ml);

  SimConfig config = grid.configs.at(cell.config).config;
  config.seed = cell.seed;
  RunOptions opts;
  opts.run_id = cell.id;
  opts.model_digests = {{"M0", net_digest(m0)}, {"MS", net_digest(out.ms)}, {"ML", net_digest(out.ml)}};
  out.trace = run(out.ml, config, opts);
  out.log = project_observed(out.trace, out.ml);
  out.report = deviation_report(out.trace);
  return out;
}

json to_json(const DatasetManifest& m) {
  json cells = json::array();
  for (const auto& e : m.cells)
    cells.push_back({{"cell_id", e.cell.id},
                     {"index", e.cell.index},
                     {"seed", e.cell.seed},
                     {"behavioral_set", e.behavioral_set},
                     {"recording_set", e.recording_set},
                     {"config", e.config},
                     {"status", e.error.empty() ? "ok" : "failed"},
                     {"error", e.error},
                     {"digests", e.digests},
                     {"files", e.files},
                     {"counts", e.counts},
                     {"counts_by_code", e.counts_by_code},
                     {"objects_by_type", e.objects_by_type},
                     {"events", e.events},
                     {"firings", e.firings},
                     {"termination", e.termination}});
  return {{"schema_version", kSchemaVersion}, {"master_seed", m.master_seed}, {"m0_digest", m.m0_digest}, {"cells", cells}};
}

namespace {

CellEntry write_cell(const Net& m0, const GridSpec& grid, const Cell& cell, const std::filesystem::path& root) {
  CellEntry e;
  e.cell = cell;
  e.behavioral_set = grid.behavioral_sets[cell.behavioral].id;
  e.recording_set = grid.recording_sets[cell.recording].id;
  e.config = grid.configs[cell.config].id;

  CellOutput out = run_cell(m0, grid, cell);
  const std::string dir = "cells/" + cell.id + "/";
  auto put = [&](const std::string& key, const std::string& name, const std::string& content) {
    write_file_atomic(root / (dir + name), content);
    e.files[key] = dir + name;
    return content;
  };
  auto json_text = [](const json& j) { return j.dump(2) + "\n"; };

  put("ms", "ms.json", json_text(to_json(out.ms)));
  put("ml", "ml.json", json_text(to_json(out.ml)));
  put("ledger", "ledger.json", json_text(to_json(out.ledger)));
  const std::string trace_text = put("trace", "trace.gt.jsonl", trace_to_string(out.trace));
  std::ostringstream log_s, csv_s, align_s;
  write_log_jsonl(log_s, out.log);
  write_log_csv(csv_s, out.log);
  put("log", "log.jsonl", log_s.str());
  put("log_csv", "log.csv", csv_s.str());
  put("report", "report.json", json_text(to_json(out.report)));
  write_alignment(align_s, gt_alignment(m0, out.trace, out.log));
  put("alignment", "alignment.gt.jsonl", align_s.str());

  e.digests = out.trace.meta.model_digests;
  e.digests["trace"] = hex64(fnv1a(trace_text));
  e.digests["log"] = hex64(fnv1a(log_s.str()));
  for (const auto& [id, d] : out.report.by_application) {
    e.counts[id] = d.occurrences;
    e.counts_by_code[d.code] += d.occurrences;
  }
  // Every applied pattern is listed, also when it never fired.
  for (const auto* set : {&grid.behavioral_sets[cell.behavioral], &grid.recording_sets[cell.recording]})
    for (const auto& app : set->apps) {
      e.counts.try_emplace(app.application_id, 0);
      e.counts_by_code.try_emplace(app.code, 0);
    }
  for (const auto& [_, type] : out.log.objects) ++e.objects_by_type[type];
  e.events = out.log.events.size();
  e.firings = out.trace.firings.size();
  e.termination = out.trace.meta.termination;
  return e;
}

}  // namespace

DatasetManifest generate(const Net& m0, const GridSpec& grid, const std::filesystem::path& out_dir,
                         const GenerateOptions& options) {
  const auto cells = enumerate_cells(grid);
  std::vector<CellEntry> entries(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size() && !stop; i = next++) {
      try {
        entries[i] = write_cell(m0, grid, cells[i], out_dir);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        entries[i].cell = cells[i];
        entries[i].behavioral_set = grid.behavioral_sets[cells[i].behavioral].id;
        entries[i].recording_set = grid.recording_sets[cells[i].recording].id;
        entries[i].config = grid.configs[cells[i].config].id;
        entries[i].error = e.what();
        if (!options.keep_going) stop = true;
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (!options.keep_going)
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!errors[i].empty()) throw Error("cell '" + cells[i].id + "' failed: " + errors[i]);

  DatasetManifest m;
  m.master_seed = grid.master_seed;
  m.m0_digest = net_digest(m0);
  m.cells = std::move(entries);
  write_file_atomic(out_dir / "m0.json", to_json(m0).dump(2) + "\n");
  write_file_atomic(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace gts
