#include "cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gts/fixtures.hpp"
#include "gts/log_io.hpp"
#include "gts/oracle.hpp"
#include "gts/pipeline.hpp"
#include "gts/sim.hpp"
#include "gts/transform.hpp"

namespace gts::cli {

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kIo = 2;

/// Thrown after diagnostics were already printed.
struct Reported {
  int code;
};

void emit(std::ostream& err, const std::string& code, const std::string& element, const std::string& message) {
  err << json{{"level", "error"}, {"code", code}, {"element", element}, {"message", message}}.dump() << '\n';
}

void fail_on(std::ostream& err, const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return;
  for (const auto& d : diags) emit(err, d.code, d.element, d.message);
  throw Reported{kInvalid};
}

Net load_net(const std::string& path) { return net_from_json(read_json_file(path)); }

std::vector<PatternApplication> load_apps(const std::string& path) {
  return applications_from_json(read_json_file(path));
}

GroundTruthTrace load_trace(const std::string& path, const Net* ml) {
  std::istringstream in(read_file(path));
  return read_trace(in, ml);
}

ObservedLog load_log(const std::string& path) {
  std::istringstream in(read_file(path));
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return read_log_csv(in);
  return read_log_jsonl(in);
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

struct Options {
  std::string model, apply, config, grid, out, ledger, log, csv, name, ml, trace, candidate, gt, run_id;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool keep_going = false;
};

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  Net net = load_net(o.model);
  fail_on(err, validate_net(net));
  if (!o.apply.empty()) {
    try {
      net = apply_sequence(net, load_apps(o.apply)).first;
    } catch (const InvalidMapping& e) {
      fail_on(err, e.diagnostics());
    }
  }
  if (!o.config.empty()) fail_on(err, validate_config(net, sim_config_from_json(read_json_file(o.config))));
  out << json{{"status", "ok"}, {"digest", net_digest(net)}}.dump() << '\n';
  return kOk;
}

int cmd_transform(const Options& o, std::ostream& out, std::ostream& err) {
  const Net m0 = load_net(o.model);
  fail_on(err, validate_net(m0));
  std::pair<Net, ProvenanceLedger> result;
  try {
    result = apply_sequence(m0, load_apps(o.apply));
  } catch (const InvalidMapping& e) {
    fail_on(err, e.diagnostics());
  }
  write_file_atomic(o.out, pretty(to_json(result.first)));
  if (!o.ledger.empty()) write_file_atomic(o.ledger, pretty(to_json(result.second)));
  out << json{{"status", "ok"}, {"digest", net_digest(result.first)}}.dump() << '\n';
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Net ml = load_net(o.model);
  fail_on(err, validate_net(ml));
  SimConfig config = sim_config_from_json(read_json_file(o.config));
  if (o.seed) config.seed = *o.seed;
  fail_on(err, validate_config(ml, config));
  RunOptions opts;
  opts.run_id = o.run_id;
  opts.model_digests = {{"ML", net_digest(ml)}};
  const GroundTruthTrace trace = run(ml, config, opts);
  const ObservedLog log = project_observed(trace, ml);

  write_file_atomic(o.out, trace_to_string(trace));
  if (!o.log.empty()) {
    std::ostringstream s;
    write_log_jsonl(s, log);
    write_file_atomic(o.log, s.str());
  }
  if (!o.csv.empty()) {
    std::ostringstream s;
    write_log_csv(s, log);
    write_file_atomic(o.csv, s.str());
  }
  out << json{{"status", "ok"},
              {"run_id", trace.meta.run_id},
              {"firings", trace.firings.size()},
              {"events", log.events.size()},
              {"termination", trace.meta.termination}}
             .dump()
      << '\n';
  return kOk;
}

int cmd_dataset(const Options& o, std::ostream& out, std::ostream&) {
  const Net m0 = load_net(o.model);
  GridSpec grid = grid_from_json(read_json_file(o.grid));
  if (o.seed) grid.master_seed = *o.seed;
  const DatasetManifest m = generate(m0, grid, o.out, {o.jobs, o.keep_going});
  std::size_t failed = 0;
  for (const auto& c : m.cells) failed += !c.error.empty();
  out << json{{"status", failed ? "partial" : "ok"}, {"cells", m.cells.size()}, {"failed", failed}}.dump() << '\n';
  return failed ? kInvalid : kOk;
}

int cmd_fixture(const Options& o, std::ostream& out, std::ostream&) {
  Fixture f = fixture(o.name);
  if (o.seed) f.grid.master_seed = *o.seed;
  const std::filesystem::path dir = o.out;
  write_file_atomic(dir / "m0.json", pretty(to_json(f.m0)));
  write_file_atomic(dir / "grid.json", pretty(to_json(f.grid)));
  out << json{{"status", "ok"}, {"fixture", f.name}, {"cells", enumerate_cells(f.grid).size()}}.dump() << '\n';
  return kOk;
}

int cmd_align(const Options& o, std::ostream& out, std::ostream&) {
  const Net m0 = load_net(o.model);
  std::optional<Net> ml;
  if (!o.ml.empty()) ml = load_net(o.ml);
  const GroundTruthTrace trace = load_trace(o.trace, ml ? &*ml : nullptr);
  const ObservedLog log = o.log.empty() ? project_observed(trace, ml ? *ml : m0) : load_log(o.log);
  std::ostringstream s;
  write_alignment(s, gt_alignment(m0, trace, log));
  if (o.out.empty())
    out << s.str();
  else
    write_file_atomic(o.out, s.str());
  return kOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  const std::string text = pretty(to_json(deviation_report(load_trace(o.trace, nullptr))));
  if (o.out.empty())
    out << text;
  else
    write_file_atomic(o.out, text);
  return kOk;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream&) {
  std::istringstream cand_in(read_file(o.candidate)), gt_in(read_file(o.gt));
  const ObjectAlignments candidate = read_alignment(cand_in);
  ObjectAlignments gt_moves = read_alignment(gt_in);
  GtAlignment gt;
  if (auto it = gt_moves.find("*"); it != gt_moves.end()) {
    gt.system = it->second;
    gt_moves.erase(it);
  }
  gt.per_object = std::move(gt_moves);
  out << json{{"distance", move_distance(candidate, gt)}}.dump() << '\n';
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground-truth process data generator"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print the file schema version");
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a model, optionally with applications and a config");
  validate->add_option("--model", o.model)->required();
  validate->add_option("--apply", o.apply);
  validate->add_option("--config", o.config);

  auto* transform = app.add_subcommand("transform", "Apply pattern applications to a model");
  transform->add_option("--model", o.model)->required();
  transform->add_option("--apply", o.apply)->required();
  transform->add_option("--out", o.out)->required();
  transform->add_option("--ledger", o.ledger);

  auto* simulate = app.add_subcommand("simulate", "Simulate a model into a trace and event log");
  simulate->add_option("--model", o.model)->required();
  simulate->add_option("--config", o.config)->required();
  simulate->add_option("--out", o.out, "Ground-truth trace (JSON Lines)")->required();
  simulate->add_option("--log", o.log, "Observed log (JSON Lines)");
  simulate->add_option("--csv", o.csv, "Observed log (CSV)");
  simulate->add_option("--seed", o.seed);
  simulate->add_option("--run-id", o.run_id);

  auto* dataset = app.add_subcommand("dataset", "Generate every cell of a grid");
  dataset->add_option("--model", o.model)->required();
  dataset->add_option("--grid", o.grid)->required();
  dataset->add_option("--out", o.out)->required();
  dataset->add_option("--jobs", o.jobs)->check(CLI::PositiveNumber);
  dataset->add_option("--seed", o.seed, "Overrides the grid's master seed");
  dataset->add_flag("--keep-going", o.keep_going);

  auto* fix = app.add_subcommand("fixture", "Write a bundled model and grid");
  fix->add_option("--name", o.name)->required();
  fix->add_option("--out", o.out)->required();
  fix->add_option("--seed", o.seed, "Overrides the grid's master seed");

  auto* oracle = app.add_subcommand("oracle", "Ground-truth assessment targets");
  oracle->require_subcommand(1);
  auto* align = oracle->add_subcommand("align", "Ground-truth alignment of a log");
  align->add_option("--model", o.model, "Base model M0")->required();
  align->add_option("--ml", o.ml, "Simulated model, to check trace transitions");
  align->add_option("--trace", o.trace)->required();
  align->add_option("--log", o.log);
  align->add_option("--out", o.out);
  auto* report = oracle->add_subcommand("report", "Deviation report of a trace");
  report->add_option("--trace", o.trace)->required();
  report->add_option("--out", o.out);
  auto* score = oracle->add_subcommand("score", "Distance of candidate alignments to the ground truth");
  score->add_option("--candidate", o.candidate)->required();
  score->add_option("--gt", o.gt)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    emit(err, "UsageError", "", e.what());
    return kIo;
  }

  if (version) {
    out << "schema_version " << kSchemaVersion << '\n';
    return kOk;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (transform->parsed()) return cmd_transform(o, out, err);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (dataset->parsed()) return cmd_dataset(o, out, err);
    if (fix->parsed()) return cmd_fixture(o, out, err);
    if (align->parsed()) return cmd_align(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
    if (score->parsed()) return cmd_score(o, out, err);
    out << app.help();
    return kOk;
  } catch (const Reported& r) {
    return r.code;
  } catch (const InvalidMapping& e) {
    for (const auto& d : e.diagnostics()) emit(err, d.code, d.element, d.message);
    return kInvalid;
  } catch (const IoError& e) {
    emit(err, "IoError", "", e.what());
    return kIo;
  } catch (const ParseError& e) {
    emit(err, "ParseError", "", e.what());
    return kIo;
  } catch (const SchemaVersionMismatch& e) {
    emit(err, "SchemaVersionMismatch", "", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    emit(err, "IoError", "", e.what());
    return kIo;
  } catch (const Error& e) {
    emit(err, "Error", "", e.what());
    return kInvalid;
  }
}

}  // namespace gts::cli
