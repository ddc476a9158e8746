#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poser/config_json.hpp"
#include "poser/harness.hpp"

namespace fs = std::filesystem;
using namespace poser;

namespace {

struct Options {
  std::string config;
  int runs = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  int parallel = -1;
  std::string scheduler;
  std::vector<int> n_primes = {3, 4, 5};
  int games = 200;
};

ConfigDocument load(const Options& o) {
  ConfigDocument d;
  if (!o.config.empty()) d = load_document(o.config);
  if (o.runs > 0) d.run.runs = o.runs;
  if (o.seed_set) d.run.seed = o.seed;
  if (o.parallel > 0) d.run.parallel = o.parallel;
  if (!o.scheduler.empty()) d.run.schedulers = {o.scheduler};
  auto v = config_violations(d.world);
  for (auto& s : run_spec_violations(d.run)) v.push_back(s);
  if (!v.empty()) throw ConfigError("invalid configuration", v);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

void finish(const Options& o, const ConfigDocument& d, const std::string& command,
            const std::vector<std::pair<std::string, CsvTable>>& tables) {
  fs::create_directories(o.out);
  std::vector<std::string> names;
  for (const auto& [name, table] : tables) {
    write_file(fs::path(o.out) / name, to_csv(table));
    names.push_back(name);
  }
  write_file(fs::path(o.out) / "plot.gp", gnuplot_script(command));
  write_file(fs::path(o.out) / "manifest.json", manifest(d, command, names).dump(2) + "\n");
  std::cout << "wrote " << names.size() << " tables to " << o.out << "\n";
}

struct SweepOutput {
  std::vector<std::pair<Cell, std::vector<RunMetrics>>> runs;
  std::vector<CellSummary> cells;
  std::vector<std::pair<Cell, std::vector<Accumulator>>> series;
};

SweepOutput run_cells(const ConfigDocument& d, const std::vector<Cell>& cells) {
  SweepOutput out;
  for (const auto& c : cells) {
    const auto cfg = cell_config(d.world, c, d.run);
    const auto sc = cell_scenario(cfg, c, d.run);
    std::cerr << to_string(c.scheduler) << " density=" << c.density << " p_sleep=" << c.p_sleep
              << " R=" << c.fixed_range << " lambda=" << c.lambda << "\n";
    auto runs = monte_carlo(cfg, sc, d.run.runs, d.run.seed, d.run.parallel);
    out.cells.push_back(aggregate(c, runs));
    out.series.emplace_back(c, detection_series(runs));
    out.runs.emplace_back(c, std::move(runs));
  }
  if (d.run.tube) {
    std::map<double, double> reference;
    for (const auto& s : out.cells)
      if (s.cell.scheduler == Scheduler::poser && s.cell.lambda == 0 && s.cell.p_sleep == 0.75)
        reference[s.cell.density] = s.lifetime.mean();
    for (const auto& s : out.cells) {
      if (reference.count(s.cell.density)) continue;
      Cell ref{Scheduler::poser, s.cell.density, 0.75, s.cell.fixed_range, 0};
      const auto cfg = cell_config(d.world, ref, d.run);
      auto runs = monte_carlo(cfg, cell_scenario(cfg, ref, d.run), d.run.runs, d.run.seed, d.run.parallel);
      reference[s.cell.density] = aggregate(ref, runs).lifetime.mean();
    }
    for (auto& s : out.cells) {
      std::vector<CellSummary> one{s};
      normalize_lifetimes(one, reference[s.cell.density]);
      s = one.front();
    }
  }
  return out;
}

int cmd_sweep(const Options& o, bool single, const std::string& name) {
  auto d = load(o);
  auto cells = expand_cells(d.world, d.run);
  if (single) cells.resize(1);
  auto res = run_cells(d, cells);
  auto tables = summary_tables(res.cells);
  tables.emplace_back("runs.csv", runs_table(res.runs));
  tables.emplace_back("pdet.csv", detection_table(res.series, d.world.dt));
  finish(o, d, name, tables);
  for (const auto& s : res.cells)
    std::cout << to_string(s.cell.scheduler) << " density=" << s.cell.density << " lambda=" << s.cell.lambda
              << " pm=" << s.pm.mean() << " hps=" << s.hps.mean() << " lifetime_norm=" << s.lifetime_norm
              << " failed=" << s.failed << "\n";
  return 0;
}

int cmd_gap(const Options& o) {
  auto d = load(o);
  if (d.run.gap_radius <= 0.0) d.run.gap_radius = 50.0;
  if (d.run.lane_y < 0.0) d.run.lane_y = d.world.region_height / 2.0;
  if (o.scheduler.empty()) d.run.schedulers = {"poser", "ans", "lpshps", "random"};
  d.run.fixed_ranges = {d.world.r1()};
  auto res = run_cells(d, expand_cells(d.world, d.run));
  auto tables = summary_tables(res.cells);
  tables.emplace_back("pdet.csv", detection_table(res.series, d.world.dt));
  tables.emplace_back("runs.csv", runs_table(res.runs));
  finish(o, d, "gap", tables);
  return 0;
}

int cmd_validate_game(const Options& o) {
  auto d = load(o);
  GameValidationOptions g;
  g.games = o.games;
  g.seed = d.run.seed;
  std::vector<GameValidationRow> rows;
  for (int n : o.n_primes) {
    rows.push_back(game_validation(d.world, n, g));
    const auto& r = rows.back();
    std::cout << "N'=" << n << " games=" << r.games << " chi*=" << r.chi.mean() << " phi_eff=" << r.phi_eff.mean()
              << " t_game=" << r.t_game.mean() << "s t_opt=" << r.t_opt.mean() << "s\n";
  }
  finish(o, d, "validate-game", {{"game.csv", game_table(rows)}});
  return 0;
}

int cmd_compare_egdop(const Options& o) {
  auto d = load(o);
  EgdopOptions e;
  e.runs = d.run.runs;
  e.seed = d.run.seed;
  const auto rows = egdop_comparison(d.world, e);
  for (const auto& r : rows)
    std::cout << "[" << r.bound << ",1]E0 savings=" << r.savings.mean() << "% eff(egdop)=" << r.eff_egdop.mean()
              << " eff(gdop)=" << r.eff_gdop.mean() << " kl(g||e)=" << r.kl_egdop.mean()
              << " kl(g||me)=" << r.kl_me.mean() << "\n";
  finish(o, d, "compare-egdop", {{"egdop.csv", egdop_table(rows)}});
  return 0;
}

int cmd_check_config(const Options& o) {
  ConfigDocument d;
  try {
    d = load(o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& f : e.failures()) std::cerr << "  " << f << "\n";
    return 2;
  }
  std::cout << "ok " << hex64(config_hash(to_json(d))) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor network tracking simulator and experiment runner"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON config with 'world' and 'run' sections");
    c->add_option("--runs", o.runs, "Monte Carlo runs per cell");
    c->add_option("--seed", o.seed, "Seed base")->each([&](const std::string&) { o.seed_set = true; });
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--parallel", o.parallel, "Worker threads");
    c->add_option("--scheduler", o.scheduler, "poser|ans|lpshps|random")
        ->check(CLI::IsMember({"poser", "ans", "lpshps", "random"}));
  };
  auto* run = app.add_subcommand("run", "Run one scenario");
  auto* sweep = app.add_subcommand("sweep", "Density x p_sleep x scheduler x fixed range x lambda grid");
  auto* gap = app.add_subcommand("gap", "Coverage-gap experiment");
  auto* vg = app.add_subcommand("validate-game", "Game equilibrium vs exhaustive optimum");
  auto* eg = app.add_subcommand("compare-egdop", "EGDOP vs GDOP vs max-energy selection");
  auto* cc = app.add_subcommand("check-config", "Validate a config document");
  for (auto* c : {run, sweep, gap, vg, eg, cc}) common(c);
  vg->add_option("--n-prime", o.n_primes, "Player counts");
  vg->add_option("--games", o.games, "Games per player count");
  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_sweep(o, true, "run");
    if (*sweep) return cmd_sweep(o, false, "sweep");
    if (*gap) return cmd_gap(o);
    if (*vg) return cmd_validate_game(o);
    if (*eg) return cmd_compare_egdop(o);
    if (*cc) return cmd_check_config(o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& f : e.failures()) std::cerr << "  " << f << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
