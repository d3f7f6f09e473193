#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "job.hpp"
#include "modcas/error.hpp"
#include "run.hpp"

#ifndef MODCAS_VERSION
#define MODCAS_VERSION "unknown"
#endif

namespace {

using namespace modcas;
using namespace modcas::cli;

struct Overrides {
  std::string config;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool adaptive = false;
  std::optional<std::string> zero_freq;
  bool dump_spectra = false;
  bool dump_reflection = false;
  std::optional<int> quad_nodes;
  std::optional<int> orders;
  bool pfa_baseline = false;
  bool strict_tail = false;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, Overrides& o)
{
  cmd->add_option("--config", o.config, "TOML job description")->required()->check(CLI::ExistingFile);
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--adaptive-matsubara", o.adaptive, "extend the Matsubara sum until the tail criterion holds");
  cmd->add_option("--zero-freq", o.zero_freq, "l = 0 route")
    ->check(CLI::IsMember({"direct", "extrapolate", "both"}));
  cmd->add_flag("--dump-spectra", o.dump_spectra, "write spectra.csv");
  cmd->add_flag("--dump-reflection", o.dump_reflection, "write reflection.csv");
  cmd->add_option("--quad-nodes", o.quad_nodes, "quadrature nodes per dimension")
    ->check(CLI::PositiveNumber);
  cmd->add_option("--orders", o.orders, "truncation order N = M")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--pfa-baseline", o.pfa_baseline, "add PFA baseline and ratio columns");
  cmd->add_flag("--strict-tail", o.strict_tail, "fail instead of warning on a large Matsubara tail");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

JobConfig load_with_overrides(const Overrides& o)
{
  JobConfig cfg = load_config(o.config);
  auto& n = cfg.numerics;
  if (o.workers)
    n.workers = *o.workers;
  if (o.out)
    cfg.output.directory = *o.out;
  if (o.adaptive)
    n.adaptive_matsubara = true;
  if (o.zero_freq)
    n.zero_frequency = parse_zero_frequency_mode(*o.zero_freq);
  if (o.dump_spectra)
    cfg.output.dump_spectra = true;
  if (o.dump_reflection)
    cfg.output.dump_reflection = true;
  if (o.quad_nodes)
    n.quadrature.nodes_per_dim = *o.quad_nodes;
  if (o.orders)
    n.order = {*o.orders, *o.orders};
  if (o.pfa_baseline)
    cfg.pfa.baseline = true;
  if (o.strict_tail)
    cfg.strict_tail = true;
  validate(cfg);
  return cfg;
}

int report(const Error& e)
{
  std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
  return exit_status(e.code());
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"modcas: Casimir free energy and force between periodic multilayers"};
  app.set_version_flag("--version", MODCAS_VERSION);
  app.require_subcommand(1);

  auto* materials = app.add_subcommand("materials", "material tables");
  materials->require_subcommand(1);
  auto* show = materials->add_subcommand("show", "permittivity at the first Matsubara frequencies");
  std::string show_config;
  int show_terms = 5;
  show->add_option("--config", show_config, "TOML job description (presets only when omitted)")
    ->check(CLI::ExistingFile);
  show->add_option("--terms", show_terms, "Matsubara indices to list")->check(CLI::PositiveNumber);

  Overrides reflect_o;
  auto* reflect = app.add_subcommand("reflect", "dump one reflection matrix as CSV");
  add_run_flags(reflect, reflect_o);
  std::string side = "left";
  int l = 1;
  double kx = 0.0, ky = 0.0;
  std::string reflect_file;
  reflect->add_option("--side", side, "stack")->check(CLI::IsMember({"left", "right"}));
  reflect->add_option("--l", l, "Matsubara index")->check(CLI::NonNegativeNumber);
  reflect->add_option("--kx", kx, "Bloch kx, 1/m");
  reflect->add_option("--ky", ky, "Bloch ky, 1/m");
  reflect->add_option("--file", reflect_file, "write here instead of stdout");

  Overrides energy_o, curve_o, pfa_o;
  auto* energy = app.add_subcommand("energy", "free energy per area at the grid separations");
  add_run_flags(energy, energy_o);
  auto* curve = app.add_subcommand("force-curve", "free energy, pressure and sphere-plane gradient");
  add_run_flags(curve, curve_o);
  auto* compare = app.add_subcommand("compare-pfa", "force curve with the PFA baseline columns");
  add_run_flags(compare, pfa_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*show) {
      const JobConfig cfg = show_config.empty() ? JobConfig{} : load_config(show_config);
      write_material_table(std::cout, cfg, show_terms);
      return 0;
    }
    if (*reflect) {
      const JobConfig cfg = load_with_overrides(reflect_o);
      if (reflect_file.empty()) {
        write_reflection_csv(std::cout, cfg, side, l, kx, ky);
      } else {
        std::ofstream os(reflect_file, std::ios::binary);
        write_reflection_csv(os, cfg, side, l, kx, ky);
      }
      return 0;
    }
  } catch (const Error& e) {
    return report(e);
  }

  RunOptions run;
  run.version = MODCAS_VERSION;
  const Overrides* o = &pfa_o;
  if (*energy) {
    o = &energy_o;
    run.kind = JobKind::energy;
  } else if (*curve) {
    o = &curve_o;
  }
  try {
    JobConfig cfg = load_with_overrides(*o);
    if (*compare)
      cfg.pfa.baseline = true;
    run.progress = !o->quiet;
    return run_job(cfg, run, std::cerr);
  } catch (const Error& e) {
    // configuration errors: the report goes to --out or the default directory
    write_error_report(o->out.value_or(OutputSpec{}.directory), OutputSpec{}.error_report, e);
    return report(e);
  }
}
