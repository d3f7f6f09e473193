#include "run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "modcas/force.hpp"
#include "modcas/lifshitz.hpp"
#include "modcas/modal.hpp"
#include "modcas/smatrix.hpp"
#include "modcas/zerofreq.hpp"

namespace modcas::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p)
{
  std::ofstream os(p, std::ios::binary);
  if (!os)
    throw Error(ErrorCode::ValidationError, "cannot write '" + p.string() + "'");
  return os;
}

void write_line(std::ostream& os, const std::vector<std::string>& cells)
{
  for (std::size_t i = 0; i < cells.size(); ++i)
    os << (i ? "," : "") << cells[i];
  os << '\n';
}

FreeEnergyOptions engine_options(const JobConfig& cfg, bool progress, std::ostream& log)
{
  FreeEnergyOptions o = cfg.numerics;
  o.tail_policy = cfg.strict_tail ? TailPolicy::error : TailPolicy::warn;
  if (progress) {
    // called under the engine's lock
    o.progress = [&log](int l, int terms) {
      log << "  matsubara " << l + 1 << "/" << terms << " done\n" << std::flush;
    };
  }
  return o;
}

void write_diagnostics(std::ostream& os, const JobConfig& cfg,
                       const std::vector<FreeEnergyResult>& results)
{
  os << "a_m,quantity,index,value\n";
  auto row = [&](double a, const char* what, long index, double v) {
    os << num(a) << ',' << what << ',' << index << ',' << num(v) << '\n';
  };
  for (const auto& r : results) {
    for (std::size_t l = 0; l < r.per_l.size(); ++l)
      row(r.separation, "matsubara_term", static_cast<long>(l), r.per_l[l]);
    for (std::size_t n = 0; n < r.per_node.size(); ++n)
      row(r.separation, "node_term", static_cast<long>(n), r.per_node[n]);
    row(r.separation, "terms_used", -1, r.terms_used);
    row(r.separation, "tail_estimate", -1, r.tail_estimate);
    if (r.zero_direct)
      row(r.separation, "zero_direct", 0, *r.zero_direct);
    if (r.zero_extrapolated)
      row(r.separation, "zero_extrapolated", 0, *r.zero_extrapolated);
    if (r.zero_direct && r.zero_extrapolated)
      row(r.separation, "zero_route_difference", 0,
          std::abs(*r.zero_direct - *r.zero_extrapolated) /
            std::max(std::abs(*r.zero_direct), std::numeric_limits<double>::min()));
    if (r.zero_floor_change)
      row(r.separation, "zero_floor_change", 0, *r.zero_floor_change);
  }
  (void)cfg;
}

void write_spectra(std::ostream& os, const CasimirSetup& setup, const JobConfig& cfg)
{
  // Every layer of both stacks at the first quadrature node, l = 1 .. terms-1.
  const auto& o = cfg.numerics;
  const auto nodes = o.quadrature.nodes(setup.lower.cell);
  const TransverseWavevector kt(nodes.front().kx, nodes.front().ky, setup.lower.cell);
  const auto channels = all_channels(o.order);
  bool header = true;
  for (int l = 1; l < o.matsubara.terms; ++l) {
    const double xi = o.matsubara.frequency(l);
    for (const auto* s : {&setup.lower, &setup.upper}) {
      const StackModel model(*s, setup.materials, xi, o.order);
      for (std::size_t i = 1; i + 1 < model.media(); ++i) {
        write_spectrum_csv(os, model.medium_basis(i, kt, channels), kt, header);
        header = false;
      }
    }
  }
  if (header)
    os << "layer,xi,kx,ky,nu,re_gamma,im_gamma\n";
}

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& R, const std::string& prefix)
{
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    for (Eigen::Index j = 0; j < R.cols(); ++j)
      os << prefix << i << ',' << j << ',' << num(R(i, j).real()) << ',' << num(R(i, j).imag())
         << '\n';
}

nlohmann::json error_json(const Error& e)
{
  return {{"status", "error"},
          {"code", std::string(to_string(e.code()))},
          {"message", e.what()},
          {"context", e.context()}};
}

} // namespace

void write_error_report(const std::string& directory, const std::string& file, const Error& e)
{
  std::error_code ec;
  fs::create_directories(directory, ec);
  std::ofstream os(fs::path(directory) / file);
  os << error_json(e).dump(2) << '\n';
}

int exit_status(ErrorCode code)
{
  switch (code) {
  case ErrorCode::ParseError:
  case ErrorCode::ValidationError:
  case ErrorCode::UnknownMaterial:
  case ErrorCode::UnknownPreset:
  case ErrorCode::NegativeFrequency:
    return 2;
  default:
    return 3;
  }
}

CasimirSetup make_setup(const JobConfig& cfg)
{
  CasimirSetup s{cfg.left, cfg.right, cfg.gap, cfg.materials};
  const auto& a = cfg.left.cell;
  const auto& b = cfg.right.cell;
  if (a.Lx != b.Lx || a.Ly != b.Ly) {
    const CommonPeriod cp = common_period(a, b);
    s.lower = replicate(cfg.left, cp.repeat_x[0], cp.repeat_y[0]);
    s.upper = replicate(cfg.right, cp.repeat_x[1], cp.repeat_y[1]);
  }
  validate(s);
  return s;
}

std::vector<std::string> force_curve_columns(bool pfa_baseline)
{
  std::vector<std::string> cols = {"a_m", "F_J_per_m2", "pressure_N_per_m2", "gradient_N_per_m"};
  if (pfa_baseline) {
    cols.push_back("pfa_gradient_N_per_m");
    cols.push_back("ratio_exact_over_pfa");
  }
  return cols;
}

int run_job(const JobConfig& cfg, const RunOptions& opts, std::ostream& log)
{
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const fs::path dir(cfg.output.directory);
  nlohmann::json manifest = {{"software", {{"name", "modcas"}, {"version", opts.version}}},
                             {"job", opts.kind == JobKind::energy ? "energy" : "force-curve"},
                             {"config", to_json(cfg)}};
  nlohmann::json timings = nlohmann::json::object();
  auto lap = [&](const char* what, clock::time_point since) {
    timings[what] = std::chrono::duration<double>(clock::now() - since).count();
  };

  try {
    fs::create_directories(dir);
    const CasimirSetup setup = make_setup(cfg);
    const FreeEnergyOptions options = engine_options(cfg, opts.progress, log);

    const auto centres = cfg.separations.points();
    const std::vector<double> separations =
      opts.kind == JobKind::energy ? centres : stencil_separations(centres);
    log << "modcas: " << separations.size() << " separations, "
        << options.matsubara.terms << " Matsubara terms, N=" << options.order.N
        << " M=" << options.order.M << ", " << options.quadrature.nodes_per_dim
        << " nodes/dim, " << options.workers << " worker(s)\n";

    auto ts = clock::now();
    std::vector<FreeEnergyResult> results;
    results.reserve(separations.size());
    for (double a : separations) {
      log << "a = " << num(a) << " m\n";
      results.push_back(free_energy_per_area(setup, a, options));
    }
    lap("free_energy_s", ts);

    std::vector<std::string> warnings;
    for (const auto& r : results)
      for (const auto& w : r.warnings)
        warnings.push_back("a=" + num(r.separation) + ": " + w);

    if (opts.kind == JobKind::energy) {
      auto os = open_out(dir / cfg.output.force_curve);
      os << "a_m,F_J_per_m2\n";
      for (const auto& r : results)
        os << num(r.separation) << ',' << num(r.value) << '\n';
    } else {
      std::vector<double> F;
      for (const auto& r : results)
        F.push_back(r.value);
      ts = clock::now();
      const auto points = force_and_gradient(centres, separations, F);
      lap("derivatives_s", ts);

      const double R = cfg.pfa.sphere_radius;
      const double fill = filling_factor(setup.lower, setup.gap) *
                          filling_factor(setup.upper, setup.gap);
      const Material& m1 = setup.materials.at(facing_material(setup.lower, setup.gap));
      const Material& m2 = setup.materials.at(facing_material(setup.upper, setup.gap));
      const Material& g = setup.materials.at(setup.gap);

      auto os = open_out(dir / cfg.output.force_curve);
      write_line(os, force_curve_columns(cfg.pfa.baseline));
      for (const auto& p : points) {
        const double grad = pfa_gradient(R, p.pressure);
        std::vector<std::string> row = {num(p.a), num(p.energy), num(p.pressure), num(grad)};
        if (cfg.pfa.baseline) {
          const double base =
            pfa_gradient(R, fill * lifshitz_pressure(m1, m2, g, p.a, options.matsubara));
          row.push_back(num(base));
          row.push_back(num(grad / base));
        }
        write_line(os, row);
        if (auto w = pfa_validity_warning(R, p.a); !w.empty())
          warnings.push_back(w);
      }
      manifest["pfa"] = {{"filling_factor", fill},
                         {"facing_lower", m1.label},
                         {"facing_upper", m2.label}};
    }

    {
      auto os = open_out(dir / cfg.output.diagnostics);
      write_diagnostics(os, cfg, results);
    }

    if (options.zero_frequency == ZeroFrequencyMode::both) {
      log << "zero-frequency routes (weighted l = 0 term, J/m^2)\n"
          << "  a_m                      direct                   extrapolated             rel_diff\n";
      for (const auto& r : results) {
        if (!r.zero_direct || !r.zero_extrapolated)
          continue;
        const double d = std::abs(*r.zero_direct - *r.zero_extrapolated) /
                         std::max(std::abs(*r.zero_direct), 1e-300);
        log << "  " << std::setw(24) << std::left << num(r.separation) << ' ' << std::setw(24)
            << num(*r.zero_direct) << ' ' << std::setw(24) << num(*r.zero_extrapolated) << ' '
            << num(d) << '\n';
      }
      log << std::right;
    }

    if (cfg.output.dump_spectra) {
      ts = clock::now();
      auto os = open_out(dir / "spectra.csv");
      write_spectra(os, setup, cfg);
      lap("spectra_s", ts);
    }
    if (cfg.output.dump_reflection) {
      auto os = open_out(dir / "reflection.csv");
      os << "stack,row,col,re,im\n";
      const auto nodes = options.quadrature.nodes(setup.lower.cell);
      const TransverseWavevector kt(nodes.front().kx, nodes.front().ky, setup.lower.cell);
      const auto ch = all_channels(options.order);
      const double xi = options.matsubara.frequency(std::min(1, options.matsubara.terms - 1));
      if (xi > 0.0) {
        write_matrix(os, StackModel(setup.lower, setup.materials, xi, options.order)
                           .reflection(kt, ch, Side::incident), "left,");
        write_matrix(os, StackModel(setup.upper, setup.materials, xi, options.order)
                           .reflection(kt, ch, Side::incident), "right,");
      }
    }

    for (const auto& w : warnings)
      log << "warning: " << w << '\n';
    lap("total_s", t0);
    manifest["status"] = "ok";
    manifest["warnings"] = warnings;
    manifest["timings"] = timings;
    manifest["outputs"] = {cfg.output.force_curve, cfg.output.diagnostics};
    auto os = open_out(dir / cfg.output.manifest);
    os << manifest.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    log << "error [" << to_string(e.code()) << "]: " << e.what();
    if (!e.context().empty())
      log << " (" << e.context() << ")";
    log << '\n';
    write_error_report(cfg.output.directory, cfg.output.error_report, e);
    return exit_status(e.code());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream os(dir / cfg.output.error_report);
    os << nlohmann::json{{"status", "error"}, {"code", "InternalError"}, {"message", e.what()}}
            .dump(2)
       << '\n';
    return 1;
  }
}

void write_reflection_csv(std::ostream& os, const JobConfig& cfg, const std::string& side, int l,
                          double kx, double ky)
{
  const CasimirSetup setup = make_setup(cfg);
  const auto& o = cfg.numerics;
  const LayerStack& stack = side == "right" ? setup.upper : setup.lower;
  const TransverseWavevector kt(kx, ky, stack.cell);
  const double xi = o.matsubara.frequency(l);
  if (l < 0)
    throw Error(ErrorCode::NegativeFrequency, "Matsubara index must be >= 0");
  os << "row,col,re,im\n";
  if (l == 0) {
    const double floor = o.sigma_floor.value_or([&] {
      const LayerStack* ptrs[] = {&setup.lower, &setup.upper};
      return default_sigma_floor(ptrs, setup.materials);
    }());
    const auto z = zero_freq_reflection(stack, setup.materials, kt, o.order, floor,
                                        Side::incident, o.check_floor);
    write_matrix(os, z.R, "");
    return;
  }
  write_matrix(os, stack_reflection(stack, setup.materials, kt, xi, o.order), "");
}

void write_material_table(std::ostream& os, const JobConfig& cfg, int terms)
{
  const auto& grid = cfg.numerics.matsubara;
  os << "label,l,xi_rad_per_s,eps,mu,sigma_dc\n";
  for (const auto& label : cfg.materials.labels()) {
    const Material& m = cfg.materials.at(label);
    const double sigma = dc_conductivity(m.permittivity);
    for (int l = 0; l < terms; ++l) {
      const double xi = grid.frequency(l);
      const std::string eps = (l == 0 && m.permittivity.has_zero_frequency_pole())
                                ? std::string("inf")
                                : num(permittivity_at(m.permittivity, xi));
      os << label << ',' << l << ',' << num(xi) << ',' << eps << ','
         << num(permeability_at(m.permeability, xi)) << ',' << num(sigma) << '\n';
    }
  }
}

} // namespace modcas::cli
