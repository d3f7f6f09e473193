#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "job.hpp"
#include "modcas/error.hpp"
#include "modcas/free_energy.hpp"

namespace modcas::cli {

// Both stacks brought onto one cell: a common supercell is used when the
// periods differ but are commensurate.
CasimirSetup make_setup(const JobConfig& cfg);

enum class JobKind {
  energy,      // F at the grid separations only
  force_curve, // F, pressure and sphere–plane gradient
};

struct RunOptions {
  JobKind kind = JobKind::force_curve;
  bool progress = true;
  std::string version;
};

// Writes the result CSV, the diagnostics CSV and the manifest into the
// output directory and returns 0; on any error writes the error report and
// returns a nonzero status.
int run_job(const JobConfig& cfg, const RunOptions& opts, std::ostream& log);

// Column layout of the force-curve file.
std::vector<std::string> force_curve_columns(bool pfa_baseline);

// Reflection matrix of one stack at Matsubara index l and Bloch vector
// (kx, ky), one row per entry: row, col, re, im.
void write_reflection_csv(std::ostream& os, const JobConfig& cfg, const std::string& side, int l,
                          double kx, double ky);

// ε(iξ_l) and μ of each material at the first `terms` Matsubara indices.
void write_material_table(std::ostream& os, const JobConfig& cfg, int terms);

// error.json-style report; used by run_job and for configuration errors.
void write_error_report(const std::string& directory, const std::string& file, const Error& e);

// Exit status by error family: 2 for bad input, 3 for numerical failures.
int exit_status(ErrorCode code);

} // namespace modcas::cli
