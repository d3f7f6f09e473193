#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modcas/geometry.hpp"
#include "modcas/matsubara.hpp"
#include "modcas/quadrature.hpp"

namespace modcas {

// Two bodies facing each other across a gap. Both stacks are written from
// the gap outward: their incident half-space is the gap medium and the
// first layer is the one touching the gap.
struct CasimirSetup {
  LayerStack lower;
  LayerStack upper;
  std::string gap;
  MaterialTable materials;
};

void validate(const CasimirSetup& setup);

// e^{-a q} per mode of the gap Rayleigh basis (two modes per channel).
Eigen::VectorXcd translation_factor(const Eigen::VectorXcd& gap_decay, double a);

// M = R1 · X · R2 · X
Eigen::MatrixXcd round_trip(const Eigen::MatrixXcd& R1, const Eigen::MatrixXcd& R2,
                            const Eigen::VectorXcd& X);

// log|det(1 − M)| through an LU factorization.
double log_det_one_minus(const Eigen::MatrixXcd& M);
// Same quantity as Σ log|1 − λ_i(M)|; throws SpectralRadiusExceeded when
// any |λ_i| ≥ 1.
double log_det_one_minus_eigen(const Eigen::MatrixXcd& M);
double spectral_radius(const Eigen::MatrixXcd& M);

enum class ZeroFrequencyMode { direct, extrapolate, both };
enum class TailPolicy { error, warn, ignore };

struct FreeEnergyOptions {
  MatsubaraGrid matsubara;
  BZQuadrature quadrature;
  TruncationOrder order;
  ZeroFrequencyMode zero_frequency = ZeroFrequencyMode::direct;
  std::optional<double> sigma_floor; // default from the stacks' conductivities
  bool check_floor = true;           // repeat l = 0 with the floor divided by ten
  int workers = 1;
  bool adaptive_matsubara = false;
  int max_terms = 4096;
  double tail_tolerance = 1e-4;
  TailPolicy tail_policy = TailPolicy::error;
  bool use_symmetry = false;         // fold mirror/diagonal-equivalent nodes
  bool check_spectral_radius = false;
  // Called once per finished Matsubara index, from a worker thread under a lock.
  std::function<void(int l, int terms)> progress;
};

struct FreeEnergyResult {
  double separation = 0.0;
  double value = 0.0;                // J/m²
  std::vector<double> per_l;         // weighted contributions, J/m²
  std::vector<double> per_node;      // summed over l, J/m²
  double tail_estimate = 0.0;        // |last term / sum|
  int terms_used = 0;
  // l = 0 contributions by each route that was evaluated
  std::optional<double> zero_direct;
  std::optional<double> zero_extrapolated;
  // relative change of the direct l = 0 term when the floor is divided by 10
  std::optional<double> zero_floor_change;
  std::vector<std::string> warnings;
};

std::vector<FreeEnergyResult> free_energy_curve(const CasimirSetup& setup,
                                                std::span<const double> separations,
                                                const FreeEnergyOptions& options);

FreeEnergyResult free_energy_per_area(const CasimirSetup& setup, double a,
                                      const FreeEnergyOptions& options);

// Sample standard deviation over |mean|.
double relative_spread(std::span<const double> values);

} // namespace modcas
