#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modcas/geometry.hpp"
#include "modcas/modal.hpp"
#include "modcas/smatrix.hpp"

namespace modcas {

// Zero-frequency response weight of a material: its Drude conductivity plus
// floor·ε_static. The floor term keeps insulating regions finite and makes
// the relative weights of dielectrics equal to their static permittivities.
double zero_frequency_weight(const Material& m, double sigma_floor);

// 1e-18 × the largest conductivity used by the stacks, or 1e-2 rad/s when
// none of them conducts. Truncated Laurent sums converge only like √floor
// toward the perfectly conducting limit, hence the very small default.
double default_sigma_floor(std::span<const LayerStack* const> stacks,
                           const MaterialTable& materials);

// Channels that carry a TM mode at ξ = 0 (|K| > 0).
ChannelSet tm_channels(const TransverseWavevector& kt, const TruncationOrder& ord,
                       std::span<const int> channels);

// TM sector of a stack at ξ = 0. Per channel the reduced variables are w
// (tangential E = K w) and u = β Hx − α Hy, obeying
//   ∂z w = [1/s] u,   ∂z u = L w,   L[c,c'] = (K_c·K_c') [s]_{c−c'}
// with [f] the Laurent (Toeplitz) matrix of the cell function f.
class ZeroFrequencyModel {
public:
  ZeroFrequencyModel(const LayerStack& stack, const MaterialTable& materials,
                     const TruncationOrder& ord, double sigma_floor);

  double sigma_floor() const { return floor_; }
  std::size_t media() const { return media_.size(); }

  ModalBasis medium_basis(std::size_t i, const TransverseWavevector& kt,
                          std::span<const int> channels) const;
  StackScattering scattering(const TransverseWavevector& kt, std::span<const int> channels) const;
  Eigen::MatrixXcd reflection(const TransverseWavevector& kt, std::span<const int> channels,
                              Side side) const;

private:
  struct Medium {
    std::string id;
    double thickness = 0.0;
    bool homogeneous = true;
    double s = 1.0;
    CoefficientGrid s_g, rho_g;
  };
  TruncationOrder ord_;
  double floor_;
  std::vector<Medium> media_;
};

struct ZeroFrequencyReflection {
  Eigen::MatrixXcd R; // one row/column per TM channel
  ChannelSet channels;
};

// Throws NonConvergedFloor when check_floor is set and the result moves by
// more than 1e-4 (relative, max-norm) when the floor is divided by ten.
ZeroFrequencyReflection zero_freq_reflection(const LayerStack& stack,
                                             const MaterialTable& materials,
                                             const TransverseWavevector& kt,
                                             const TruncationOrder& ord, double sigma_floor,
                                             Side side = Side::incident, bool check_floor = true);

// Builds the stack at a given imaginary frequency.
using StackModelFactory = std::function<StackModel(double xi)>;

struct Extrapolation {
  Eigen::MatrixXcd R;
  double residual = 0.0; // |quadratic − linear| / entry scale
};

// Quadratic extrapolation in √ξ to ξ = 0 of each matrix entry from strictly
// decreasing samples; the two smallest also give a linear estimate whose
// distance to the quadratic one is the residual.
Extrapolation extrapolate_to_zero(std::span<const double> xi_samples,
                                  std::span<const Eigen::MatrixXcd> values);

Extrapolation small_xi_extrapolation(const LayerStack& stack, const MaterialTable& materials,
                                     const TransverseWavevector& kt, const TruncationOrder& ord,
                                     std::span<const double> xi_samples,
                                     Side side = Side::incident);
// Same on a channel subset (every channel must have |K| > 0 unless the
// caller accepts an unstable K = 0 entry). Both overloads return the TM
// block, one row/column per channel, like zero_freq_reflection.
Extrapolation small_xi_extrapolation(const StackModelFactory& models,
                                     const TransverseWavevector& kt,
                                     std::span<const int> channels,
                                     std::span<const double> xi_samples, Side side);

// Frequencies low enough that the Drude response of the stack is in its
// small-ξ regime at this Bloch vector: ξ_top = min(ξ_ref/100, 1e-8 σ_min,
// 0.01 c² K_min² / σ_max) over the conductors of the stack, then ξ_top/100
// and ξ_top/10⁴.
std::vector<double> extrapolation_samples(const LayerStack& stack, const MaterialTable& materials,
                                          const TransverseWavevector& kt,
                                          const TruncationOrder& ord,
                                          std::span<const int> channels, double xi_ref);

} // namespace modcas
