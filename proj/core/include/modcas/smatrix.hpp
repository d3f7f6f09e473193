#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modcas/geometry.hpp"
#include "modcas/modal.hpp"

namespace modcas {

// Maps (A, B) amplitudes of the upper medium i to those of the lower medium
// i+1 at their shared interface. A = backward (travelling toward -z),
// B = forward (toward +z).
struct InterfaceTransfer {
  Eigen::MatrixXcd t11, t12, t21, t22;
};

// (A_out_below, B_out_above) = [[s11, s12], [s21, s22]] · (A_in_above, B_in_below)
struct ScatteringBlocks {
  Eigen::MatrixXcd s11, s12, s21, s22;

  static ScatteringBlocks identity(Eigen::Index D);
  Eigen::Index dim() const { return s11.rows(); }
};

using LayerScattering = ScatteringBlocks;
using StackScattering = ScatteringBlocks;

// Network ordering S = [[Σ21, Σ22], [Σ11, Σ12]].
struct NetworkView {
  Eigen::MatrixXcd R_left;  // reflection seen from the incident medium
  Eigen::MatrixXcd T_right; // exit -> incident
  Eigen::MatrixXcd T_left;  // incident -> exit
  Eigen::MatrixXcd R_right; // reflection seen from the exit medium
};
NetworkView network_view(const StackScattering& S);

// inner = medium above the interface, outer = medium below it.
InterfaceTransfer interface_transfer(const ModalBasis& inner, const ModalBasis& outer);
ScatteringBlocks interface_smatrix(const InterfaceTransfer& t);
// Same S-matrix from the reverse transfer W_i⁻¹ W_o.
ScatteringBlocks interface_smatrix_from_reverse(const InterfaceTransfer& reverse);
// Picks the direction that only inverts a homogeneous (block-diagonal) basis
// when exactly one side is homogeneous.
ScatteringBlocks interface_smatrix(const ModalBasis& inner, const ModalBasis& outer);
// Attaches the propagation of the upper medium (decay constants q, thickness h).
LayerScattering layer_smatrix(const ScatteringBlocks& sigma, const Eigen::VectorXcd& decay,
                              double h);
StackScattering star_compose(const StackScattering& acc, const LayerScattering& next);

enum class Side { incident, exit };

// A stack resolved at one imaginary frequency: material values and Fourier
// coefficient grids are computed once and shared by every Bloch vector.
class StackModel {
public:
  StackModel(const LayerStack& stack, const MaterialTable& materials, double xi,
             const TruncationOrder& ord);

  double xi() const { return xi_; }
  const TruncationOrder& order() const { return ord_; }
  std::size_t media() const { return media_.size(); }
  bool homogeneous(std::size_t i) const { return media_[i].homogeneous; }
  double thickness(std::size_t i) const { return media_[i].thickness; }
  double eps(std::size_t i) const { return media_[i].eps; }
  double mu(std::size_t i) const { return media_[i].mu; }
  const std::string& label(std::size_t i) const { return media_[i].id; }

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
    double eps = 1.0, mu = 1.0;
    CoefficientGrid eps_g, mu_g, chi_g, zeta_g;
  };
  double xi_;
  TruncationOrder ord_;
  std::vector<Medium> media_;
};

// Reflection block facing the incident half-space (Side::incident) or the
// exit half-space (Side::exit), in that medium's Rayleigh basis.
Eigen::MatrixXcd stack_reflection(const LayerStack& stack, const MaterialTable& materials,
                                  const TransverseWavevector& kt, double xi,
                                  const TruncationOrder& ord, Side side = Side::incident);

} // namespace modcas
