#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modcas/geometry.hpp"

namespace modcas {

struct TransverseWavevector {
  double kx = 0.0;
  double ky = 0.0;
  UnitCell cell;

  TransverseWavevector() = default;
  // Rejects Bloch vectors outside the first Brillouin zone.
  TransverseWavevector(double kx, double ky, const UnitCell& cell);

  double alpha(int n) const;
  double beta(int m) const;
};

// Per-channel rotation from (x, y) components to (s, p) components, where
// ê_s = ẑ×K̂ and ê_p = K̂ (ŷ and x̂ at K = 0). Block-diagonal and orthogonal.
Eigen::MatrixXd polarization_frame(const TransverseWavevector& kt, const TruncationOrder& ord,
                                   std::span<const int> channels);

// Off-diagonal blocks of H = [[0, HH], [HE, 0]] acting on the tangential
// field vector [Ex, Ey | Hx, Hy], channel-major with (x, y) pairs.
struct WaveguideMatrix {
  Eigen::MatrixXcd HH;
  Eigen::MatrixXcd HE;
  double xi = 0.0;
  // HH·HE assembled without the K⁴ terms, which cancel identically
  // because the diagonal wavevector matrices commute. Forming the plain
  // product instead loses about (K/k0)² relative digits.
  Eigen::MatrixXcd reduced;
  // Polarization frame R and HE expressed in it (R HE Rᵀ). The K ζ K part
  // only feeds the p rows from the s columns and is filled in exactly, so
  // the small TM-like magnetic fields at low ξ carry no cancellation error.
  Eigen::MatrixXd frame;
  Eigen::MatrixXcd he_frame;

  Eigen::Index dim() const { return HH.rows(); }
  Eigen::MatrixXcd full() const;
};

WaveguideMatrix assemble_waveguide_matrix(const FourierBlocks& blocks,
                                          const TransverseWavevector& kt, double xi,
                                          const TruncationOrder& ord);
WaveguideMatrix assemble_waveguide_matrix(const FourierBlocks& blocks,
                                          const TransverseWavevector& kt, double xi,
                                          const TruncationOrder& ord,
                                          std::span<const int> channels);

// Mode set of one medium at one (ξ, k∥). Column ν of E/H holds the tangential
// E and H parts of the forward mode, which decays like exp(-q_ν z) toward +z.
// Bases built by solve_modes and rayleigh_basis hold their fields in the
// polarization frame; mode amplitudes and S-matrices do not depend on it.
// The backward partner is sign_ν · [E_ν; -H_ν]. Right eigenvector matrix:
//   W = [[E S, E], [-H S, H]]   (backward block first)
// and its inverse is assembled from E⁻¹ and H⁻¹ without a 2D×2D solve.
class ModalBasis {
public:
  ModalBasis() = default;

  // Columns are rescaled to unit norm of [E; H] when normalize is set.
  // block_diagonal marks bases whose E and H are 2×2 block-diagonal per channel.
  static ModalBasis from_modes(Eigen::VectorXcd decay, Eigen::MatrixXcd E, Eigen::MatrixXcd H,
                               Eigen::VectorXd sign, double xi, std::string layer_id,
                               bool block_diagonal = false, bool normalize = true);

  Eigen::Index dim() const { return decay_.size(); }
  double xi() const { return xi_; }
  const std::string& layer_id() const { return layer_id_; }
  bool block_diagonal() const { return block_diagonal_; }

  // q_ν in 1/m, Re q_ν > 0.
  const Eigen::VectorXcd& decay() const { return decay_; }
  // γ_ν = i c q_ν / ξ, so that exp(i (ξ/c) γ z) = exp(-q z). Undefined at ξ = 0.
  Eigen::VectorXcd gammas() const;
  // Forward eigenvalues λ_ν of H; backward modes carry -λ_ν.
  Eigen::VectorXcd eigenvalues() const;

  const Eigen::MatrixXcd& e_block() const { return E_; }
  const Eigen::MatrixXcd& h_block() const { return H_; }
  const Eigen::VectorXd& sign() const { return sign_; }

  Eigen::MatrixXcd forward() const;
  Eigen::MatrixXcd backward() const;
  Eigen::MatrixXcd right_vectors() const;
  Eigen::MatrixXcd left_inverse() const;

  Eigen::MatrixXcd solve_e(const Eigen::MatrixXcd& X) const;
  Eigen::MatrixXcd solve_h(const Eigen::MatrixXcd& X) const;

private:
  struct Inverse {
    Eigen::VectorXd scale;               // column norms removed before factorizing
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    std::vector<Eigen::Matrix2cd> blocks; // block-diagonal case
  };
  static Inverse factorize(const Eigen::MatrixXcd& M, bool block_diagonal, const char* which,
                           const std::string& layer_id);
  static Eigen::MatrixXcd apply(const Inverse& inv, const Eigen::MatrixXcd& X, bool block_diagonal);
  // Factorized on first use; a basis is not meant to be shared between threads.
  const Inverse& e_inverse() const;
  const Inverse& h_inverse() const;

  Eigen::VectorXcd decay_;
  Eigen::MatrixXcd E_, H_;
  Eigen::VectorXd sign_;
  double xi_ = 0.0;
  std::string layer_id_;
  bool block_diagonal_ = false;
  mutable std::optional<Inverse> e_inv_, h_inv_;
};

// Solves the reduced problem λ² y_E = HH·HE y_E and rebuilds y_H = HE y_E / λ.
ModalBasis solve_modes(const WaveguideMatrix& H, std::string layer_id = {});

// Closed-form plane-wave basis of a homogeneous medium. Mode 2j is s
// (E along ê_s), mode 2j+1 is p (tangential E along ê_p), so E = 1 in the
// polarization frame and H holds the admittances −q/(μk0) (s, along ê_p)
// and k0ε/q (p, along ê_s). The backward p mode has its tangential E
// reversed so a perfect conductor reflects the two polarizations with
// opposite signs (r_s = -1, r_p = +1).
ModalBasis rayleigh_basis(double eps, const TransverseWavevector& kt, double xi,
                          const TruncationOrder& ord, std::span<const int> channels,
                          double mu = 1.0, std::string layer_id = {});
ModalBasis rayleigh_basis(double eps, const TransverseWavevector& kt, double xi,
                          const TruncationOrder& ord, double mu = 1.0);

// max over modes of ‖H y - λ y‖ / (|λ| ‖y‖), forward and backward, with the
// basis fields taken back to (x, y) components through H.frame.
double eigen_residual(const WaveguideMatrix& H, const ModalBasis& basis);
// max over modes of |Re γ| / |γ|.
double imaginary_defect(const ModalBasis& basis);

// One row per mode: layer, xi, kx, ky, nu, Re γ, Im γ.
void write_spectrum_csv(std::ostream& os, const ModalBasis& basis,
                        const TransverseWavevector& kt, bool header);

} // namespace modcas
