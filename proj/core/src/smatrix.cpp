#include "modcas/smatrix.hpp"

#include <cmath>

#include "modcas/error.hpp"

namespace modcas {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

constexpr double kCondGuard = 1e-12;

// LU of Dr M Dc with rows, then columns, scaled to unit max-norm. The rcond
// guard then only trips on genuine near-singularity, not on matrices that
// are merely badly scaled (an interface between gold and vacuum at low ξ
// has t22 entries eighteen orders apart).
class GuardedLU {
public:
  GuardedLU(const MatrixXcd& M, ErrorCode code, const char* what)
  {
    row_ = M.rowwise().lpNorm<Eigen::Infinity>().cwiseInverse();
    const MatrixXcd Mr = row_.asDiagonal() * M;
    col_ = Mr.colwise().lpNorm<Eigen::Infinity>().transpose().cwiseInverse();
    if (!row_.allFinite() || !col_.allFinite())
      throw Error(code, std::string(what) + " has a zero or non-finite row or column");
    lu_.compute(Mr * col_.asDiagonal());
    const double rc = lu_.rcond();
    if (!(rc > kCondGuard))
      throw Error(code, std::string(what) + " is singular (rcond " + std::to_string(rc) + ")");
  }

  MatrixXcd solve(const MatrixXcd& B) const
  {
    return col_.asDiagonal() * lu_.solve(row_.asDiagonal() * B);
  }
  MatrixXcd inverse() const
  {
    return solve(MatrixXcd::Identity(row_.size(), row_.size()));
  }

private:
  Eigen::VectorXd row_, col_;
  Eigen::PartialPivLU<MatrixXcd> lu_;
};

GuardedLU guarded_lu(const MatrixXcd& M, ErrorCode code, const char* what)
{
  return GuardedLU(M, code, what);
}

} // namespace

ScatteringBlocks ScatteringBlocks::identity(Index D)
{
  return {MatrixXcd::Identity(D, D), MatrixXcd::Zero(D, D), MatrixXcd::Zero(D, D),
          MatrixXcd::Identity(D, D)};
}

NetworkView network_view(const StackScattering& S)
{
  return {S.s21, S.s22, S.s11, S.s12};
}

InterfaceTransfer interface_transfer(const ModalBasis& inner, const ModalBasis& outer)
{
  if (inner.dim() != outer.dim())
    throw Error(ErrorCode::BasisMismatch, "interface between bases of different size");
  if (inner.xi() != outer.xi())
    throw Error(ErrorCode::BasisMismatch, "interface between bases at different frequencies");
  // W_o⁻¹ W_i with W = [[E S, E], [-H S, H]] reduces to P = E_o⁻¹E_i, Q = H_o⁻¹H_i.
  const MatrixXcd P = outer.solve_e(inner.e_block());
  const MatrixXcd Q = outer.solve_h(inner.h_block());
  const auto& so = outer.sign();
  const auto& si = inner.sign();
  InterfaceTransfer t;
  t.t22 = 0.5 * (P + Q);
  t.t12 = so.asDiagonal() * (0.5 * (P - Q));
  t.t21 = 0.5 * (P - Q) * si.asDiagonal();
  t.t11 = so.asDiagonal() * t.t22 * si.asDiagonal();
  return t;
}

ScatteringBlocks interface_smatrix(const InterfaceTransfer& t)
{
  const auto lu = guarded_lu(t.t22, ErrorCode::SingularT22, "t22");
  ScatteringBlocks s;
  s.s22 = lu.inverse();
  s.s21 = -lu.solve(t.t21);
  s.s12 = t.t12 * s.s22;
  s.s11 = t.t11 + t.t12 * s.s21;
  return s;
}

ScatteringBlocks interface_smatrix_from_reverse(const InterfaceTransfer& r)
{
  const auto lu = guarded_lu(r.t11, ErrorCode::SingularT22, "reverse t11");
  ScatteringBlocks s;
  s.s11 = lu.inverse();
  s.s12 = -lu.solve(r.t12);
  s.s21 = r.t21 * s.s11;
  s.s22 = r.t22 + r.t21 * s.s12;
  return s;
}

ScatteringBlocks interface_smatrix(const ModalBasis& inner, const ModalBasis& outer)
{
  // Invert the homogeneous side when there is one: its inverse is exact,
  // while a grating basis at low ξ mixes field scales far apart.
  if (inner.block_diagonal() && !outer.block_diagonal())
    return interface_smatrix_from_reverse(interface_transfer(outer, inner));
  return interface_smatrix(interface_transfer(inner, outer));
}

LayerScattering layer_smatrix(const ScatteringBlocks& sigma, const VectorXcd& decay, double h)
{
  if (!(h >= 0.0))
    throw Error(ErrorCode::ValidationError, "layer thickness must be >= 0");
  if (decay.size() != sigma.dim())
    throw Error(ErrorCode::DimensionMismatch, "decay vector does not match the S-matrix");
  if (h == 0.0)
    return sigma;
  const VectorXcd p = (-decay * h).array().exp();
  LayerScattering s;
  s.s11 = sigma.s11 * p.asDiagonal();
  s.s12 = sigma.s12;
  s.s21 = p.asDiagonal() * sigma.s21 * p.asDiagonal();
  s.s22 = p.asDiagonal() * sigma.s22;
  return s;
}

StackScattering star_compose(const StackScattering& acc, const LayerScattering& next)
{
  if (acc.dim() != next.dim())
    throw Error(ErrorCode::DimensionMismatch, "star product of different sizes");
  const Index D = acc.dim();
  const MatrixXcd K = MatrixXcd::Identity(D, D) - next.s21 * acc.s12;
  const auto lu = guarded_lu(K, ErrorCode::ResonantInversion, "1 - s21 Σ12");
  // Q = K⁻¹ appears as Q·s21·Σ11 and Q·s22
  const MatrixXcd QsS = lu.solve(next.s21 * acc.s11);
  const MatrixXcd Qs22 = lu.solve(next.s22);
  StackScattering out;
  out.s11 = next.s11 * (acc.s11 + acc.s12 * QsS);
  out.s12 = next.s12 + next.s11 * acc.s12 * Qs22;
  out.s21 = acc.s21 + acc.s22 * QsS;
  out.s22 = acc.s22 * Qs22;
  return out;
}

StackModel::StackModel(const LayerStack& stack, const MaterialTable& materials, double xi,
                       const TruncationOrder& ord)
  : xi_(xi), ord_(ord)
{
  if (!(xi > 0.0))
    throw Error(ErrorCode::NegativeFrequency, "stack model needs xi > 0");
  auto eps_of = [&](std::string_view l) { return permittivity_at(materials.at(l).permittivity, xi); };
  auto mu_of = [&](std::string_view l) { return permeability_at(materials.at(l).permeability, xi); };

  auto half = [&](const std::string& label) {
    Medium m;
    m.id = label;
    m.eps = eps_of(label);
    m.mu = mu_of(label);
    return m;
  };
  media_.push_back(half(stack.incident));
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const auto& L = stack.layers[i];
    Medium m;
    m.id = "layer" + std::to_string(i + 1);
    m.thickness = L.thickness;
    m.homogeneous = L.homogeneous();
    m.eps = eps_of(L.background);
    m.mu = mu_of(L.background);
    if (!m.homogeneous) {
      m.eps_g = coefficient_grid(L, stack.cell, ord, eps_of);
      m.mu_g = coefficient_grid(L, stack.cell, ord, mu_of);
      m.chi_g = coefficient_grid(L, stack.cell, ord,
                                 [&](std::string_view l) { return 1.0 / eps_of(l); });
      m.zeta_g = coefficient_grid(L, stack.cell, ord,
                                  [&](std::string_view l) { return 1.0 / mu_of(l); });
    }
    media_.push_back(std::move(m));
  }
  media_.push_back(half(stack.exit));
}

ModalBasis StackModel::medium_basis(std::size_t i, const TransverseWavevector& kt,
                                    std::span<const int> channels) const
{
  const auto& m = media_.at(i);
  if (m.homogeneous)
    return rayleigh_basis(m.eps, kt, xi_, ord_, channels, m.mu, m.id);
  FourierBlocks b;
  b.eps = m.eps_g.toeplitz(ord_, channels);
  b.mu = m.mu_g.toeplitz(ord_, channels);
  b.chi = m.chi_g.toeplitz(ord_, channels);
  b.zeta = m.zeta_g.toeplitz(ord_, channels);
  return solve_modes(assemble_waveguide_matrix(b, kt, xi_, ord_, channels), m.id);
}

StackScattering StackModel::scattering(const TransverseWavevector& kt,
                                       std::span<const int> channels) const
{
  const Index D = 2 * static_cast<Index>(channels.size());
  StackScattering acc = StackScattering::identity(D);
  ModalBasis upper = medium_basis(0, kt, channels);
  for (std::size_t i = 0; i + 1 < media_.size(); ++i) {
    ModalBasis lower = medium_basis(i + 1, kt, channels);
    try {
      const auto sigma = interface_smatrix(upper, lower);
      acc = star_compose(acc, layer_smatrix(sigma, upper.decay(), media_[i].thickness));
    } catch (const Error& e) {
      throw e.with_context("interface " + media_[i].id + "|" + media_[i + 1].id);
    }
    upper = std::move(lower);
  }
  return acc;
}

MatrixXcd StackModel::reflection(const TransverseWavevector& kt, std::span<const int> channels,
                                 Side side) const
{
  auto S = scattering(kt, channels);
  return side == Side::incident ? std::move(S.s21) : std::move(S.s12);
}

MatrixXcd stack_reflection(const LayerStack& stack, const MaterialTable& materials,
                           const TransverseWavevector& kt, double xi, const TruncationOrder& ord,
                           Side side)
{
  validate(stack, materials);
  const StackModel model(stack, materials, xi, ord);
  const auto ch = all_channels(ord);
  return model.reflection(kt, ch, side);
}

} // namespace modcas
