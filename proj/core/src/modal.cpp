#include "modcas/modal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

namespace {

constexpr double kCondGuard = 1e-12;

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

} // namespace

TransverseWavevector::TransverseWavevector(double kx_, double ky_, const UnitCell& c)
  : kx(kx_), ky(ky_), cell(c)
{
  const double bx = constants::pi / c.Lx, by = constants::pi / c.Ly;
  if (std::abs(kx) > bx * (1 + 1e-9) || std::abs(ky) > by * (1 + 1e-9))
    throw Error(ErrorCode::ValidationError, "Bloch vector outside the first Brillouin zone");
}

double TransverseWavevector::alpha(int n) const
{
  return kx + 2.0 * constants::pi * n / cell.Lx;
}

double TransverseWavevector::beta(int m) const
{
  return ky + 2.0 * constants::pi * m / cell.Ly;
}

namespace {

// (ê_s, ê_p) of one channel
std::pair<Eigen::Vector2d, Eigen::Vector2d> polarization_axes(double a, double b, double kzero)
{
  const double K = std::hypot(a, b);
  if (K > kzero)
    return {Eigen::Vector2d(-b / K, a / K), Eigen::Vector2d(a / K, b / K)};
  return {Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(1.0, 0.0)};
}

double zero_k_threshold(const UnitCell& cell)
{
  return 1e-14 * 2.0 * constants::pi / std::min(cell.Lx, cell.Ly);
}

} // namespace

Eigen::MatrixXd polarization_frame(const TransverseWavevector& kt, const TruncationOrder& ord,
                                   std::span<const int> channels)
{
  const Index P = static_cast<Index>(channels.size());
  const double kzero = zero_k_threshold(kt.cell);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * P, 2 * P);
  for (Index j = 0; j < P; ++j) {
    const auto [es, ep] = polarization_axes(kt.alpha(ord.n_of(channels[uz(j)])),
                                            kt.beta(ord.m_of(channels[uz(j)])), kzero);
    R.block<1, 2>(2 * j, 2 * j) = es.transpose();
    R.block<1, 2>(2 * j + 1, 2 * j) = ep.transpose();
  }
  return R;
}

MatrixXcd WaveguideMatrix::full() const
{
  const Index D = dim();
  MatrixXcd F = MatrixXcd::Zero(2 * D, 2 * D);
  F.topRightCorner(D, D) = HH;
  F.bottomLeftCorner(D, D) = HE;
  return F;
}

WaveguideMatrix assemble_waveguide_matrix(const FourierBlocks& blocks,
                                          const TransverseWavevector& kt, double xi,
                                          const TruncationOrder& ord)
{
  const auto ch = all_channels(ord);
  return assemble_waveguide_matrix(blocks, kt, xi, ord, ch);
}

WaveguideMatrix assemble_waveguide_matrix(const FourierBlocks& blocks,
                                          const TransverseWavevector& kt, double xi,
                                          const TruncationOrder& ord,
                                          std::span<const int> channels)
{
  if (!(xi > 0.0))
    throw Error(ErrorCode::NegativeFrequency, "waveguide matrix needs xi > 0");
  const Index P = static_cast<Index>(channels.size());
  for (const auto* B : {&blocks.eps, &blocks.mu, &blocks.chi, &blocks.zeta})
    if (B->rows() != P || B->cols() != P)
      throw Error(ErrorCode::DimensionMismatch, "Fourier blocks do not match the channel set");

  Eigen::VectorXd a(P), b(P);
  for (Index j = 0; j < P; ++j) {
    a(j) = kt.alpha(ord.n_of(channels[uz(j)]));
    b(j) = kt.beta(ord.m_of(channels[uz(j)]));
  }
  const double k02 = -(xi / constants::c) * (xi / constants::c);

  WaveguideMatrix W;
  W.xi = xi;
  W.HH.resize(2 * P, 2 * P);
  W.HE.resize(2 * P, 2 * P);
  for (Index r = 0; r < P; ++r) {
    for (Index s = 0; s < P; ++s) {
      const cplx chi = blocks.chi(r, s), zeta = blocks.zeta(r, s);
      const cplx eps = blocks.eps(r, s), mu = blocks.mu(r, s);
      W.HH(2 * r, 2 * s) = a(r) * chi * b(s);
      W.HH(2 * r, 2 * s + 1) = -a(r) * chi * a(s) + k02 * mu;
      W.HH(2 * r + 1, 2 * s) = b(r) * chi * b(s) - k02 * mu;
      W.HH(2 * r + 1, 2 * s + 1) = -b(r) * chi * a(s);

      W.HE(2 * r, 2 * s) = -a(r) * zeta * b(s);
      W.HE(2 * r, 2 * s + 1) = a(r) * zeta * a(s) - k02 * eps;
      W.HE(2 * r + 1, 2 * s) = -b(r) * zeta * b(s) + k02 * eps;
      W.HE(2 * r + 1, 2 * s + 1) = b(r) * zeta * a(s);
    }
  }

  // With G_f = [Kx; Ky] f [Ky, -Kx], HH = G_χ + k0² J_μ and HE = -G_ζ + k0² J_ε,
  // where G_χ G_ζ = 0. The remaining terms:
  //   HH·HE = k0² (G_χ J_ε - J_μ G_ζ) + k0⁴ J_μ J_ε
  const Eigen::MatrixXcd Ka = a.cast<cplx>().asDiagonal();
  const Eigen::MatrixXcd Kb = b.cast<cplx>().asDiagonal();
  const Eigen::MatrixXcd chi_xe = blocks.chi * (a.asDiagonal() * blocks.eps);
  const Eigen::MatrixXcd chi_ye = blocks.chi * (b.asDiagonal() * blocks.eps);
  const Eigen::MatrixXcd mu_yz = blocks.mu * (b.asDiagonal() * blocks.zeta);
  const Eigen::MatrixXcd mu_xz = blocks.mu * (a.asDiagonal() * blocks.zeta);
  const Eigen::MatrixXcd me = blocks.mu * blocks.eps;
  // split (x-block, y-block) ordering first, interleaved below
  const Eigen::MatrixXcd Axx = k02 * (-(Ka * chi_xe) - mu_yz * Kb) + k02 * k02 * me;
  const Eigen::MatrixXcd Axy = k02 * (-(Ka * chi_ye) + mu_yz * Ka);
  const Eigen::MatrixXcd Ayx = k02 * (-(Kb * chi_xe) + mu_xz * Kb);
  const Eigen::MatrixXcd Ayy = k02 * (-(Kb * chi_ye) - mu_xz * Ka) + k02 * k02 * me;
  W.reduced.resize(2 * P, 2 * P);
  for (Index r = 0; r < P; ++r)
    for (Index s = 0; s < P; ++s) {
      W.reduced(2 * r, 2 * s) = Axx(r, s);
      W.reduced(2 * r, 2 * s + 1) = Axy(r, s);
      W.reduced(2 * r + 1, 2 * s) = Ayx(r, s);
      W.reduced(2 * r + 1, 2 * s + 1) = Ayy(r, s);
    }

  // k0² J_ε rotated blockwise, then -G_ζ which in the frame is K_r ζ K_s
  // from s to p.
  W.frame = polarization_frame(kt, ord, channels);
  Eigen::VectorXd K(P);
  for (Index j = 0; j < P; ++j)
    K(j) = std::hypot(a(j), b(j));
  W.he_frame.resize(2 * P, 2 * P);
  for (Index r = 0; r < P; ++r) {
    const Eigen::Matrix2d Rr = W.frame.block<2, 2>(2 * r, 2 * r);
    for (Index s = 0; s < P; ++s) {
      const Eigen::Matrix2d Rs = W.frame.block<2, 2>(2 * s, 2 * s);
      Eigen::Matrix2d J;
      J << 0.0, -k02, k02, 0.0;
      const Eigen::Matrix2d blk = Rr * J * Rs.transpose();
      const cplx eps = blocks.eps(r, s);
      W.he_frame.block<2, 2>(2 * r, 2 * s) = blk.cast<cplx>() * eps;
      W.he_frame(2 * r + 1, 2 * s) += K(r) * blocks.zeta(r, s) * K(s);
    }
  }
  return W;
}

ModalBasis::Inverse ModalBasis::factorize(const MatrixXcd& M, bool block_diagonal,
                                          const char* which, const std::string& layer_id)
{
  Inverse inv;
  inv.scale = M.colwise().norm().transpose();
  for (Index j = 0; j < inv.scale.size(); ++j)
    if (!(inv.scale(j) > 0.0) || !std::isfinite(inv.scale(j)))
      throw Error(ErrorCode::DegenerateEigenbasis,
                  std::string("zero or non-finite ") + which + " column in layer '" + layer_id + "'");
  const MatrixXcd Mh = M * inv.scale.cwiseInverse().asDiagonal();
  if (block_diagonal) {
    const Index P = M.rows() / 2;
    inv.blocks.resize(uz(P));
    for (Index j = 0; j < P; ++j) {
      const Eigen::Matrix2cd blk = Mh.block<2, 2>(2 * j, 2 * j);
      const double det = std::abs(blk.determinant());
      if (!(det > kCondGuard))
        throw Error(ErrorCode::DegenerateEigenbasis,
                    std::string("singular ") + which + " block in layer '" + layer_id + "'");
      inv.blocks[uz(j)] = blk.inverse();
    }
    return inv;
  }
  inv.lu.compute(Mh);
  const double rc = inv.lu.rcond();
  if (!(rc > kCondGuard))
    throw Error(ErrorCode::DegenerateEigenbasis,
                std::string("ill-conditioned ") + which + " eigenvector matrix in layer '" +
                  layer_id + "' (rcond " + std::to_string(rc) + ")");
  return inv;
}

MatrixXcd ModalBasis::apply(const Inverse& inv, const MatrixXcd& X, bool block_diagonal)
{
  MatrixXcd Y;
  if (block_diagonal) {
    Y.resize(X.rows(), X.cols());
    for (std::size_t j = 0; j < inv.blocks.size(); ++j) {
      const Index r = 2 * static_cast<Index>(j);
      Y.middleRows(r, 2).noalias() = inv.blocks[j] * X.middleRows(r, 2);
    }
  } else {
    Y = inv.lu.solve(X);
  }
  return inv.scale.cwiseInverse().asDiagonal() * Y;
}

ModalBasis ModalBasis::from_modes(VectorXcd decay, MatrixXcd E, MatrixXcd H,
                                  Eigen::VectorXd sign, double xi, std::string layer_id,
                                  bool block_diagonal, bool normalize)
{
  const Index D = decay.size();
  if (E.rows() != D || E.cols() != D || H.rows() != D || H.cols() != D || sign.size() != D)
    throw Error(ErrorCode::DimensionMismatch, "modal basis blocks have inconsistent sizes");
  if (block_diagonal && D % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "block-diagonal basis needs an even dimension");
  if (normalize) {
    for (Index j = 0; j < D; ++j) {
      const double n = std::sqrt(E.col(j).squaredNorm() + H.col(j).squaredNorm());
      if (n > 0.0) {
        E.col(j) /= n;
        H.col(j) /= n;
      }
    }
  }
  ModalBasis b;
  b.decay_ = std::move(decay);
  b.E_ = std::move(E);
  b.H_ = std::move(H);
  b.sign_ = std::move(sign);
  b.xi_ = xi;
  b.layer_id_ = std::move(layer_id);
  b.block_diagonal_ = block_diagonal;
  return b;
}

VectorXcd ModalBasis::gammas() const
{
  return decay_ * cplx(0.0, constants::c / xi_);
}

VectorXcd ModalBasis::eigenvalues() const
{
  return decay_ * (-xi_ / constants::c);
}

MatrixXcd ModalBasis::forward() const
{
  MatrixXcd F(2 * dim(), dim());
  F << E_, H_;
  return F;
}

MatrixXcd ModalBasis::backward() const
{
  MatrixXcd B(2 * dim(), dim());
  B << E_ * sign_.asDiagonal(), -(H_ * sign_.asDiagonal());
  return B;
}

MatrixXcd ModalBasis::right_vectors() const
{
  MatrixXcd W(2 * dim(), 2 * dim());
  W << backward(), forward();
  return W;
}

MatrixXcd ModalBasis::left_inverse() const
{
  const Index D = dim();
  const MatrixXcd I = MatrixXcd::Identity(D, D);
  const MatrixXcd Ei = solve_e(I), Hi = solve_h(I);
  MatrixXcd L(2 * D, 2 * D);
  L << 0.5 * (sign_.asDiagonal() * Ei), -0.5 * (sign_.asDiagonal() * Hi), 0.5 * Ei, 0.5 * Hi;
  return L;
}

const ModalBasis::Inverse& ModalBasis::e_inverse() const
{
  if (!e_inv_)
    e_inv_ = factorize(E_, block_diagonal_, "E", layer_id_);
  return *e_inv_;
}

const ModalBasis::Inverse& ModalBasis::h_inverse() const
{
  if (!h_inv_)
    h_inv_ = factorize(H_, block_diagonal_, "H", layer_id_);
  return *h_inv_;
}

MatrixXcd ModalBasis::solve_e(const MatrixXcd& X) const
{
  return apply(e_inverse(), X, block_diagonal_);
}

MatrixXcd ModalBasis::solve_h(const MatrixXcd& X) const
{
  return apply(h_inverse(), X, block_diagonal_);
}

ModalBasis solve_modes(const WaveguideMatrix& W, std::string layer_id)
{
  const Index D = W.dim();
  const double xi = W.xi;
  const bool framed = W.frame.size() != 0 && W.he_frame.size() != 0;
  MatrixXcd A = W.reduced.size() ? W.reduced : MatrixXcd(W.HH * W.HE);
  if (framed)
    A = W.frame * A * W.frame.transpose();

  VectorXcd mu(D);
  MatrixXcd Y(D, D);
  if (A.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A.real(), true);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::DegenerateEigenbasis, "eigen-solve failed in layer '" + layer_id + "'");
    mu = es.eigenvalues();
    Y = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<MatrixXcd> es(A, true);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::DegenerateEigenbasis, "eigen-solve failed in layer '" + layer_id + "'");
    mu = es.eigenvalues();
    Y = es.eigenvectors();
  }

  VectorXcd q(D);
  for (Index j = 0; j < D; ++j) {
    cplx s = std::sqrt(mu(j)) * (constants::c / xi);
    if (s.real() == 0.0 && s.imag() > 0.0)
      s = -s;
    q(j) = s;
  }

  std::vector<Index> order(uz(D));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (q(a).real() != q(b).real())
      return q(a).real() < q(b).real();
    return q(a).imag() < q(b).imag();
  });

  VectorXcd qs(D);
  MatrixXcd E(D, D);
  for (Index j = 0; j < D; ++j) {
    qs(j) = q(order[uz(j)]);
    E.col(j) = Y.col(order[uz(j)]);
  }
  const VectorXcd lam = qs * (-xi / constants::c);
  MatrixXcd H = framed ? MatrixXcd(W.he_frame * E) : MatrixXcd(W.HE * E);
  for (Index j = 0; j < D; ++j)
    H.col(j) /= lam(j);

  return ModalBasis::from_modes(qs, std::move(E), std::move(H), Eigen::VectorXd::Ones(D), xi,
                                std::move(layer_id));
}

ModalBasis rayleigh_basis(double eps, const TransverseWavevector& kt, double xi,
                          const TruncationOrder& ord, std::span<const int> channels, double mu,
                          std::string layer_id)
{
  if (!(xi > 0.0))
    throw Error(ErrorCode::NegativeFrequency, "Rayleigh basis needs xi > 0");
  const Index P = static_cast<Index>(channels.size());
  const Index D = 2 * P;
  const double k = xi / constants::c;
  VectorXcd q(D);
  MatrixXcd E = MatrixXcd::Identity(D, D), H = MatrixXcd::Zero(D, D);
  Eigen::VectorXd sign(D);
  for (Index j = 0; j < P; ++j) {
    const double a = kt.alpha(ord.n_of(channels[uz(j)]));
    const double b = kt.beta(ord.m_of(channels[uz(j)]));
    const double qz = std::sqrt(eps * mu * k * k + a * a + b * b);
    const Index r = 2 * j;
    H(r + 1, r) = -qz / (mu * k); // s mode, H along ê_p
    H(r, r + 1) = k * eps / qz;   // p mode, H along ê_s
    q(r) = q(r + 1) = qz;
    sign(r) = 1.0;
    sign(r + 1) = -1.0;
  }
  return ModalBasis::from_modes(q, std::move(E), std::move(H), sign, xi, std::move(layer_id),
                                true, false);
}

ModalBasis rayleigh_basis(double eps, const TransverseWavevector& kt, double xi,
                          const TruncationOrder& ord, double mu)
{
  const auto ch = all_channels(ord);
  return rayleigh_basis(eps, kt, xi, ord, ch, mu);
}

double eigen_residual(const WaveguideMatrix& W, const ModalBasis& basis)
{
  MatrixXcd E = basis.e_block(), H = basis.h_block();
  if (W.frame.size() != 0) {
    E = W.frame.transpose() * E;
    H = W.frame.transpose() * H;
  }
  const VectorXcd lam = basis.eigenvalues();
  double worst = 0.0;
  for (Index j = 0; j < basis.dim(); ++j) {
    // forward [e; h] with λ, backward [e; -h] with -λ; both give the same norms
    const Eigen::VectorXcd r1 = W.HH * H.col(j) - lam(j) * E.col(j);
    const Eigen::VectorXcd r2 = W.HE * E.col(j) - lam(j) * H.col(j);
    const double num = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    const double den = std::abs(lam(j)) * std::sqrt(E.col(j).squaredNorm() + H.col(j).squaredNorm());
    worst = std::max(worst, num / den);
  }
  return worst;
}

double imaginary_defect(const ModalBasis& basis)
{
  double worst = 0.0;
  for (Index j = 0; j < basis.dim(); ++j)
    worst = std::max(worst, std::abs(basis.decay()(j).imag()) / std::abs(basis.decay()(j)));
  return worst;
}

void write_spectrum_csv(std::ostream& os, const ModalBasis& basis,
                        const TransverseWavevector& kt, bool header)
{
  if (header)
    os << "layer,xi,kx,ky,nu,re_gamma,im_gamma\n";
  const VectorXcd g = basis.gammas();
  char buf[256];
  for (Index j = 0; j < basis.dim(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%ld,%.17g,%.17g\n", basis.xi(), kt.kx,
                  kt.ky, static_cast<long>(j), g(j).real(), g(j).imag());
    os << basis.layer_id() << ',' << buf;
  }
}

} // namespace modcas
