#include "modcas/zerofreq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <set>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

namespace {

std::size_t uz(Index i) { return static_cast<std::size_t>(i); }

std::set<std::string> labels_of(const LayerStack& s)
{
  std::set<std::string> out{s.incident, s.exit};
  for (const auto& L : s.layers) {
    out.insert(L.background);
    for (const auto& q : L.inclusions)
      out.insert(q.material);
  }
  return out;
}

double kzero(const TransverseWavevector& kt)
{
  return 1e-14 * 2.0 * constants::pi / std::min(kt.cell.Lx, kt.cell.Ly);
}

} // namespace

double zero_frequency_weight(const Material& m, double sigma_floor)
{
  return dc_conductivity(m.permittivity) + sigma_floor * static_permittivity(m.permittivity);
}

double default_sigma_floor(std::span<const LayerStack* const> stacks,
                           const MaterialTable& materials)
{
  double smax = 0.0;
  for (const auto* s : stacks)
    for (const auto& l : labels_of(*s))
      smax = std::max(smax, dc_conductivity(materials.at(l).permittivity));
  return smax > 0.0 ? 1e-18 * smax : 1e-2;
}

ChannelSet tm_channels(const TransverseWavevector& kt, const TruncationOrder& ord,
                       std::span<const int> channels)
{
  ChannelSet out;
  const double k0 = kzero(kt);
  for (int c : channels)
    if (std::hypot(kt.alpha(ord.n_of(c)), kt.beta(ord.m_of(c))) > k0)
      out.push_back(c);
  return out;
}

ZeroFrequencyModel::ZeroFrequencyModel(const LayerStack& stack, const MaterialTable& materials,
                                       const TruncationOrder& ord, double sigma_floor)
  : ord_(ord), floor_(sigma_floor)
{
  if (!(sigma_floor > 0.0))
    throw Error(ErrorCode::ValidationError, "conductivity floor must be positive");
  auto s_of = [&](std::string_view l) { return zero_frequency_weight(materials.at(l), floor_); };
  auto half = [&](const std::string& label) {
    Medium m;
    m.id = label;
    m.s = s_of(label);
    return m;
  };
  media_.push_back(half(stack.incident));
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const auto& L = stack.layers[i];
    Medium m;
    m.id = "layer" + std::to_string(i + 1);
    m.thickness = L.thickness;
    m.homogeneous = L.homogeneous();
    m.s = s_of(L.background);
    if (!m.homogeneous) {
      m.s_g = coefficient_grid(L, stack.cell, ord, s_of);
      m.rho_g = coefficient_grid(L, stack.cell, ord,
                                 [&](std::string_view l) { return 1.0 / s_of(l); });
    }
    media_.push_back(std::move(m));
  }
  media_.push_back(half(stack.exit));
}

ModalBasis ZeroFrequencyModel::medium_basis(std::size_t i, const TransverseWavevector& kt,
                                            std::span<const int> channels) const
{
  const auto& med = media_.at(i);
  const Index P = static_cast<Index>(channels.size());
  Eigen::VectorXd a(P), b(P);
  for (Index j = 0; j < P; ++j) {
    a(j) = kt.alpha(ord_.n_of(channels[uz(j)]));
    b(j) = kt.beta(ord_.m_of(channels[uz(j)]));
    if (std::hypot(a(j), b(j)) <= kzero(kt))
      throw Error(ErrorCode::ValidationError, "zero-frequency TM basis requested for K = 0");
  }
  const Eigen::VectorXd sign = -Eigen::VectorXd::Ones(P);
  if (med.homogeneous) {
    VectorXcd p(P);
    MatrixXcd E = MatrixXcd::Zero(P, P), H = MatrixXcd::Identity(P, P);
    for (Index j = 0; j < P; ++j) {
      p(j) = std::hypot(a(j), b(j));
      E(j, j) = -1.0 / (med.s * p(j).real());
    }
    return ModalBasis::from_modes(p, std::move(E), std::move(H), sign, 0.0, med.id);
  }

  const MatrixXcd S = med.s_g.toeplitz(ord_, channels);
  const MatrixXcd Rho = med.rho_g.toeplitz(ord_, channels);
  MatrixXcd L(P, P);
  for (Index r = 0; r < P; ++r)
    for (Index c = 0; c < P; ++c)
      L(r, c) = (a(r) * a(c) + b(r) * b(c)) * S(r, c);
  const MatrixXcd A = L * Rho;

  VectorXcd ev(P);
  MatrixXcd U(P, P);
  if (A.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A.real(), true);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::DegenerateEigenbasis, "zero-frequency eigen-solve failed in " + med.id);
    ev = es.eigenvalues();
    U = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<MatrixXcd> es(A, true);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::DegenerateEigenbasis, "zero-frequency eigen-solve failed in " + med.id);
    ev = es.eigenvalues();
    U = es.eigenvectors();
  }
  VectorXcd p(P);
  for (Index j = 0; j < P; ++j)
    p(j) = std::sqrt(ev(j));
  std::vector<Index> order(uz(P));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    if (p(x).real() != p(y).real())
      return p(x).real() < p(y).real();
    return p(x).imag() < p(y).imag();
  });
  VectorXcd ps(P);
  MatrixXcd H(P, P);
  for (Index j = 0; j < P; ++j) {
    ps(j) = p(order[uz(j)]);
    H.col(j) = U.col(order[uz(j)]);
  }
  MatrixXcd E = -(Rho * H);
  for (Index j = 0; j < P; ++j)
    E.col(j) /= ps(j);
  return ModalBasis::from_modes(ps, std::move(E), std::move(H), sign, 0.0, med.id);
}

StackScattering ZeroFrequencyModel::scattering(const TransverseWavevector& kt,
                                               std::span<const int> channels) const
{
  const Index P = static_cast<Index>(channels.size());
  StackScattering acc = StackScattering::identity(P);
  ModalBasis upper = medium_basis(0, kt, channels);
  for (std::size_t i = 0; i + 1 < media_.size(); ++i) {
    ModalBasis lower = medium_basis(i + 1, kt, channels);
    try {
      const auto sigma = interface_smatrix(upper, lower);
      acc = star_compose(acc, layer_smatrix(sigma, upper.decay(), media_[i].thickness));
    } catch (const Error& e) {
      throw e.with_context("zero-frequency interface " + media_[i].id + "|" + media_[i + 1].id);
    }
    upper = std::move(lower);
  }
  return acc;
}

MatrixXcd ZeroFrequencyModel::reflection(const TransverseWavevector& kt,
                                         std::span<const int> channels, Side side) const
{
  auto S = scattering(kt, channels);
  return side == Side::incident ? std::move(S.s21) : std::move(S.s12);
}

ZeroFrequencyReflection zero_freq_reflection(const LayerStack& stack,
                                             const MaterialTable& materials,
                                             const TransverseWavevector& kt,
                                             const TruncationOrder& ord, double sigma_floor,
                                             Side side, bool check_floor)
{
  validate(stack, materials);
  const auto all = all_channels(ord);
  ZeroFrequencyReflection out;
  out.channels = tm_channels(kt, ord, all);
  if (out.channels.empty())
    return out;
  out.R = ZeroFrequencyModel(stack, materials, ord, sigma_floor).reflection(kt, out.channels, side);
  if (check_floor) {
    const MatrixXcd R2 =
      ZeroFrequencyModel(stack, materials, ord, sigma_floor / 10).reflection(kt, out.channels, side);
    const double scale = std::max(out.R.cwiseAbs().maxCoeff(), 1e-300);
    const double change = (R2 - out.R).cwiseAbs().maxCoeff() / scale;
    if (change > 1e-4)
      throw Error(ErrorCode::NonConvergedFloor,
                  "zero-frequency reflection depends on the conductivity floor (relative change " +
                    std::to_string(change) + ")");
  }
  return out;
}

Extrapolation extrapolate_to_zero(std::span<const double> xs, std::span<const MatrixXcd> values)
{
  if (xs.size() < 3 || xs.size() != values.size())
    throw Error(ErrorCode::ValidationError, "extrapolation needs at least three samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] < xs[i - 1]) || !(xs[i] > 0.0))
      throw Error(ErrorCode::ValidationError, "extrapolation samples must decrease strictly");
  const std::size_t n = xs.size();
  // Work in t = √ξ: metallic gratings under the Laurent rule carry modes with
  // q ∝ ξ^(-1/2), so R has half-integer powers of ξ; plain power series in ξ
  // are the even-t subset.
  const double x0 = std::sqrt(xs[n - 3]), x1 = std::sqrt(xs[n - 2]), x2 = std::sqrt(xs[n - 1]);
  const auto& R0 = values[n - 3];
  const auto& R1 = values[n - 2];
  const auto& R2 = values[n - 1];
  // Lagrange weights at t = 0
  const double w0 = (x1 * x2) / ((x0 - x1) * (x0 - x2));
  const double w1 = (x0 * x2) / ((x1 - x0) * (x1 - x2));
  const double w2 = (x0 * x1) / ((x2 - x0) * (x2 - x1));
  Extrapolation e;
  e.R = w0 * R0 + w1 * R1 + w2 * R2;
  const MatrixXcd lin = (x1 * R2 - x2 * R1) / (x1 - x2);
  const double scale = std::max(e.R.cwiseAbs().maxCoeff(), 1e-300);
  e.residual = (e.R - lin).cwiseAbs().maxCoeff() / scale;
  return e;
}

Extrapolation small_xi_extrapolation(const StackModelFactory& models,
                                     const TransverseWavevector& kt,
                                     std::span<const int> channels,
                                     std::span<const double> xi_samples, Side side)
{
  // TM block only: the TE entries have no static limit and turn into
  // conditioning noise as ξ → 0.
  const auto D = static_cast<Eigen::Index>(channels.size());
  std::vector<MatrixXcd> values;
  for (double xi : xi_samples) {
    const MatrixXcd full = models(xi).reflection(kt, channels, side);
    MatrixXcd tm(D, D);
    for (Eigen::Index i = 0; i < D; ++i)
      for (Eigen::Index j = 0; j < D; ++j)
        tm(i, j) = full(2 * i + 1, 2 * j + 1);
    values.push_back(std::move(tm));
  }
  auto e = extrapolate_to_zero(xi_samples, values);
  if (e.residual > 1e-3)
    throw Error(ErrorCode::ExtrapolationUnstable,
                "small-frequency extrapolation residual " + std::to_string(e.residual));
  return e;
}

Extrapolation small_xi_extrapolation(const LayerStack& stack, const MaterialTable& materials,
                                     const TransverseWavevector& kt, const TruncationOrder& ord,
                                     std::span<const double> xi_samples, Side side)
{
  validate(stack, materials);
  const auto all = all_channels(ord);
  auto models = [&](double xi) { return StackModel(stack, materials, xi, ord); };
  return small_xi_extrapolation(models, kt, all, xi_samples, side);
}

std::vector<double> extrapolation_samples(const LayerStack& stack, const MaterialTable& materials,
                                          const TransverseWavevector& kt,
                                          const TruncationOrder& ord,
                                          std::span<const int> channels, double xi_ref)
{
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& l : labels_of(stack)) {
    const double s = dc_conductivity(materials.at(l).permittivity);
    smax = std::max(smax, s);
    if (s > 0.0)
      smin = std::min(smin, s);
  }
  double kmin = std::numeric_limits<double>::infinity();
  const double k0 = kzero(kt);
  for (int c : channels) {
    const double K = std::hypot(kt.alpha(ord.n_of(c)), kt.beta(ord.m_of(c)));
    if (K > k0)
      kmin = std::min(kmin, K);
  }
  double top = xi_ref / 100.0;
  if (smax > 0.0) {
    // below the conductor/insulator contrast where Laurent-rule artefact modes settle
    top = std::min(top, 1e-8 * smin);
    if (std::isfinite(kmin))
      top = std::min(top, 0.01 * constants::c * constants::c * kmin * kmin / smax);
  }
  return {top, top / 100.0, top / 1e4};
}

} // namespace modcas
