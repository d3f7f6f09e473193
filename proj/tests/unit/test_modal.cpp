#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "../support/geometries.hpp"
#include "modcas/constants.hpp"
#include "modcas/modal.hpp"

using namespace modcas;
using Eigen::MatrixXcd;

namespace {

constexpr double c0 = 2.99792458e8;

MaterialTable dielectrics()
{
  MaterialTable t = MaterialTable::with_presets();
  t.add({DielectricModel::constant(4.0), {}, "four"});
  return t;
}

WaveguideMatrix assemble(const LayerSpec& layer, const UnitCell& cell, const MaterialTable& mats,
                         double xi, const TransverseWavevector& kt, const TruncationOrder& ord)
{
  return assemble_waveguide_matrix(fourier_blocks(layer, cell, mats, xi, ord), kt, xi, ord);
}

// Forward-subspace projector from the bi-orthogonal pair.
MatrixXcd forward_projector(const ModalBasis& b)
{
  const auto D = b.dim();
  return b.right_vectors().rightCols(D) * b.left_inverse().bottomRows(D);
}

} // namespace

TEST_SUITE("modal") {

TEST_CASE("homogeneous 4x4 blocks")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{0, 0};
  const double xi = 2e14;
  const TransverseWavevector kt(3e6, -2e6, cell);
  const auto W = assemble({10e-9, "four", {}}, cell, mats, xi, kt, ord);
  const double k02 = -(xi / c0) * (xi / c0);
  const double a = kt.alpha(0), b = kt.beta(0), chi = 0.25, mu = 1.0;
  CHECK(std::abs(W.HH(0, 0) - a * b * chi) < 1e-12 * std::abs(a * b));
  CHECK(std::abs(W.HH(0, 1) - (-a * a * chi + k02 * mu)) < 1e-12 * a * a);
  CHECK(std::abs(W.HH(1, 0) - (b * b * chi - k02 * mu)) < 1e-12 * a * a);
  CHECK(std::abs(W.HH(1, 1) - (-b * a * chi)) < 1e-12 * std::abs(a * b));
  CHECK(W.HH.imag().norm() == 0.0);
  CHECK(W.HE.imag().norm() == 0.0);
}

TEST_CASE("homogeneous reduced eigenvalues per channel")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{1, 1};
  const double xi = 5e14, eps = 4.0;
  const TransverseWavevector kt(1e6, 2e6, cell);
  const auto W = assemble({10e-9, "four", {}}, cell, mats, xi, kt, ord);
  const double k02 = -(xi / c0) * (xi / c0);
  const MatrixXcd P = W.HH * W.HE;
  for (int ch = 0; ch < ord.channel_count(); ++ch) {
    const double a = kt.alpha(ord.n_of(ch)), b = kt.beta(ord.m_of(ch));
    const double expected = k02 * (eps * k02 - a * a - b * b);
    // 2x2 diagonal block, both eigenvalues equal
    const Eigen::Matrix2cd blk = P.block<2, 2>(2 * ch, 2 * ch);
    CHECK(std::abs(blk(0, 0) - expected) < 1e-9 * std::abs(expected));
    CHECK(std::abs(blk(1, 1) - expected) < 1e-9 * std::abs(expected));
    CHECK(std::abs(blk(0, 1)) < 1e-9 * std::abs(expected));
    CHECK(std::abs(W.reduced(2 * ch, 2 * ch) - expected) < 1e-12 * std::abs(expected));
  }
}

TEST_CASE("vacuum at normal incidence decays like exp(-xi z / c)")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{0, 0};
  const double xi = 1e15;
  const TransverseWavevector kt(0.0, 0.0, cell);
  const auto b = solve_modes(assemble({10e-9, "vacuum", {}}, cell, mats, xi, kt, ord));
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(b.gammas()(j) - std::complex<double>(0.0, 1.0)) < 1e-12);
    CHECK(b.decay()(j).real() == doctest::Approx(xi / c0).epsilon(1e-12));
  }
  const auto r = rayleigh_basis(1.0, kt, xi, ord);
  CHECK(r.decay()(0).real() == doctest::Approx(xi / c0).epsilon(1e-14));
}

TEST_CASE("homogeneous medium: dispersion relation with multiplicity two")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{2, 1};
  const double xi = 3e14;
  const TransverseWavevector kt(2e6, -1e6, cell);
  const auto b = solve_modes(assemble({10e-9, "four", {}}, cell, mats, xi, kt, ord));
  std::vector<double> expected, got;
  for (int ch = 0; ch < ord.channel_count(); ++ch) {
    const double a = kt.alpha(ord.n_of(ch)), bb = kt.beta(ord.m_of(ch));
    const double q = std::sqrt(4.0 * xi * xi / (c0 * c0) + a * a + bb * bb);
    expected.push_back(q);
    expected.push_back(q);
  }
  for (Eigen::Index j = 0; j < b.dim(); ++j) {
    CHECK(std::abs(b.decay()(j).imag()) < 1e-9 * std::abs(b.decay()(j)));
    got.push_back(b.decay()(j).real());
  }
  std::sort(expected.begin(), expected.end());
  std::sort(got.begin(), got.end());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-10));
}

TEST_CASE("s polarization at K along x points along y")
{
  const UnitCell cell{400e-9, 400e-9};
  const TruncationOrder ord{0, 0};
  const TransverseWavevector kt(3e6, 0.0, cell);
  const auto ch = all_channels(ord);
  const auto R = polarization_frame(kt, ord, ch);
  // rows are ê_s and ê_p in (x, y) components
  CHECK(R(0, 0) == doctest::Approx(0.0));
  CHECK(std::abs(R(0, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(R(1, 0)) == doctest::Approx(1.0));
  // K = 0 convention: ê_s = ŷ, ê_p = x̂
  const auto R0 = polarization_frame(TransverseWavevector(0.0, 0.0, cell), ord, ch);
  CHECK(R0(0, 1) == 1.0);
  CHECK(R0(1, 0) == 1.0);
}

TEST_CASE("sample-B grating layer: invariants")
{
  const auto setup = testing::sample_b();
  const auto& layer = setup.lower.layers.at(0);
  const TruncationOrder ord{5, 5};
  const double xi = 2.0 * 2.46779e14;
  const TransverseWavevector kt(3.1e6, -1.7e6, setup.lower.cell);
  const auto W = assemble(layer, setup.lower.cell, setup.materials, xi, kt, ord);
  const auto b = solve_modes(W, "grating");
  CHECK(imaginary_defect(b) < 1e-8);
  CHECK(eigen_residual(W, b) < 1e-9);
  const MatrixXcd I = MatrixXcd::Identity(2 * b.dim(), 2 * b.dim());
  const MatrixXcd LR = b.left_inverse() * b.right_vectors();
  CHECK((LR - I).cwiseAbs().maxCoeff() < 1e-10);
  const MatrixXcd Pf = forward_projector(b);
  const MatrixXcd Pb = b.right_vectors().leftCols(b.dim()) * b.left_inverse().topRows(b.dim());
  CHECK((Pf + Pb - I).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Rayleigh basis spans the same forward subspace as the solver")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{1, 1};
  const double pts[5][3] = {{1e14, 0.0, 0.0},      {3e14, 2e6, 1e6},    {1e15, -7e6, 3e6},
                            {5e13, 7.8e6, -7.8e6}, {2e16, 1e5, -4e6}};
  for (const auto& p : pts) {
    const TransverseWavevector kt(p[1], p[2], cell);
    const auto solved = solve_modes(assemble({10e-9, "four", {}}, cell, mats, p[0], kt, ord));
    const auto ray = rayleigh_basis(4.0, kt, p[0], ord);
    const MatrixXcd d = forward_projector(solved) - forward_projector(ray);
    CHECK(d.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("spectrum dump columns")
{
  const UnitCell cell{400e-9, 400e-9};
  const TruncationOrder ord{0, 0};
  const TransverseWavevector kt(0.0, 0.0, cell);
  std::ostringstream os;
  write_spectrum_csv(os, rayleigh_basis(1.0, kt, 1e14, ord, all_channels(ord), 1.0, "gap"), kt, true);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "layer,xi,kx,ky,nu,re_gamma,im_gamma");
  CHECK(os.str().find("gap,") != std::string::npos);
}

TEST_CASE("Bloch vector outside the zone is rejected")
{
  const UnitCell cell{400e-9, 400e-9};
  CHECK_THROWS(TransverseWavevector(1.01 * constants::pi / 400e-9, 0.0, cell));
}

} // TEST_SUITE
