#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/geometries.hpp"
#include "modcas/constants.hpp"
#include "modcas/error.hpp"
#include "modcas/smatrix.hpp"

using namespace modcas;
using Eigen::MatrixXcd;

namespace {

constexpr double c0 = 2.99792458e8;

MaterialTable dielectrics()
{
  MaterialTable t = MaterialTable::with_presets();
  t.add({DielectricModel::constant(4.0), {}, "four"});
  t.add({DielectricModel::constant(2.0), {}, "two"});
  return t;
}

// Gap/medium interface at iξ; a perfect conductor gives rs = -1, rp = +1.
struct Airy {
  double rs, rp;
};
Airy fresnel_closed(double eps1, double eps2, double xi, double K)
{
  const double k2 = (xi / c0) * (xi / c0);
  const double q1 = std::sqrt(eps1 * k2 + K * K), q2 = std::sqrt(eps2 * k2 + K * K);
  return {(q1 - q2) / (q1 + q2), (eps2 * q1 - eps1 * q2) / (eps2 * q1 + eps1 * q2)};
}

MatrixXcd full_transfer(const InterfaceTransfer& t)
{
  const auto D = t.t11.rows();
  MatrixXcd T(2 * D, 2 * D);
  T << t.t11, t.t12, t.t21, t.t22;
  return T;
}

ScatteringBlocks random_passive(std::mt19937_64& rng, Eigen::Index D)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&] {
    MatrixXcd M(D, D);
    for (Eigen::Index i = 0; i < D; ++i)
      for (Eigen::Index j = 0; j < D; ++j)
        M(i, j) = u(rng);
    return MatrixXcd(M * (0.4 / M.operatorNorm()));
  };
  return {rnd(), rnd(), rnd(), rnd()};
}

double max_abs(const MatrixXcd& M) { return M.cwiseAbs().maxCoeff(); }

} // namespace

TEST_SUITE("smatrix") {

TEST_CASE("same basis on both sides gives the identity transfer")
{
  const UnitCell cell{400e-9, 400e-9};
  const TruncationOrder ord{1, 1};
  const TransverseWavevector kt(1e6, 2e6, cell);
  const auto b = rayleigh_basis(4.0, kt, 2e14, ord);
  const auto t = interface_transfer(b, b);
  const auto D = b.dim();
  CHECK(max_abs(t.t11 - MatrixXcd::Identity(D, D)) < 1e-10);
  CHECK(max_abs(t.t22 - MatrixXcd::Identity(D, D)) < 1e-10);
  CHECK(max_abs(t.t12) < 1e-10);
  CHECK(max_abs(t.t21) < 1e-10);
  const auto s = interface_smatrix(t);
  CHECK(max_abs(s.s11 - MatrixXcd::Identity(D, D)) < 1e-10);
  CHECK(max_abs(s.s22 - MatrixXcd::Identity(D, D)) < 1e-10);
  CHECK(max_abs(s.s12) + max_abs(s.s21) < 1e-10);
}

TEST_CASE("reversed interface inverts the transfer matrix")
{
  const auto setup = testing::sample_b();
  const TruncationOrder ord{2, 2};
  const TransverseWavevector kt(2e6, -1e6, setup.lower.cell);
  const StackModel model(setup.lower, setup.materials, 3e14, ord);
  const auto ch = all_channels(ord);
  const auto a = model.medium_basis(0, kt, ch), g = model.medium_basis(1, kt, ch);
  const MatrixXcd P = full_transfer(interface_transfer(g, a)) * full_transfer(interface_transfer(a, g));
  CHECK(max_abs(P - MatrixXcd::Identity(P.rows(), P.cols())) < 1e-9);
}

TEST_CASE("determinant identity det s22 = 1/det t22")
{
  const UnitCell cell{400e-9, 400e-9};
  const TruncationOrder ord{1, 0};
  const TransverseWavevector kt(1e6, 0.0, cell);
  const auto t = interface_transfer(rayleigh_basis(1.0, kt, 2e14, ord), rayleigh_basis(4.0, kt, 2e14, ord));
  const auto s = interface_smatrix(t);
  CHECK(std::abs(s.s22.determinant() * t.t22.determinant() - 1.0) < 1e-12);
}

TEST_CASE("single interface reproduces the Fresnel coefficients")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{0, 0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lxi(std::log(1e12), std::log(1e17));
  std::uniform_real_distribution<double> uk(-1.0, 1.0);
  for (const char* body : {"four", "gold_drude", "silicon_pdoped"}) {
    for (int i = 0; i < 10; ++i) {
      const double xi = std::exp(lxi(rng));
      const double kx = uk(rng) * constants::pi / cell.Lx, ky = uk(rng) * constants::pi / cell.Ly;
      const TransverseWavevector kt(kx, ky, cell);
      const LayerStack s{cell, "vacuum", {}, body};
      const auto R = stack_reflection(s, mats, kt, xi, ord);
      const auto f = fresnel_closed(1.0, permittivity_at(mats.at(body).permittivity, xi), xi, std::hypot(kx, ky));
      CHECK(std::abs(R(0, 0) - f.rs) < 1e-10);
      CHECK(std::abs(R(1, 1) - f.rp) < 1e-10);
      CHECK(std::abs(R(0, 1)) + std::abs(R(1, 0)) < 1e-10);
    }
  }
}

TEST_CASE("same medium as the gap reflects nothing")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{2, 2};
  const LayerStack s{cell, "vacuum", {}, "vacuum"};
  CHECK(max_abs(stack_reflection(s, mats, TransverseWavevector(1e6, 1e6, cell), 1e14, ord)) < 1e-14);
}

TEST_CASE("layer propagation")
{
  std::mt19937_64 rng(11);
  const auto sig = random_passive(rng, 4);
  Eigen::VectorXcd q(4);
  q << 1e6, 2e6, 3e6, 4e7;
  const auto same = layer_smatrix(sig, q, 0.0);
  CHECK(max_abs(same.s11 - sig.s11) == 0.0);
  const auto thick = layer_smatrix(sig, q, 1e-3);
  CHECK(max_abs(thick.s11) < 1e-100);
  CHECK(max_abs(thick.s21) < 1e-100);
  CHECK(max_abs(thick.s12 - sig.s12) == 0.0);
}

TEST_CASE("star product: identity and associativity")
{
  std::mt19937_64 rng(3);
  const auto D = 6;
  const auto I = ScatteringBlocks::identity(D);
  for (int trial = 0; trial < 20; ++trial) {
    const auto A = random_passive(rng, D), B = random_passive(rng, D), C = random_passive(rng, D);
    const auto AI = star_compose(A, I);
    CHECK(max_abs(AI.s11 - A.s11) + max_abs(AI.s12 - A.s12) + max_abs(AI.s21 - A.s21) +
            max_abs(AI.s22 - A.s22) < 1e-14);
    const auto L = star_compose(star_compose(A, B), C);
    const auto R = star_compose(A, star_compose(B, C));
    CHECK(max_abs(L.s11 - R.s11) < 1e-9);
    CHECK(max_abs(L.s12 - R.s12) < 1e-9);
    CHECK(max_abs(L.s21 - R.s21) < 1e-9);
    CHECK(max_abs(L.s22 - R.s22) < 1e-9);
  }
}

TEST_CASE("split slab equals the whole slab")
{
  const auto mats = dielectrics();
  const TruncationOrder ord{2, 2};
  const UnitCell cell{400e-9, 400e-9};
  const TransverseWavevector kt(1.3e6, -0.4e6, cell);
  const double xi = 2.4e14;
  for (const LayerSpec& proto : {LayerSpec{0.0, "four", {}},
                                 LayerSpec{0.0, "vacuum", {{"silicon_pdoped", 104.4e-9, 0.0, 191.2e-9, 400e-9}}}}) {
    LayerSpec whole = proto, a = proto, b = proto;
    whole.thickness = 300e-9;
    a.thickness = 110e-9;
    b.thickness = 190e-9;
    const LayerStack one{cell, "vacuum", {whole}, "gold_drude"};
    const LayerStack two{cell, "vacuum", {a, b}, "gold_drude"};
    const auto R1 = stack_reflection(one, mats, kt, xi, ord);
    const auto R2 = stack_reflection(two, mats, kt, xi, ord);
    CHECK(max_abs(R1 - R2) < 1e-10);
  }
}

TEST_CASE("unmodulated stack does not diffract")
{
  const auto mats = dielectrics();
  const TruncationOrder ord{2, 2};
  const UnitCell cell{400e-9, 400e-9};
  const LayerStack s{cell, "vacuum", {{50e-9, "two", {}}, {80e-9, "four", {}}}, "gold_drude"};
  const auto R = stack_reflection(s, mats, TransverseWavevector(1e6, 2e6, cell), 1e15, ord);
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    for (Eigen::Index j = 0; j < R.cols(); ++j)
      if (i / 2 != j / 2)
        CHECK(std::abs(R(i, j)) < 1e-12);
}

TEST_CASE("thick layers stay finite where the transfer-matrix product overflows")
{
  const auto mats = dielectrics();
  const TruncationOrder ord{1, 1};
  const UnitCell cell{400e-9, 400e-9};
  const TransverseWavevector kt(1e6, 0.0, cell);
  const double xi = 1e15;
  const LayerStack s{cell, "vacuum",
                     {{1.0, "vacuum", {{"four", 100e-9, 0.0, 200e-9, 400e-9}}}}, "gold_drude"};
  const auto R = stack_reflection(s, mats, kt, xi, ord);
  CHECK(R.allFinite());
  CHECK(max_abs(R) < 1.0 + 1e-9);
  // Growing exponentials of the transfer route: exp(q h) with h = 1 m.
  const StackModel model(s, mats, xi, ord);
  const auto b = model.medium_basis(1, kt, all_channels(ord));
  const double growth = std::exp(b.decay().real().minCoeff() * 1.0);
  CHECK_FALSE(std::isfinite(growth));
}

TEST_CASE("reflection at imaginary frequency is real, passive and mirror symmetric")
{
  const auto setup = testing::sample_b();
  const TruncationOrder ord{3, 3};
  const double L = setup.lower.cell.Lx;
  const TransverseWavevector kt(0.0, 0.3 * constants::pi / L, setup.lower.cell);
  const auto R = stack_reflection(setup.lower, setup.materials, kt, 2.46779e14, ord);
  CHECK(R.imag().norm() < 1e-10 * R.norm());
  Eigen::ComplexEigenSolver<MatrixXcd> es(R);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);

  // x -> -x maps channel (n, m) to (-n, m), flips ê_s and keeps ê_p.
  MatrixXcd Pi = MatrixXcd::Zero(R.rows(), R.cols());
  for (int c = 0; c < ord.channel_count(); ++c) {
    const int d = ord.channel_index(-ord.n_of(c), ord.m_of(c));
    Pi(2 * d, 2 * c) = -1.0;
    Pi(2 * d + 1, 2 * c + 1) = 1.0;
  }
  CHECK(max_abs(Pi * R - R * Pi) < 1e-9 * max_abs(R));
}

TEST_CASE("network view is a block permutation")
{
  std::mt19937_64 rng(5);
  const auto S = random_passive(rng, 3);
  const auto v = network_view(S);
  CHECK(max_abs(v.R_left - S.s21) == 0.0);
  CHECK(max_abs(v.T_right - S.s22) == 0.0);
  CHECK(max_abs(v.T_left - S.s11) == 0.0);
  CHECK(max_abs(v.R_right - S.s12) == 0.0);
}

TEST_CASE("mismatched bases are rejected")
{
  const UnitCell cell{400e-9, 400e-9};
  const TransverseWavevector kt(0.0, 0.0, cell);
  const auto a = rayleigh_basis(1.0, kt, 1e14, TruncationOrder{0, 0});
  const auto b = rayleigh_basis(1.0, kt, 1e14, TruncationOrder{1, 0});
  const auto c = rayleigh_basis(1.0, kt, 2e14, TruncationOrder{0, 0});
  CHECK_THROWS_AS(interface_transfer(a, b), Error);
  CHECK_THROWS_AS(interface_transfer(a, c), Error);
}

} // TEST_SUITE
