#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/geometries.hpp"
#include "modcas/error.hpp"
#include "modcas/zerofreq.hpp"

using namespace modcas;
using Eigen::MatrixXcd;

namespace {

constexpr double xi1 = 2.4677902551530606e14; // first Matsubara frequency at 300 K

MaterialTable dielectrics()
{
  MaterialTable t = MaterialTable::with_presets();
  t.add({DielectricModel::constant(4.0), {}, "four"});
  t.add({DielectricModel::constant(2.0), {}, "two"});
  return t;
}

} // namespace

TEST_SUITE("zerofreq") {

TEST_CASE("Drude half-space reflects every TM channel perfectly")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{2, 2};
  const TransverseWavevector kt(1e6, -3e6, cell);
  const LayerStack s{cell, "vacuum", {}, "gold_drude"};
  const LayerStack* p[] = {&s};
  const auto z = zero_freq_reflection(s, mats, kt, ord, default_sigma_floor(p, mats));
  CHECK(z.channels.size() == static_cast<std::size_t>(ord.channel_count()));
  const MatrixXcd I = MatrixXcd::Identity(z.R.rows(), z.R.cols());
  CHECK((z.R - I).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the K = 0 channel carries no TM mode")
{
  const UnitCell cell{400e-9, 400e-9};
  const TruncationOrder ord{1, 1};
  const auto all = all_channels(ord);
  const auto tm = tm_channels(TransverseWavevector(0.0, 0.0, cell), ord, all);
  CHECK(tm.size() == all.size() - 1);
  CHECK(std::find(tm.begin(), tm.end(), ord.channel_index(0, 0)) == tm.end());
  CHECK(tm_channels(TransverseWavevector(1e5, 0.0, cell), ord, all).size() == all.size());
}

TEST_CASE("dielectric slab: direct and extrapolated routes against the static Airy formula")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{1, 1};
  const TransverseWavevector kt(2e6, 1e6, cell);
  const double h = 120e-9;
  const LayerStack s{cell, "vacuum", {{h, "four", {}}}, "two"};
  const LayerStack* p[] = {&s};

  const auto direct = zero_freq_reflection(s, mats, kt, ord, default_sigma_floor(p, mats));
  const std::vector<double> samples = {xi1 / 1e2, xi1 / 1e3, xi1 / 1e4};
  const auto ex = small_xi_extrapolation(s, mats, kt, ord, samples);

  for (int c = 0; c < ord.channel_count(); ++c) {
    const double K = std::hypot(kt.alpha(ord.n_of(c)), kt.beta(ord.m_of(c)));
    const double r01 = (4.0 - 1.0) / (4.0 + 1.0), r12 = (2.0 - 4.0) / (2.0 + 4.0);
    const double e = std::exp(-2.0 * K * h);
    const double rp = (r01 + r12 * e) / (1.0 + r01 * r12 * e);
    CHECK(std::abs(direct.R(c, c) - rp) < 1e-12);
    CHECK(std::abs(ex.R(c, c) - rp) < 1e-5);
  }
}

TEST_CASE("gold plane: small-frequency limit gives rp = 1")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{0, 0};
  const TransverseWavevector kt(3e6, 0.0, cell);
  const LayerStack s{cell, "vacuum", {}, "gold_drude"};
  const auto samples = extrapolation_samples(s, mats, kt, ord, all_channels(ord), xi1);
  REQUIRE(samples.size() == 3u);
  CHECK(samples[0] > samples[1]);
  CHECK(samples[1] > samples[2]);
  const auto ex = small_xi_extrapolation(s, mats, kt, ord, samples);
  REQUIRE(ex.R.rows() == 1);
  CHECK(std::abs(ex.R(0, 0) - 1.0) < 1e-6);
}

TEST_CASE("extrapolation in sqrt(xi) is exact for quadratics in sqrt(xi)")
{
  const std::vector<double> xs = {1e6, 1e4, 1e2};
  std::vector<MatrixXcd> vals;
  for (double x : xs) {
    MatrixXcd m(1, 1);
    m(0, 0) = 0.7 - 3e-4 * std::sqrt(x) + 2e-8 * x;
    vals.push_back(m);
  }
  const auto e = extrapolate_to_zero(xs, vals);
  CHECK(std::abs(e.R(0, 0) - 0.7) < 1e-14);
  CHECK(e.residual > 0.0);

  const std::vector<double> bad = {1e2, 1e4, 1e6};
  CHECK_THROWS_AS(extrapolate_to_zero(bad, vals), Error);
}

TEST_CASE("unstable extrapolation is reported")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const TruncationOrder ord{0, 0};
  const TransverseWavevector kt(3e6, 0.0, cell);
  const LayerStack s{cell, "vacuum", {}, "gold_drude"};
  // far above the small-frequency regime of gold
  const std::vector<double> samples = {1e16, 3e15, 1e15};
  try {
    (void)small_xi_extrapolation(s, mats, kt, ord, samples);
    FAIL("expected ExtrapolationUnstable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExtrapolationUnstable);
  }
}

TEST_CASE("floor default")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = dielectrics();
  const LayerStack gold{cell, "vacuum", {}, "gold_drude"};
  const LayerStack glass{cell, "vacuum", {}, "four"};
  const LayerStack* both[] = {&gold, &glass};
  const LayerStack* none[] = {&glass};
  CHECK(default_sigma_floor(both, mats) ==
        doctest::Approx(1e-18 * dc_conductivity(mats.at("gold_drude").permittivity)));
  CHECK(default_sigma_floor(none, mats) == 1e-2);
}

TEST_CASE("zero-frequency weight: conductivity plus floor times static permittivity")
{
  const auto mats = dielectrics();
  const double floor = 1e3;
  CHECK(zero_frequency_weight(mats.at("four"), floor) == doctest::Approx(4e3));
  const auto& d = mats.at("silicon_pdoped");
  CHECK(zero_frequency_weight(d, floor) ==
        doctest::Approx(dc_conductivity(d.permittivity) + floor * 11.87));
}

TEST_CASE("grating: direct route is insensitive to the floor")
{
  const auto setup = testing::sample_b();
  const TruncationOrder ord{3, 3};
  const TransverseWavevector kt(1.1e6, 2.2e6, setup.lower.cell);
  const LayerStack* p[] = {&setup.lower, &setup.upper};
  const double floor = default_sigma_floor(p, setup.materials);
  const auto a = zero_freq_reflection(setup.lower, setup.materials, kt, ord, floor, Side::incident, false);
  const auto b = zero_freq_reflection(setup.lower, setup.materials, kt, ord, floor / 10, Side::incident, false);
  const double scale = a.R.cwiseAbs().maxCoeff();
  CHECK((a.R - b.R).cwiseAbs().maxCoeff() < 1e-4 * scale);
}

} // TEST_SUITE
