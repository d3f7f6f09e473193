#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "modcas/error.hpp"
#include "modcas/geometry.hpp"

using namespace modcas;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

MaterialTable two_dielectrics()
{
  MaterialTable t;
  t.add({DielectricModel::constant(4.0), {}, "a"});
  t.add({DielectricModel::constant(2.25), {}, "b"});
  return t;
}

double value_at(const LayerSpec& layer, double x, double y, double va, double vb)
{
  for (const auto& q : layer.inclusions)
    if (x >= q.x0 && x <= q.x0 + q.wx && y >= q.y0 && y <= q.y0 + q.wy)
      return q.material == "a" ? va : vb;
  return layer.background == "a" ? va : vb;
}

std::vector<double> breakpoints(const LayerSpec& layer, double L, bool along_x)
{
  std::vector<double> b = {0.0, L};
  for (const auto& q : layer.inclusions) {
    b.push_back(along_x ? q.x0 : q.y0);
    b.push_back(along_x ? q.x0 + q.wx : q.y0 + q.wy);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double u, double v) { return std::abs(u - v) < 1e-18; }),
          b.end());
  return b;
}

// Tensor Gauss–Legendre over the pieces between material edges, phases
// taken about the cell centre. Each piece gets 30×30 points (>= 4096 total).
cd quadrature_coefficient(const LayerSpec& layer, const UnitCell& cell, int n, int m, double va,
                          double vb)
{
  using GL = boost::math::quadrature::gauss<double, 30>;
  const auto bx = breakpoints(layer, cell.Lx, true);
  const auto by = breakpoints(layer, cell.Ly, false);
  cd total = 0.0;
  for (std::size_t i = 0; i + 1 < bx.size(); ++i)
    for (std::size_t j = 0; j + 1 < by.size(); ++j) {
      const double xm = 0.5 * (bx[i] + bx[i + 1]), ym = 0.5 * (by[j] + by[j + 1]);
      const double v = value_at(layer, xm, ym, va, vb);
      auto fx = [&](double x) {
        return std::cos(2 * pi * n * (x - 0.5 * cell.Lx) / cell.Lx);
      };
      auto gx = [&](double x) {
        return -std::sin(2 * pi * n * (x - 0.5 * cell.Lx) / cell.Lx);
      };
      auto fy = [&](double y) {
        return std::cos(2 * pi * m * (y - 0.5 * cell.Ly) / cell.Ly);
      };
      auto gy = [&](double y) {
        return -std::sin(2 * pi * m * (y - 0.5 * cell.Ly) / cell.Ly);
      };
      const cd ix(GL::integrate(fx, bx[i], bx[i + 1]), GL::integrate(gx, bx[i], bx[i + 1]));
      const cd iy(GL::integrate(fy, by[j], by[j + 1]), GL::integrate(gy, by[j], by[j + 1]));
      total += v * ix * iy;
    }
  return total / (cell.Lx * cell.Ly);
}

LayerSpec strip(double L, double f)
{
  return LayerSpec{100e-9, "b", {{"a", 0.5 * L * (1 - f), 0.0, f * L, L}}};
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("lamellar coefficients: closed form and quadrature oracle")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  const double f = 0.478;
  const auto layer = strip(cell.Lx, f);
  for (int n = -6; n <= 6; ++n) {
    const cd c = fourier_coefficient(layer, cell, mats, 1e14, n, 0, Quantity::eps);
    const cd oracle = quadrature_coefficient(layer, cell, n, 0, 4.0, 2.25);
    CHECK(std::abs(c - oracle) < 1e-10);
    if (n != 0) {
      const double closed = (4.0 - 2.25) * std::sin(pi * n * f) / (pi * n);
      CHECK(std::abs(c - closed) < 1e-12);
    }
    for (int m : {-2, 1, 3})
      CHECK(std::abs(fourier_coefficient(layer, cell, mats, 1e14, n, m, Quantity::eps)) < 1e-14);
  }
}

TEST_CASE("centred pillar: separable closed form")
{
  const UnitCell cell{500e-9, 300e-9};
  const auto mats = two_dielectrics();
  const double fx = 0.3, fy = 0.6;
  LayerSpec layer{50e-9, "b",
                  {{"a", 0.5 * cell.Lx * (1 - fx), 0.5 * cell.Ly * (1 - fy), fx * cell.Lx, fy * cell.Ly}}};
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= 4; ++m) {
      const cd c = fourier_coefficient(layer, cell, mats, 1e14, n, m, Quantity::eps);
      const double closed = (4.0 - 2.25) * std::sin(pi * n * fx) / (pi * n) * std::sin(pi * m * fy) / (pi * m);
      CHECK(std::abs(c - closed) < 1e-12);
      CHECK(std::abs(c - quadrature_coefficient(layer, cell, n, m, 4.0, 2.25)) < 1e-10);
    }
}

TEST_CASE("off-centre inclusions against the quadrature oracle")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  LayerSpec layer{50e-9, "b", {{"a", 10e-9, 40e-9, 120e-9, 90e-9}, {"a", 200e-9, 250e-9, 150e-9, 100e-9}}};
  for (int n = -3; n <= 3; ++n)
    for (int m = -3; m <= 3; ++m) {
      const cd c = fourier_coefficient(layer, cell, mats, 1e14, n, m, Quantity::eps);
      CHECK(std::abs(c - quadrature_coefficient(layer, cell, n, m, 4.0, 2.25)) < 1e-10);
      const cd chi = fourier_coefficient(layer, cell, mats, 1e14, n, m, Quantity::chi);
      CHECK(std::abs(chi - quadrature_coefficient(layer, cell, n, m, 0.25, 1 / 2.25)) < 1e-10);
    }
}

TEST_CASE("homogeneous layer")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  const LayerSpec layer{50e-9, "a", {}};
  CHECK(std::abs(fourier_coefficient(layer, cell, mats, 1e14, 1, 0, Quantity::eps)) == 0.0);
  const TruncationOrder ord{2, 2};
  const auto blocks = fourier_blocks(layer, cell, mats, 1e14, ord);
  const auto I = Eigen::MatrixXcd::Identity(ord.channel_count(), ord.channel_count());
  CHECK((blocks.eps - 4.0 * I).norm() < 1e-14);
  CHECK((blocks.eps * blocks.chi - I).norm() < 1e-14);
}

TEST_CASE("block-Toeplitz structure")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  const auto layer = strip(cell.Lx, 0.3);
  const TruncationOrder ord{3, 2};
  const auto blocks = fourier_blocks(layer, cell, mats, 1e14, ord);
  for (int c = 0; c < ord.channel_count(); ++c)
    for (int d = 0; d < ord.channel_count(); ++d) {
      const int dn = ord.n_of(c) - ord.n_of(d), dm = ord.m_of(c) - ord.m_of(d);
      const cd expected = fourier_coefficient(layer, cell, mats, 1e14, dn, dm, Quantity::eps);
      CHECK(std::abs(blocks.eps(c, d) - expected) < 1e-15);
    }
}

TEST_CASE("chi block equals the eps block of the reciprocal cell")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  MaterialTable inv;
  inv.add({DielectricModel::constant(1 / 4.0), {}, "a"});
  inv.add({DielectricModel::constant(1 / 2.25), {}, "b"});
  LayerSpec layer{50e-9, "b", {{"a", 100e-9, 50e-9, 150e-9, 200e-9}}};
  const TruncationOrder ord{2, 2};
  const auto direct = fourier_blocks(layer, cell, mats, 1e14, ord);
  const auto recip = fourier_blocks(layer, cell, inv, 1e14, ord);
  CHECK((direct.chi - recip.eps).norm() < 1e-14);
}

TEST_CASE("centred cells give real, even coefficients")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  LayerSpec layer{50e-9, "b", {{"a", 100e-9, 100e-9, 200e-9, 200e-9}}};
  for (int n = -3; n <= 3; ++n)
    for (int m = -3; m <= 3; ++m) {
      const cd c = fourier_coefficient(layer, cell, mats, 1e14, n, m, Quantity::eps);
      CHECK(std::abs(c.imag()) < 1e-15);
      CHECK(std::abs(c - fourier_coefficient(layer, cell, mats, 1e14, -n, -m, Quantity::eps)) < 1e-15);
    }
}

TEST_CASE("translation changes only phases")
{
  const UnitCell cell{400e-9, 400e-9};
  const auto mats = two_dielectrics();
  LayerSpec a{50e-9, "b", {{"a", 100e-9, 100e-9, 120e-9, 60e-9}}};
  LayerSpec b = a;
  b.inclusions[0].x0 += 73e-9;
  b.inclusions[0].y0 -= 41e-9;
  CHECK(fourier_coefficient(a, cell, mats, 1e14, 0, 0, Quantity::eps) ==
        fourier_coefficient(b, cell, mats, 1e14, 0, 0, Quantity::eps));
  for (int n = -2; n <= 2; ++n)
    for (int m = -2; m <= 2; ++m)
      CHECK(std::abs(fourier_coefficient(a, cell, mats, 1e14, n, m, Quantity::eps)) ==
            doctest::Approx(std::abs(fourier_coefficient(b, cell, mats, 1e14, n, m, Quantity::eps))).epsilon(1e-12));
}

TEST_CASE("channel index ordering")
{
  const TruncationOrder ord{2, 1};
  CHECK(ord.channel_count() == 15);
  CHECK(ord.dim() == 30);
  int c = 0;
  for (int n = -2; n <= 2; ++n)
    for (int m = -1; m <= 1; ++m) {
      CHECK(ord.channel_index(n, m) == c);
      CHECK(ord.n_of(c) == n);
      CHECK(ord.m_of(c) == m);
      ++c;
    }
}

TEST_CASE("stack validation lists every problem")
{
  const auto mats = two_dielectrics();
  LayerStack s{{400e-9, 400e-9}, "b", {}, "a"};
  CHECK_NOTHROW(validate(s, mats));
  s.layers.push_back({-1.0, "b", {{"a", 0.0, 0.0, 300e-9, 300e-9}, {"a", 200e-9, 200e-9, 300e-9, 100e-9}}});
  try {
    validate(s, mats);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    const std::string w = e.what();
    CHECK(w.find("thickness") != std::string::npos);
    CHECK(w.find("leaves the unit cell") != std::string::npos);
    CHECK(w.find("overlaps") != std::string::npos);
  }
  LayerStack u{{400e-9, 400e-9}, "b", {}, "zinc"};
  try {
    validate(u, mats);
    FAIL("expected UnknownMaterial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownMaterial);
    CHECK(std::string(e.what()).find("zinc") != std::string::npos);
  }
}

TEST_CASE("mirrored stack")
{
  LayerStack s{{1, 1}, "top", {{1.0, "x", {}}, {2.0, "y", {}}}, "bottom"};
  const auto m = mirrored(s);
  CHECK(m.incident == "bottom");
  CHECK(m.exit == "top");
  REQUIRE(m.layers.size() == 2);
  CHECK(m.layers[0].background == "y");
  CHECK(m.layers[1].background == "x");
}

TEST_CASE("coupled components")
{
  const TruncationOrder ord{2, 2};
  LayerStack plane{{400e-9, 400e-9}, "b", {}, "a"};
  const LayerStack* p1[] = {&plane};
  CHECK(coupled_components(p1, ord).size() == static_cast<std::size_t>(ord.channel_count()));

  LayerStack grating{{400e-9, 400e-9}, "b", {strip(400e-9, 0.5)}, "a"};
  const LayerStack* p2[] = {&grating, &plane};
  const auto groups = coupled_components(p2, ord);
  CHECK(groups.size() == 5u);
  for (const auto& g : groups) {
    CHECK(g.size() == 5u);
    for (int c : g)
      CHECK(ord.m_of(c) == ord.m_of(g.front()));
  }
}

TEST_CASE("cell symmetry of a centred strip")
{
  LayerStack grating{{400e-9, 400e-9}, "b", {strip(400e-9, 0.5)}, "a"};
  const LayerStack* p[] = {&grating};
  const auto s = cell_symmetry(p);
  CHECK(s.mirror_x);
  CHECK(s.mirror_y);
  CHECK_FALSE(s.swap_xy);
}

TEST_CASE("common period and replication")
{
  const auto cp = common_period({400e-9, 400e-9}, {800e-9, 400e-9});
  CHECK(cp.cell.Lx == doctest::Approx(800e-9));
  CHECK(cp.cell.Ly == doctest::Approx(400e-9));
  CHECK(cp.repeat_x[0] == 2);
  CHECK(cp.repeat_x[1] == 1);
  CHECK_THROWS_AS(common_period({400e-9, 400e-9}, {400e-9 * std::numbers::sqrt2, 400e-9}), Error);

  const auto mats = two_dielectrics();
  LayerStack s{{400e-9, 400e-9}, "b", {LayerSpec{50e-9, "b", {{"a", 100e-9, 100e-9, 100e-9, 100e-9}}}}, "a"};
  const auto r = replicate(s, 2, 1);
  CHECK(r.layers[0].inclusions.size() == 2u);
  // Even supercell orders are the original orders; the centre moves by L/2,
  // which costs a sign (-1)^n.
  for (int n = -2; n <= 2; ++n) {
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    CHECK(std::abs(fourier_coefficient(r.layers[0], r.cell, mats, 1e14, 2 * n, 0, Quantity::eps) -
                   sign * fourier_coefficient(s.layers[0], s.cell, mats, 1e14, n, 0, Quantity::eps)) < 1e-14);
    CHECK(std::abs(fourier_coefficient(r.layers[0], r.cell, mats, 1e14, 2 * n + 1, 0, Quantity::eps)) < 1e-14);
  }
}

} // TEST_SUITE
