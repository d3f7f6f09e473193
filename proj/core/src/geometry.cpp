#include "modcas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

namespace {

constexpr double kRelTol = 1e-12;

bool full_span(double w, double L) { return w >= L * (1.0 - kRelTol); }

// (1/L) ∫_{x0}^{x0+w} exp(-2πi n (x - L/2)/L) dx
std::complex<double> strip_factor(int n, double x0, double w, double L)
{
  if (full_span(w, L))
    return n == 0 ? 1.0 : 0.0;
  const double f = w / L;
  if (n == 0)
    return f;
  double centre = x0 + 0.5 * w - 0.5 * L;
  if (std::abs(centre) < kRelTol * L)
    centre = 0.0;
  const double arg = constants::pi * n * f;
  const double mag = std::sin(arg) / (constants::pi * n);
  if (centre == 0.0)
    return mag;
  return mag * std::polar(1.0, -2.0 * constants::pi * n * centre / L);
}

bool same_inclusion(const Inclusion& a, const Inclusion& b, const UnitCell& cell)
{
  const double tx = 1e-9 * cell.Lx, ty = 1e-9 * cell.Ly;
  return a.material == b.material && std::abs(a.x0 - b.x0) < tx && std::abs(a.wx - b.wx) < tx &&
         std::abs(a.y0 - b.y0) < ty && std::abs(a.wy - b.wy) < ty;
}

bool contains_image(const LayerSpec& layer, const Inclusion& img, const UnitCell& cell)
{
  return std::any_of(layer.inclusions.begin(), layer.inclusions.end(),
                     [&](const Inclusion& q) { return same_inclusion(q, img, cell); });
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n))
  {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x)
  {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

} // namespace

bool LayerSpec::homogeneous() const
{
  return std::all_of(inclusions.begin(), inclusions.end(),
                     [this](const Inclusion& i) { return i.material == background; });
}

LayerStack mirrored(const LayerStack& stack)
{
  LayerStack out;
  out.cell = stack.cell;
  out.incident = stack.exit;
  out.exit = stack.incident;
  out.layers.assign(stack.layers.rbegin(), stack.layers.rend());
  return out;
}

void validate(const LayerStack& stack, const MaterialTable& materials)
{
  std::vector<std::string> problems;
  auto need = [&](std::string_view label, const std::string& where) {
    if (label.empty())
      problems.push_back(where + ": empty material label");
    else if (!materials.contains(label))
      problems.push_back(where + ": unknown material '" + std::string(label) + "'");
  };
  const auto& c = stack.cell;
  if (!(c.Lx > 0.0) || !(c.Ly > 0.0) || !std::isfinite(c.Lx) || !std::isfinite(c.Ly))
    problems.push_back("unit cell periods must be positive and finite");
  need(stack.incident, "incident half-space");
  need(stack.exit, "exit half-space");
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const auto& L = stack.layers[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (!(L.thickness >= 0.0) || !std::isfinite(L.thickness))
      problems.push_back(where + ": thickness must be finite and >= 0");
    need(L.background, where + " background");
    double area = 0.0;
    for (std::size_t k = 0; k < L.inclusions.size(); ++k) {
      const auto& q = L.inclusions[k];
      const std::string w = where + " inclusion " + std::to_string(k + 1);
      need(q.material, w);
      const double tx = kRelTol * c.Lx * 10, ty = kRelTol * c.Ly * 10;
      if (!(q.wx > 0.0) || !(q.wy > 0.0))
        problems.push_back(w + ": widths must be positive");
      if (q.x0 < -tx || q.x0 + q.wx > c.Lx + tx || q.y0 < -ty || q.y0 + q.wy > c.Ly + ty)
        problems.push_back(w + ": rectangle leaves the unit cell");
      area += q.wx * q.wy;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& o = L.inclusions[j];
        const double ox = std::min(q.x0 + q.wx, o.x0 + o.wx) - std::max(q.x0, o.x0);
        const double oy = std::min(q.y0 + q.wy, o.y0 + o.wy) - std::max(q.y0, o.y0);
        if (ox > tx && oy > ty)
          problems.push_back(w + ": overlaps inclusion " + std::to_string(j + 1));
      }
    }
    if (area > c.Lx * c.Ly * (1.0 + 1e-9))
      problems.push_back(where + ": inclusions cover more than the cell");
  }
  if (problems.empty())
    return;
  bool only_unknown = std::all_of(problems.begin(), problems.end(), [](const std::string& p) {
    return p.find("unknown material") != std::string::npos;
  });
  std::ostringstream os;
  os << "invalid layer stack:";
  for (const auto& p : problems)
    os << "\n  - " << p;
  throw Error(only_unknown ? ErrorCode::UnknownMaterial : ErrorCode::ValidationError, os.str());
}

ChannelSet all_channels(const TruncationOrder& ord)
{
  ChannelSet s(static_cast<std::size_t>(ord.channel_count()));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

CoefficientGrid::CoefficientGrid(const TruncationOrder& ord)
  : N_(ord.N), M_(ord.M),
    data_(static_cast<std::size_t>((4 * ord.N + 1) * (4 * ord.M + 1)), 0.0)
{
}

Eigen::MatrixXcd CoefficientGrid::toeplitz(const TruncationOrder& ord,
                                           std::span<const int> channels) const
{
  if (ord.N != N_ || ord.M != M_)
    throw Error(ErrorCode::DimensionMismatch, "coefficient grid built for another truncation");
  const auto P = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXcd T(P, P);
  for (Eigen::Index i = 0; i < P; ++i) {
    const int n = ord.n_of(channels[static_cast<std::size_t>(i)]);
    const int m = ord.m_of(channels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < P; ++j) {
      const int c2 = channels[static_cast<std::size_t>(j)];
      T(i, j) = (*this)(n - ord.n_of(c2), m - ord.m_of(c2));
    }
  }
  return T;
}

bool CoefficientGrid::is_real(double tol) const
{
  return std::all_of(data_.begin(), data_.end(),
                     [tol](const std::complex<double>& z) { return std::abs(z.imag()) <= tol; });
}

CoefficientGrid coefficient_grid(const LayerSpec& layer, const UnitCell& cell,
                                 const TruncationOrder& ord, const MaterialValue& value)
{
  CoefficientGrid g(ord);
  const double vb = value(layer.background);
  g.at(0, 0) = vb;
  std::vector<std::complex<double>> fx(static_cast<std::size_t>(4 * ord.N + 1));
  std::vector<std::complex<double>> fy(static_cast<std::size_t>(4 * ord.M + 1));
  for (const auto& q : layer.inclusions) {
    if (q.material == layer.background)
      continue;
    const double dv = value(q.material) - vb;
    if (dv == 0.0)
      continue;
    for (int n = -2 * ord.N; n <= 2 * ord.N; ++n)
      fx[static_cast<std::size_t>(n + 2 * ord.N)] = strip_factor(n, q.x0, q.wx, cell.Lx);
    for (int m = -2 * ord.M; m <= 2 * ord.M; ++m)
      fy[static_cast<std::size_t>(m + 2 * ord.M)] = strip_factor(m, q.y0, q.wy, cell.Ly);
    for (int n = -2 * ord.N; n <= 2 * ord.N; ++n)
      for (int m = -2 * ord.M; m <= 2 * ord.M; ++m)
        g.at(n, m) += dv * fx[static_cast<std::size_t>(n + 2 * ord.N)] *
                      fy[static_cast<std::size_t>(m + 2 * ord.M)];
  }
  return g;
}

namespace {

MaterialValue quantity_value(const MaterialTable& materials, double xi, Quantity which)
{
  return [&materials, xi, which](std::string_view label) {
    const auto& mat = materials.at(label);
    switch (which) {
    case Quantity::eps: return permittivity_at(mat.permittivity, xi);
    case Quantity::mu: return permeability_at(mat.permeability, xi);
    case Quantity::chi: return 1.0 / permittivity_at(mat.permittivity, xi);
    case Quantity::zeta: return 1.0 / permeability_at(mat.permeability, xi);
    }
    return 0.0;
  };
}

} // namespace

std::complex<double> fourier_coefficient(const LayerSpec& layer, const UnitCell& cell,
                                         const MaterialTable& materials, double xi, int n, int m,
                                         Quantity which)
{
  const auto value = quantity_value(materials, xi, which);
  std::complex<double> sum = 0.0;
  const double vb = value(layer.background);
  if (n == 0 && m == 0)
    sum = vb;
  for (const auto& q : layer.inclusions) {
    if (q.material == layer.background)
      continue;
    sum += (value(q.material) - vb) * strip_factor(n, q.x0, q.wx, cell.Lx) *
           strip_factor(m, q.y0, q.wy, cell.Ly);
  }
  return sum;
}

FourierBlocks fourier_blocks(const LayerSpec& layer, const UnitCell& cell,
                             const MaterialTable& materials, double xi,
                             const TruncationOrder& ord)
{
  const auto ch = all_channels(ord);
  return fourier_blocks(layer, cell, materials, xi, ord, ch);
}

FourierBlocks fourier_blocks(const LayerSpec& layer, const UnitCell& cell,
                             const MaterialTable& materials, double xi,
                             const TruncationOrder& ord, std::span<const int> channels)
{
  FourierBlocks b;
  b.eps = coefficient_grid(layer, cell, ord, quantity_value(materials, xi, Quantity::eps))
            .toeplitz(ord, channels);
  b.mu = coefficient_grid(layer, cell, ord, quantity_value(materials, xi, Quantity::mu))
           .toeplitz(ord, channels);
  b.chi = coefficient_grid(layer, cell, ord, quantity_value(materials, xi, Quantity::chi))
            .toeplitz(ord, channels);
  b.zeta = coefficient_grid(layer, cell, ord, quantity_value(materials, xi, Quantity::zeta))
             .toeplitz(ord, channels);
  return b;
}

std::vector<ChannelSet> coupled_components(std::span<const LayerStack* const> stacks,
                                           const TruncationOrder& ord)
{
  // Structural support of each layer: an inclusion couples every dn unless
  // it spans the full period in x (then only dn = 0), and likewise in y.
  struct Pattern {
    bool any_dn, any_dm;
  };
  std::vector<Pattern> patterns;
  for (const auto* s : stacks)
    for (const auto& L : s->layers)
      for (const auto& q : L.inclusions)
        if (q.material != L.background)
          patterns.push_back({!full_span(q.wx, s->cell.Lx), !full_span(q.wy, s->cell.Ly)});

  const int P = ord.channel_count();
  DisjointSets sets(P);
  for (const auto& p : patterns) {
    for (int a = 0; a < P; ++a)
      for (int b = a + 1; b < P; ++b) {
        const bool dn_ok = p.any_dn || ord.n_of(a) == ord.n_of(b);
        const bool dm_ok = p.any_dm || ord.m_of(a) == ord.m_of(b);
        if (dn_ok && dm_ok)
          sets.unite(a, b);
      }
  }
  std::vector<ChannelSet> groups;
  std::vector<int> slot(static_cast<std::size_t>(P), -1);
  for (int c = 0; c < P; ++c) {
    const int r = sets.find(c);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(c);
  }
  return groups;
}

CellSymmetry cell_symmetry(std::span<const LayerStack* const> stacks)
{
  CellSymmetry sym{true, true, true};
  for (const auto* s : stacks) {
    const auto& c = s->cell;
    if (std::abs(c.Lx - c.Ly) > 1e-12 * c.Lx)
      sym.swap_xy = false;
    for (const auto& L : s->layers) {
      for (const auto& q : L.inclusions) {
        if (q.material == L.background)
          continue;
        Inclusion mx = q;
        mx.x0 = c.Lx - q.x0 - q.wx;
        Inclusion my = q;
        my.y0 = c.Ly - q.y0 - q.wy;
        Inclusion t = q;
        std::swap(t.x0, t.y0);
        std::swap(t.wx, t.wy);
        sym.mirror_x = sym.mirror_x && contains_image(L, mx, c);
        sym.mirror_y = sym.mirror_y && contains_image(L, my, c);
        sym.swap_xy = sym.swap_xy && contains_image(L, t, c);
      }
    }
  }
  return sym;
}

namespace {

void repeat_counts(double a, double b, int max_repeat, int& ra, int& rb)
{
  for (int q = 1; q <= max_repeat; ++q) {
    const double p = q * b / a;
    const double pr = std::round(p);
    if (pr >= 1.0 && pr <= max_repeat && std::abs(p - pr) < 1e-9 * p) {
      ra = static_cast<int>(pr);
      rb = q;
      return;
    }
  }
  throw Error(ErrorCode::ValidationError, "periods are not commensurate within the repeat limit");
}

} // namespace

CommonPeriod common_period(const UnitCell& a, const UnitCell& b, int max_repeat)
{
  CommonPeriod out;
  repeat_counts(a.Lx, b.Lx, max_repeat, out.repeat_x[0], out.repeat_x[1]);
  repeat_counts(a.Ly, b.Ly, max_repeat, out.repeat_y[0], out.repeat_y[1]);
  out.cell = {a.Lx * out.repeat_x[0], a.Ly * out.repeat_y[0]};
  return out;
}

LayerStack replicate(const LayerStack& stack, int rx, int ry)
{
  LayerStack out = stack;
  out.cell = {stack.cell.Lx * rx, stack.cell.Ly * ry};
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    auto& dst = out.layers[i].inclusions;
    dst.clear();
    for (const auto& q : stack.layers[i].inclusions)
      for (int ix = 0; ix < rx; ++ix)
        for (int iy = 0; iy < ry; ++iy) {
          Inclusion r = q;
          r.x0 += ix * stack.cell.Lx;
          r.y0 += iy * stack.cell.Ly;
          // Full-span strips stay a single strip.
          if (full_span(q.wx, stack.cell.Lx)) {
            if (ix > 0)
              continue;
            r.x0 = 0.0;
            r.wx = out.cell.Lx;
          }
          if (full_span(q.wy, stack.cell.Ly)) {
            if (iy > 0)
              continue;
            r.y0 = 0.0;
            r.wy = out.cell.Ly;
          }
          dst.push_back(r);
        }
  }
  return out;
}

} // namespace modcas
