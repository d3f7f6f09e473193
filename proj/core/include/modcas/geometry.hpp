#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modcas/materials.hpp"

namespace modcas {

struct UnitCell {
  double Lx = 0.0; // m
  double Ly = 0.0; // m
};

// Axis-aligned rectangle inside the cell, lower corner (x0, y0).
struct Inclusion {
  std::string material;
  double x0 = 0.0, y0 = 0.0;
  double wx = 0.0, wy = 0.0;
};

struct LayerSpec {
  double thickness = 0.0;
  std::string background;
  std::vector<Inclusion> inclusions;

  bool homogeneous() const;
};

// Medium 0 (incident, z > 0), layers 1..L going down, medium L+1 (exit).
struct LayerStack {
  UnitCell cell;
  std::string incident;
  std::vector<LayerSpec> layers;
  std::string exit;

  // Number of media including both half-spaces.
  std::size_t media() const { return layers.size() + 2; }
};

// The same body seen from the other side: layers reversed, half-spaces swapped.
LayerStack mirrored(const LayerStack& stack);

// Throws ValidationError listing every violated invariant, or UnknownMaterial.
void validate(const LayerStack& stack, const MaterialTable& materials);

struct TruncationOrder {
  int N = 5;
  int M = 5;

  int channel_count() const { return (2 * N + 1) * (2 * M + 1); }
  // Size of a reflection matrix: two polarizations per channel.
  int dim() const { return 2 * channel_count(); }
  int channel_index(int n, int m) const { return (n + N) * (2 * M + 1) + (m + M); }
  int n_of(int c) const { return c / (2 * M + 1) - N; }
  int m_of(int c) const { return c % (2 * M + 1) - M; }
};

// Subset of channel indices, ascending. Mode index inside a subset is
// 2*(position) + polarization with s = 0, p = 1.
using ChannelSet = std::vector<int>;

ChannelSet all_channels(const TruncationOrder& ord);

enum class Quantity { eps, mu, chi, zeta };

// Fourier coefficients of a piecewise-constant cell function for
// dn in [-2N, 2N], dm in [-2M, 2M], phases referenced to the cell centre.
class CoefficientGrid {
public:
  CoefficientGrid() = default;
  explicit CoefficientGrid(const TruncationOrder& ord);

  std::complex<double> operator()(int dn, int dm) const
  {
    return data_[static_cast<std::size_t>((dn + 2 * N_) * (4 * M_ + 1) + (dm + 2 * M_))];
  }
  std::complex<double>& at(int dn, int dm)
  {
    return data_[static_cast<std::size_t>((dn + 2 * N_) * (4 * M_ + 1) + (dm + 2 * M_))];
  }

  // Block-Toeplitz matrix [c, c'] = coefficient(n_c - n_c', m_c - m_c').
  Eigen::MatrixXcd toeplitz(const TruncationOrder& ord, std::span<const int> channels) const;

  bool is_real(double tol = 0.0) const;

private:
  int N_ = 0, M_ = 0;
  std::vector<std::complex<double>> data_;
};

using MaterialValue = std::function<double(std::string_view label)>;

CoefficientGrid coefficient_grid(const LayerSpec& layer, const UnitCell& cell,
                                 const TruncationOrder& ord, const MaterialValue& value);

// Single coefficient of ε, μ, 1/ε or 1/μ at (n, m).
std::complex<double> fourier_coefficient(const LayerSpec& layer, const UnitCell& cell,
                                         const MaterialTable& materials, double xi, int n, int m,
                                         Quantity which);

struct FourierBlocks {
  Eigen::MatrixXcd eps, mu, chi, zeta;
};

FourierBlocks fourier_blocks(const LayerSpec& layer, const UnitCell& cell,
                             const MaterialTable& materials, double xi,
                             const TruncationOrder& ord);
FourierBlocks fourier_blocks(const LayerSpec& layer, const UnitCell& cell,
                             const MaterialTable& materials, double xi,
                             const TruncationOrder& ord, std::span<const int> channels);

// Partition of the channels into groups that no layer couples to each other.
// Homogeneous stacks give one group per channel, x-gratings one per m.
std::vector<ChannelSet> coupled_components(std::span<const LayerStack* const> stacks,
                                           const TruncationOrder& ord);

// Mirror and diagonal symmetries shared by every layer of the given stacks.
struct CellSymmetry {
  bool mirror_x = false;
  bool mirror_y = false;
  bool swap_xy = false;
};
CellSymmetry cell_symmetry(std::span<const LayerStack* const> stacks);

// Smallest common supercell of two commensurate periods, as repetition
// counts along x and y for each stack. Throws ValidationError when the
// periods have no common multiple with counts <= max_repeat.
struct CommonPeriod {
  UnitCell cell;
  int repeat_x[2] = {1, 1};
  int repeat_y[2] = {1, 1};
};
CommonPeriod common_period(const UnitCell& a, const UnitCell& b, int max_repeat = 64);

// Tiles the stack's cell content rx × ry times.
LayerStack replicate(const LayerStack& stack, int rx, int ry);

} // namespace modcas
