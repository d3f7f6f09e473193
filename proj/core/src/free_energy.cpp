#include "modcas/free_energy.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"
#include "modcas/modal.hpp"
#include "modcas/parallel.hpp"
#include "modcas/smatrix.hpp"
#include "modcas/zerofreq.hpp"

namespace modcas {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void validate(const CasimirSetup& setup)
{
  validate(setup.lower, setup.materials);
  validate(setup.upper, setup.materials);
  if (!setup.materials.contains(setup.gap))
    throw Error(ErrorCode::UnknownMaterial, "unknown gap material '" + setup.gap + "'");
  if (setup.lower.incident != setup.gap || setup.upper.incident != setup.gap)
    throw Error(ErrorCode::ValidationError,
                "both stacks must start from the gap medium '" + setup.gap + "'");
  const auto& a = setup.lower.cell;
  const auto& b = setup.upper.cell;
  if (std::abs(a.Lx - b.Lx) > 1e-12 * a.Lx || std::abs(a.Ly - b.Ly) > 1e-12 * a.Ly)
    throw Error(ErrorCode::ValidationError,
                "stacks must share the unit cell; reduce commensurate periods first");
}

VectorXcd translation_factor(const VectorXcd& gap_decay, double a)
{
  if (!(a > 0.0))
    throw Error(ErrorCode::ValidationError, "separation must be positive");
  return (-gap_decay * a).array().exp();
}

MatrixXcd round_trip(const MatrixXcd& R1, const MatrixXcd& R2, const VectorXcd& X)
{
  const Index D = X.size();
  if (R1.rows() != D || R1.cols() != D || R2.rows() != D || R2.cols() != D)
    throw Error(ErrorCode::DimensionMismatch, "round trip operands differ in size");
  return R1 * X.asDiagonal() * R2 * X.asDiagonal();
}

double log_det_one_minus(const MatrixXcd& M)
{
  const Index D = M.rows();
  if (D == 0)
    return 0.0;
  const Eigen::PartialPivLU<MatrixXcd> lu(MatrixXcd::Identity(D, D) - M);
  const auto& U = lu.matrixLU();
  double s = 0.0;
  for (Index i = 0; i < D; ++i)
    s += std::log(std::abs(U(i, i)));
  return s;
}

double spectral_radius(const MatrixXcd& M)
{
  if (M.rows() == 0)
    return 0.0;
  return Eigen::ComplexEigenSolver<MatrixXcd>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

double log_det_one_minus_eigen(const MatrixXcd& M)
{
  if (M.rows() == 0)
    return 0.0;
  const VectorXcd ev = Eigen::ComplexEigenSolver<MatrixXcd>(M, false).eigenvalues();
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) >= 1.0)
      throw Error(ErrorCode::SpectralRadiusExceeded, "round-trip eigenvalue with modulus >= 1");
    s += std::log(std::abs(1.0 - ev(i)));
  }
  return s;
}

double relative_spread(std::span<const double> v)
{
  if (v.size() < 2)
    return 0.0;
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v)
    var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  return std::sqrt(var) / std::abs(mean);
}

namespace {

struct Item {
  std::vector<double> value;     // l >= 1, or l = 0 by the primary route
  std::vector<double> direct;    // l = 0
  std::vector<double> extrap;    // l = 0
  std::vector<double> floor10;   // l = 0, floor / 10
};

class Sweep {
public:
  Sweep(const CasimirSetup& setup, std::span<const double> seps, const FreeEnergyOptions& opt)
    : setup_(setup), seps_(seps.begin(), seps.end()), opt_(opt),
      upper_(mirrored(setup.upper)), ord_(opt.order)
  {
    validate(setup);
    validate(opt.matsubara);
    for (double a : seps_)
      if (!(a > 0.0) || !std::isfinite(a))
        throw Error(ErrorCode::ValidationError, "separations must be positive");
    if (ord_.N < 0 || ord_.M < 0)
      throw Error(ErrorCode::ValidationError, "truncation orders must be >= 0");

    const LayerStack* stacks[] = {&setup.lower, &setup.upper};
    groups_ = coupled_components(stacks, ord_);
    nodes_ = opt.quadrature.nodes(setup.lower.cell);
    if (opt.use_symmetry) {
      auto sym = cell_symmetry(stacks);
      if (ord_.N != ord_.M)
        sym.swap_xy = false;
      nodes_ = fold_nodes(nodes_, sym);
    }
    floor_ = opt.sigma_floor ? *opt.sigma_floor : default_sigma_floor(stacks, setup.materials);
    zl_ = std::make_unique<ZeroFrequencyModel>(setup.lower, setup.materials, ord_, floor_);
    zu_ = std::make_unique<ZeroFrequencyModel>(upper_, setup.materials, ord_, floor_);
    if (opt.check_floor) {
      zl10_ = std::make_unique<ZeroFrequencyModel>(setup.lower, setup.materials, ord_, floor_ / 10);
      zu10_ = std::make_unique<ZeroFrequencyModel>(upper_, setup.materials, ord_, floor_ / 10);
    }
  }

  std::vector<FreeEnergyResult> run()
  {
    int terms = opt_.matsubara.terms;
    compute(0, terms);
    auto res = reduce(terms);
    if (opt_.adaptive_matsubara) {
      while (terms < opt_.max_terms && worst_tail(res) > opt_.tail_tolerance) {
        const int next = std::min(opt_.max_terms, terms + std::max(4, terms / 2));
        compute(terms, next);
        terms = next;
        res = reduce(terms);
      }
    }
    for (auto& r : res) {
      if (r.tail_estimate > opt_.tail_tolerance) {
        std::ostringstream os;
        os << "Matsubara tail " << r.tail_estimate << " exceeds " << opt_.tail_tolerance
           << " at a = " << r.separation << " m with " << terms << " terms";
        if (opt_.tail_policy == TailPolicy::error)
          throw Error(ErrorCode::NonConvergedTail, os.str());
        if (opt_.tail_policy == TailPolicy::warn)
          r.warnings.push_back(os.str());
      }
      if (r.zero_floor_change && *r.zero_floor_change > 1e-4) {
        std::ostringstream os;
        os << "zero-frequency term changes by " << *r.zero_floor_change
           << " when the conductivity floor is divided by ten (a = " << r.separation << " m)";
        throw Error(ErrorCode::NonConvergedFloor, os.str());
      }
    }
    return res;
  }

private:
  static double worst_tail(const std::vector<FreeEnergyResult>& res)
  {
    double w = 0.0;
    for (const auto& r : res)
      w = std::max(w, r.tail_estimate);
    return w;
  }

  void compute(int l_begin, int l_end)
  {
    for (int l = std::max(1, l_begin); l < l_end; ++l) {
      const double xi = opt_.matsubara.frequency(l);
      lower_models_.emplace_back(setup_.lower, setup_.materials, xi, ord_);
      upper_models_.emplace_back(upper_, setup_.materials, xi, ord_);
    }
    const std::size_t nn = nodes_.size();
    const std::size_t nl = static_cast<std::size_t>(l_end - l_begin);
    items_.resize(static_cast<std::size_t>(l_end));
    for (int l = l_begin; l < l_end; ++l)
      items_[static_cast<std::size_t>(l)].assign(nn, Item{});
    std::vector<std::size_t> done(nl, 0);
    std::mutex progress_mutex;

    parallel_for(nl * nn, opt_.workers, [&](std::size_t k) {
      const int l = l_begin + static_cast<int>(k / nn);
      const std::size_t n = k % nn;
      try {
        items_[static_cast<std::size_t>(l)][n] = evaluate(l, nodes_[n]);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "matsubara l=" << l << " node " << n << " (kx=" << nodes_[n].kx
           << ", ky=" << nodes_[n].ky << ")";
        throw e.with_context(os.str());
      }
      if (opt_.progress) {
        std::lock_guard lock(progress_mutex);
        if (++done[static_cast<std::size_t>(l - l_begin)] == nn)
          opt_.progress(l, l_end);
      }
    });
  }

  VectorXcd gap_decay(const TransverseWavevector& kt, const ChannelSet& g, double xi,
                      bool two_per_channel) const
  {
    const auto& gm = setup_.materials.at(setup_.gap);
    const double k = xi / constants::c;
    const double em = xi > 0.0 ? permittivity_at(gm.permittivity, xi) *
                                   permeability_at(gm.permeability, xi) * k * k
                               : 0.0;
    const Index per = two_per_channel ? 2 : 1;
    VectorXcd q(per * static_cast<Index>(g.size()));
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double K = std::hypot(kt.alpha(ord_.n_of(g[j])), kt.beta(ord_.m_of(g[j])));
      const double v = std::sqrt(em + K * K);
      for (Index p = 0; p < per; ++p)
        q(per * static_cast<Index>(j) + p) = v;
    }
    return q;
  }

  void accumulate(std::vector<double>& out, const MatrixXcd& R1, const MatrixXcd& R2,
                  const VectorXcd& q, double weight) const
  {
    for (std::size_t s = 0; s < seps_.size(); ++s) {
      const MatrixXcd M = round_trip(R1, R2, translation_factor(q, seps_[s]));
      if (opt_.check_spectral_radius && spectral_radius(M) >= 1.0)
        throw Error(ErrorCode::SpectralRadiusExceeded, "round-trip spectral radius >= 1");
      out[s] += weight * log_det_one_minus(M);
    }
  }

  Item evaluate(int l, const QuadratureNode& node) const
  {
    const TransverseWavevector kt(node.kx, node.ky, setup_.lower.cell);
    Item it;
    const std::size_t S = seps_.size();
    if (l > 0) {
      it.value.assign(S, 0.0);
      const double xi = opt_.matsubara.frequency(l);
      const auto& lm = lower_models_[static_cast<std::size_t>(l - 1)];
      const auto& um = upper_models_[static_cast<std::size_t>(l - 1)];
      for (const auto& g : groups_) {
        const MatrixXcd R1 = lm.reflection(kt, g, Side::incident);
        const MatrixXcd R2 = um.reflection(kt, g, Side::exit);
        accumulate(it.value, R1, R2, gap_decay(kt, g, xi, true), node.weight);
      }
      return it;
    }

    const auto mode = opt_.zero_frequency;
    const bool direct = mode != ZeroFrequencyMode::extrapolate;
    const bool extrap = mode != ZeroFrequencyMode::direct;
    if (direct) {
      it.direct.assign(S, 0.0);
      if (zl10_)
        it.floor10.assign(S, 0.0);
    }
    std::vector<double> xs_lower, xs_upper;
    if (extrap) {
      it.extrap.assign(S, 0.0);
      const auto all = tm_channels(kt, ord_, all_channels(ord_));
      const double xi1 = 2.0 * constants::pi * constants::kB * opt_.matsubara.temperature /
                         constants::hbar;
      xs_lower = extrapolation_samples(setup_.lower, setup_.materials, kt, ord_, all, xi1);
      xs_upper = extrapolation_samples(upper_, setup_.materials, kt, ord_, all, xi1);
    }
    std::vector<StackModel> lower_x, upper_x;
    for (double xi : xs_lower)
      lower_x.emplace_back(setup_.lower, setup_.materials, xi, ord_);
    for (double xi : xs_upper)
      upper_x.emplace_back(upper_, setup_.materials, xi, ord_);

    for (const auto& g0 : groups_) {
      const ChannelSet g = tm_channels(kt, ord_, g0);
      if (g.empty())
        continue;
      if (direct) {
        const VectorXcd q = gap_decay(kt, g, 0.0, false);
        accumulate(it.direct, zl_->reflection(kt, g, Side::incident),
                   zu_->reflection(kt, g, Side::exit), q, node.weight);
        if (zl10_)
          accumulate(it.floor10, zl10_->reflection(kt, g, Side::incident),
                     zu10_->reflection(kt, g, Side::exit), q, node.weight);
      }
      if (extrap) {
        std::size_t i = 0;
        auto lower_f = [&](double) { return lower_x[i++]; };
        const auto R1 = small_xi_extrapolation(lower_f, kt, g, xs_lower, Side::incident);
        std::size_t j = 0;
        auto upper_f = [&](double) { return upper_x[j++]; };
        const auto R2 = small_xi_extrapolation(upper_f, kt, g, xs_upper, Side::exit);
        accumulate(it.extrap, R1.R, R2.R, gap_decay(kt, g, 0.0, false), node.weight);
      }
    }
    it.value = direct ? it.direct : it.extrap;
    return it;
  }

  std::vector<FreeEnergyResult> reduce(int terms) const
  {
    const double pref = opt_.matsubara.thermal_energy() / (4.0 * constants::pi * constants::pi);
    const std::size_t nn = nodes_.size();
    std::vector<FreeEnergyResult> out(seps_.size());
    for (std::size_t s = 0; s < seps_.size(); ++s) {
      auto& r = out[s];
      r.separation = seps_[s];
      r.terms_used = terms;
      r.per_l.assign(static_cast<std::size_t>(terms), 0.0);
      std::vector<CompensatedSum> node_sums(nn);
      for (int l = 0; l < terms; ++l) {
        const double w = pref * opt_.matsubara.weight(l);
        CompensatedSum acc;
        for (std::size_t n = 0; n < nn; ++n) {
          const double v = items_[static_cast<std::size_t>(l)][n].value[s];
          acc.add(v);
          node_sums[n].add(w * v);
        }
        r.per_l[static_cast<std::size_t>(l)] = w * acc.value();
        if (l == 0) {
          auto route = [&](std::vector<double> Item::*field) -> std::optional<double> {
            if ((items_[0][0].*field).empty())
              return std::nullopt;
            CompensatedSum z;
            for (std::size_t n = 0; n < nn; ++n)
              z.add((items_[0][n].*field)[s]);
            return w * z.value();
          };
          r.zero_direct = route(&Item::direct);
          r.zero_extrapolated = route(&Item::extrap);
          const auto f10 = route(&Item::floor10);
          if (f10 && r.zero_direct) {
            const double base = std::abs(*r.zero_direct);
            r.zero_floor_change = base > 0.0 ? std::abs(*f10 - *r.zero_direct) / base : 0.0;
          }
        }
      }
      r.value = compensated_sum(r.per_l);
      r.per_node.resize(nn);
      for (std::size_t n = 0; n < nn; ++n)
        r.per_node[n] = node_sums[n].value();
      r.tail_estimate =
        terms > 1 && r.value != 0.0 ? std::abs(r.per_l.back() / r.value) : 0.0;
    }
    return out;
  }

  const CasimirSetup& setup_;
  std::vector<double> seps_;
  const FreeEnergyOptions& opt_;
  LayerStack upper_;
  TruncationOrder ord_;
  std::vector<ChannelSet> groups_;
  std::vector<QuadratureNode> nodes_;
  double floor_ = 0.0;
  std::unique_ptr<ZeroFrequencyModel> zl_, zu_, zl10_, zu10_;
  std::vector<StackModel> lower_models_, upper_models_; // index l - 1
  std::vector<std::vector<Item>> items_;                // [l][node]
};

} // namespace

std::vector<FreeEnergyResult> free_energy_curve(const CasimirSetup& setup,
                                                std::span<const double> separations,
                                                const FreeEnergyOptions& options)
{
  if (separations.empty())
    return {};
  Sweep sweep(setup, separations, options);
  return sweep.run();
}

FreeEnergyResult free_energy_per_area(const CasimirSetup& setup, double a,
                                      const FreeEnergyOptions& options)
{
  const double seps[] = {a};
  return free_energy_curve(setup, seps, options).front();
}

} // namespace modcas
