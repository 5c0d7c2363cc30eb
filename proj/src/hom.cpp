#include "ptq/hom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "ptq/errors.hpp"
#include "ptq/parallel.hpp"
#include "ptq/scalar_search.hpp"

namespace ptq {
namespace {

double indistinguishable(const TransferMatrix& u) { return std::norm(u.ll * u.rr + u.lr * u.rl); }

double distinguishable(const TransferMatrix& u) {
  return std::norm(u.ll) * std::norm(u.rr) + std::norm(u.lr) * std::norm(u.rl);
}

using Params4 = Eigen::Vector4d;  // center, depth, width, baseline

double gaussian_model(const Params4& p, double tau) {
  const double dx = tau - p(0);
  return p(3) - p(1) * std::exp(-dx * dx / (2.0 * p(2) * p(2)));
}

double sum_squares(const Params4& p, std::span<const double> taus, std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double r = gaussian_model(p, taus[i]) - ys[i];
    s += r * r;
  }
  return s;
}

Params4 initial_guess(std::span<const double> taus, std::span<const double> ys) {
  const auto n = ys.size();
  const auto min_it = std::min_element(ys.begin(), ys.end());
  const auto i_min = static_cast<std::size_t>(min_it - ys.begin());
  const double baseline = 0.5 * (ys.front() + ys.back());
  const double depth = baseline - *min_it;
  // Width from the first sample on either side that recovers half the depth.
  const double half = *min_it + 0.5 * depth;
  double width = (taus.back() - taus.front()) / 6.0;
  for (std::size_t i = i_min; i < n; ++i) {
    if (ys[i] >= half) {
      width = std::max(std::abs(taus[i] - taus[i_min]) / std::sqrt(2.0 * std::numbers::ln2), 1e-12);
      break;
    }
  }
  return {taus[i_min], depth, width, baseline};
}

}  // namespace

DistinguishabilityModel::DistinguishabilityModel(double sigma_t, double mu) : sigma_t_(sigma_t), mu_(mu) {
  if (!std::isfinite(sigma_t) || !(sigma_t > 0.0)) {
    throw std::invalid_argument("coherence time sigma_t must be positive");
  }
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mode overlap mu must lie in [0, 1]");
}

double DistinguishabilityModel::overlap(double tau) const {
  return mu_ * std::exp(-tau * tau / (2.0 * sigma_t_ * sigma_t_));
}

double coincidence_with_delay(const TransferMatrix& u, double tau, const DistinguishabilityModel& model) {
  const double zeta = model.overlap(tau);
  return zeta * indistinguishable(u) + (1.0 - zeta) * distinguishable(u);
}

double coincidence_with_delay(const CouplerParams& params, double z, double tau,
                              const DistinguishabilityModel& model) {
  return coincidence_with_delay(transfer_matrix(params, z), tau, model);
}

std::optional<double> visibility(const TransferMatrix& u, const DistinguishabilityModel& model) {
  const double dist = distinguishable(u);
  if (!(dist > 0.0)) return std::nullopt;
  return (dist - coincidence_with_delay(u, 0.0, model)) / dist;
}

std::optional<double> visibility(const CouplerParams& params, double z, const DistinguishabilityModel& model) {
  return visibility(transfer_matrix(params, z), model);
}

GaussianFit fit_gaussian_dip(std::span<const double> taus, std::span<const double> ys) {
  if (taus.size() != ys.size()) throw std::invalid_argument("fit_gaussian_dip: length mismatch");
  if (taus.size() < 5) throw std::invalid_argument("fit_gaussian_dip: need at least 5 samples");
  if (std::any_of(ys.begin(), ys.end(), [](double y) { return !(y >= 0.0); })) {
    throw std::invalid_argument("fit_gaussian_dip: coincidences must be non-negative");
  }

  const auto [lo_it, hi_it] = std::minmax_element(ys.begin(), ys.end());
  const double scale = std::max(std::abs(*hi_it), 1.0);
  if (*hi_it - *lo_it <= 1e-13 * scale) {
    GaussianFit flat;
    double mean = 0.0;
    for (double y : ys) mean += y;
    flat.baseline = mean / static_cast<double>(ys.size());
    flat.center = 0.5 * (taus.front() + taus.back());
    flat.converged = true;
    return flat;
  }

  const std::size_t n = ys.size();
  Params4 p = initial_guess(taus, ys);
  double cost = sum_squares(p, taus, ys);
  double lambda = 1e-3;
  GaussianFit fit;
  constexpr int kMaxIterations = 200;

  int it = 0;
  for (; it < kMaxIterations; ++it) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = taus[i] - p(0);
      const double w2 = p(2) * p(2);
      const double g = std::exp(-dx * dx / (2.0 * w2));
      Eigen::Vector4d j;
      j << -p(1) * g * dx / w2, -g, -p(1) * g * dx * dx / (w2 * p(2)), 1.0;
      const double r = gaussian_model(p, taus[i]) - ys[i];
      jtj += j * j.transpose();
      jtr += j * r;
    }
    if (cost == 0.0 || jtr.cwiseAbs().maxCoeff() == 0.0) {
      fit.converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted && lambda < 1e20) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
      const Params4 trial = p + step;
      const double trial_cost = step.allFinite() ? sum_squares(trial, taus, ys) : INFINITY;
      if (trial_cost <= cost) {
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (step.cwiseAbs().maxCoeff() < 1e-10) fit.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No downhill step left at machine precision: a minimum iff the
      // gradient has vanished relative to the data scale.
      fit.converged = jtr.cwiseAbs().maxCoeff() <= 1e-10 * scale;
      break;
    }
    if (fit.converged) {
      ++it;
      break;
    }
  }

  fit.center = p(0);
  fit.depth = p(1);
  fit.width = std::abs(p(2));
  fit.baseline = p(3);
  fit.rms_residual = std::sqrt(cost / static_cast<double>(n));
  fit.iterations = it;
  return fit;
}

std::pair<double, double> default_dip_bracket(const CouplerParams& params) {
  return {0.0, 1.5 * std::numbers::pi / (4.0 * params.kappa())};
}

std::optional<DipLocation> locate_dip_z(const CouplerParams& params, const DistinguishabilityModel& model,
                                        double z_lo, double z_hi) {
  if (!(z_lo < z_hi) || z_lo < 0.0) throw std::invalid_argument("locate_dip_z: need 0 <= z_lo < z_hi");
  auto gamma0 = [&](double z) { return coincidence_with_delay(params, z, 0.0, model); };

  constexpr int kScan = 400;
  const double h = (z_hi - z_lo) / kScan;
  double prev = gamma0(z_lo);
  double cur = gamma0(z_lo + h);
  for (int k = 1; k < kScan; ++k) {
    const double next = gamma0(z_lo + (k + 1) * h);
    if (cur <= prev && cur < next) {
      const auto best = golden_section_minimize(gamma0, z_lo + (k - 1) * h, z_lo + (k + 1) * h, 1e-9);
      return DipLocation{best.x, best.value};
    }
    prev = cur;
    cur = next;
  }
  return std::nullopt;
}

double calibrate_mode_overlap(const CouplerParams& params, double target, double sigma_t) {
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("calibration target must lie in (0, 1]");
  const auto [lo, hi] = default_dip_bracket(params);
  auto visibility_at_dip = [&](double mu) {
    const DistinguishabilityModel model(sigma_t, mu);
    const auto dip = locate_dip_z(params, model, lo, hi);
    if (!dip) throw NumericalError("calibrate_mode_overlap: no dip in bracket for mu = " + std::to_string(mu));
    const auto v = visibility(params, dip->z, model);
    if (!v) throw NumericalError("calibrate_mode_overlap: visibility undefined at the dip");
    return *v - target;
  };
  const auto mu = bisect(visibility_at_dip, 0.0, 1.0, 1e-15);
  if (!mu) throw NumericalError("calibrate_mode_overlap: target visibility not reachable for mu in [0, 1]");
  return *mu;
}

HomScanResult hom_scan(const CouplerParams& params, const DistinguishabilityModel& model, std::vector<double> zs,
                       std::vector<double> taus, unsigned workers) {
  HomScanResult out;
  out.zs = std::move(zs);
  out.taus = std::move(taus);
  const auto nz = out.zs.size();
  out.surface.assign(nz, std::vector<double>(out.taus.size()));
  out.fits.resize(nz);
  out.visibilities.resize(nz);
  parallel_for(nz, workers, [&](std::size_t i) {
    const auto u = transfer_matrix(params, out.zs[i]);
    for (std::size_t k = 0; k < out.taus.size(); ++k) {
      out.surface[i][k] = coincidence_with_delay(u, out.taus[k], model);
    }
    out.fits[i] = fit_gaussian_dip(out.taus, out.surface[i]);
    out.visibilities[i] = visibility(u, model);
  });
  return out;
}

}  // namespace ptq
