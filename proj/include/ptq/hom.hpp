#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ptq/coupler_analytic.hpp"
#include "ptq/coupler_params.hpp"

namespace ptq {

/// Overlap of the two photon wavepackets as a function of their relative
/// delay: zeta(tau) = mu exp(-tau^2 / (2 sigma_t^2)).
class DistinguishabilityModel {
 public:
  /// Throws std::invalid_argument unless sigma_t > 0 and mu in [0, 1].
  DistinguishabilityModel(double sigma_t = 1.0, double mu = 1.0);

  double sigma_t() const { return sigma_t_; }
  double mu() const { return mu_; }
  double overlap(double tau) const;

 private:
  double sigma_t_;
  double mu_;
};

/// Gamma(z, tau) = zeta Gamma_indist + (1 - zeta) Gamma_dist.
double coincidence_with_delay(const TransferMatrix& u, double tau, const DistinguishabilityModel& model);
double coincidence_with_delay(const CouplerParams& params, double z, double tau,
                              const DistinguishabilityModel& model);

/// (Gamma_dist - Gamma(z, 0)) / Gamma_dist; empty where Gamma_dist vanishes.
std::optional<double> visibility(const TransferMatrix& u, const DistinguishabilityModel& model);
std::optional<double> visibility(const CouplerParams& params, double z, const DistinguishabilityModel& model);

struct GaussianFit {
  double center = 0.0;
  double depth = 0.0;
  double width = 0.0;
  double baseline = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt fit of baseline - depth exp(-(tau - center)^2 / (2 width^2)).
/// Stops when the accepted parameter step drops below 1e-10 or after 200
/// iterations. Flat data yields depth 0 and width 0. Throws
/// std::invalid_argument for fewer than 5 samples, mismatched lengths, or
/// negative coincidences.
GaussianFit fit_gaussian_dip(std::span<const double> taus, std::span<const double> coincidences);

struct DipLocation {
  double z;
  double coincidence;
};

/// Minimum of Gamma(z, tau = 0) over [z_lo, z_hi]: the first interior local
/// minimum on a 400-point scan, refined by golden-section search. Empty when
/// the scan finds no interior minimum.
std::optional<DipLocation> locate_dip_z(const CouplerParams& params, const DistinguishabilityModel& model,
                                        double z_lo, double z_hi);

/// Default search bracket for the dip: (0, 1.5 pi / (4 kappa)].
std::pair<double, double> default_dip_bracket(const CouplerParams& params);

/// Mode overlap mu for which the visibility at the located dip equals
/// `target`. Throws NumericalError when the target is out of reach.
double calibrate_mode_overlap(const CouplerParams& params, double target, double sigma_t = 1.0);

struct HomScanResult {
  std::vector<double> zs;
  std::vector<double> taus;
  /// surface[i][k] = Gamma(zs[i], taus[k])
  std::vector<std::vector<double>> surface;
  std::vector<GaussianFit> fits;
  std::vector<std::optional<double>> visibilities;
};

HomScanResult hom_scan(const CouplerParams& params, const DistinguishabilityModel& model,
                       std::vector<double> zs, std::vector<double> taus, unsigned workers = 1);

}  // namespace ptq
