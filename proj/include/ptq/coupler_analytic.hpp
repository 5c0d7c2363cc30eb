#pragma once

#include <optional>

#include <Eigen/Dense>

#include "ptq/coupler_params.hpp"
#include "ptq/fock_space.hpp"

namespace ptq {

/// Single-photon amplitudes U(z) = exp(-i H_eff z) of the lossy coupler, with
/// H_eff = [[-i gamma, kappa], [kappa, 0]] in (L, R) order. The isolated-L
/// intensity decays as exp(-2 gamma z).
struct TransferMatrix {
  Complex ll;
  Complex lr;
  Complex rl;
  Complex rr;
  double z = 0.0;

  /// Amplitude for a photon entering `input` and leaving in `output`.
  Complex amplitude(Mode output, Mode input) const;
  Eigen::Matrix2cd matrix() const;
};

Eigen::Matrix2cd effective_hamiltonian(const CouplerParams& params);

/// Closed form e^{-gamma z/2} [[c - gamma s, -2i kappa s], [-2i kappa s, c + gamma s]]
/// with c = cos(omega z/2) and s = sin(omega z/2)/omega. Valid in every
/// regime: small arguments use the power series, so the exceptional point
/// (s -> z/2) and the broken phase (cosh/sinh) need no special casing.
TransferMatrix transfer_matrix(const CouplerParams& params, double z);

/// |U_{observe, input}|^2
double population(const CouplerParams& params, double z, Mode input, Mode observe);

/// Share of the surviving power found in the excited waveguide.
double intensity_ratio(const CouplerParams& params, double z, Mode input);

/// Two-photon coincidence for |1,1> input,
///   Gamma(z) = exp(-2 gamma z) ((gamma^2 - 4 kappa^2 cos(omega z)) / omega^2)^2.
/// Off the unbroken phase (or for omega too small to divide by) the
/// equivalent form exp(-2 gamma z)(8 kappa^2 s^2 - 1)^2 is used.
double coincidence_rate(const CouplerParams& params, double z);

/// |U_LL U_RR + U_LR U_RL|^2, the two-photon amplitude as a permanent.
double permanent_coincidence(const CouplerParams& params, double z);

/// Both photons detected, treated as distinguishable particles:
/// |U_LL|^2 |U_RR|^2 + |U_LR|^2 |U_RL|^2.
double distinguishable_coincidence(const CouplerParams& params, double z);

struct DipReport {
  /// pi / (4 kappa)
  double z_hermitian = 0.0;
  /// First zero of the coincidence rate. Empty in the broken phase.
  std::optional<double> z_dip;
  /// z_hermitian - z_dip, when z_dip exists.
  std::optional<double> shift;
  Regime regime = Regime::Unbroken;
  /// Set at the exceptional point, where z_dip = 1/(sqrt(2) kappa) is the limit value.
  bool exceptional_limit = false;
  /// Broken phase only: the hyperbolic continuation (2/|omega|) asinh(|omega|/(sqrt(8) kappa)).
  std::optional<double> z_continued;
  /// |arcsin form - arccos form|, unbroken phase only.
  double identity_residual = 0.0;
};

DipReport dip_positions(const CouplerParams& params);

/// (2/omega) arcsin(omega / (sqrt(8) kappa)); unbroken phase only.
double dip_position_arcsin(const CouplerParams& params);
/// (1/omega) arccos(gamma^2 / (4 kappa^2)); unbroken phase only.
double dip_position_arccos(const CouplerParams& params);

/// First z > 0 where the excited and the initially dark waveguide carry equal
/// power, located by bisection to 1e-12. Empty if no crossing exists within
/// `search_limit` (defaults to 20 coupling lengths).
std::optional<double> equal_population_crossing(const CouplerParams& params, Mode input,
                                                std::optional<double> search_limit = std::nullopt);

}  // namespace ptq
