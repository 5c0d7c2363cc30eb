#pragma once

#include <optional>
#include <string_view>

namespace ptq {

enum class Regime { Unbroken, ExceptionalPoint, Broken };

std::string_view to_string(Regime regime);

/// Coupling rate kappa and loss rate gamma of the two-waveguide coupler,
/// both in 1/cm. Waveguide L carries the loss.
class CouplerParams {
 public:
  /// Relative distance |gamma - 2 kappa| / (2 kappa) below which the coupler
  /// is treated as sitting on the exceptional point.
  static constexpr double kRegimeTolerance = 1e-9;

  /// Throws std::invalid_argument unless kappa > 0, gamma >= 0, both finite.
  CouplerParams(double kappa, double gamma);

  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }

  /// Signed omega^2 = 4 kappa^2 - gamma^2, negative in the broken phase.
  double omega_squared() const;
  /// Oscillation frequency sqrt(4 kappa^2 - gamma^2); engaged only when the
  /// regime is Unbroken.
  std::optional<double> omega() const;
  /// L_c = pi / (2 kappa).
  double coupling_length() const;
  Regime regime() const;

 private:
  double kappa_;
  double gamma_;
};

}  // namespace ptq
