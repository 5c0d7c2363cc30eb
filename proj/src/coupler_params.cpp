#include "ptq/coupler_params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ptq {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Unbroken: return "unbroken";
    case Regime::ExceptionalPoint: return "exceptional_point";
    case Regime::Broken: return "broken";
  }
  return "unknown";
}

CouplerParams::CouplerParams(double kappa, double gamma) : kappa_(kappa), gamma_(gamma) {
  if (!std::isfinite(kappa) || !(kappa > 0.0)) {
    throw std::invalid_argument("coupling rate kappa must be positive and finite");
  }
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw std::invalid_argument("loss rate gamma must be non-negative and finite");
  }
}

double CouplerParams::omega_squared() const {
  // Factored form keeps relative accuracy close to the threshold.
  return (2.0 * kappa_ - gamma_) * (2.0 * kappa_ + gamma_);
}

std::optional<double> CouplerParams::omega() const {
  if (regime() != Regime::Unbroken) return std::nullopt;
  return std::sqrt(omega_squared());
}

double CouplerParams::coupling_length() const { return std::numbers::pi / (2.0 * kappa_); }

Regime CouplerParams::regime() const {
  const double threshold = 2.0 * kappa_;
  if (std::abs(gamma_ - threshold) <= kRegimeTolerance * threshold) return Regime::ExceptionalPoint;
  return gamma_ < threshold ? Regime::Unbroken : Regime::Broken;
}

}  // namespace ptq
