#include "ptq/coupler_analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ptq/scalar_search.hpp"

namespace ptq {
namespace {

struct HalfAngle {
  double c;  // cos(omega z / 2)
  double s;  // sin(omega z / 2) / omega
};

// omega2 is the signed 4 kappa^2 - gamma^2; negative values continue to
// cosh/sinh.
HalfAngle half_angle(double omega2, double z) {
  const double x = omega2 * z * z / 4.0;
  if (std::abs(x) < 0.25) {
    // c = sum (-x)^k / (2k)!,  s = (z/2) sum (-x)^k / (2k+1)!
    double c = 0.0;
    double s = 0.0;
    double term_c = 1.0;
    double term_s = 1.0;
    for (int k = 0; k < 30; ++k) {
      c += term_c;
      s += term_s;
      term_c *= -x / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
      term_s *= -x / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
      if (std::abs(term_c) < 1e-18 && std::abs(term_s) < 1e-18) break;
    }
    return {c, 0.5 * z * s};
  }
  if (omega2 > 0.0) {
    const double w = std::sqrt(omega2);
    return {std::cos(0.5 * w * z), std::sin(0.5 * w * z) / w};
  }
  const double w = std::sqrt(-omega2);
  return {std::cosh(0.5 * w * z), std::sinh(0.5 * w * z) / w};
}

}  // namespace

Complex TransferMatrix::amplitude(Mode output, Mode input) const {
  if (output == Mode::L) return input == Mode::L ? ll : lr;
  return input == Mode::L ? rl : rr;
}

Eigen::Matrix2cd TransferMatrix::matrix() const {
  Eigen::Matrix2cd m;
  m << ll, lr, rl, rr;
  return m;
}

Eigen::Matrix2cd effective_hamiltonian(const CouplerParams& params) {
  Eigen::Matrix2cd h;
  h << Complex(0.0, -params.gamma()), params.kappa(), params.kappa(), 0.0;
  return h;
}

TransferMatrix transfer_matrix(const CouplerParams& params, double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("transfer_matrix: z must be non-negative");
  const auto [c, s] = half_angle(params.omega_squared(), z);
  const double decay = std::exp(-0.5 * params.gamma() * z);
  const Complex cross(0.0, -2.0 * params.kappa() * s * decay);
  return {
      .ll = decay * (c - params.gamma() * s),
      .lr = cross,
      .rl = cross,
      .rr = decay * (c + params.gamma() * s),
      .z = z,
  };
}

double population(const CouplerParams& params, double z, Mode input, Mode observe) {
  return std::norm(transfer_matrix(params, z).amplitude(observe, input));
}

double intensity_ratio(const CouplerParams& params, double z, Mode input) {
  const auto u = transfer_matrix(params, z);
  const double bar = std::norm(u.amplitude(input, input));
  const double cross = std::norm(u.amplitude(input == Mode::L ? Mode::R : Mode::L, input));
  return bar / (bar + cross);
}

double coincidence_rate(const CouplerParams& params, double z) {
  const double kappa = params.kappa();
  const double gamma = params.gamma();
  const double omega2 = params.omega_squared();
  const double decay = std::exp(-2.0 * gamma * z);
  if (params.regime() == Regime::Unbroken && omega2 > 1e-4 * 4.0 * kappa * kappa) {
    const double omega = std::sqrt(omega2);
    const double inner = (gamma * gamma - 4.0 * kappa * kappa * std::cos(omega * z)) / omega2;
    return decay * inner * inner;
  }
  // gamma^2 = 4 kappa^2 - omega^2 turns the quotient into 8 kappa^2 s^2 - 1.
  const double s = half_angle(omega2, z).s;
  const double inner = 8.0 * kappa * kappa * s * s - 1.0;
  return decay * inner * inner;
}

double permanent_coincidence(const CouplerParams& params, double z) {
  const auto u = transfer_matrix(params, z);
  return std::norm(u.ll * u.rr + u.lr * u.rl);
}

double distinguishable_coincidence(const CouplerParams& params, double z) {
  const auto u = transfer_matrix(params, z);
  return std::norm(u.ll) * std::norm(u.rr) + std::norm(u.lr) * std::norm(u.rl);
}

double dip_position_arcsin(const CouplerParams& params) {
  const auto omega = params.omega();
  if (!omega) throw std::domain_error("dip_position_arcsin: requires the unbroken phase");
  return 2.0 / *omega * std::asin(*omega / (std::sqrt(8.0) * params.kappa()));
}

double dip_position_arccos(const CouplerParams& params) {
  const auto omega = params.omega();
  if (!omega) throw std::domain_error("dip_position_arccos: requires the unbroken phase");
  const double ratio = params.gamma() / (2.0 * params.kappa());
  return std::acos(ratio * ratio) / *omega;
}

DipReport dip_positions(const CouplerParams& params) {
  DipReport report;
  report.z_hermitian = std::numbers::pi / (4.0 * params.kappa());
  report.regime = params.regime();
  switch (report.regime) {
    case Regime::Unbroken: {
      const double by_arcsin = dip_position_arcsin(params);
      report.z_dip = by_arcsin;
      report.identity_residual = std::abs(by_arcsin - dip_position_arccos(params));
      break;
    }
    case Regime::ExceptionalPoint:
      report.z_dip = 1.0 / (std::numbers::sqrt2 * params.kappa());
      report.exceptional_limit = true;
      break;
    case Regime::Broken: {
      const double w = std::sqrt(-params.omega_squared());
      report.z_continued = 2.0 / w * std::asinh(w / (std::sqrt(8.0) * params.kappa()));
      break;
    }
  }
  if (report.z_dip) report.shift = report.z_hermitian - *report.z_dip;
  return report;
}

std::optional<double> equal_population_crossing(const CouplerParams& params, Mode input,
                                                std::optional<double> search_limit) {
  const Mode other = input == Mode::L ? Mode::R : Mode::L;
  auto balance = [&](double z) {
    const auto u = transfer_matrix(params, z);
    return std::norm(u.amplitude(input, input)) - std::norm(u.amplitude(other, input));
  };
  const double limit = search_limit.value_or(20.0 * params.coupling_length());
  const double h = params.coupling_length() / 200.0;
  for (long k = 0; static_cast<double>(k) * h < limit; ++k) {
    const double lo = static_cast<double>(k) * h;
    const double hi = std::min(lo + h, limit);
    if (balance(hi) <= 0.0) return bisect(balance, lo, hi, 1e-12);
  }
  return std::nullopt;
}

}  // namespace ptq
