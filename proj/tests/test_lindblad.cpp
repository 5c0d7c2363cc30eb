#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ptq/errors.hpp"
#include "ptq/lindblad.hpp"

using namespace ptq;

namespace {

const Complex I(0.0, 1.0);

CMatrix random_density(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Closed-form coincidence rate written out independently of the library.
double closed_form_coincidence(double kappa, double gamma, double z) {
  const double w2 = 4 * kappa * kappa - gamma * gamma;
  const double w = std::sqrt(w2);
  const double inner = (gamma * gamma - 4 * kappa * kappa * std::cos(w * z)) / w2;
  return std::exp(-2 * gamma * z) * inner * inner;
}

// Multiset comparison of complex values by greedy nearest matching.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (const auto& x : a) {
    auto best = std::min_element(b.begin(), b.end(),
                                 [&](const Complex& p, const Complex& q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

}  // namespace

TEST_CASE("coupler parameters and regimes") {
  const CouplerParams p(0.25, 0.35);
  CHECK(p.regime() == Regime::Unbroken);
  REQUIRE(p.omega().has_value());
  CHECK(*p.omega() == doctest::Approx(std::sqrt(0.25 - 0.1225)).epsilon(1e-15));
  CHECK(p.coupling_length() == doctest::Approx(2 * std::numbers::pi));

  CHECK(CouplerParams(0.25, 0.5).regime() == Regime::ExceptionalPoint);
  CHECK(CouplerParams(0.25, 0.5 * (1 + 5e-10)).regime() == Regime::ExceptionalPoint);
  CHECK(CouplerParams(0.25, 0.5 * (1 + 2e-9)).regime() == Regime::Broken);
  CHECK(CouplerParams(0.25, 0.5 * (1 - 2e-9)).regime() == Regime::Unbroken);
  CHECK_FALSE(CouplerParams(0.25, 0.5).omega().has_value());
  CHECK_FALSE(CouplerParams(0.25, 0.75).omega().has_value());
  CHECK(CouplerParams(0.25, 0.75).omega_squared() < 0.0);

  CHECK_THROWS_AS(CouplerParams(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(CouplerParams(0.25, -0.1), std::invalid_argument);
}

TEST_CASE("liouvillian structure") {
  const auto basis = build_basis(2);
  const auto l = build_liouvillian(basis, CouplerParams(0.25, 0.35));
  CHECK(l.matrix().rows() == 36);
  CHECK(l.matrix().cols() == 36);

  std::mt19937_64 rng(7);
  SUBCASE("gamma = 0 reduces to the commutator") {
    const auto l0 = build_liouvillian(basis, CouplerParams(0.25, 0.0));
    const CMatrix h = hamiltonian(*basis, 0.25);
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix rho = random_density(6, rng);
      const CMatrix expected = -I * (h * rho - rho * h);
      CHECK((l0.apply(DensityMatrix(basis, rho)).matrix() - expected).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("superoperator matches the direct matrix form") {
    const Rk4Integrator direct(basis, CouplerParams(0.25, 0.35));
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix rho = random_density(6, rng);
      CHECK((l.apply(DensityMatrix(basis, rho)).matrix() - direct.derivative(rho)).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("Hermiticity preserving") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto out = l.apply(DensityMatrix(basis, random_density(6, rng)));
      CHECK(out.hermiticity_residual() <= 1e-15);
    }
  }
  SUBCASE("vacuum is a stationary right eigenvector") {
    const CVector vac = vectorize(DensityMatrix::vacuum(basis).matrix());
    CHECK((l.matrix() * vac).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("generator is trace preserving for every loss rate") {
    // Lost photons end up in lower photon-number sectors, so the identity is
    // a left null vector even with loss.
    for (double gamma : {0.0, 0.1, 0.35, 0.5, 0.9}) {
      const auto lg = build_liouvillian(basis, CouplerParams(0.25, gamma));
      const CVector id = vectorize(CMatrix::Identity(6, 6));
      CHECK((id.adjoint() * lg.matrix()).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
  SUBCASE("photon number decays with loss") {
    const auto rho = propagate(DensityMatrix::pure(basis, {1, 1}), l, 2.0);
    CHECK(number_expectation(rho, Mode::L) + number_expectation(rho, Mode::R) < 2.0 - 0.1);
  }
  CHECK_THROWS_AS(Superoperator(basis, CouplerParams(0.25, 0.0), CMatrix::Zero(9, 9)), std::invalid_argument);
}

TEST_CASE("propagate") {
  const auto basis = build_basis(2);
  const CouplerParams params(0.25, 0.35);
  const auto l = build_liouvillian(basis, params);
  const auto pair = DensityMatrix::pure(basis, {1, 1});

  CHECK((propagate(pair, l, 0.0).matrix() - pair.matrix()).cwiseAbs().maxCoeff() == 0.0);
  for (double z : {0.5, 3.0, 40.0}) {
    CHECK((propagate(DensityMatrix::vacuum(basis), l, z).matrix() - DensityMatrix::vacuum(basis).matrix())
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
  }

  // Golden value, frozen after the closed form, expm and RK4 agreed.
  const double expm_value = coincidence(propagate(pair, l, 1.0));
  const double rk4_value = coincidence(rk4_integrate(pair, params, 1.0));
  const double closed = closed_form_coincidence(0.25, 0.35, 1.0);
  CHECK(std::abs(expm_value - closed) <= 1e-12);
  CHECK(std::abs(rk4_value - closed) <= 1e-8);
  CHECK(expm_value == doctest::Approx(0.381348270529).epsilon(1e-11));

  CHECK_THROWS_AS(propagate(pair, l, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(propagate(DensityMatrix::pure(build_basis(1), {1, 0}), l, 1.0), std::invalid_argument);
}

TEST_CASE("rk4 oracle") {
  const auto basis = build_basis(2);
  SUBCASE("Hermitian half coupling length splits a photon evenly") {
    const CouplerParams params(0.25, 0.0);
    const auto rho = rk4_integrate(DensityMatrix::pure(basis, {1, 0}), params, params.coupling_length() / 2, 1e-3);
    CHECK(std::abs(number_expectation(rho, Mode::L) - 0.5) <= 1e-8);
    CHECK(std::abs(number_expectation(rho, Mode::R) - 0.5) <= 1e-8);
  }
  SUBCASE("agrees with the matrix exponential") {
    const CouplerParams params(0.25, 0.35);
    const auto l = build_liouvillian(basis, params);
    std::mt19937_64 rng(11);
    const DensityMatrix rho0(basis, random_density(6, rng));
    for (double z : {0.5, 1.0, 2.0, 4.0}) {
      const auto a = propagate(rho0, l, z);
      const auto b = rk4_integrate(rho0, params, z, 1e-3);
      CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("edge cases") {
    const CouplerParams params(0.25, 0.35);
    const auto pair = DensityMatrix::pure(basis, {1, 1});
    CHECK((rk4_integrate(pair, params, 0.0).matrix() - pair.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(rk4_integrate(pair, params, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rk4_integrate(pair, params, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rk4_integrate(pair, params, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(rk4_integrate(pair, CouplerParams(1e6, 0.0), 100.0, 0.5), NumericalError);
  }
}

TEST_CASE("coincidence observable") {
  const auto basis = build_basis(2);
  CHECK(coincidence(DensityMatrix::pure(basis, {1, 1})) == 1.0);
  CHECK(coincidence(DensityMatrix::pure(basis, {2, 0})) == 0.0);
  const auto l = build_liouvillian(basis, CouplerParams(0.25, 0.0));
  CHECK(coincidence(propagate(DensityMatrix::pure(basis, {1, 1}), l, std::numbers::pi)) <= 1e-14);

  CMatrix bad = CMatrix::Zero(6, 6);
  bad(basis->index({1, 1}), basis->index({1, 1})) = -1e-6;
  CHECK_THROWS_AS(coincidence(DensityMatrix(basis, bad)), NumericalError);
}

TEST_CASE("spectral decomposition") {
  const auto basis = build_basis(2);

  SUBCASE("general properties") {
    for (double gamma : {0.0, 0.1, 0.35, 0.49, 0.7}) {
      const auto spec = spectral_decompose(build_liouvillian(basis, CouplerParams(0.25, gamma)));
      CHECK_FALSE(spec.defective);
      CHECK(spec.biorthogonality_residual <= 1e-8);
      CHECK(spec.eigenvalues.real().maxCoeff() <= 1e-10);
      CHECK(spec.eigenvalues.cwiseAbs().minCoeff() <= 1e-12);  // vacuum fixed point
      for (Eigen::Index k = 1; k < spec.eigenvalues.size(); ++k) {
        CHECK(spec.eigenvalues(k).real() <= spec.eigenvalues(k - 1).real() + 1e-9);
      }
    }
  }

  SUBCASE("Hermitian spectrum is purely imaginary") {
    const auto l = build_liouvillian(basis, CouplerParams(0.25, 0.0));
    const auto spec = spectral_decompose(l);
    CHECK(spec.eigenvalues.real().cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::ComplexEigenSolver<CMatrix> sector(number_diagonal_block(l, 1));
    std::vector<Complex> got(sector.eigenvalues().data(), sector.eigenvalues().data() + sector.eigenvalues().size());
    // lambda = -/+ i kappa, lambda_i + conj(lambda_j) in {0, 0, +-0.5 i}, plus vacuum 0
    CHECK(multiset_distance(got, {0.0, 0.0, 0.0, Complex(0, 0.5), Complex(0, -0.5)}) <= 1e-12);
  }

  SUBCASE("one-photon sector eigenvalues from the effective Hamiltonian") {
    const CouplerParams params(0.25, 0.35);
    const auto l = build_liouvillian(basis, params);
    // Independent route: numerically diagonalize the 2x2 generator -i H_eff.
    Eigen::Matrix2cd heff;
    heff << Complex(0, -0.35), 0.25, 0.25, 0.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> small(-I * heff);
    const Complex l1 = small.eigenvalues()(0);
    const Complex l2 = small.eigenvalues()(1);
    const double w = *params.omega();
    CHECK(multiset_distance({l1, l2}, {Complex(-0.175, w / 2), Complex(-0.175, -w / 2)}) <= 1e-12);

    Eigen::ComplexEigenSolver<CMatrix> sector(number_diagonal_block(l, 1));
    std::vector<Complex> got(sector.eigenvalues().data(), sector.eigenvalues().data() + sector.eigenvalues().size());
    std::vector<Complex> expected{0.0};
    for (auto a : {l1, l2})
      for (auto b : {l1, l2}) expected.push_back(a + std::conj(b));
    CHECK(multiset_distance(got, expected) <= 1e-10);

    const auto spec = spectral_decompose(l);
    bool found = false;
    for (auto v : got) found = found || v.real() <= -0.35 + 1e-10;
    CHECK(found);
    CHECK(std::abs(spec.eigenvalues(0)) <= 1e-12);
  }

  SUBCASE("full N=1 spectrum includes the coherences") {
    const CouplerParams params(0.25, 0.35);
    const auto spec = spectral_decompose(build_liouvillian(build_basis(1), params));
    const double w = *params.omega();
    const std::vector<Complex> mu{0.0, Complex(-0.175, w / 2), Complex(-0.175, -w / 2)};
    std::vector<Complex> expected;
    for (auto a : mu)
      for (auto b : mu) expected.push_back(a + std::conj(b));
    std::vector<Complex> got(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size());
    CHECK(multiset_distance(got, expected) <= 1e-10);
  }

  SUBCASE("eigenmode propagation agrees with expm off the exceptional point") {
    const CouplerParams params(0.25, 0.35);
    const auto l = build_liouvillian(basis, params);
    const auto spec = spectral_decompose(l);
    std::mt19937_64 rng(3);
    const DensityMatrix rho0(basis, random_density(6, rng));
    for (double z : {0.3, 2.0, 7.5}) {
      CHECK((propagate_modes(rho0, spec, basis, z).matrix() - propagate(rho0, l, z).matrix()).cwiseAbs().maxCoeff() <=
            1e-9);
    }
  }

  SUBCASE("exceptional point refuses eigenmode propagation") {
    const auto l = build_liouvillian(basis, CouplerParams(0.25, 0.5));
    const auto spec = spectral_decompose(l);
    CHECK(spec.defective);
    CHECK(spec.condition_number > 0.0);
    const auto pair = DensityMatrix::pure(basis, {1, 1});
    CHECK_THROWS_AS(propagate_modes(pair, spec, basis, 1.0), NumericalError);
    CHECK_NOTHROW(propagate(pair, l, 1.0).validate());
  }
}

TEST_CASE("CPTP properties over random parameters and states") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> kappa_dist(0.05, 1.0);
  std::uniform_real_distribution<double> ratio_dist(0.0, 3.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double kappa = kappa_dist(rng);
    const CouplerParams params(kappa, ratio_dist(rng) * kappa);
    const int n = 1 + trial % 3;
    const auto basis = build_basis(n);
    const auto l = build_liouvillian(basis, params);
    const DensityMatrix rho0(basis, random_density(basis->dimension(), rng));
    double previous_trace = rho0.trace();
    for (int k = 1; k <= 40; ++k) {
      const double z = 0.25 * k;
      const auto rho = propagate(rho0, l, z);
      CHECK(rho.hermiticity_residual() <= 1e-12);
      CHECK(rho.min_eigenvalue() >= -1e-10);
      CHECK(rho.trace() <= previous_trace + 1e-12);
      previous_trace = rho.trace();
    }
    // Semigroup
    const auto split = propagate(propagate(rho0, l, 1.3), l, 2.1);
    CHECK((split.matrix() - propagate(rho0, l, 3.4).matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("trace conservation without loss") {
    const CouplerParams params(0.25, 0.0);
    const auto basis = build_basis(2);
    const auto l = build_liouvillian(basis, params);
    const auto rho0 = DensityMatrix(basis, random_density(6, rng));
    for (double z = 0.0; z <= 10 * params.coupling_length(); z += 1.7) {
      CHECK(std::abs(propagate(rho0, l, z).trace() - rho0.trace()) <= 1e-12);
    }
  }
}

TEST_CASE("debug JSON dump") {
  const auto l = build_liouvillian(build_basis(1), CouplerParams(0.25, 0.35));
  const auto j = to_json(l);
  CHECK(j["dimension"] == 9);
  CHECK(j["vectorization"] == "column_stacking");
  REQUIRE(j["entries"].size() == 9);
  CHECK(j["entries"][0].size() == 9);
  CHECK(j["entries"][0][0].size() == 2);

  const auto s = to_json(spectral_decompose(l));
  CHECK(s["eigenvalues"].size() == 9);
  CHECK(s["defective"] == false);
}
