#include "ptq/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "ptq/errors.hpp"

namespace ptq {

FockBasis::FockBasis(int truncation) : truncation_(truncation) {
  if (truncation < 0) {
    throw std::invalid_argument("FockBasis: truncation must be non-negative, got " +
                                std::to_string(truncation));
  }
  states_.reserve(static_cast<std::size_t>((truncation + 1) * (truncation + 2) / 2));
  for (int total = 0; total <= truncation; ++total) {
    for (int n_left = 0; n_left <= total; ++n_left) {
      states_.push_back({n_left, total - n_left});
    }
  }
}

bool FockBasis::contains(const FockState& s) const {
  return s.n_left >= 0 && s.n_right >= 0 && s.total() <= truncation_;
}

std::optional<Eigen::Index> FockBasis::find(const FockState& s) const {
  if (!contains(s)) return std::nullopt;
  // Offset of the block with total photon number t is t(t+1)/2.
  const int t = s.total();
  return static_cast<Eigen::Index>(t * (t + 1) / 2 + s.n_left);
}

Eigen::Index FockBasis::index(const FockState& s) const {
  if (auto i = find(s)) return *i;
  throw std::out_of_range("state |" + std::to_string(s.n_left) + "," + std::to_string(s.n_right) +
                          "> outside truncation " + std::to_string(truncation_));
}

BasisPtr build_basis(int truncation) { return std::make_shared<const FockBasis>(truncation); }

OperatorMatrix annihilator(const FockBasis& basis, Mode mode) {
  const auto d = basis.dimension();
  OperatorMatrix a = OperatorMatrix::Zero(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    FockState s = basis.state(col);
    const int n = s.occupation(mode);
    if (n == 0) continue;
    (mode == Mode::L ? s.n_left : s.n_right) -= 1;
    a(basis.index(s), col) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

OperatorMatrix creator(const FockBasis& basis, Mode mode) {
  return annihilator(basis, mode).adjoint();
}

OperatorMatrix number_operator(const FockBasis& basis, Mode mode) {
  const auto d = basis.dimension();
  OperatorMatrix n = OperatorMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) n(i, i) = basis.state(i).occupation(mode);
  return n;
}

OperatorMatrix total_number_operator(const FockBasis& basis) {
  return number_operator(basis, Mode::L) + number_operator(basis, Mode::R);
}

OperatorMatrix hamiltonian(const FockBasis& basis, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("hamiltonian: coupling kappa must be positive and finite");
  }
  const OperatorMatrix a_l = annihilator(basis, Mode::L);
  const OperatorMatrix a_r = annihilator(basis, Mode::R);
  // a_L a_R^dag is written as a_R^dag a_L: applying the creator first would
  // push the top photon-number sector out of the truncated space.
  return kappa * (a_l.adjoint() * a_r + a_r.adjoint() * a_l);
}

DensityMatrix::DensityMatrix(BasisPtr basis, CMatrix entries)
    : basis_(std::move(basis)), entries_(std::move(entries)) {
  if (!basis_) throw std::invalid_argument("DensityMatrix: null basis");
  if (entries_.rows() != basis_->dimension() || entries_.cols() != basis_->dimension()) {
    throw std::invalid_argument("DensityMatrix: shape " + std::to_string(entries_.rows()) + "x" +
                                std::to_string(entries_.cols()) + " does not match basis dimension " +
                                std::to_string(basis_->dimension()));
  }
}

DensityMatrix DensityMatrix::pure(BasisPtr basis, const FockState& state) {
  const auto d = basis->dimension();
  const auto i = basis->index(state);
  CMatrix m = CMatrix::Zero(d, d);
  m(i, i) = 1.0;
  return DensityMatrix(std::move(basis), std::move(m));
}

DensityMatrix DensityMatrix::vacuum(BasisPtr basis) { return pure(std::move(basis), {0, 0}); }

double DensityMatrix::trace() const { return entries_.trace().real(); }

double DensityMatrix::hermiticity_residual() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (!entries_.allFinite()) throw NumericalError("density matrix has non-finite entries");
  if (const double r = hermiticity_residual(); r > kHermiticityTolerance) {
    throw NumericalError("density matrix not Hermitian: residual " + std::to_string(r));
  }
  const double tr = trace();
  if (tr < -kPositivityTolerance || tr > 1.0 + kHermiticityTolerance) {
    throw NumericalError("density matrix trace " + std::to_string(tr) + " outside [0, 1]");
  }
  if (const double lmin = min_eigenvalue(); lmin < -kPositivityTolerance) {
    throw NumericalError("density matrix not positive: min eigenvalue " + std::to_string(lmin));
  }
}

double number_expectation(const DensityMatrix& rho, Mode mode) {
  // The number operator is diagonal, so tr(rho n) needs only the diagonal.
  double value = 0.0;
  for (Eigen::Index i = 0; i < rho.dimension(); ++i) {
    value += rho.basis().state(i).occupation(mode) * rho.matrix()(i, i).real();
  }
  if (value < -DensityMatrix::kPositivityTolerance) {
    throw NumericalError("negative photon number expectation " + std::to_string(value));
  }
  return std::max(value, 0.0);
}

DensityMatrix mixture(BasisPtr basis, const std::vector<std::pair<double, FockState>>& terms) {
  const auto d = basis->dimension();
  CMatrix m = CMatrix::Zero(d, d);
  for (const auto& [weight, state] : terms) {
    const auto i = basis->index(state);
    m(i, i) += weight;
  }
  return DensityMatrix(std::move(basis), std::move(m));
}

}  // namespace ptq
