#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace ptq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Operators over a FockBasis are plain dense complex matrices.
using OperatorMatrix = CMatrix;

enum class Mode { L, R };

/// Occupation numbers |n_L, n_R> of the two waveguide modes.
struct FockState {
  int n_left = 0;
  int n_right = 0;

  int total() const { return n_left + n_right; }
  int occupation(Mode mode) const { return mode == Mode::L ? n_left : n_right; }

  friend bool operator==(const FockState&, const FockState&) = default;
};

/// Two-mode Fock states with n_L + n_R <= truncation.
///
/// States are ordered by ascending total photon number and, within a fixed
/// total, by ascending n_L. For truncation 2 this is
///   (0,0) (0,1) (1,0) (0,2) (1,1) (2,0)
/// Every matrix and file in the project uses this order.
class FockBasis {
 public:
  explicit FockBasis(int truncation);

  int truncation() const { return truncation_; }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(states_.size()); }
  const std::vector<FockState>& states() const { return states_; }
  const FockState& state(Eigen::Index i) const { return states_[static_cast<std::size_t>(i)]; }

  bool contains(const FockState& s) const;
  std::optional<Eigen::Index> find(const FockState& s) const;
  /// Throws std::out_of_range if the state lies outside the truncation.
  Eigen::Index index(const FockState& s) const;

  friend bool operator==(const FockBasis& a, const FockBasis& b) {
    return a.truncation_ == b.truncation_;
  }

 private:
  int truncation_;
  std::vector<FockState> states_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Throws std::invalid_argument for a negative truncation.
BasisPtr build_basis(int truncation);

OperatorMatrix annihilator(const FockBasis& basis, Mode mode);
OperatorMatrix creator(const FockBasis& basis, Mode mode);
OperatorMatrix number_operator(const FockBasis& basis, Mode mode);
OperatorMatrix total_number_operator(const FockBasis& basis);

/// H = kappa (a_L^dag a_R + a_L a_R^dag), hbar = 1. Throws
/// std::invalid_argument unless kappa > 0.
OperatorMatrix hamiltonian(const FockBasis& basis, double kappa);

/// Photonic density operator over a FockBasis.
///
/// Construction only checks the shape. Physical invariants (Hermiticity,
/// trace in [0, 1], positivity) are checked on demand by validate(), since
/// intermediate integrator states may legitimately violate them by rounding.
class DensityMatrix {
 public:
  static constexpr double kHermiticityTolerance = 1e-12;
  static constexpr double kPositivityTolerance = 1e-10;

  DensityMatrix(BasisPtr basis, CMatrix entries);

  static DensityMatrix pure(BasisPtr basis, const FockState& state);
  static DensityMatrix vacuum(BasisPtr basis);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const CMatrix& matrix() const { return entries_; }
  Eigen::Index dimension() const { return entries_.rows(); }

  double trace() const;
  /// max_ij |rho_ij - conj(rho_ji)|
  double hermiticity_residual() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;

  /// Throws NumericalError naming the first violated invariant.
  void validate() const;

 private:
  BasisPtr basis_;
  CMatrix entries_;
};

/// tr(rho a^dag a) for the chosen mode. Throws NumericalError if the value is
/// below -1e-10.
double number_expectation(const DensityMatrix& rho, Mode mode);

/// Mixture sum_k w_k |s_k><s_k|. Weights are used as given.
DensityMatrix mixture(BasisPtr basis, const std::vector<std::pair<double, FockState>>& terms);

}  // namespace ptq
