#pragma once

#include <json.hpp>

#include "ptq/coupler_params.hpp"
#include "ptq/fock_space.hpp"

namespace ptq {

/// Column-stacking vectorization: vec(rho)[i + d*j] = rho(i, j).
CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, Eigen::Index dimension);

/// Generator of the master equation in Liouville space,
///
///   L rho = -i[H, rho] + gamma (2 a_L rho a_L^dag - {a_L^dag a_L, rho}),
///
/// stored as the d^2 x d^2 matrix
///
///   -i(I (x) H - H^T (x) I) + gamma(2 conj(a_L) (x) a_L - I (x) n_L - n_L^T (x) I)
///
/// acting on column-stacked density matrices.
class Superoperator {
 public:
  Superoperator(BasisPtr basis, CouplerParams params, CMatrix entries);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const CouplerParams& params() const { return params_; }
  const CMatrix& matrix() const { return entries_; }

  DensityMatrix apply(const DensityMatrix& rho) const;

 private:
  BasisPtr basis_;
  CouplerParams params_;
  CMatrix entries_;
};

Superoperator build_liouvillian(BasisPtr basis, const CouplerParams& params);

/// expm(L z) as a d^2 x d^2 matrix. Throws NumericalError if not finite.
CMatrix evolution_operator(const Superoperator& superop, double z);

/// rho(z) = expm(L z) rho0 via scaling and squaring with a Pade approximant.
/// Throws std::invalid_argument for z < 0 or a basis mismatch and
/// NumericalError if the exponential is not finite.
DensityMatrix propagate(const DensityMatrix& rho0, const Superoperator& superop, double z);

/// Fixed-step RK4 for d rho/dz = L rho evaluated directly on d x d matrices.
/// Never touches the Liouville-space matrix, so it can serve as an
/// independent check of propagate().
class Rk4Integrator {
 public:
  Rk4Integrator(BasisPtr basis, const CouplerParams& params);

  /// Advances by dz using ceil(dz / step) equal substeps.
  CMatrix advance(const CMatrix& rho, double dz, double step) const;
  CMatrix derivative(const CMatrix& rho) const;

 private:
  BasisPtr basis_;
  double gamma_;
  CMatrix h_;
  CMatrix a_l_;
  CMatrix n_l_;
};

inline constexpr double kDefaultRk4Step = 1e-3;

/// Throws std::invalid_argument for step <= 0, z < 0 or step > z (z > 0), and
/// NumericalError when the result is not finite.
DensityMatrix rk4_integrate(const DensityMatrix& rho0, const CouplerParams& params, double z,
                            double step = kDefaultRk4Step);

/// Two-photon coincidence tr(rho a_L^dag a_R^dag a_R a_L). Throws
/// NumericalError below -1e-10.
double coincidence(const DensityMatrix& rho);

struct SpectralDecomposition {
  /// Sorted by descending real part, then ascending imaginary part.
  CVector eigenvalues;
  /// Right eigenvectors as columns.
  CMatrix right;
  /// Left eigenvectors as columns, normalized so that left^dag right = I.
  CMatrix left;
  /// max |<l_i|r_j> - delta_ij|
  double biorthogonality_residual = 0.0;
  /// 2-norm condition number of the right eigenvector matrix.
  double condition_number = 0.0;
  /// Set at the exceptional point, where L is not diagonalizable.
  bool defective = false;
};

SpectralDecomposition spectral_decompose(const Superoperator& superop);

/// Eigenmode propagation sum_k exp(lambda_k z) r_k <l_k|rho0>. Throws
/// NumericalError when the decomposition is flagged defective.
DensityMatrix propagate_modes(const DensityMatrix& rho0, const SpectralDecomposition& spectrum,
                              const BasisPtr& basis, double z);

/// Restriction of L to the invariant subspace spanned by |m><n| with equal
/// photon numbers N(m) = N(n) <= max_photons.
CMatrix number_diagonal_block(const Superoperator& superop, int max_photons);

/// Debug dumps; complex entries are written as [re, im] pairs.
nlohmann::json to_json(const Superoperator& superop);
nlohmann::json to_json(const SpectralDecomposition& spectrum);

}  // namespace ptq
