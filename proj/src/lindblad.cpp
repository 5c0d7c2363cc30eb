#include "ptq/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "ptq/errors.hpp"

namespace ptq {
namespace {

void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(where) + ": density matrix and superoperator use different bases");
  }
}

nlohmann::json complex_pair(const Complex& c) { return nlohmann::json::array({c.real(), c.imag()}); }

nlohmann::json matrix_json(const CMatrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_pair(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

CVector vectorize(const CMatrix& rho) {
  return Eigen::Map<const CVector>(rho.data(), rho.size());
}

CMatrix unvectorize(const CVector& v, Eigen::Index dimension) {
  if (v.size() != dimension * dimension) {
    throw std::invalid_argument("unvectorize: length " + std::to_string(v.size()) +
                                " is not the square of " + std::to_string(dimension));
  }
  return Eigen::Map<const CMatrix>(v.data(), dimension, dimension);
}

Superoperator::Superoperator(BasisPtr basis, CouplerParams params, CMatrix entries)
    : basis_(std::move(basis)), params_(params), entries_(std::move(entries)) {
  const auto d2 = basis_->dimension() * basis_->dimension();
  if (entries_.rows() != d2 || entries_.cols() != d2) {
    throw std::invalid_argument("Superoperator: expected " + std::to_string(d2) + "x" +
                                std::to_string(d2) + " matrix, got " + std::to_string(entries_.rows()) +
                                "x" + std::to_string(entries_.cols()));
  }
}

DensityMatrix Superoperator::apply(const DensityMatrix& rho) const {
  require_same_basis(rho.basis(), *basis_, "Superoperator::apply");
  return DensityMatrix(basis_, unvectorize(entries_ * vectorize(rho.matrix()), basis_->dimension()));
}

Superoperator build_liouvillian(BasisPtr basis, const CouplerParams& params) {
  const auto d = basis->dimension();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix h = hamiltonian(*basis, params.kappa());
  const CMatrix a = annihilator(*basis, Mode::L);
  const CMatrix n = a.adjoint() * a;
  const Complex i_unit(0.0, 1.0);

  CMatrix l = -i_unit * (Eigen::kroneckerProduct(id, h).eval() -
                         Eigen::kroneckerProduct(h.transpose(), id).eval());
  if (params.gamma() > 0.0) {
    l += params.gamma() * (2.0 * Eigen::kroneckerProduct(a.conjugate(), a).eval() -
                           Eigen::kroneckerProduct(id, n).eval() -
                           Eigen::kroneckerProduct(n.transpose(), id).eval());
  }
  return Superoperator(std::move(basis), params, std::move(l));
}

CMatrix evolution_operator(const Superoperator& superop, double z) {
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw std::invalid_argument("evolution_operator: z must be finite and non-negative");
  }
  const CMatrix generator = superop.matrix() * z;
  CMatrix evolution = generator.exp();
  if (!evolution.allFinite()) {
    // Scaling stage as chosen by the degree-13 Pade branch (theta_13 = 5.37).
    const double norm = generator.cwiseAbs().colwise().sum().maxCoeff();
    const int stage = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 5.371920351148152))));
    throw NumericalError("matrix exponential did not converge: |Lz|_1 = " + std::to_string(norm) +
                         ", scaling stage " + std::to_string(stage));
  }
  return evolution;
}

DensityMatrix propagate(const DensityMatrix& rho0, const Superoperator& superop, double z) {
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw std::invalid_argument("propagate: z must be finite and non-negative");
  }
  require_same_basis(rho0.basis(), superop.basis(), "propagate");
  if (z == 0.0) return rho0;
  return DensityMatrix(rho0.basis_ptr(),
                       unvectorize(evolution_operator(superop, z) * vectorize(rho0.matrix()), rho0.dimension()));
}

Rk4Integrator::Rk4Integrator(BasisPtr basis, const CouplerParams& params)
    : basis_(std::move(basis)),
      gamma_(params.gamma()),
      h_(hamiltonian(*basis_, params.kappa())),
      a_l_(annihilator(*basis_, Mode::L)),
      n_l_(a_l_.adjoint() * a_l_) {}

CMatrix Rk4Integrator::derivative(const CMatrix& rho) const {
  const Complex i_unit(0.0, 1.0);
  CMatrix out = -i_unit * (h_ * rho - rho * h_);
  if (gamma_ > 0.0) {
    out += gamma_ * (2.0 * a_l_ * rho * a_l_.adjoint() - n_l_ * rho - rho * n_l_);
  }
  return out;
}

CMatrix Rk4Integrator::advance(const CMatrix& rho, double dz, double step) const {
  if (dz <= 0.0) return rho;
  const auto substeps = static_cast<long>(std::ceil(dz / step - 1e-12));
  const double h = dz / static_cast<double>(std::max(substeps, 1L));
  CMatrix state = rho;
  for (long k = 0; k < std::max(substeps, 1L); ++k) {
    const CMatrix k1 = derivative(state);
    const CMatrix k2 = derivative(state + 0.5 * h * k1);
    const CMatrix k3 = derivative(state + 0.5 * h * k2);
    const CMatrix k4 = derivative(state + h * k3);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return state;
}

DensityMatrix rk4_integrate(const DensityMatrix& rho0, const CouplerParams& params, double z,
                            double step) {
  if (!(step > 0.0)) throw std::invalid_argument("rk4_integrate: step must be positive");
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw std::invalid_argument("rk4_integrate: z must be finite and non-negative");
  }
  if (z == 0.0) return rho0;
  if (step > z) {
    throw std::invalid_argument("rk4_integrate: step " + std::to_string(step) +
                                " exceeds propagation length " + std::to_string(z));
  }
  const Rk4Integrator integrator(rho0.basis_ptr(), params);
  CMatrix out = integrator.advance(rho0.matrix(), z, step);
  if (!out.allFinite()) {
    throw NumericalError("rk4_integrate: non-finite state; step too coarse for the given rates");
  }
  return DensityMatrix(rho0.basis_ptr(), std::move(out));
}

double coincidence(const DensityMatrix& rho) {
  // a_L^dag a_R^dag a_R a_L = n_L n_R is diagonal in the Fock basis.
  double value = 0.0;
  for (Eigen::Index i = 0; i < rho.dimension(); ++i) {
    const auto& s = rho.basis().state(i);
    value += static_cast<double>(s.n_left * s.n_right) * rho.matrix()(i, i).real();
  }
  if (value < -DensityMatrix::kPositivityTolerance) {
    throw NumericalError("negative coincidence value " + std::to_string(value));
  }
  return std::max(value, 0.0);
}

SpectralDecomposition spectral_decompose(const Superoperator& superop) {
  const CMatrix& l = superop.matrix();
  if (!l.allFinite()) throw NumericalError("spectral_decompose: superoperator has non-finite entries");

  Eigen::ComplexEigenSolver<CMatrix> solver(l, true);
  if (solver.info() != Eigen::Success) throw NumericalError("spectral_decompose: eigensolver failed");

  const auto n = l.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const CVector& raw = solver.eigenvalues();
  // Real parts closer than 1e-9 count as equal so that rounding noise does not
  // reshuffle degenerate groups.
  auto real_key = [&](Eigen::Index i) { return std::round(raw(i).real() * 1e9); };
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (real_key(a) != real_key(b)) return real_key(a) > real_key(b);
    return raw(a).imag() < raw(b).imag();
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = raw(order[static_cast<std::size_t>(k)]);
    out.right.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }

  Eigen::JacobiSVD<CMatrix> svd(out.right);
  const auto& sv = svd.singularValues();
  out.condition_number = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  out.defective = superop.params().regime() == Regime::ExceptionalPoint || !std::isfinite(out.condition_number) ||
                  out.condition_number > 1e12;

  // Rows of V^{-1} are the dual (left) eigenvectors.
  out.left = out.right.fullPivLu().inverse().adjoint();
  out.biorthogonality_residual =
      (out.left.adjoint() * out.right - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return out;
}

DensityMatrix propagate_modes(const DensityMatrix& rho0, const SpectralDecomposition& spectrum,
                              const BasisPtr& basis, double z) {
  if (spectrum.defective) {
    throw NumericalError("eigenmode propagation refused: Liouvillian is defective (condition number " +
                         std::to_string(spectrum.condition_number) + ")");
  }
  if (!(z >= 0.0)) throw std::invalid_argument("propagate_modes: z must be non-negative");
  require_same_basis(rho0.basis(), *basis, "propagate_modes");
  const CVector weights = spectrum.left.adjoint() * vectorize(rho0.matrix());
  const CVector evolved = weights.cwiseProduct((spectrum.eigenvalues * z).array().exp().matrix());
  return DensityMatrix(basis, unvectorize(spectrum.right * evolved, basis->dimension()));
}

CMatrix number_diagonal_block(const Superoperator& superop, int max_photons) {
  const auto& basis = superop.basis();
  const auto d = basis.dimension();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const int ni = basis.state(i).total();
      if (ni == basis.state(j).total() && ni <= max_photons) keep.push_back(i + d * j);
    }
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  CMatrix block(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      block(r, c) = superop.matrix()(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
    }
  }
  return block;
}

nlohmann::json to_json(const Superoperator& superop) {
  return {
      {"kind", "liouvillian"},
      {"vectorization", "column_stacking"},
      {"truncation", superop.basis().truncation()},
      {"kappa", superop.params().kappa()},
      {"gamma", superop.params().gamma()},
      {"dimension", superop.matrix().rows()},
      {"entries", matrix_json(superop.matrix())},
  };
}

nlohmann::json to_json(const SpectralDecomposition& spectrum) {
  auto values = nlohmann::json::array();
  for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k) {
    values.push_back(complex_pair(spectrum.eigenvalues(k)));
  }
  return {
      {"kind", "liouvillian_spectrum"},
      {"eigenvalues", std::move(values)},
      {"biorthogonality_residual", spectrum.biorthogonality_residual},
      {"condition_number", spectrum.condition_number},
      {"defective", spectrum.defective},
  };
}

}  // namespace ptq
