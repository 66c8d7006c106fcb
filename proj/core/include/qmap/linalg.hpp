// linalg.hpp: dense complex kernels shared by every module.
//
// ComplexMatrix is a plain Eigen::MatrixXcd; DensityMatrix is a validated
// wrapper around one. All functions are pure and thread-safe.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <random>

namespace qmap {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxDim = std::size_t{1} << 14;

// Eigenvalue floor used in logarithms; values in (kPositivityFloor, kEigFloor)
// are clamped up to kEigFloor, values below kPositivityFloor are rejected.
inline constexpr double kEigFloor = 1e-12;
inline constexpr double kPositivityFloor = -1e-9;

inline constexpr double kHermitianTol = 1e-10;

struct HermitianEig {
    RealVector eigenvalues;       // ascending
    ComplexMatrix eigenvectors;   // columns, unitary
};

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
public:
    /// Validates m (square, finite, Hermitian, trace 1, min eigenvalue
    /// >= kPositivityFloor) to `tol` and stores its Hermitian part.
    static DensityMatrix from(const ComplexMatrix& m, double tol = 1e-10);

    /// Hermitizes and renormalizes without any checks. For engine-internal
    /// states whose validity follows from construction.
    static DensityMatrix trusted(const ComplexMatrix& m);

    static DensityMatrix maximally_mixed(Eigen::Index dim);
    static DensityMatrix pure(const ComplexVector& psi);
    /// diag(p) after normalization; p must be non-negative.
    static DensityMatrix diagonal(const RealVector& p);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

ComplexMatrix identity(Eigen::Index dim);

/// a ⊗ b with (a⊗b)[ia*db+ib, ja*db+jb] = a[ia,ja] * b[ib,jb].
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t max_dim = kMaxDim);

/// Eigen-decomposition of a Hermitian matrix; rejects ||h - h†||∞ >= kHermitianTol.
HermitianEig hermitian_eig(const ComplexMatrix& h);

/// V f(λ) V† for Hermitian h.
ComplexMatrix hermitian_function(const ComplexMatrix& h, const std::function<double(double)>& f);

/// e^{-i h t} via the spectral decomposition of h.
ComplexMatrix unitary_exp(const ComplexMatrix& h, double t);

enum class Keep { A, B };

/// Partial trace of m on H_A ⊗ H_B, keeping the requested factor.
ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index dim_a, Eigen::Index dim_b, Keep keep);

/// Spectral logarithm with the eigenvalue floor. `clamped` (optional)
/// receives the number of eigenvalues raised to kEigFloor.
ComplexMatrix log_clamped(const ComplexMatrix& rho, int* clamped = nullptr);

/// -Σ λ ln λ over eigenvalues λ > kEigFloor.
double vn_entropy(const DensityMatrix& rho);

/// D(a||b) = Tr[a ln a] - Tr[a ln b]. Throws SupportError when a has weight
/// above 1e-10 on eigenvectors of b whose eigenvalue is below kEigFloor.
double rel_entropy(const DensityMatrix& a, const DensityMatrix& b);

/// Tr[(a-b)†(a-b)], the squared Frobenius distance.
double hs_distance(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Induced ∞-norm (max absolute row sum).
double inf_norm(const ComplexMatrix& m);

/// ||m - m†||∞
double hermiticity_defect(const ComplexMatrix& m);

/// Largest |λ| of a Hermitian matrix, or the spectral norm of a general one.
double spectral_norm(const ComplexMatrix& m);

/// Random density matrix from a normalized Ginibre product G G†.
DensityMatrix random_density(Eigen::Index dim, std::mt19937_64& rng);

/// Random Hermitian matrix with independent Gaussian entries.
ComplexMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng);

}  // namespace qmap
