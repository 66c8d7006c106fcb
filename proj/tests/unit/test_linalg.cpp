#include "qmap/error.hpp"
#include "qmap/linalg.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qmap;
using namespace qmap::test;

TEST(Kron, MatchesIndexFormula) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix a = random_hermitian(2 + trial % 2, rng);
        const ComplexMatrix b = random_hermitian(3, rng);
        EXPECT_LT(max_abs(kron(a, b) - kron_loops(a, b)), 1e-15);
    }
}

TEST(Kron, RejectsOversizedProduct) {
    EXPECT_THROW(kron(identity(64), identity(64), 1024), DimensionError);
}

TEST(Kron, NonSquareFactors) {
    ComplexMatrix a(2, 1);
    a << 1, 2;
    ComplexMatrix b(1, 3);
    b << 1, kI, -1;
    EXPECT_LT(max_abs(kron(a, b) - kron_loops(a, b)), 1e-15);
}

TEST(HermitianEig, PauliCombination) {
    const HermitianEig e = hermitian_eig(sx() + sz());
    EXPECT_NEAR(e.eigenvalues(0), -std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(e.eigenvalues(1), std::sqrt(2.0), 1e-14);
}

TEST(HermitianEig, EigenvaluesAreCharacteristicRoots) {
    std::mt19937_64 rng(11);
    const ComplexMatrix h = random_hermitian(6, rng);
    const HermitianEig e = hermitian_eig(h);
    for (Eigen::Index k = 0; k < 6; ++k) {
        // Sign change of det(h - λ) across each root, sampled by LU.
        const Complex lo = (h - (e.eigenvalues(k) - 1e-6) * eye(6)).determinant();
        const Complex hi = (h - (e.eigenvalues(k) + 1e-6) * eye(6)).determinant();
        EXPECT_LT(lo.real() * hi.real(), 0.0);
    }
    const ComplexMatrix back = e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint();
    EXPECT_LT(max_abs(back - h), 1e-12);
    EXPECT_LT(max_abs(e.eigenvectors.adjoint() * e.eigenvectors - eye(6)), 1e-12);
}

TEST(HermitianEig, RejectsNonHermitian) {
    ComplexMatrix m = sx();
    m(0, 1) = 2.0;
    EXPECT_THROW(hermitian_eig(m), ContractError);
}

TEST(UnitaryExp, MatchesTaylorSeries) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 4; ++trial) {
        const ComplexMatrix h = random_hermitian(4, rng);
        const double t = 0.3 + trial;
        const ComplexMatrix u = unitary_exp(h, t);
        EXPECT_LT(max_abs(u - taylor_unitary(h, t)), 1e-11);
        EXPECT_LT(max_abs(u.adjoint() * u - eye(4)), 1e-12);
    }
}

TEST(UnitaryExp, PauliRotationClosedForm) {
    // e^{-i θ σx} = cos θ I − i sin θ σx
    const double theta = 0.7;
    const ComplexMatrix expect = std::cos(theta) * eye(2) - kI * std::sin(theta) * sx();
    EXPECT_LT(max_abs(unitary_exp(sx(), theta) - expect), 1e-15);
}

TEST(PartialTrace, MatchesIndexSums) {
    std::mt19937_64 rng(5);
    const ComplexMatrix m = random_state_matrix(12, rng);
    EXPECT_LT(max_abs(partial_trace(m, 3, 4, Keep::A) - trace_out_b(m, 3, 4)), 1e-15);
    EXPECT_LT(max_abs(partial_trace(m, 3, 4, Keep::B) - trace_out_a(m, 3, 4)), 1e-15);
}

TEST(PartialTrace, ProductStateFactors) {
    std::mt19937_64 rng(6);
    const ComplexMatrix a = random_state_matrix(2, rng);
    const ComplexMatrix b = random_state_matrix(4, rng);
    const ComplexMatrix ab = kron_loops(a, b);
    EXPECT_LT(max_abs(partial_trace(ab, 2, 4, Keep::A) - a), 1e-15);
    EXPECT_LT(max_abs(partial_trace(ab, 2, 4, Keep::B) - b), 1e-15);
}

TEST(PartialTrace, RejectsWrongDimensions) {
    EXPECT_THROW(partial_trace(identity(6), 4, 2, Keep::A), DimensionError);
}

TEST(DensityMatrix, Validation) {
    EXPECT_NO_THROW(DensityMatrix::from(eye(2) / 2.0));
    EXPECT_THROW(DensityMatrix::from(eye(2)), ContractError);
    ComplexMatrix skew = eye(2) / 2.0;
    skew(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix::from(skew), ContractError);
    ComplexMatrix negative(2, 2);
    negative << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityMatrix::from(negative), PositivityError);
    ComplexMatrix nan = eye(2) / 2.0;
    nan(0, 0) = std::nan("");
    EXPECT_THROW(DensityMatrix::from(nan), ContractError);
}

TEST(DensityMatrix, Constructors) {
    EXPECT_LT(max_abs(DensityMatrix::maximally_mixed(4).matrix() - eye(4) / 4.0), 1e-16);
    ComplexVector psi(2);
    psi << 3.0, 4.0 * kI;
    const ComplexMatrix p = DensityMatrix::pure(psi).matrix();
    EXPECT_NEAR(p(0, 0).real(), 9.0 / 25.0, 1e-15);
    EXPECT_NEAR(std::abs(p(0, 1) - Complex(0, -12.0 / 25.0)), 0.0, 1e-15);
    RealVector pops(3);
    pops << 1.0, 2.0, 1.0;
    EXPECT_NEAR(DensityMatrix::diagonal(pops).matrix()(1, 1).real(), 0.5, 1e-16);
    pops(0) = -1.0;
    EXPECT_THROW(DensityMatrix::diagonal(pops), ContractError);
}

TEST(Entropy, ShannonOnDiagonalStates) {
    RealVector p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    const double shannon = -(0.1 * std::log(0.1) + 0.2 * std::log(0.2) + 0.3 * std::log(0.3) + 0.4 * std::log(0.4));
    EXPECT_NEAR(vn_entropy(DensityMatrix::diagonal(p)), shannon, 1e-14);
    EXPECT_NEAR(vn_entropy(DensityMatrix::maximally_mixed(8)), std::log(8.0), 1e-14);
    ComplexVector psi = ComplexVector::Zero(4);
    psi(2) = 1.0;
    EXPECT_NEAR(vn_entropy(DensityMatrix::pure(psi)), 0.0, 1e-15);
}

TEST(Entropy, UnitaryInvariance) {
    std::mt19937_64 rng(8);
    const DensityMatrix rho = random_density(4, rng);
    const ComplexMatrix u = taylor_unitary(random_hermitian(4, rng), 1.3);
    const DensityMatrix rotated = DensityMatrix::from(u * rho.matrix() * u.adjoint(), 1e-9);
    EXPECT_NEAR(vn_entropy(rotated), vn_entropy(rho), 1e-11);
}

TEST(RelativeEntropy, ClassicalKullbackLeibler) {
    RealVector p(3);
    p << 0.5, 0.3, 0.2;
    RealVector q(3);
    q << 0.2, 0.2, 0.6;
    EXPECT_NEAR(rel_entropy(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q)),
                classical_kl({0.5, 0.3, 0.2}, {0.2, 0.2, 0.6}), 1e-14);
}

TEST(RelativeEntropy, ZeroOnlyForEqualStates) {
    std::mt19937_64 rng(9);
    const DensityMatrix a = random_density(3, rng);
    const DensityMatrix b = random_density(3, rng);
    EXPECT_NEAR(rel_entropy(a, a), 0.0, 1e-12);
    EXPECT_GT(rel_entropy(a, b), 0.0);
}

TEST(RelativeEntropy, SupportViolation) {
    RealVector p(2);
    p << 0.5, 0.5;
    RealVector q(2);
    q << 1.0, 0.0;
    EXPECT_THROW(rel_entropy(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q)), SupportError);
    EXPECT_NEAR(rel_entropy(DensityMatrix::diagonal(q), DensityMatrix::diagonal(p)), std::log(2.0), 1e-14);
}

TEST(LogClamped, CountsFlooredEigenvalues) {
    RealVector p(3);
    p << 1.0, 0.0, 0.0;
    int clamped = 0;
    const ComplexMatrix l = log_clamped(DensityMatrix::diagonal(p).matrix(), &clamped);
    EXPECT_EQ(clamped, 2);
    EXPECT_NEAR(l(1, 1).real(), std::log(kEigFloor), 1e-12);
    EXPECT_NEAR(l(0, 0).real(), 0.0, 1e-15);
}

TEST(Norms, Definitions) {
    ComplexMatrix a(2, 2);
    a << 1, -2, kI, 0.5;
    EXPECT_NEAR(inf_norm(a), 3.0, 1e-15);
    EXPECT_NEAR(hs_distance(a, ComplexMatrix::Zero(2, 2)), 1 + 4 + 1 + 0.25, 1e-15);
    EXPECT_NEAR(spectral_norm(2.0 * sz()), 2.0, 1e-15);
    EXPECT_NEAR(hermiticity_defect(sy()), 0.0, 1e-16);
    EXPECT_LT(max_abs(commutator(sx(), sy()) - 2.0 * kI * sz()), 1e-15);
    EXPECT_THROW(hs_distance(eye(2), eye(3)), DimensionError);
}

TEST(Random, DensityIsValidAndSeedDeterministic) {
    std::mt19937_64 a(42);
    std::mt19937_64 b(42);
    const DensityMatrix x = random_density(5, a);
    const DensityMatrix y = random_density(5, b);
    EXPECT_EQ(max_abs(x.matrix() - y.matrix()), 0.0);
    EXPECT_NEAR(x.matrix().trace().real(), 1.0, 1e-14);
    EXPECT_GE(hermitian_eig(x.matrix()).eigenvalues.minCoeff(), 0.0);
}
