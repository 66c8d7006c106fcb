#include "qmap/linalg.hpp"

#include "qmap/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace qmap {

namespace {

void require_square(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << who << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
}

bool all_finite(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            return false;
        }
    }
    return true;
}

}  // namespace

DensityMatrix DensityMatrix::from(const ComplexMatrix& m, double tol) {
    require_square(m, "DensityMatrix");
    if (!all_finite(m)) {
        throw ContractError("DensityMatrix: non-finite entry");
    }
    if (hermiticity_defect(m) > tol) {
        throw ContractError("DensityMatrix: matrix is not Hermitian");
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "DensityMatrix: trace " << tr << " differs from 1";
        throw ContractError(os.str());
    }
    ComplexMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < kPositivityFloor) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << min_eig;
        throw PositivityError(os.str());
    }
    return DensityMatrix(std::move(herm));
}

DensityMatrix DensityMatrix::trusted(const ComplexMatrix& m) {
    ComplexMatrix herm = 0.5 * (m + m.adjoint());
    herm /= herm.trace().real();
    return DensityMatrix(std::move(herm));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    if (dim <= 0) {
        throw DimensionError("maximally_mixed: dimension must be positive");
    }
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (psi.size() == 0 || n == 0.0) {
        throw ContractError("DensityMatrix::pure: zero vector");
    }
    const ComplexVector u = psi / n;
    return DensityMatrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::diagonal(const RealVector& p) {
    if (p.size() == 0 || p.minCoeff() < 0.0 || p.sum() <= 0.0) {
        throw ContractError("DensityMatrix::diagonal: populations must be non-negative with positive sum");
    }
    ComplexMatrix m = ComplexMatrix::Zero(p.size(), p.size());
    m.diagonal() = (p / p.sum()).cast<Complex>();
    return DensityMatrix(std::move(m));
}

ComplexMatrix identity(Eigen::Index dim) {
    return ComplexMatrix::Identity(dim, dim);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dim) {
    const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows > max_dim || cols > max_dim) {
        std::ostringstream os;
        os << "kron: result " << rows << "x" << cols << " exceeds maximum dimension " << max_dim;
        throw DimensionError(os.str());
    }
    ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

HermitianEig hermitian_eig(const ComplexMatrix& h) {
    require_square(h, "hermitian_eig");
    if (!all_finite(h)) {
        throw ContractError("hermitian_eig: non-finite entry");
    }
    const double defect = hermiticity_defect(h);
    if (defect >= kHermitianTol) {
        std::ostringstream os;
        os << "hermitian_eig: matrix is not Hermitian (||h - h^dag|| = " << defect << ")";
        throw ContractError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) {
        throw IntegrityError("hermitian_eig: eigensolver did not converge");
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

ComplexMatrix hermitian_function(const ComplexMatrix& h, const std::function<double(double)>& f) {
    const HermitianEig eig = hermitian_eig(h);
    RealVector fl(eig.eigenvalues.size());
    for (Eigen::Index k = 0; k < fl.size(); ++k) {
        fl(k) = f(eig.eigenvalues(k));
    }
    return eig.eigenvectors * fl.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

ComplexMatrix unitary_exp(const ComplexMatrix& h, double t) {
    const HermitianEig eig = hermitian_eig(h);
    ComplexVector phases(eig.eigenvalues.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        phases(k) = std::exp(Complex(0.0, -eig.eigenvalues(k) * t));
    }
    return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index dim_a, Eigen::Index dim_b, Keep keep) {
    if (dim_a <= 0 || dim_b <= 0 || m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b) {
        std::ostringstream os;
        os << "partial_trace: " << m.rows() << "x" << m.cols() << " matrix does not factor as "
           << dim_a << " x " << dim_b;
        throw DimensionError(os.str());
    }
    if (keep == Keep::A) {
        ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
        for (Eigen::Index i = 0; i < dim_a; ++i) {
            for (Eigen::Index j = 0; j < dim_a; ++j) {
                out(i, j) = m.block(i * dim_b, j * dim_b, dim_b, dim_b).trace();
            }
        }
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_b, dim_b);
    for (Eigen::Index i = 0; i < dim_a; ++i) {
        out += m.block(i * dim_b, i * dim_b, dim_b, dim_b);
    }
    return out;
}

ComplexMatrix log_clamped(const ComplexMatrix& rho, int* clamped) {
    const HermitianEig eig = hermitian_eig(rho);
    RealVector logs(eig.eigenvalues.size());
    int count = 0;
    for (Eigen::Index k = 0; k < logs.size(); ++k) {
        const double l = eig.eigenvalues(k);
        if (l < kPositivityFloor) {
            std::ostringstream os;
            os << "log_clamped: negative eigenvalue " << l;
            throw PositivityError(os.str());
        }
        if (l < kEigFloor) {
            ++count;
        }
        logs(k) = std::log(std::max(l, kEigFloor));
    }
    if (clamped != nullptr) {
        *clamped = count;
    }
    return eig.eigenvectors * logs.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

double vn_entropy(const DensityMatrix& rho) {
    const HermitianEig eig = hermitian_eig(rho.matrix());
    double s = 0.0;
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        const double l = eig.eigenvalues(k);
        if (l < kPositivityFloor) {
            std::ostringstream os;
            os << "vn_entropy: negative eigenvalue " << l;
            throw PositivityError(os.str());
        }
        if (l > kEigFloor) {
            s -= l * std::log(l);
        }
    }
    return s;
}

double rel_entropy(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("rel_entropy: dimension mismatch");
    }
    constexpr double kSupportTol = 1e-10;
    const HermitianEig ea = hermitian_eig(a.matrix());
    const HermitianEig eb = hermitian_eig(b.matrix());

    double a_log_a = 0.0;
    for (Eigen::Index k = 0; k < ea.eigenvalues.size(); ++k) {
        const double l = ea.eigenvalues(k);
        if (l < kPositivityFloor) {
            throw PositivityError("rel_entropy: first argument has a negative eigenvalue");
        }
        if (l > kEigFloor) {
            a_log_a += l * std::log(l);
        }
    }

    // Tr[a ln b] = Σ_k <v_k|a|v_k> ln μ_k in the eigenbasis of b.
    const ComplexMatrix a_in_b = eb.eigenvectors.adjoint() * a.matrix() * eb.eigenvectors;
    double a_log_b = 0.0;
    for (Eigen::Index k = 0; k < eb.eigenvalues.size(); ++k) {
        const double mu = eb.eigenvalues(k);
        const double weight = a_in_b(k, k).real();
        if (mu < kPositivityFloor) {
            throw PositivityError("rel_entropy: second argument has a negative eigenvalue");
        }
        if (mu < kEigFloor && weight > kSupportTol) {
            std::ostringstream os;
            os << "rel_entropy: support violation (weight " << weight
               << " on eigenvalue " << mu << "), divergence is infinite";
            throw SupportError(os.str());
        }
        a_log_b += weight * std::log(std::max(mu, kEigFloor));
    }
    return a_log_a - a_log_b;
}

double hs_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("hs_distance: dimension mismatch");
    }
    return (a - b).squaredNorm();
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw DimensionError("commutator: dimension mismatch");
    }
    return a * b - b * a;
}

double inf_norm(const ComplexMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
    return inf_norm(m - m.adjoint());
}

double spectral_norm(const ComplexMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

DensityMatrix random_density(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        g.data()[i] = Complex(re, im);
    }
    return DensityMatrix::trusted(g * g.adjoint());
}

ComplexMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        g.data()[i] = Complex(re, im);
    }
    return 0.5 * (g + g.adjoint());
}

}  // namespace qmap
