#include "qmap/model.hpp"

#include "qmap/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmap {

ComplexMatrix pauli(Axis axis) {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    switch (axis) {
    case Axis::X:
        s(0, 1) = 1.0;
        s(1, 0) = 1.0;
        break;
    case Axis::Y:
        s(0, 1) = Complex(0.0, -1.0);
        s(1, 0) = Complex(0.0, 1.0);
        break;
    case Axis::Z:
        s(0, 0) = 1.0;
        s(1, 1) = -1.0;
        break;
    }
    return s;
}

ComplexMatrix pauli_site(Axis axis, int site, int n_spins) {
    if (n_spins < 1 || site < 1 || site > n_spins) {
        std::ostringstream os;
        os << "pauli_site: site " << site << " out of range for " << n_spins << " spins";
        throw ContractError(os.str());
    }
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 1; k <= n_spins; ++k) {
        out = kron(out, k == site ? pauli(axis) : identity(2));
    }
    return out;
}

bool SpinChainParams::is_xx() const {
    return std::all_of(jy.begin(), jy.end(), [](double v) { return v == 0.0; });
}

std::vector<double> SpinChainParams::yy_weights() const {
    return is_xx() ? jx : jy;
}

void SpinChainParams::validate() const {
    if (sites < 1) {
        throw ContractError("SpinChainParams: sites must be >= 1");
    }
    const auto bonds = static_cast<std::size_t>(sites - 1);
    if (jx.size() != bonds) {
        std::ostringstream os;
        os << "SpinChainParams: jx has " << jx.size() << " entries, expected " << bonds;
        throw ContractError(os.str());
    }
    if (!jy.empty() && jy.size() != bonds) {
        std::ostringstream os;
        os << "SpinChainParams: jy has " << jy.size() << " entries, expected " << bonds;
        throw ContractError(os.str());
    }
}

ComplexMatrix build_h0(const SpinChainParams& p) {
    p.validate();
    const Eigen::Index dim = Eigen::Index{1} << p.sites;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (int i = 1; i <= p.sites; ++i) {
        h += 0.5 * p.h * pauli_site(Axis::Z, i, p.sites);
    }
    return h;
}

ComplexMatrix build_chain(const SpinChainParams& p) {
    ComplexMatrix h = build_h0(p);
    const std::vector<double> yy = p.yy_weights();
    for (int i = 1; i < p.sites; ++i) {
        const auto b = static_cast<std::size_t>(i - 1);
        h -= p.jx[b] * pauli_site(Axis::X, i, p.sites) * pauli_site(Axis::X, i + 1, p.sites);
        h -= yy[b] * pauli_site(Axis::Y, i, p.sites) * pauli_site(Axis::Y, i + 1, p.sites);
    }
    return h;
}

ComplexMatrix build_bath(const BathParams& b) {
    if (!(b.beta > 0.0)) {
        throw ContractError("BathParams: beta must be > 0");
    }
    return 0.5 * b.h_b * pauli(Axis::Z);
}

ComplexMatrix build_coupling(const CouplingSpec& c, int n_system_spins) {
    if (c.site < 1 || c.site > n_system_spins) {
        std::ostringstream os;
        os << "build_coupling: site " << c.site << " out of range for " << n_system_spins
           << " system spins";
        throw ContractError(os.str());
    }
    const int n = n_system_spins + 1;
    const int bath = n;
    return c.jx_c * pauli_site(Axis::X, c.site, n) * pauli_site(Axis::X, bath, n) +
           c.jy_c * pauli_site(Axis::Y, c.site, n) * pauli_site(Axis::Y, bath, n);
}

DensityMatrix gibbs_state(const ComplexMatrix& h, double beta) {
    if (!(beta > 0.0)) {
        throw ContractError("gibbs_state: beta must be > 0");
    }
    const HermitianEig eig = hermitian_eig(h);
    const double e0 = eig.eigenvalues.minCoeff();
    RealVector w = (-(beta) * (eig.eigenvalues.array() - e0)).exp().matrix();
    w /= w.sum();
    return DensityMatrix::trusted(eig.eigenvectors * w.cast<Complex>().asDiagonal() *
                                  eig.eigenvectors.adjoint());
}

ComplexMatrix spin_flip_rotation(int n_spins) {
    if (n_spins < 1) {
        throw ContractError("spin_flip_rotation: need at least one spin");
    }
    const Complex i(0.0, 1.0);
    const ComplexMatrix single = (i * pauli(Axis::X)) * (i * pauli(Axis::Y));
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < n_spins; ++k) {
        out = kron(out, single);
    }
    return out;
}

}  // namespace qmap
