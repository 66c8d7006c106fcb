#include "qmap/thermo.hpp"

#include "qmap/error.hpp"
#include "qmap/model.hpp"

#include <cmath>
#include <sstream>

namespace qmap {

ThermoRecord& ThermoRecord::operator+=(const ThermoRecord& o) {
    dE += o.dE;
    Q += o.Q;
    W += o.W;
    dS += o.dS;
    dSi += o.dSi;
    return *this;
}

ThermoRecord operator+(ThermoRecord a, const ThermoRecord& b) {
    a += b;
    return a;
}

namespace {

double expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
    return (op * rho).trace().real();
}

}  // namespace

double gibbs_relative_entropy(const DensityMatrix& rho, const ComplexMatrix& h, double beta) {
    if (h.rows() != rho.dim()) {
        throw DimensionError("gibbs_relative_entropy: dimension mismatch");
    }
    const RealVector e = hermitian_eig(h).eigenvalues;
    const double e0 = e.minCoeff();
    const double log_z = -beta * e0 + std::log((-beta * (e.array() - e0)).exp().sum());
    return -vn_entropy(rho) + beta * expectation(h, rho.matrix()) + log_z;
}

ThermoRecord process_averages(const MapSpec& spec, const DensityMatrix& rho) {
    const TotalState after = apply_total(spec, rho);
    const ComplexMatrix& hs = spec.system_hamiltonian();
    const ComplexMatrix& hb = spec.bath_hamiltonian();
    const ComplexMatrix before_total = kron(rho.matrix(), spec.bath_gibbs().matrix());
    const ComplexMatrix h_free = kron(hs, identity(spec.bath_dim())) +
                                 kron(identity(spec.system_dim()), hb);

    ThermoRecord r;
    r.dE = expectation(hs, after.system.matrix() - rho.matrix());
    r.Q = expectation(hb, spec.bath_gibbs().matrix() - after.bath.matrix());
    r.W = expectation(h_free, after.total.matrix() - before_total);
    r.dS = vn_entropy(after.system) - vn_entropy(rho);
    r.dSi = rel_entropy(after.total,
                        DensityMatrix::trusted(kron(after.system.matrix(), spec.bath_gibbs().matrix())));
    return r;
}

ThermoRecord equilibrium_averages(const MapSpec& spec, const ComplexMatrix& h0, const DensityMatrix& rho) {
    const double residual = commutation_residual(spec, h0);
    if (residual >= kCertificateTol) {
        std::ostringstream os;
        os << "equilibrium_averages: ||[U, H0 + H_B]|| = " << residual << " exceeds " << kCertificateTol;
        throw ContractError(os.str());
    }
    const KrausSet k = kraus_from_dilation(spec);
    const DensityMatrix out = DensityMatrix::trusted(apply_kraus(k, rho.matrix()));
    const ComplexMatrix delta = out.matrix() - rho.matrix();

    ThermoRecord r;
    r.dE = expectation(spec.system_hamiltonian(), delta);
    r.Q = expectation(h0, delta);
    r.W = expectation(spec.system_hamiltonian() - h0, delta);
    r.dS = vn_entropy(out) - vn_entropy(rho);
    r.dSi = gibbs_relative_entropy(rho, h0, spec.beta()) - gibbs_relative_entropy(out, h0, spec.beta());
    return r;
}

DeffnerTerms deffner_decomposition(const MapSpec& spec, const ComplexMatrix& h0, const DensityMatrix& rho) {
    const double c = inf_norm(commutator(h0, spec.system_hamiltonian()));
    if (c >= 1e-10) {
        std::ostringstream os;
        os << "deffner_decomposition: ||[H0, H_S]|| = " << c << " is not zero";
        throw ContractError(os.str());
    }
    const ThermoRecord rec = process_averages(spec, rho);
    const DensityMatrix out = apply_total(spec, rho).system;
    const ComplexMatrix& hs = spec.system_hamiltonian();
    return {gibbs_relative_entropy(rho, hs, spec.beta()), gibbs_relative_entropy(out, hs, spec.beta()),
            spec.beta() * rec.W};
}

}  // namespace qmap
