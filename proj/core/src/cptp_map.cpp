#include "qmap/cptp_map.hpp"

#include "qmap/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace qmap {

struct MapSpec::Data {
    ComplexMatrix h_system;
    ComplexMatrix h_bath;
    ComplexMatrix coupling;
    double tau = 0.0;
    double beta = 0.0;
    ComplexMatrix u;
    BathLevels bath;
    DensityMatrix bath_gibbs;
};

namespace {

BathLevels diagonalize_bath(const ComplexMatrix& h_bath, double beta) {
    const HermitianEig eig = hermitian_eig(h_bath);
    const Eigen::Index n = eig.eigenvalues.size();

    BathLevels out;
    out.vectors = eig.eigenvectors;
    out.energies = eig.eigenvalues;
    out.level.assign(static_cast<std::size_t>(n), 0);
    out.sub.assign(static_cast<std::size_t>(n), 0);

    // Group consecutive eigenvalues that sit within the gap tolerance.
    Eigen::Index start = 0;
    int level = 0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        if (k == n || eig.eigenvalues(k) - eig.eigenvalues(k - 1) > kDegeneracyTol) {
            const double mean = eig.eigenvalues.segment(start, k - start).mean();
            for (Eigen::Index m = start; m < k; ++m) {
                out.energies(m) = mean;
                out.level[static_cast<std::size_t>(m)] = level;
                out.sub[static_cast<std::size_t>(m)] = static_cast<int>(m - start);
            }
            if (k - start > 1) {
                out.degenerate = true;
            }
            ++level;
            start = k;
        }
    }

    const double e0 = out.energies.minCoeff();
    RealVector w = (-beta * (out.energies.array() - e0)).exp().matrix();
    const double sum = w.sum();
    out.weights = w / sum;
    out.partition = sum * std::exp(-beta * e0);
    return out;
}

void require_hermitian(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << "MapSpec: " << what << " must be a non-empty square matrix";
        throw DimensionError(os.str());
    }
    if (hermiticity_defect(m) >= kHermitianTol) {
        std::ostringstream os;
        os << "MapSpec: " << what << " is not Hermitian";
        throw ContractError(os.str());
    }
}

}  // namespace

std::shared_ptr<const MapSpec::Data> MapSpec::make(ComplexMatrix h_system, ComplexMatrix h_bath,
                                                   ComplexMatrix coupling, double tau, double beta) {
    require_hermitian(h_system, "H_S");
    require_hermitian(h_bath, "H_B");
    require_hermitian(coupling, "V");
    const Eigen::Index dim = h_system.rows() * h_bath.rows();
    if (coupling.rows() != dim) {
        std::ostringstream os;
        os << "MapSpec: coupling is " << coupling.rows() << "-dimensional, expected " << dim;
        throw DimensionError(os.str());
    }
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ContractError("MapSpec: tau must be finite and >= 0");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ContractError("MapSpec: beta must be finite and > 0");
    }
    const ComplexMatrix h_total = kron(h_system, identity(h_bath.rows())) +
                                  kron(identity(h_system.rows()), h_bath) + coupling;
    BathLevels bath = diagonalize_bath(h_bath, beta);
    ComplexMatrix omega = bath.vectors * bath.weights.cast<Complex>().asDiagonal() *
                          bath.vectors.adjoint();
    return std::make_shared<const Data>(Data{
        std::move(h_system), std::move(h_bath), std::move(coupling), tau, beta,
        unitary_exp(h_total, tau), std::move(bath), DensityMatrix::trusted(omega)});
}

MapSpec::MapSpec(ComplexMatrix h_system, ComplexMatrix h_bath, ComplexMatrix coupling, double tau,
                 double beta)
    : d_(make(std::move(h_system), std::move(h_bath), std::move(coupling), tau, beta)) {}

const ComplexMatrix& MapSpec::system_hamiltonian() const noexcept { return d_->h_system; }
const ComplexMatrix& MapSpec::bath_hamiltonian() const noexcept { return d_->h_bath; }
const ComplexMatrix& MapSpec::coupling() const noexcept { return d_->coupling; }
double MapSpec::tau() const noexcept { return d_->tau; }
double MapSpec::beta() const noexcept { return d_->beta; }
Eigen::Index MapSpec::system_dim() const noexcept { return d_->h_system.rows(); }
Eigen::Index MapSpec::bath_dim() const noexcept { return d_->h_bath.rows(); }
const ComplexMatrix& MapSpec::dilation() const noexcept { return d_->u; }
const BathLevels& MapSpec::bath_levels() const noexcept { return d_->bath; }
const DensityMatrix& MapSpec::bath_gibbs() const noexcept { return d_->bath_gibbs; }

ComplexMatrix MapSpec::total_hamiltonian() const {
    return kron(d_->h_system, identity(bath_dim())) + kron(identity(system_dim()), d_->h_bath) +
           d_->coupling;
}

ComplexMatrix dilation_unitary(const MapSpec& spec) {
    return spec.dilation();
}

KrausSet kraus_from_dilation(const MapSpec& spec) {
    const Eigen::Index ds = spec.system_dim();
    const Eigen::Index db = spec.bath_dim();
    const BathLevels& bath = spec.bath_levels();

    // U in the (system computational) ⊗ (bath eigen) basis.
    const ComplexMatrix w = kron(identity(ds), bath.vectors);
    const ComplexMatrix u = w.adjoint() * spec.dilation() * w;

    KrausSet out;
    out.system_dim = ds;
    out.beta = spec.beta();
    out.degenerate_bath = bath.degenerate;
    out.ops.reserve(static_cast<std::size_t>(db * db));
    for (Eigen::Index i = 0; i < db; ++i) {
        const double amp = std::sqrt(bath.weights(i));
        for (Eigen::Index j = 0; j < db; ++j) {
            KrausOperator k;
            k.op.resize(ds, ds);
            for (Eigen::Index a = 0; a < ds; ++a) {
                for (Eigen::Index b = 0; b < ds; ++b) {
                    k.op(a, b) = amp * u(a * db + j, b * db + i);
                }
            }
            k.i = static_cast<int>(i);
            k.j = static_cast<int>(j);
            k.level_i = bath.level[static_cast<std::size_t>(i)];
            k.level_j = bath.level[static_cast<std::size_t>(j)];
            k.eps_i = bath.energies(i);
            k.eps_j = bath.energies(j);
            k.p_i = bath.weights(i);
            out.ops.push_back(std::move(k));
        }
    }
    return out;
}

double completeness_residual(const KrausSet& k) {
    ComplexMatrix sum = ComplexMatrix::Zero(k.system_dim, k.system_dim);
    for (const auto& m : k.ops) {
        sum += m.op.adjoint() * m.op;
    }
    return inf_norm(sum - identity(k.system_dim));
}

ComplexMatrix apply_kraus(const KrausSet& k, const ComplexMatrix& rho) {
    if (rho.rows() != k.system_dim || rho.cols() != k.system_dim) {
        throw DimensionError("apply_kraus: state dimension does not match the Kraus set");
    }
    ComplexMatrix out = ComplexMatrix::Zero(k.system_dim, k.system_dim);
    for (const auto& m : k.ops) {
        out.noalias() += m.op * rho * m.op.adjoint();
    }
    return out;
}

DensityMatrix apply_map(const KrausSet& k, const DensityMatrix& rho) {
    const ComplexMatrix out = apply_kraus(k, rho.matrix());
    try {
        return DensityMatrix::from(out, 1e-10);
    } catch (const Error& e) {
        throw IntegrityError(std::string("apply_map: output is not a density matrix: ") + e.what());
    }
}

TotalState apply_total(const MapSpec& spec, const DensityMatrix& rho) {
    if (rho.dim() != spec.system_dim()) {
        throw DimensionError("apply_total: state dimension does not match H_S");
    }
    const ComplexMatrix& u = spec.dilation();
    const ComplexMatrix total = u * kron(rho.matrix(), spec.bath_gibbs().matrix()) * u.adjoint();
    const ComplexMatrix sys = partial_trace(total, spec.system_dim(), spec.bath_dim(), Keep::A);
    const ComplexMatrix bath = partial_trace(total, spec.system_dim(), spec.bath_dim(), Keep::B);
    return {DensityMatrix::trusted(total), DensityMatrix::trusted(sys), DensityMatrix::trusted(bath)};
}

DensityMatrix invariant_state(const KrausSet& k, const DensityMatrix& rho0, int max_iter, double tol) {
    ComplexMatrix rho = rho0.matrix();
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        ComplexMatrix next = apply_kraus(k, rho);
        next = 0.5 * (next + next.adjoint());
        residual = (next - rho).norm();
        rho = std::move(next);
        if (residual < tol) {
            try {
                return DensityMatrix::from(rho, 1e-9);
            } catch (const Error& e) {
                throw IntegrityError(std::string("invariant_state: fixed point is not a state: ") +
                                     e.what());
            }
        }
    }
    std::ostringstream os;
    os << "invariant_state: no convergence after " << max_iter << " iterations (residual "
       << residual << ")";
    throw ConvergenceError(os.str(), residual);
}

DensityMatrix attractive_invariant_state(const KrausSet& k, std::uint64_t seed, int max_iter,
                                         double tol) {
    std::mt19937_64 rng(seed);
    std::array<ComplexMatrix, 3> found;
    for (auto& f : found) {
        f = invariant_state(k, random_density(k.system_dim, rng), max_iter, tol).matrix();
    }
    double spread = 0.0;
    for (std::size_t a = 0; a < found.size(); ++a) {
        for (std::size_t b = a + 1; b < found.size(); ++b) {
            spread = std::max(spread, (found[a] - found[b]).norm());
        }
    }
    if (spread > 1e-8) {
        std::ostringstream os;
        os << "attractive_invariant_state: fixed points from distinct seeds differ by " << spread;
        throw ConvergenceError(os.str(), spread);
    }
    return DensityMatrix::trusted(found[0]);
}

double entropy_production(const MapSpec& spec, const DensityMatrix& rho) {
    const TotalState after = apply_total(spec, rho);
    const DensityMatrix reference =
        DensityMatrix::trusted(kron(after.system.matrix(), spec.bath_gibbs().matrix()));
    return rel_entropy(after.total, reference);
}

double commutation_residual(const MapSpec& spec, const ComplexMatrix& h0) {
    if (h0.rows() != spec.system_dim() || h0.cols() != spec.system_dim()) {
        throw DimensionError("commutation_residual: H0 must act on the system space");
    }
    const ComplexMatrix conserved =
        kron(h0, identity(spec.bath_dim())) + kron(identity(spec.system_dim()), spec.bath_hamiltonian());
    return inf_norm(commutator(spec.dilation(), conserved));
}

std::string_view to_string(MapKind kind) {
    switch (kind) {
    case MapKind::Thermal:
        return "thermal";
    case MapKind::EquilibriumNonThermal:
        return "equilibrium_non_thermal";
    case MapKind::Ness:
        return "ness";
    }
    return "unknown";
}

MapClassification classify_map(const MapSpec& spec, const DensityMatrix& pi,
                               const std::optional<ComplexMatrix>& h0_candidate) {
    const double ep = entropy_production(spec, pi);
    const double thermal_residual = commutation_residual(spec, spec.system_hamiltonian());
    const bool thermal = thermal_residual < kCertificateTol;

    std::optional<double> candidate_residual;
    bool candidate = false;
    if (h0_candidate) {
        candidate_residual = commutation_residual(spec, *h0_candidate);
        candidate = *candidate_residual < kCertificateTol;
    }

    if ((thermal || candidate) && ep > kClassTol) {
        std::ostringstream os;
        os << "classify_map: U commutes with H0 + H_B but entropy production at the invariant state is "
           << ep;
        throw IntegrityError(os.str());
    }

    MapClassification out{MapKind::Ness, pi, ep, std::nullopt, false, thermal_residual,
                          candidate_residual};
    if (ep > kClassTol) {
        return out;
    }
    out.within_tolerance = ep >= 1e-10;
    if (thermal) {
        out.kind = MapKind::Thermal;
        out.certificate = spec.system_hamiltonian();
    } else {
        out.kind = MapKind::EquilibriumNonThermal;
        if (candidate) {
            out.certificate = *h0_candidate;
        }
    }
    return out;
}

}  // namespace qmap
