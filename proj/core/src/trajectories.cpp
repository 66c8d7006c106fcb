#include "qmap/trajectories.hpp"

#include "qmap/error.hpp"
#include "qmap/model.hpp"
#include "qmap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace qmap {

ComplexMatrix MeasurementBasis::projector(std::size_t k) const {
    const ComplexMatrix& v = outcomes.at(k).vectors;
    return v * v.adjoint();
}

double MeasurementBasis::completeness_residual() const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        sum += projector(k);
    }
    return inf_norm(sum - identity(dim));
}

MeasurementBasis measurement_basis(const ComplexMatrix& observable, std::string label) {
    const HermitianEig eig = hermitian_eig(observable);
    const Eigen::Index n = eig.eigenvalues.size();
    MeasurementBasis basis;
    basis.label = std::move(label);
    basis.dim = n;
    Eigen::Index start = 0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        if (k == n || eig.eigenvalues(k) - eig.eigenvalues(k - 1) > kDegeneracyTol) {
            MeasurementOutcome o;
            o.value = eig.eigenvalues.segment(start, k - start).mean();
            o.vectors = eig.eigenvectors.middleCols(start, k - start);
            basis.degenerate = basis.degenerate || (k - start > 1);
            basis.outcomes.push_back(std::move(o));
            start = k;
        }
    }
    return basis;
}

TimeReversal TimeReversal::spin(int n_spins) {
    return {spin_flip_rotation(n_spins)};
}

ComplexMatrix TimeReversal::apply(const ComplexMatrix& columns) const {
    return rotation * columns.conjugate();
}

ComplexMatrix TimeReversal::conjugate(const ComplexMatrix& op) const {
    return rotation * op.conjugate() * rotation.adjoint();
}

TimeReversal combine(const TimeReversal& system, const TimeReversal& bath) {
    return {kron(system.rotation, bath.rotation)};
}

MeasurementBasis reversed_basis(const MeasurementBasis& basis, const TimeReversal& theta) {
    if (theta.rotation.rows() != basis.dim) {
        throw DimensionError("reversed_basis: time reversal acts on a different space");
    }
    MeasurementBasis out = basis;
    out.label = basis.label + "~";
    for (auto& o : out.outcomes) {
        o.vectors = theta.apply(o.vectors);
    }
    return out;
}

InitialCondition initial_from_state(const MeasurementBasis& a, const DensityMatrix& rho) {
    if (rho.dim() != a.dim) {
        throw DimensionError("initial_from_state: state and basis dimensions differ");
    }
    InitialCondition init;
    init.probs.resize(static_cast<Eigen::Index>(a.outcomes.size()));
    for (std::size_t n = 0; n < a.outcomes.size(); ++n) {
        const ComplexMatrix& v = a.outcomes[n].vectors;
        const ComplexMatrix block = v.adjoint() * rho.matrix() * v;
        const HermitianEig eig = hermitian_eig(0.5 * (block + block.adjoint()));
        RealVector roots = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
        init.factors.push_back(v * eig.eigenvectors * roots.cast<Complex>().asDiagonal());
        init.probs(static_cast<Eigen::Index>(n)) = block.trace().real();
    }
    return init;
}

InitialCondition initial_from_populations(const MeasurementBasis& a, const RealVector& pops) {
    if (pops.size() != static_cast<Eigen::Index>(a.outcomes.size())) {
        throw DimensionError("initial_from_populations: one population per outcome is required");
    }
    if (pops.minCoeff() < 0.0 || std::abs(pops.sum() - 1.0) > 1e-10) {
        throw ContractError("initial_from_populations: populations must be a probability vector");
    }
    InitialCondition init;
    init.probs = pops;
    for (std::size_t n = 0; n < a.outcomes.size(); ++n) {
        const auto& o = a.outcomes[n];
        init.factors.push_back(std::sqrt(pops(static_cast<Eigen::Index>(n)) / o.rank()) * o.vectors);
    }
    return init;
}

RealVector gibbs_populations(const MeasurementBasis& energy_basis, double beta) {
    if (!(beta > 0.0)) {
        throw ContractError("gibbs_populations: beta must be > 0");
    }
    const auto n = static_cast<Eigen::Index>(energy_basis.outcomes.size());
    double e0 = std::numeric_limits<double>::infinity();
    for (const auto& o : energy_basis.outcomes) {
        e0 = std::min(e0, o.value);
    }
    RealVector p(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& o = energy_basis.outcomes[static_cast<std::size_t>(k)];
        p(k) = o.rank() * std::exp(-beta * (o.value - e0));
    }
    return p / p.sum();
}

double Ensemble::total_probability() const {
    double s = 0.0;
    for (const auto& r : records) {
        s += r.p;
    }
    return s;
}

double Ensemble::mean(double TrajectoryRecord::*field) const {
    double s = 0.0;
    for (const auto& r : records) {
        if (r.p > 0.0) {
            s += r.p * (r.*field);
        }
    }
    return s;
}

namespace {

struct ChainInfo {
    double beta = 0.0;
};

ChainInfo check_chain(const std::vector<KrausSet>& chain, const MeasurementBasis& a,
                      const MeasurementBasis& b, const InitialCondition& init) {
    if (a.dim != b.dim) {
        throw DimensionError("trajectory ensemble: initial and final bases act on different spaces");
    }
    if (init.factors.size() != a.outcomes.size()) {
        throw DimensionError("trajectory ensemble: initial condition does not match the initial basis");
    }
    if (a.completeness_residual() > 1e-10 || b.completeness_residual() > 1e-10) {
        throw ContractError("trajectory ensemble: measurement basis is not complete");
    }
    ChainInfo info;
    for (std::size_t s = 0; s < chain.size(); ++s) {
        if (chain[s].system_dim != a.dim) {
            std::ostringstream os;
            os << "trajectory ensemble: map " << s << " acts on dimension " << chain[s].system_dim
               << ", bases on " << a.dim;
            throw DimensionError(os.str());
        }
        if (s == 0) {
            info.beta = chain[s].beta;
        } else if (chain[s].beta != info.beta) {
            throw ContractError("trajectory ensemble: all baths must share the same beta");
        }
    }
    return info;
}

Ensemble make_shell(const MeasurementBasis& a, const MeasurementBasis& b, const InitialCondition& init,
                    double beta) {
    Ensemble e;
    e.beta = beta;
    e.initial_probs = init.probs;
    for (const auto& o : a.outcomes) {
        e.initial_ranks.push_back(o.rank());
        e.initial_values.push_back(o.value);
    }
    for (const auto& o : b.outcomes) {
        e.final_ranks.push_back(o.rank());
        e.final_values.push_back(o.value);
    }
    e.final_probs = RealVector::Zero(static_cast<Eigen::Index>(b.outcomes.size()));
    return e;
}

double safe_log(double x) {
    return x > 0.0 ? std::log(x) : std::numeric_limits<double>::quiet_NaN();
}

// Fills p_f and the stochastic quantities once all probabilities are known.
void finalize(Ensemble& e) {
    e.final_probs.setZero();
    for (const auto& r : e.records) {
        e.final_probs(r.m) += r.p;
    }
    for (auto& r : e.records) {
        const double pi = e.initial_probs(r.n) / e.initial_ranks[static_cast<std::size_t>(r.n)];
        const double pf = e.final_probs(r.m) / e.final_ranks[static_cast<std::size_t>(r.m)];
        r.de = e.final_values[static_cast<std::size_t>(r.m)] - e.initial_values[static_cast<std::size_t>(r.n)];
        r.w = r.de - r.q;
        r.ds = safe_log(pi) - safe_log(pf);
        r.dsi = r.ds - e.beta * r.q;
    }
}

std::size_t record_count(const std::vector<KrausSet>& chain, std::size_t n_a, std::size_t n_b,
                         std::size_t budget) {
    long double count = static_cast<long double>(n_a) * static_cast<long double>(n_b);
    for (const auto& k : chain) {
        count *= static_cast<long double>(k.ops.size());
    }
    if (count > static_cast<long double>(budget)) {
        std::ostringstream os;
        os.precision(17);
        os << "trajectory enumeration needs " << static_cast<double>(count)
           << " records, above the budget of " << budget;
        throw CapacityError(os.str(), static_cast<double>(count));
    }
    return static_cast<std::size_t>(count);
}

struct Walker {
    const std::vector<KrausSet>& chain;
    const MeasurementBasis& b;
    int n = 0;
    std::vector<TrajectoryRecord>& out;
    std::vector<std::pair<int, int>> path;

    void descend(std::size_t step, const ComplexMatrix& x, double q) {
        if (step == chain.size()) {
            for (std::size_t m = 0; m < b.outcomes.size(); ++m) {
                TrajectoryRecord r;
                r.n = n;
                r.transitions = path;
                r.m = static_cast<int>(m);
                r.p = (b.outcomes[m].vectors.adjoint() * x).squaredNorm();
                r.q = q;
                out.push_back(std::move(r));
            }
            return;
        }
        for (const auto& op : chain[step].ops) {
            path.emplace_back(op.i, op.j);
            descend(step + 1, op.op * x, q + (op.eps_i - op.eps_j));
            path.pop_back();
        }
    }
};

}  // namespace

Ensemble enumerate_chain(const std::vector<KrausSet>& chain, const MeasurementBasis& a,
                         const MeasurementBasis& b, const InitialCondition& init, std::size_t budget) {
    const ChainInfo info = check_chain(chain, a, b, init);
    const std::size_t total = record_count(chain, a.outcomes.size(), b.outcomes.size(), budget);
    Ensemble e = make_shell(a, b, init, info.beta);

    // One task per (n, first operator); results concatenated in task order.
    const std::size_t first = chain.empty() ? 1 : chain.front().ops.size();
    const std::size_t tasks = a.outcomes.size() * first;
    std::vector<std::vector<TrajectoryRecord>> parts(tasks);
    parallel_for(tasks, [&](std::size_t t) {
        const int n = static_cast<int>(t / first);
        const ComplexMatrix& f = init.factors[static_cast<std::size_t>(n)];
        Walker walker{chain, b, n, parts[t], {}};
        if (chain.empty()) {
            walker.descend(0, f, 0.0);
            return;
        }
        const KrausOperator& op = chain.front().ops[t % first];
        walker.path.emplace_back(op.i, op.j);
        walker.descend(1, op.op * f, op.eps_i - op.eps_j);
    });

    e.records.reserve(total);
    for (auto& part : parts) {
        std::move(part.begin(), part.end(), std::back_inserter(e.records));
    }
    finalize(e);
    return e;
}

Ensemble heat_resolved_chain(const std::vector<KrausSet>& chain, const MeasurementBasis& a,
                             const MeasurementBasis& b, const InitialCondition& init) {
    const ChainInfo info = check_chain(chain, a, b, init);
    Ensemble e = make_shell(a, b, init, info.beta);
    e.heat_resolved = true;

    struct Branch {
        double q;
        ComplexMatrix sigma;
    };
    std::vector<std::vector<Branch>> per_n(a.outcomes.size());
    parallel_for(a.outcomes.size(), [&](std::size_t n) {
        const ComplexMatrix& f = init.factors[n];
        std::vector<Branch> branches{{0.0, f * f.adjoint()}};
        for (const auto& k : chain) {
            std::vector<Branch> next;
            for (const auto& br : branches) {
                for (const auto& op : k.ops) {
                    const double q = br.q + (op.eps_i - op.eps_j);
                    auto it = std::find_if(next.begin(), next.end(),
                                           [&](const Branch& x) { return std::abs(x.q - q) <= kBinTol; });
                    if (it == next.end()) {
                        next.push_back({q, op.op * br.sigma * op.op.adjoint()});
                    } else {
                        it->sigma.noalias() += op.op * br.sigma * op.op.adjoint();
                    }
                }
            }
            branches = std::move(next);
        }
        std::sort(branches.begin(), branches.end(), [](const Branch& x, const Branch& y) { return x.q < y.q; });
        per_n[n] = std::move(branches);
    });

    for (std::size_t n = 0; n < per_n.size(); ++n) {
        for (const auto& br : per_n[n]) {
            for (std::size_t m = 0; m < b.outcomes.size(); ++m) {
                const ComplexMatrix& v = b.outcomes[m].vectors;
                TrajectoryRecord r;
                r.n = static_cast<int>(n);
                r.m = static_cast<int>(m);
                r.p = std::max(0.0, (v.adjoint() * br.sigma * v).trace().real());
                r.q = br.q;
                e.records.push_back(std::move(r));
            }
        }
    }
    finalize(e);
    return e;
}

Ensemble enumerate(const MapSpec& spec, const MeasurementBasis& a, const MeasurementBasis& b,
                   const DensityMatrix& rho) {
    return enumerate_chain({kraus_from_dilation(spec)}, a, b, initial_from_state(a, rho));
}

Distribution distribution_of(const Ensemble& ens, Quantity quantity, double bin_tol) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(ens.records.size());
    for (const auto& r : ens.records) {
        if (!(r.p > 0.0)) {
            continue;
        }
        double v = 0.0;
        switch (quantity) {
        case Quantity::Work:
            v = r.w;
            break;
        case Quantity::Heat:
            v = r.q;
            break;
        case Quantity::EnergyChange:
            v = r.de;
            break;
        case Quantity::EntropyChange:
            v = r.ds;
            break;
        case Quantity::EntropyProduction:
            v = r.dsi;
            break;
        }
        if (!std::isfinite(v)) {
            throw IntegrityError("distribution_of: trajectory with positive probability has a non-finite value");
        }
        samples.emplace_back(v, r.p);
    }
    return Distribution::from_samples(std::move(samples), bin_tol);
}

Distribution equilibrium_work_distribution(const MapSpec& spec, const ComplexMatrix& h0,
                                           const DensityMatrix& rho_bar) {
    const ComplexMatrix& hs = spec.system_hamiltonian();
    const double c = inf_norm(commutator(h0, hs));
    if (c >= 1e-10) {
        std::ostringstream os;
        os << "equilibrium_work_distribution: ||[H0, H_S]|| = " << c << " is not zero";
        throw ContractError(os.str());
    }
    const double cert = commutation_residual(spec, h0);
    if (cert >= kCertificateTol) {
        std::ostringstream os;
        os << "equilibrium_work_distribution: ||[U, H0 + H_B]|| = " << cert << " exceeds " << kCertificateTol;
        throw ContractError(os.str());
    }

    // Common eigenbasis: H0 diagonalized inside each eigenspace of H_S.
    const HermitianEig eig = hermitian_eig(hs);
    const Eigen::Index dim = hs.rows();
    ComplexMatrix vecs(dim, dim);
    RealVector e_s(dim);
    RealVector e_0(dim);
    Eigen::Index start = 0;
    for (Eigen::Index k = 1; k <= dim; ++k) {
        if (k == dim || eig.eigenvalues(k) - eig.eigenvalues(k - 1) > kDegeneracyTol) {
            const ComplexMatrix v = eig.eigenvectors.middleCols(start, k - start);
            const HermitianEig inner = hermitian_eig(v.adjoint() * h0 * v);
            vecs.middleCols(start, k - start) = v * inner.eigenvectors;
            e_0.segment(start, k - start) = inner.eigenvalues;
            e_s.segment(start, k - start) = eig.eigenvalues.segment(start, k - start);
            start = k;
        }
    }

    const KrausSet k = kraus_from_dilation(spec);
    std::vector<std::pair<double, double>> samples;
    for (Eigen::Index n = 0; n < dim; ++n) {
        const ComplexVector an = vecs.col(n);
        const double pn = (an.adjoint() * rho_bar.matrix() * an)(0, 0).real();
        const ComplexMatrix out = vecs.adjoint() * apply_kraus(k, an * an.adjoint()) * vecs;
        for (Eigen::Index m = 0; m < dim; ++m) {
            const double w = (e_s(m) - e_0(m)) - (e_s(n) - e_0(n));
            samples.emplace_back(w, out(m, m).real() * pn);
        }
    }
    return Distribution::from_samples(std::move(samples));
}

double time_symmetry_residual(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath) {
    if (system.rotation.rows() != spec.system_dim() || bath.rotation.rows() != spec.bath_dim()) {
        throw DimensionError("time_symmetry_residual: time reversal does not match the map dimensions");
    }
    const TimeReversal theta = combine(system, bath);
    const ComplexMatrix& u = spec.dilation();
    return inf_norm(theta.conjugate(u.adjoint()) - u);
}

KrausSet reversed_kraus(const KrausSet& k, const TimeReversal& system) {
    if (system.rotation.rows() != k.system_dim) {
        throw DimensionError("reversed_kraus: time reversal does not match the system dimension");
    }
    KrausSet out;
    out.system_dim = k.system_dim;
    out.beta = k.beta;
    out.degenerate_bath = k.degenerate_bath;
    out.ops.reserve(k.ops.size());
    for (const auto& m : k.ops) {
        KrausOperator r;
        r.op = std::exp(0.5 * k.beta * (m.eps_i - m.eps_j)) * system.conjugate(m.op.adjoint());
        r.i = m.j;
        r.j = m.i;
        r.level_i = m.level_j;
        r.level_j = m.level_i;
        r.eps_i = m.eps_j;
        r.eps_j = m.eps_i;
        r.p_i = m.p_i * std::exp(-k.beta * (m.eps_j - m.eps_i));
        out.ops.push_back(std::move(r));
    }
    std::sort(out.ops.begin(), out.ops.end(), [](const KrausOperator& x, const KrausOperator& y) {
        return std::make_pair(x.i, x.j) < std::make_pair(y.i, y.j);
    });
    return out;
}

KrausSet reversed_kraus(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath) {
    const double residual = time_symmetry_residual(spec, system, bath);
    if (residual >= 1e-9) {
        std::ostringstream os;
        os << "reversed_kraus: time reversal is not a symmetry of the dilation (residual " << residual << ")";
        throw ContractError(os.str());
    }
    KrausSet out = reversed_kraus(kraus_from_dilation(spec), system);
    const double tp = completeness_residual(out);
    if (tp >= 1e-10) {
        std::ostringstream os;
        os << "reversed_kraus: reversed set is not trace preserving (residual " << tp << ")";
        throw IntegrityError(os.str());
    }
    return out;
}

Ensemble backward_ensemble(const std::vector<MapSpec>& steps, const MeasurementBasis& a,
                           const MeasurementBasis& b, const Ensemble& forward, const TimeReversal& system,
                           const TimeReversal& bath, const std::optional<RealVector>& initial,
                           std::size_t budget) {
    std::vector<KrausSet> chain;
    chain.reserve(steps.size());
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        chain.push_back(reversed_kraus(*it, system, bath));
    }
    const MeasurementBasis start = reversed_basis(b, system);
    const MeasurementBasis end = reversed_basis(a, system);
    const RealVector pops = initial ? *initial : forward.final_probs / forward.final_probs.sum();
    return enumerate_chain(chain, start, end, initial_from_populations(start, pops), budget);
}

namespace {

using PathKey = std::tuple<int, std::vector<std::pair<int, int>>, int>;

}  // namespace

double detailed_ft_check(const Ensemble& forward, const Ensemble& backward) {
    if (forward.heat_resolved || backward.heat_resolved) {
        throw ContractError("detailed_ft_check: needs transition-resolved ensembles");
    }
    std::map<PathKey, double> reverse;
    for (const auto& r : backward.records) {
        reverse.emplace(PathKey{r.n, r.transitions, r.m}, r.p);
    }
    double worst = 0.0;
    for (const auto& r : forward.records) {
        std::vector<std::pair<int, int>> mirrored(r.transitions.rbegin(), r.transitions.rend());
        for (auto& t : mirrored) {
            std::swap(t.first, t.second);
        }
        const auto it = reverse.find(PathKey{r.m, mirrored, r.n});
        if (it == reverse.end()) {
            std::ostringstream os;
            os << "detailed_ft_check: forward trajectory (n=" << r.n << ", m=" << r.m
               << ") has no backward partner";
            throw ContractError(os.str());
        }
        if (r.p > 1e-12 && it->second > 1e-12) {
            worst = std::max(worst, std::abs(std::log(r.p) - r.dsi - std::log(it->second)));
        }
    }
    return worst;
}

double integral_ft(const Ensemble& ens) {
    double s = 0.0;
    for (const auto& r : ens.records) {
        if (r.p > 0.0) {
            s += r.p * std::exp(-r.dsi);
        }
    }
    return s;
}

CrooksReport crooks_check(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath) {
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian(), "H_S");
    const RealVector gibbs = gibbs_populations(energy, spec.beta());
    const Ensemble fwd = enumerate_chain({kraus_from_dilation(spec)}, energy, energy,
                                         initial_from_populations(energy, gibbs));
    const MeasurementBasis rev = reversed_basis(energy, system);
    const Ensemble bwd = backward_ensemble({spec}, energy, energy, fwd, system, bath,
                                           gibbs_populations(rev, spec.beta()));

    CrooksReport report;
    report.forward = distribution_of(fwd, Quantity::Work);
    report.backward = distribution_of(bwd, Quantity::Work);
    report.reversal_gap = compare(report.forward, report.backward).max_prob_gap;
    for (const auto& atom : report.forward.atoms()) {
        if (atom.prob <= 1e-12) {
            continue;
        }
        CrooksAtom c;
        c.w = atom.value;
        c.p = atom.prob;
        c.p_mirror = report.forward.prob_at(-atom.value);
        if (c.p_mirror <= 1e-12) {
            c.missing_mirror = true;
            // A mirror predicted below the resolution floor is not a violation.
            if (c.p * std::exp(-spec.beta() * c.w) > 1e-12) {
                ++report.violations;
            }
        } else {
            c.residual = std::abs(std::log(c.p) - std::log(c.p_mirror) - spec.beta() * c.w);
            report.max_residual = std::max(report.max_residual, c.residual);
        }
        report.atoms.push_back(c);
    }
    return report;
}

}  // namespace qmap
