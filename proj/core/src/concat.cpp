#include "qmap/concat.hpp"

#include "qmap/error.hpp"
#include "qmap/model.hpp"

#include <sstream>

namespace qmap {

MapSequence::MapSequence(std::vector<MapSpec> steps) {
    for (const auto& s : steps) {
        append(s);
    }
}

void MapSequence::check(const MapSpec& spec) const {
    if (steps_.empty()) {
        return;
    }
    const MapSpec& first = steps_.front();
    if (spec.system_dim() != first.system_dim()) {
        std::ostringstream os;
        os << "MapSequence: step acts on dimension " << spec.system_dim() << ", sequence on "
           << first.system_dim();
        throw DimensionError(os.str());
    }
    if (spec.beta() != first.beta()) {
        throw ContractError("MapSequence: every fresh bath must share the same beta");
    }
}

void MapSequence::append(const MapSpec& spec, int repeat) {
    if (repeat < 0) {
        throw ContractError("MapSequence: repeat count must be >= 0");
    }
    check(spec);
    steps_.insert(steps_.end(), static_cast<std::size_t>(repeat), spec);
}

std::vector<KrausSet> MapSequence::kraus_chain() const {
    std::vector<KrausSet> chain;
    chain.reserve(steps_.size());
    const MapSpec* last = nullptr;
    for (const auto& s : steps_) {
        // Repeated steps share their data; reuse the previous Kraus set.
        if (last != nullptr && &last->dilation() == &s.dilation()) {
            chain.push_back(chain.back());
        } else {
            chain.push_back(kraus_from_dilation(s));
        }
        last = &s;
    }
    return chain;
}

std::vector<SequenceStep> run_sequence(const MapSequence& seq, const DensityMatrix& rho0) {
    std::vector<SequenceStep> out;
    out.reserve(seq.size());
    DensityMatrix rho = rho0;
    ThermoRecord total;
    for (const auto& spec : seq.steps()) {
        const ThermoRecord rec = process_averages(spec, rho);
        total += rec;
        rho = apply_total(spec, rho).system;
        out.push_back({rho, rec, total});
    }
    return out;
}

Ensemble enumerate_sequence(const MapSequence& seq, const MeasurementBasis& a, const MeasurementBasis& b,
                            const DensityMatrix& rho0, std::size_t budget) {
    return enumerate_chain(seq.kraus_chain(), a, b, initial_from_state(a, rho0), budget);
}

CycleResult run_cycle(const CycleSpec& c) {
    const ComplexMatrix& hs = c.drive.system_hamiltonian();
    for (std::size_t r = 0; r < c.relaxers.size(); ++r) {
        const MapSpec& relax = c.relaxers[r];
        if (relax.system_dim() != c.drive.system_dim() || inf_norm(relax.system_hamiltonian() - hs) > 1e-12) {
            std::ostringstream os;
            os << "run_cycle: relaxer " << r + 1 << " does not share the drive's H_S";
            throw ContractError(os.str());
        }
        const double residual = commutation_residual(relax, hs);
        if (residual >= kCertificateTol) {
            std::ostringstream os;
            os << "run_cycle: relaxer " << r + 1 << " is not a thermal map (||[U, H_S + H_B]|| = " << residual
               << ")";
            throw ContractError(os.str());
        }
    }

    MapSequence seq;
    seq.append(c.drive);
    for (const auto& r : c.relaxers) {
        seq.append(r);
    }

    CycleResult out;
    const DensityMatrix omega = gibbs_state(hs, c.drive.beta());
    out.steps = run_sequence(seq, omega);
    for (const auto& s : out.steps) {
        out.hs_distance.push_back(hs_distance(s.state.matrix(), omega.matrix()));
        if (!out.thermalized_at && out.hs_distance.back() < c.tolerance) {
            out.thermalized_at = out.hs_distance.size();
        }
    }
    out.drive_work = out.steps.front().step.W;
    out.total_entropy_production = out.steps.back().cumulative.dSi;
    if (!(out.final_distance() < c.tolerance)) {
        std::ostringstream os;
        os << "run_cycle: relaxation reached ||rho - omega||_HS = " << out.final_distance()
           << ", tolerance " << c.tolerance;
        throw CycleIncompleteError(os.str(), out.final_distance());
    }

    const MeasurementBasis energy = measurement_basis(hs, "H_S");
    const InitialCondition init = initial_from_populations(energy, gibbs_populations(energy, c.drive.beta()));
    const std::vector<KrausSet> chain = seq.kraus_chain();
    out.drive_ensemble = enumerate_chain({chain.front()}, energy, energy, init);
    out.cycle_ensemble = heat_resolved_chain(chain, energy, energy, init);
    out.p_drive_w = distribution_of(out.drive_ensemble, Quantity::Work);
    out.p_cycle_w = distribution_of(out.cycle_ensemble, Quantity::Work);
    out.p_drive_dsi = distribution_of(out.drive_ensemble, Quantity::EntropyProduction);
    out.p_cycle_dsi = distribution_of(out.cycle_ensemble, Quantity::EntropyProduction);
    return out;
}

}  // namespace qmap
