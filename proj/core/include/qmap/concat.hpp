// concat.hpp: concatenated maps with a fresh bath copy per collision.

#pragma once

#include "qmap/cptp_map.hpp"
#include "qmap/distribution.hpp"
#include "qmap/thermo.hpp"
#include "qmap/trajectories.hpp"

#include <optional>
#include <vector>

namespace qmap {

class MapSequence {
public:
    MapSequence() = default;
    /// Throws DimensionError / ContractError when the steps disagree on the
    /// system dimension or on β.
    explicit MapSequence(std::vector<MapSpec> steps);

    void append(const MapSpec& spec, int repeat = 1);

    const std::vector<MapSpec>& steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_.size(); }
    bool empty() const noexcept { return steps_.empty(); }

    /// Kraus sets in application order, computed once per distinct MapSpec.
    std::vector<KrausSet> kraus_chain() const;

private:
    void check(const MapSpec& spec) const;

    std::vector<MapSpec> steps_;
};

struct SequenceStep {
    DensityMatrix state;         // after this step
    ThermoRecord step;
    ThermoRecord cumulative;
};

std::vector<SequenceStep> run_sequence(const MapSequence& seq, const DensityMatrix& rho0);

/// Joint trajectory ensemble of the whole sequence; throws CapacityError
/// above budget.
Ensemble enumerate_sequence(const MapSequence& seq, const MeasurementBasis& a, const MeasurementBasis& b,
                            const DensityMatrix& rho0, std::size_t budget = kDefaultBudget);

struct CycleSpec {
    MapSpec drive;
    std::vector<MapSpec> relaxers;
    double tolerance = 1e-5;     // on ||ρ − ω_β(H_S)||_HS after the last relaxer
};

struct CycleResult {
    std::vector<SequenceStep> steps;       // drive first, then each relaxer
    std::vector<double> hs_distance;       // to ω_β(H_S) after each step
    Ensemble drive_ensemble;
    Ensemble cycle_ensemble;               // heat resolved
    Distribution p_drive_w;
    Distribution p_cycle_w;
    Distribution p_drive_dsi;
    Distribution p_cycle_dsi;
    double drive_work = 0.0;
    double total_entropy_production = 0.0;
    /// First step (1-based) whose distance is below the tolerance.
    std::optional<std::size_t> thermalized_at;

    double final_distance() const { return hs_distance.empty() ? 0.0 : hs_distance.back(); }
};

/// Drive from ω_β(H_S) followed by the relaxers. Throws ContractError when a
/// relaxer is not a thermal map for H_S, and CycleIncompleteError when the
/// final distance to ω_β(H_S) is not below the tolerance.
CycleResult run_cycle(const CycleSpec& c);

}  // namespace qmap
