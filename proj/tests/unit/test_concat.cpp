#include "qmap/concat.hpp"
#include "qmap/error.hpp"
#include "qmap/model.hpp"

#include "oracles/frozen_values.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace qmap;
using namespace qmap::test;

namespace {

MapSpec spin_map(double jx_c, double jy_c, double tau, double h_b = 1.0) {
    return MapSpec(0.5 * sz(), 0.5 * h_b * sz(), build_coupling({jx_c, jy_c, 1, tau}, 1), tau, 1.0);
}

CycleSpec drive_relax_cycle(int relaxers) {
    return {spin_map(3.3, 3.0, 1.0), std::vector<MapSpec>(static_cast<std::size_t>(relaxers), spin_map(3, 3, 4)),
            1e-5};
}

MapSpec chain3(double jy) {
    const SpinChainParams p{3, 2.0, {3.0, 3.0}, {jy, jy}};
    return MapSpec(build_chain(p), build_bath({2.0, 1.2}), build_coupling({3.0, 3.0, 1, 1.0}, 3), 1.0, 1.2);
}

}  // namespace

TEST(MapSequence, RejectsInconsistentSteps) {
    MapSequence seq;
    seq.append(spin_map(1, 1, 1), 2);
    EXPECT_EQ(seq.size(), 2u);
    EXPECT_THROW(seq.append(chain3(0.0)), DimensionError);
    const MapSpec hot(0.5 * sz(), 0.5 * sz(), build_coupling({1, 1, 1, 1}, 1), 1.0, 2.0);
    EXPECT_THROW(seq.append(hot), ContractError);
    EXPECT_THROW(seq.append(spin_map(1, 1, 1), -1), ContractError);
    EXPECT_THROW(MapSequence({spin_map(1, 1, 1), chain3(0.0)}), DimensionError);
}

TEST(MapSequence, RunMatchesRepeatedApplication) {
    MapSequence seq;
    seq.append(spin_map(3.3, 3.0, 1.0));
    seq.append(spin_map(3.0, 3.0, 4.0), 3);
    const DensityMatrix rho0 = gibbs_state(0.5 * sz(), 1.0);
    const auto steps = run_sequence(seq, rho0);
    ASSERT_EQ(steps.size(), 4u);

    DensityMatrix rho = rho0;
    ThermoRecord cum;
    for (std::size_t s = 0; s < 4; ++s) {
        const ThermoRecord r = process_averages(seq.steps()[s], rho);
        cum += r;
        rho = apply_map(kraus_from_dilation(seq.steps()[s]), rho);
        EXPECT_LT(max_abs(steps[s].state.matrix() - rho.matrix()), 1e-13);
        EXPECT_NEAR(steps[s].step.W, r.W, 1e-13);
        EXPECT_NEAR(steps[s].cumulative.dSi, cum.dSi, 1e-13);
    }
    EXPECT_NEAR(steps.front().step.W, oracle::kCycleDrive_W, 1e-10);
}

TEST(MapSequence, EmptySequence) {
    const MapSequence seq;
    EXPECT_TRUE(seq.empty());
    EXPECT_TRUE(run_sequence(seq, DensityMatrix::maximally_mixed(2)).empty());
    EXPECT_TRUE(seq.kraus_chain().empty());
}

TEST(MapSequence, KrausChainReusesRepeatedMaps) {
    MapSequence seq;
    seq.append(spin_map(3.0, 3.0, 4.0), 5);
    const auto chain = seq.kraus_chain();
    ASSERT_EQ(chain.size(), 5u);
    EXPECT_EQ(max_abs(chain[0].ops[1].op - chain[4].ops[1].op), 0.0);
}

TEST(MapSequence, EnumerationMatchesChain) {
    MapSequence seq;
    seq.append(spin_map(3.3, 3.0, 1.0));
    seq.append(spin_map(3.0, 3.0, 4.0));
    const MeasurementBasis energy = measurement_basis(0.5 * sz());
    const DensityMatrix rho0 = gibbs_state(0.5 * sz(), 1.0);
    const Ensemble ens = enumerate_sequence(seq, energy, energy, rho0);
    EXPECT_EQ(ens.records.size(), 2u * 4u * 4u * 2u);
    EXPECT_NEAR(ens.total_probability(), 1.0, 1e-13);
    const auto steps = run_sequence(seq, rho0);
    EXPECT_NEAR(ens.mean(&TrajectoryRecord::w), steps.back().cumulative.W, 1e-12);
    EXPECT_THROW(enumerate_sequence(seq, energy, energy, rho0, 10), CapacityError);
}

TEST(Cycle, DriveThenThermalize) {
    const CycleResult r = run_cycle(drive_relax_cycle(12));
    ASSERT_EQ(r.steps.size(), 13u);
    ASSERT_TRUE(r.thermalized_at);
    EXPECT_LT(r.final_distance(), 1e-5);
    EXPECT_NEAR(r.drive_work, oracle::kCycleDrive_W, 1e-10);
    // Relaxers are thermal: no work after the drive.
    EXPECT_NEAR(r.steps.back().cumulative.W, r.drive_work, 1e-12);
    EXPECT_NEAR(r.total_entropy_production, r.drive_work, 1e-8);
    EXPECT_LT(std::abs(r.steps.back().cumulative.dE), 1e-8);
}

TEST(Cycle, CycleWorkDistributionEqualsDriveWorkDistribution) {
    const CycleResult r = run_cycle(drive_relax_cycle(6));
    const DistributionDiff w = compare(r.p_cycle_w, r.p_drive_w);
    EXPECT_EQ(w.unmatched, 0u);
    EXPECT_LT(w.max_prob_gap, 1e-10);
    ASSERT_EQ(r.p_drive_w.size(), oracle::kCycleDriveWork.size());
    for (std::size_t k = 0; k < r.p_drive_w.size(); ++k) {
        EXPECT_NEAR(r.p_drive_w.atoms()[k].prob, oracle::kCycleDriveWork[k].second, 1e-12);
    }
    // Entropy production is redistributed by the relaxation.
    EXPECT_GT(compare(r.p_drive_dsi, r.p_cycle_dsi).max_prob_gap, 1e-4);
    EXPECT_TRUE(r.cycle_ensemble.heat_resolved);
}

TEST(Cycle, IncompleteRelaxation) {
    try {
        run_cycle(drive_relax_cycle(1));
        FAIL() << "expected CycleIncompleteError";
    } catch (const CycleIncompleteError& e) {
        EXPECT_GT(e.achieved_distance(), 1e-5);
    }
}

TEST(Cycle, RelaxersMustBeThermal) {
    CycleSpec c = drive_relax_cycle(3);
    c.relaxers[1] = spin_map(3.3, 3.0, 4.0);
    EXPECT_THROW(run_cycle(c), ContractError);
}

TEST(Sequence, XxChainApproachesClosedFormAsymptotes) {
    MapSequence seq;
    seq.append(chain3(0.0), 1000);
    const SpinChainParams p{3, 2.0, {3.0, 3.0}, {}};
    const auto steps = run_sequence(seq, gibbs_state(build_chain(p), 1.2));
    const ThermoRecord& total = steps.back().cumulative;
    EXPECT_NEAR(total.W, oracle::kChain3XxAsymptoteW, 1e-6);
    EXPECT_NEAR(total.Q, oracle::kChain3XxAsymptoteQ, 1e-6);
    EXPECT_NEAR(total.dSi, oracle::kChain3XxAsymptoteDSi, 1e-6);
}

TEST(Sequence, XyChainReachesConstantNessRecords) {
    MapSequence seq;
    seq.append(chain3(2.0), 400);
    const SpinChainParams p{3, 2.0, {3.0, 3.0}, {2.0, 2.0}};
    const auto steps = run_sequence(seq, gibbs_state(build_chain(p), 1.2));
    const ThermoRecord& a = steps[steps.size() - 2].step;
    const ThermoRecord& b = steps.back().step;
    EXPECT_NEAR(a.W, b.W, 1e-8);
    EXPECT_NEAR(a.Q, b.Q, 1e-8);
    EXPECT_NEAR(a.dSi, b.dSi, 1e-8);
    EXPECT_NEAR(b.W, -b.Q, 1e-8);
    EXPECT_GT(b.dSi, 1e-4);
}
