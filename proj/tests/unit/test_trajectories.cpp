#include "qmap/error.hpp"
#include "qmap/model.hpp"
#include "qmap/thermo.hpp"
#include "qmap/trajectories.hpp"

#include "oracles/frozen_values.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <tuple>

using namespace qmap;
using namespace qmap::test;

namespace {

MapSpec spin_map(double jx_c, double jy_c, double tau) {
    return MapSpec(0.5 * sz(), 0.5 * sz(), build_coupling({jx_c, jy_c, 1, tau}, 1), tau, 1.0);
}

MapSpec chain2(double jy) {
    const SpinChainParams p{2, 2.0, {3.0}, {jy}};
    return MapSpec(build_chain(p), build_bath({2.0, 1.2}), build_coupling({3.0, 3.0, 1, 1.0}, 2), 1.0, 1.2);
}

// Bath computational state of eigenvector index k for (h/2)σᶻ, h > 0.
Eigen::Index bath_state(int k) { return k == 0 ? 1 : 0; }

double bath_energy(int k) { return k == 0 ? -0.5 : 0.5; }

double bath_weight(int k) { return std::exp(-bath_energy(k)) / (std::exp(0.5) + std::exp(-0.5)); }

}  // namespace

TEST(MeasurementBasis, GroupsDegenerateEigenvalues) {
    const MeasurementBasis b = measurement_basis(kron_loops(sz(), eye(2)) + kron_loops(eye(2), sz()), "mz");
    ASSERT_EQ(b.outcomes.size(), 3u);
    EXPECT_TRUE(b.degenerate);
    EXPECT_NEAR(b.outcomes[0].value, -2.0, 1e-15);
    EXPECT_EQ(b.outcomes[1].rank(), 2);
    EXPECT_LT(b.completeness_residual(), 1e-14);
    EXPECT_EQ(b.label, "mz");
}

TEST(TimeReversal, SpinRotationAction) {
    const TimeReversal t = TimeReversal::spin(1);
    EXPECT_LT(max_abs(t.conjugate(sx()) + sx()), 1e-15);
    EXPECT_LT(max_abs(t.conjugate(sz()) - sz()), 1e-15);
    ComplexVector up = ComplexVector::Zero(2);
    up(0) = 1.0;
    EXPECT_LT(max_abs(t.apply(up) - (-kI) * up), 1e-15);
    const MeasurementBasis rb = reversed_basis(measurement_basis(sz()), t);
    EXPECT_EQ(rb.outcomes.size(), 2u);
    EXPECT_LT(rb.completeness_residual(), 1e-15);
}

TEST(TimeReversal, ChainDilationsAreSymmetric) {
    for (double jy : {0.0, 2.0}) {
        EXPECT_LT(time_symmetry_residual(chain2(jy), TimeReversal::spin(2), TimeReversal::spin(1)), 1e-12);
    }
}

TEST(TimeReversal, AsymmetricDilationRejected) {
    std::mt19937_64 rng(20);
    const MapSpec spec(random_hermitian(2, rng), 0.5 * sz(), build_coupling({1.0, 0.4, 1, 1.0}, 1), 1.0, 1.0);
    EXPECT_GT(time_symmetry_residual(spec, TimeReversal::spin(1), TimeReversal::spin(1)), 1e-6);
    EXPECT_THROW(reversed_kraus(spec, TimeReversal::spin(1), TimeReversal::spin(1)), ContractError);
}

TEST(Enumerate, SingleCollisionRecordTable) {
    // Sixteen records p(n, i, j, m) = p_n p_i |<m, j|U|n, i>|² for a single spin.
    const MapSpec spec = spin_map(3.3, 3.0, 1.0);
    const ComplexMatrix& u = spec.dilation();
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const DensityMatrix rho = gibbs_state(spec.system_hamiltonian(), 1.0);
    const Ensemble ens = enumerate(spec, energy, energy, rho);
    ASSERT_EQ(ens.records.size(), 16u);

    // Energy outcome k is spin down for k = 0.
    const double pn[2] = {rho.matrix()(1, 1).real(), rho.matrix()(0, 0).real()};
    for (const auto& r : ens.records) {
        ASSERT_EQ(r.transitions.size(), 1u);
        const auto [i, j] = r.transitions.front();
        const Complex amp = u(bath_state(r.m) * 2 + bath_state(j), bath_state(r.n) * 2 + bath_state(i));
        EXPECT_NEAR(r.p, pn[r.n] * bath_weight(i) * std::norm(amp), 1e-14);
        const double q = bath_energy(i) - bath_energy(j);
        EXPECT_NEAR(r.q, q, 1e-15);
        EXPECT_NEAR(r.de, bath_energy(r.m) - bath_energy(r.n), 1e-15);
        EXPECT_NEAR(r.w, r.de - q, 1e-15);
        EXPECT_NEAR(r.dsi, r.ds - q, 1e-15);
    }
    EXPECT_NEAR(ens.total_probability(), 1.0, 1e-14);
}

TEST(Enumerate, TwoCollisionsMatchJointSpaceDilation) {
    // Sequence drive → relax on S ⊗ B1 ⊗ B2 with U = U2 U1.
    const MapSpec first = spin_map(3.3, 3.0, 1.0);
    const MapSpec second = spin_map(3.0, 3.0, 0.7);
    const ComplexMatrix swap23 = [] {
        ComplexMatrix p = ComplexMatrix::Zero(8, 8);
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) p(s * 4 + b * 2 + a, s * 4 + a * 2 + b) = 1.0;
        return p;
    }();
    const ComplexMatrix u1 = kron_loops(first.dilation(), eye(2));
    const ComplexMatrix u2 = swap23 * kron_loops(second.dilation(), eye(2)) * swap23;
    const ComplexMatrix u = u2 * u1;

    const MeasurementBasis energy = measurement_basis(first.system_hamiltonian());
    RealVector pops(2);
    pops << 0.3, 0.7;
    const Ensemble ens = enumerate_chain({kraus_from_dilation(first), kraus_from_dilation(second)}, energy, energy,
                                        initial_from_populations(energy, pops));
    ASSERT_EQ(ens.records.size(), 64u);
    for (const auto& r : ens.records) {
        const auto [i1, j1] = r.transitions[0];
        const auto [i2, j2] = r.transitions[1];
        const Eigen::Index in = bath_state(r.n) * 4 + bath_state(i1) * 2 + bath_state(i2);
        const Eigen::Index out = bath_state(r.m) * 4 + bath_state(j1) * 2 + bath_state(j2);
        const double expect = pops(r.n) * bath_weight(i1) * bath_weight(i2) * std::norm(u(out, in));
        EXPECT_NEAR(r.p, expect, 1e-14);
        EXPECT_NEAR(r.q, bath_energy(i1) - bath_energy(j1) + bath_energy(i2) - bath_energy(j2), 1e-15);
    }
}

TEST(Enumerate, WorkDistributionReference) {
    const MapSpec drive = spin_map(3.3, 3.0, 1.0);
    const MeasurementBasis e1 = measurement_basis(drive.system_hamiltonian());
    const Distribution w1 = distribution_of(enumerate(drive, e1, e1, gibbs_state(drive.system_hamiltonian(), 1.0)),
                                            Quantity::Work);
    ASSERT_EQ(w1.size(), oracle::kCycleDriveWork.size());
    for (std::size_t k = 0; k < w1.size(); ++k) {
        EXPECT_NEAR(w1.atoms()[k].value, oracle::kCycleDriveWork[k].first, 1e-12);
        EXPECT_NEAR(w1.atoms()[k].prob, oracle::kCycleDriveWork[k].second, 1e-12);
    }

    const MapSpec xy = chain2(2.0);
    const MeasurementBasis e2 = measurement_basis(xy.system_hamiltonian());
    const Distribution w2 =
        distribution_of(enumerate(xy, e2, e2, gibbs_state(xy.system_hamiltonian(), 1.2)), Quantity::Work);
    ASSERT_EQ(w2.size(), oracle::kChain2XyWork.size());
    for (std::size_t k = 0; k < w2.size(); ++k) {
        EXPECT_NEAR(w2.atoms()[k].value, oracle::kChain2XyWork[k].first, 1e-10);
        EXPECT_NEAR(w2.atoms()[k].prob, oracle::kChain2XyWork[k].second, 1e-12);
    }
}

TEST(Enumerate, MeansMatchProcessAverages) {
    const MapSpec spec = chain2(2.0);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const DensityMatrix rho = gibbs_state(spec.system_hamiltonian(), 1.2);
    const Ensemble ens = enumerate(spec, energy, energy, rho);
    const ThermoRecord avg = process_averages(spec, rho);
    EXPECT_NEAR(ens.mean(&TrajectoryRecord::w), avg.W, 1e-12);
    EXPECT_NEAR(ens.mean(&TrajectoryRecord::q), avg.Q, 1e-12);
    EXPECT_NEAR(ens.mean(&TrajectoryRecord::de), avg.dE, 1e-12);
}

TEST(Enumerate, BudgetExceeded) {
    const MapSpec spec = chain2(2.0);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const KrausSet k = kraus_from_dilation(spec);
    const InitialCondition init = initial_from_state(energy, DensityMatrix::maximally_mixed(4));
    EXPECT_THROW(enumerate_chain({k, k, k}, energy, energy, init, 1000), CapacityError);
}

TEST(Enumerate, DeterministicAcrossRuns) {
    const MapSpec spec = chain2(2.0);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const KrausSet k = kraus_from_dilation(spec);
    const InitialCondition init = initial_from_state(energy, DensityMatrix::maximally_mixed(4));
    const Ensemble a = enumerate_chain({k, k}, energy, energy, init);
    const Ensemble b = enumerate_chain({k, k}, energy, energy, init);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t r = 0; r < a.records.size(); ++r) {
        EXPECT_EQ(a.records[r].p, b.records[r].p);
        EXPECT_EQ(a.records[r].transitions, b.records[r].transitions);
    }
}

TEST(HeatResolved, SameJointLawAsExplicitEnumeration) {
    const MapSpec a = spin_map(3.3, 3.0, 1.0);
    const MapSpec b = spin_map(3.0, 3.0, 4.0);
    const std::vector<KrausSet> chain{kraus_from_dilation(a), kraus_from_dilation(b), kraus_from_dilation(b)};
    const MeasurementBasis energy = measurement_basis(a.system_hamiltonian());
    const InitialCondition init = initial_from_state(energy, gibbs_state(a.system_hamiltonian(), 1.0));
    const Ensemble full = enumerate_chain(chain, energy, energy, init);
    const Ensemble coarse = heat_resolved_chain(chain, energy, energy, init);
    EXPECT_TRUE(coarse.heat_resolved);
    for (Quantity q : {Quantity::Work, Quantity::Heat, Quantity::EntropyProduction, Quantity::EntropyChange}) {
        const DistributionDiff d = compare(distribution_of(full, q), distribution_of(coarse, q));
        EXPECT_EQ(d.unmatched, 0u);
        EXPECT_LT(d.max_prob_gap, 1e-14);
    }
    EXPECT_THROW(detailed_ft_check(coarse, coarse), ContractError);
}

TEST(ReversedKraus, MatchesRotatedBathMatrixElements) {
    // M̃_ji = √p_j <Θ i| U |Θ j> once Θ U† Θ† = U.
    const MapSpec spec = chain2(2.0);
    const TimeReversal ts = TimeReversal::spin(2);
    const TimeReversal tb = TimeReversal::spin(1);
    const KrausSet rev = reversed_kraus(spec, ts, tb);
    EXPECT_LT(completeness_residual(rev), 1e-12);
    const BathLevels& bath = spec.bath_levels();
    const ComplexMatrix rotated = tb.apply(bath.vectors);
    std::mt19937_64 rng(21);
    const ComplexMatrix rho = random_state_matrix(4, rng);
    for (const auto& m : rev.ops) {
        const ComplexMatrix in = kron_loops(eye(4), rotated.col(m.i));
        const ComplexMatrix out = kron_loops(eye(4), rotated.col(m.j));
        const ComplexMatrix expect = std::sqrt(bath.weights(m.i)) * out.adjoint() * spec.dilation() * in;
        EXPECT_LT(max_abs(m.op * rho * m.op.adjoint() - expect * rho * expect.adjoint()), 1e-12);
        EXPECT_NEAR(m.p_i, bath.weights(m.i), 1e-14);
    }
}

TEST(FluctuationTheorem, DetailedAndIntegralOnSingleMaps) {
    for (const MapSpec& spec : {chain2(0.0), chain2(2.0), spin_map(3.0, 3.0, 4.0), spin_map(3.3, 3.0, 1.0)}) {
        const int sites = spec.system_dim() == 4 ? 2 : 1;
        const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
        const Ensemble fwd = enumerate(spec, energy, energy, gibbs_state(spec.system_hamiltonian(), spec.beta()));
        const Ensemble bwd = backward_ensemble({spec}, energy, energy, fwd, TimeReversal::spin(sites),
                                               TimeReversal::spin(1));
        EXPECT_NEAR(bwd.total_probability(), 1.0, 1e-12);
        EXPECT_LT(detailed_ft_check(fwd, bwd), 1e-10);
        EXPECT_NEAR(integral_ft(fwd), 1.0, 1e-12);
    }
}

TEST(FluctuationTheorem, MissingPartnerRejected) {
    const MapSpec spec = chain2(2.0);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const Ensemble fwd = enumerate(spec, energy, energy, DensityMatrix::maximally_mixed(4));
    Ensemble empty = fwd;
    empty.records.clear();
    EXPECT_THROW(detailed_ft_check(fwd, empty), ContractError);
}

TEST(Crooks, TwoSiteXyChain) {
    const CrooksReport r = crooks_check(chain2(2.0), TimeReversal::spin(2), TimeReversal::spin(1));
    EXPECT_TRUE(r.passed(1e-8));
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.atoms.size(), oracle::kChain2XyWork.size());
    EXPECT_LT(r.reversal_gap, 1e-10);
    for (const auto& a : r.atoms) {
        EXPECT_NEAR(a.p / a.p_mirror, std::exp(1.2 * a.w), 1e-8 * std::exp(1.2 * a.w));
    }
}

TEST(EquilibriumWork, SystemOnlyDistributionMatchesEnumeration) {
    const MapSpec spec = chain2(0.0);
    const ComplexMatrix h0 = build_h0({2, 2.0, {3.0}, {}});
    const DensityMatrix rho = gibbs_state(spec.system_hamiltonian(), 1.2);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const Distribution full = distribution_of(enumerate(spec, energy, energy, rho), Quantity::Work);
    const DistributionDiff d = compare(equilibrium_work_distribution(spec, h0, rho), full);
    EXPECT_EQ(d.unmatched, 0u);
    EXPECT_LT(d.max_prob_gap, 1e-12);
    EXPECT_THROW(equilibrium_work_distribution(chain2(2.0), h0, rho), ContractError);
}

TEST(Populations, GibbsWeightsIncludeRank) {
    const MeasurementBasis b = measurement_basis(kron_loops(sz(), eye(2)) + kron_loops(eye(2), sz()));
    const RealVector p = gibbs_populations(b, 0.5);
    const double z = std::exp(1.0) + 2.0 + std::exp(-1.0);
    EXPECT_NEAR(p(0), std::exp(1.0) / z, 1e-15);
    EXPECT_NEAR(p(1), 2.0 / z, 1e-15);
    RealVector bad(3);
    bad << 0.5, 0.6, -0.1;
    EXPECT_THROW(initial_from_populations(b, bad), ContractError);
}
