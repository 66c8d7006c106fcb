// trajectories.hpp: two-point-measurement trajectory ensembles.
//
// A trajectory γ = {n, (i₁,j₁) … (i_N,j_N), m} records the initial outcome n
// of A, the bath transition of every collision and the final outcome m of B.
// Its probability is Tr[C ρ_n C†] with C = Π_m† M_N … M_1 Π_n restricted to
// the outcome subspaces, and
//
//     Δe = b_m − a_n,   q = Σ (ε_i − ε_j),   w = Δe − q,
//     Δs = ln(p_i(n)/r_n) − ln(p_f(m)/r_m),   Δᵢs = Δs − βq,
//
// where r_n, r_m are outcome ranks (1 for non-degenerate observables).

#pragma once

#include "qmap/cptp_map.hpp"
#include "qmap/distribution.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmap {

inline constexpr std::size_t kDefaultBudget = 10'000'000;

struct MeasurementOutcome {
    double value = 0.0;
    ComplexMatrix vectors;   // orthonormal columns spanning the eigenspace

    int rank() const { return static_cast<int>(vectors.cols()); }
};

struct MeasurementBasis {
    std::string label;
    std::vector<MeasurementOutcome> outcomes;
    Eigen::Index dim = 0;
    bool degenerate = false;

    ComplexMatrix projector(std::size_t k) const;
    /// ||Σ P − I||∞
    double completeness_residual() const;
};

/// Eigen-decomposition of a Hermitian observable, eigenvalues within
/// kDegeneracyTol grouped into one outcome.
MeasurementBasis measurement_basis(const ComplexMatrix& observable, std::string label = "custom");

/// Antiunitary Θ = R K acting as Θψ = R conj(ψ).
struct TimeReversal {
    ComplexMatrix rotation;

    /// ⊗ (iσˣ)(iσʸ) K over n spins.
    static TimeReversal spin(int n_spins);

    ComplexMatrix apply(const ComplexMatrix& columns) const;   // R conj(V)
    ComplexMatrix conjugate(const ComplexMatrix& op) const;    // Θ X Θ† = R conj(X) R†
};

/// Θ_S ⊗ Θ_B
TimeReversal combine(const TimeReversal& system, const TimeReversal& bath);

/// Outcomes carried to their time-reversed images, same values and order.
MeasurementBasis reversed_basis(const MeasurementBasis& basis, const TimeReversal& theta);

/// Initial state of an ensemble: per-outcome factors F_n with F_n F_n†
/// equal to Π_n ρ Π_n, and the outcome probabilities p_i(n).
struct InitialCondition {
    std::vector<ComplexMatrix> factors;
    RealVector probs;
};

InitialCondition initial_from_state(const MeasurementBasis& a, const DensityMatrix& rho);

/// Uniform state p_n / r_n inside each outcome subspace.
InitialCondition initial_from_populations(const MeasurementBasis& a, const RealVector& pops);

/// e^{-β a_n} r_n / Z over the outcomes of an energy basis.
RealVector gibbs_populations(const MeasurementBasis& energy_basis, double beta);

struct TrajectoryRecord {
    int n = 0;
    std::vector<std::pair<int, int>> transitions;   // (i, j) per collision
    int m = 0;
    double p = 0.0;
    double de = 0.0;
    double q = 0.0;
    double w = 0.0;
    double ds = 0.0;
    double dsi = 0.0;
};

struct Ensemble {
    std::vector<TrajectoryRecord> records;
    RealVector initial_probs;
    RealVector final_probs;
    std::vector<int> initial_ranks;
    std::vector<int> final_ranks;
    std::vector<double> initial_values;
    std::vector<double> final_values;
    double beta = 0.0;
    /// True when records are aggregated over bath transitions with equal q.
    bool heat_resolved = false;

    double total_probability() const;
    double mean(double TrajectoryRecord::*field) const;
};

/// Exact enumeration of every trajectory through the chain of maps, applied
/// in order. Throws CapacityError if the record count exceeds budget.
Ensemble enumerate_chain(const std::vector<KrausSet>& chain, const MeasurementBasis& a,
                         const MeasurementBasis& b, const InitialCondition& init,
                         std::size_t budget = kDefaultBudget);

/// Same joint law of (n, q, m) as enumerate_chain, computed by propagating
/// heat-labelled operators instead of individual transition sequences.
Ensemble heat_resolved_chain(const std::vector<KrausSet>& chain, const MeasurementBasis& a,
                             const MeasurementBasis& b, const InitialCondition& init);

/// Single-map ensemble from the non-selectively measured ρ.
Ensemble enumerate(const MapSpec& spec, const MeasurementBasis& a, const MeasurementBasis& b,
                   const DensityMatrix& rho);

enum class Quantity { Work, Heat, EnergyChange, EntropyChange, EntropyProduction };

Distribution distribution_of(const Ensemble& ens, Quantity quantity, double bin_tol = kBinTol);

/// Work distribution built from system quantities only; requires
/// [H0, H_S] = 0 and the equilibrium certificate of the map.
Distribution equilibrium_work_distribution(const MapSpec& spec, const ComplexMatrix& h0,
                                           const DensityMatrix& rho_bar);

/// ||Θ U† Θ† − U||∞ with Θ = Θ_S ⊗ Θ_B.
double time_symmetry_residual(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath);

/// M̃_ji = e^{β(ε_i − ε_j)/2} Θ_S M_ij† Θ_S†, labels swapped.
KrausSet reversed_kraus(const KrausSet& k, const TimeReversal& system);

/// As above after confirming Θ is a symmetry of the dilation (ContractError
/// otherwise) and that the reversed set is trace preserving.
KrausSet reversed_kraus(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath);

/// Backward process of a sequence: reversed maps in reversed order, initial
/// measurement Θ B Θ†, final measurement Θ A Θ†. The initial populations
/// default to the forward final ones.
Ensemble backward_ensemble(const std::vector<MapSpec>& steps, const MeasurementBasis& a,
                           const MeasurementBasis& b, const Ensemble& forward, const TimeReversal& system,
                           const TimeReversal& bath, const std::optional<RealVector>& initial = std::nullopt,
                           std::size_t budget = kDefaultBudget);

/// max |ln p(γ) − Δᵢs_γ − ln p̃(γ̃)| over pairs where both probabilities
/// exceed 1e-12. Throws ContractError when a forward trajectory has no
/// backward partner.
double detailed_ft_check(const Ensemble& forward, const Ensemble& backward);

/// ⟨e^{−Δᵢs}⟩
double integral_ft(const Ensemble& ens);

struct CrooksAtom {
    double w = 0.0;
    double p = 0.0;
    double p_mirror = 0.0;   // p(−w) in the same ensemble
    double residual = 0.0;   // |ln p(w) − ln p(−w) − βw|
    bool missing_mirror = false;   // counted as a violation only if p(w)e^{−βw} > 1e-12
};

struct CrooksReport {
    std::vector<CrooksAtom> atoms;
    double max_residual = 0.0;
    int violations = 0;
    Distribution forward;
    Distribution backward;
    double reversal_gap = 0.0;   // max |p(w) − p̃(w)|

    bool passed(double tol = 1e-8) const { return violations == 0 && max_residual < tol; }
};

/// Work fluctuation relation for one map with Gibbs initial states in both
/// directions and A = B = H_S.
CrooksReport crooks_check(const MapSpec& spec, const TimeReversal& system, const TimeReversal& bath);

}  // namespace qmap
