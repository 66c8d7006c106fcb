// cptp_map.hpp: CPTP maps generated by a system–bath collision.
//
// A MapSpec fixes H_S, H_B, the joint coupling V, the collision time τ and
// the bath inverse temperature β; the dilation U = exp(-iτ(H_S + H_B + V))
// is computed once on construction. The Kraus operators carry the bath
// transition i -> j they stand for:
//
//     M_ij = sqrt(e^{-β ε_i} / Z_B) <j| U |i>.

#pragma once

#include "qmap/linalg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace qmap {

/// Bath eigenvalues closer than this are merged into one level.
inline constexpr double kDegeneracyTol = 1e-9;
/// ΔᵢS(π) above this marks a map with a non-equilibrium steady state.
inline constexpr double kClassTol = 1e-8;
/// Commutator norm below which a conserved-quantity certificate is accepted.
inline constexpr double kCertificateTol = 1e-9;

struct BathLevels {
    RealVector energies;        // per eigenvector; degenerate groups share their mean
    ComplexMatrix vectors;      // eigenvectors as columns, ascending energy
    RealVector weights;         // e^{-β ε_i} / Z_B
    std::vector<int> level;     // level index of each eigenvector
    std::vector<int> sub;       // position inside its level
    double partition = 0.0;     // Z_B
    bool degenerate = false;
};

class MapSpec {
public:
    /// Throws ContractError for non-Hermitian generators, τ < 0 or β <= 0,
    /// and DimensionError when V does not live on H_S ⊗ H_B.
    MapSpec(ComplexMatrix h_system, ComplexMatrix h_bath, ComplexMatrix coupling, double tau,
            double beta);

    const ComplexMatrix& system_hamiltonian() const noexcept;
    const ComplexMatrix& bath_hamiltonian() const noexcept;
    const ComplexMatrix& coupling() const noexcept;
    double tau() const noexcept;
    double beta() const noexcept;

    Eigen::Index system_dim() const noexcept;
    Eigen::Index bath_dim() const noexcept;

    /// H_S ⊗ I + I ⊗ H_B + V
    ComplexMatrix total_hamiltonian() const;
    const ComplexMatrix& dilation() const noexcept;
    const BathLevels& bath_levels() const noexcept;
    const DensityMatrix& bath_gibbs() const noexcept;

private:
    struct Data;
    static std::shared_ptr<const Data> make(ComplexMatrix h_system, ComplexMatrix h_bath,
                                            ComplexMatrix coupling, double tau, double beta);

    std::shared_ptr<const Data> d_;
};

struct KrausOperator {
    ComplexMatrix op;
    int i = 0;              // initial bath eigenvector
    int j = 0;              // final bath eigenvector
    int level_i = 0;
    int level_j = 0;
    double eps_i = 0.0;
    double eps_j = 0.0;
    double p_i = 0.0;       // e^{-β ε_i} / Z_B
};

struct KrausSet {
    std::vector<KrausOperator> ops;
    Eigen::Index system_dim = 0;
    double beta = 0.0;
    bool degenerate_bath = false;
};

struct TotalState {
    DensityMatrix total;
    DensityMatrix system;
    DensityMatrix bath;
};

ComplexMatrix dilation_unitary(const MapSpec& spec);

KrausSet kraus_from_dilation(const MapSpec& spec);

/// ||Σ M†M − I||∞
double completeness_residual(const KrausSet& k);

/// Σ M ρ M† without validation.
ComplexMatrix apply_kraus(const KrausSet& k, const ComplexMatrix& rho);

/// Σ M ρ M†; throws IntegrityError if the output is not a density matrix.
DensityMatrix apply_map(const KrausSet& k, const DensityMatrix& rho);

/// U(ρ ⊗ ω_β(H_B))U† together with both marginals.
TotalState apply_total(const MapSpec& spec, const DensityMatrix& rho);

/// Fixed point of the map by iteration from rho0; stops once
/// ||E(ρ) − ρ||_F < tol. Throws ConvergenceError after max_iter.
DensityMatrix invariant_state(const KrausSet& k, const DensityMatrix& rho0,
                              int max_iter = 100000, double tol = 1e-12);

/// invariant_state from three random seeds; throws ConvergenceError unless
/// the results agree to 1e-8 (Frobenius), i.e. the fixed point is attractive.
DensityMatrix attractive_invariant_state(const KrausSet& k, std::uint64_t seed = 1,
                                         int max_iter = 100000, double tol = 1e-12);

/// D(ρ'_tot || ρ'_S ⊗ ω_β(H_B)).
double entropy_production(const MapSpec& spec, const DensityMatrix& rho);

/// ||[U, H0 ⊗ I + I ⊗ H_B]||∞
double commutation_residual(const MapSpec& spec, const ComplexMatrix& h0);

enum class MapKind { Thermal, EquilibriumNonThermal, Ness };

std::string_view to_string(MapKind kind);

struct MapClassification {
    MapKind kind;
    DensityMatrix invariant;
    double entropy_production = 0.0;    // raw ΔᵢS(π)
    std::optional<ComplexMatrix> certificate;   // accepted H0
    bool within_tolerance = false;      // equilibrium with ΔᵢS(π) in [1e-10, 1e-8)
    double thermal_residual = 0.0;      // ||[U, H_S + H_B]||∞
    std::optional<double> candidate_residual;
};

/// Throws IntegrityError when a commuting certificate coexists with
/// ΔᵢS(π) > kClassTol.
MapClassification classify_map(const MapSpec& spec, const DensityMatrix& pi,
                               const std::optional<ComplexMatrix>& h0_candidate = std::nullopt);

}  // namespace qmap
