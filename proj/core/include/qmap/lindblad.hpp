// lindblad.hpp: the repeated-interaction limit V = v/√τ, τ → 0.
//
//     ∂ρ/∂t = −i[H_S, ρ] + D(ρ)
//     D(ρ) = Σ_r γ_r [ L ρ L† − ½{L†L, ρ} + ω_r⁻¹ (L† ρ L − ½{L L†, ρ}) ]
//
// with one channel r per bath pair i <= j: L_r = <j|v|i>,
// ω_r = e^{β(ε_j − ε_i)}, γ_r = p_i for i < j and p_i/2 for i = j.

#pragma once

#include "qmap/linalg.hpp"

#include <optional>
#include <vector>

namespace qmap {

/// Channels with ||L_r||∞ below this are kept but flagged inactive.
inline constexpr double kInactiveChannel = 1e-13;

struct LindbladChannel {
    ComplexMatrix op;
    double gamma = 0.0;
    double omega = 1.0;
    double eps_i = 0.0;
    double eps_j = 0.0;
    int i = 0;
    int j = 0;
    bool active = true;
};

struct LindbladGenerator {
    ComplexMatrix h_system;
    std::vector<LindbladChannel> channels;
    double beta = 0.0;

    Eigen::Index dim() const { return h_system.rows(); }

    ComplexMatrix dissipator(const ComplexMatrix& rho) const;
    /// −i[H_S, ρ] + D(ρ)
    ComplexMatrix operator()(const ComplexMatrix& rho) const;
    /// Upper bound on the operator norm of the generator.
    double norm_bound() const;
    /// Matrix of the generator on column-stacked vec(ρ).
    ComplexMatrix superoperator() const;
};

LindbladGenerator generator_from_coupling(const ComplexMatrix& v, const ComplexMatrix& h_system,
                                          const ComplexMatrix& h_bath, double beta);

struct RateRecord {
    double Q_dot = 0.0;
    double W_dot = 0.0;
    double Si_dot = 0.0;
    int clamped = 0;     // eigenvalues of ρ floored inside ln ρ
};

/// Q̇ = Σ p_i (ε_i − ε_j) Tr[L_ij ρ L_ij†], Ẇ = Tr[H_S D(ρ)] − Q̇,
/// Ṡᵢ = −Tr[D(ρ) ln ρ] − βQ̇.
RateRecord rates(const LindbladGenerator& gen, const ComplexMatrix& rho);

struct DetailedBalanceReport {
    double eigenoperator_residual = 0.0;   // max ||[H0, L] − (ε_i − ε_j) L||∞ and adjoint
    double h0_commutator = 0.0;            // ||[H0, H_S]||∞
    double stationarity = 0.0;             // ||L(e^{−βH0}/Z0)||∞
    bool passed = false;

    double max_residual() const;
};

DetailedBalanceReport detailed_balance_check(const LindbladGenerator& gen, const ComplexMatrix& h0);

/// Q̇ = Tr[H0 D(ρ)], Ẇ = Tr[(H_S − H0) D(ρ)], Ṡᵢ = −Tr[D(ρ) ln ρ] − βQ̇.
/// Throws ContractError unless detailed balance holds for H0.
RateRecord simplified_rates(const LindbladGenerator& gen, const ComplexMatrix& h0, const ComplexMatrix& rho);

/// Normalized null vector of the generator.
DensityMatrix steady_state(const LindbladGenerator& gen);

struct LindbladSample {
    double t = 0.0;
    ComplexMatrix rho;
    RateRecord rate;
    double W_cum = 0.0;
    double Q_cum = 0.0;
    double Si_cum = 0.0;
};

/// Fixed-step RK4 on ρ and the cumulative W, Q, Sᵢ, Hermitizing after each
/// step. Samples are kept every `stride` steps plus the final time. Throws
/// StepSizeError when dt · norm_bound() >= 0.1 and PositivityError if ρ
/// leaves the state space beyond −1e-7.
std::vector<LindbladSample> integrate(const LindbladGenerator& gen, const DensityMatrix& rho0, double t_final,
                                      double dt, std::size_t stride = 1);

struct ConvergenceRow {
    double tau = 0.0;
    double error = 0.0;                    // ||E_τ^{t/τ}(ρ0) − ρ(t)||_F
    std::optional<double> order;           // against the previous row
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool monotone = true;
    std::optional<double> min_order;
};

/// Collision maps with coupling v/√τ iterated up to t for each τ (t/τ must
/// be an integer), compared with a fine-step integration of the generator.
ConvergenceTable convergence_check(const ComplexMatrix& v, const ComplexMatrix& h_system,
                                   const ComplexMatrix& h_bath, double beta, const DensityMatrix& rho0,
                                   double t, const std::vector<double>& taus);

}  // namespace qmap
