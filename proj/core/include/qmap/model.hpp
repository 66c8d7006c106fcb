// model.hpp: spin registers, chain and bath Hamiltonians, step couplings, Gibbs states.
//
// Tensor-factor ordering: system spins 1..M first, the bath spin last.
// Computational basis |0> is spin up (σᶻ = +1).

#pragma once

#include "qmap/linalg.hpp"

#include <vector>

namespace qmap {

enum class Axis { X, Y, Z };

ComplexMatrix pauli(Axis axis);

/// I ⊗ … ⊗ σ^axis ⊗ … ⊗ I on n_spins spins; `site` is 1-based.
ComplexMatrix pauli_site(Axis axis, int site, int n_spins);

/// H = (h/2) Σ σᶻ_i − Σ (Jx_i σˣ_i σˣ_{i+1} + Jy_i σʸ_i σʸ_{i+1}).
///
/// An all-zero (or empty) `jy` selects the isotropic XX chain, whose σʸσʸ
/// weights equal `jx`; any other `jy` is used verbatim (XY chain).
struct SpinChainParams {
    int sites = 1;
    double h = 0.0;
    std::vector<double> jx;
    std::vector<double> jy;

    bool is_xx() const;
    /// Effective σʸσʸ weights after resolving the XX convention.
    std::vector<double> yy_weights() const;
    void validate() const;
};

struct BathParams {
    double h_b = 0.0;
    double beta = 1.0;
};

/// V = Jx_c σˣ_site σˣ_b + Jy_c σʸ_site σʸ_b, switched on for a duration tau.
struct CouplingSpec {
    double jx_c = 0.0;
    double jy_c = 0.0;
    int site = 1;
    double tau = 1.0;
};

ComplexMatrix build_chain(const SpinChainParams& p);

/// Non-interacting part (h/2) Σ σᶻ_i.
ComplexMatrix build_h0(const SpinChainParams& p);

/// (h_b/2) σᶻ_b for the single bath spin.
ComplexMatrix build_bath(const BathParams& b);

/// Coupling on the 2^(M+1) joint space, bath spin last.
ComplexMatrix build_coupling(const CouplingSpec& c, int n_system_spins);

/// e^{-βh}/Z computed from the spectrum of h, shifted for stability.
DensityMatrix gibbs_state(const ComplexMatrix& h, double beta);

/// ⊗ (iσˣ)(iσʸ) over n spins: the unitary part of the spin time reversal.
ComplexMatrix spin_flip_rotation(int n_spins);

}  // namespace qmap
