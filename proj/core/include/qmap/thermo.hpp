// thermo.hpp: averaged energetics and entropy production of one map application.

#pragma once

#include "qmap/cptp_map.hpp"

#include <ostream>

namespace qmap {

/// Heat Q is energy drawn from the bath; k_B = 1.
struct ThermoRecord {
    double dE = 0.0;
    double Q = 0.0;
    double W = 0.0;
    double dS = 0.0;
    double dSi = 0.0;

    ThermoRecord& operator+=(const ThermoRecord& o);
};

ThermoRecord operator+(ThermoRecord a, const ThermoRecord& b);

/// D(ρ || ω_β(h)) = −S(ρ) + β Tr[ρ h] + ln Z, without forming ln ω_β(h).
double gibbs_relative_entropy(const DensityMatrix& rho, const ComplexMatrix& h, double beta);

/// Global form: Q from the bath marginal, ΔᵢS = D(ρ'_tot || ρ'_S ⊗ ω_β(H_B)).
ThermoRecord process_averages(const MapSpec& spec, const DensityMatrix& rho);

/// System-only form valid when [U, H0 ⊗ I + I ⊗ H_B] = 0; throws
/// ContractError if that certificate fails at kCertificateTol.
ThermoRecord equilibrium_averages(const MapSpec& spec, const ComplexMatrix& h0, const DensityMatrix& rho);

struct DeffnerTerms {
    double d_before = 0.0;   // D(ρ || ω_β(H_S))
    double d_after = 0.0;    // D(ρ' || ω_β(H_S))
    double beta_w = 0.0;

    double entropy_production() const { return d_before - d_after + beta_w; }
};

/// Requires ||[H0, H_S]||∞ < 1e-10.
DeffnerTerms deffner_decomposition(const MapSpec& spec, const ComplexMatrix& h0, const DensityMatrix& rho);

}  // namespace qmap
