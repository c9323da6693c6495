#pragma once

#include "moire/errors.hpp"

namespace moire {

/// Wraps x into [0, period). A true mathematical modulus: negative inputs
/// land in the same fundamental interval instead of mirroring around zero.
double positive_mod(double x, double period);

/// Dimensional inputs of the bilayer chain model. Layer 1 has lattice
/// constant `lattice_constant`; layer 2 is shorter by the factor
/// (1 - mismatch). The moire period, supercell atom counts and the
/// dimensionless groups are always derived from these four numbers,
/// never stored separately.
struct ModelParams {
    double lattice_constant = 0.25;   // a, nm
    double mismatch = 0.02;           // theta, in (0,1)
    double stiffness = 50000.0;       // kappa, meV per nm
    double stacking_amplitude = 20.0; // V0, meV per nm

    void validate() const; // throws std::invalid_argument
};

/// Moire period a(1-theta)/theta: the minimal period of the unrelaxed
/// disregistry.
double moire_period(const ModelParams& params);

/// Period of the stacking energy, (1-theta)a.
double stacking_period(const ModelParams& params);

struct LatticeCounts {
    int layer1 = 0; // M atoms of layer 1 per moire cell
    int layer2 = 0; // N = M+1 atoms of layer 2
};

/// Supercell atom counts M and N with M*a = N*a(1-theta) = a_M.
/// Requires 1/theta to be an integer to within 1e-9; anything else has no
/// commensurate supercell and throws IncommensurateTheta (rounding silently
/// would change the physical problem).
LatticeCounts lattice_counts(double mismatch);
LatticeCounts lattice_counts(const ModelParams& params);

/// Unrelaxed interpolated disregistry theta*x mod (1-theta)a, in [0, period).
double unrelaxed_disregistry(double x, const ModelParams& params);

struct DimensionlessGroups {
    double epsilon = 0;     // a/a_M = theta/(1-theta)
    double delta_ratio = 0; // V0/kappa
    double eta = 0;         // sqrt(delta)/epsilon

    /// The inverse convention eta_abstract = epsilon^2/delta = 1/eta^2,
    /// exposed for reporting only.
    double eta_abstract() const { return 1.0 / (eta * eta); }
};

DimensionlessGroups dimensionless_groups(const ModelParams& params);

/// Inverse construction for sweeps at fixed eta: stiffness is pinned to 1
/// energy/length by convention and V0 = (eta*epsilon)^2 * kappa, so that
/// dimensionless_groups() returns the requested eta.
ModelParams params_from_eta(double eta, double mismatch, double lattice_constant);

enum class StackingForm { Sinusoid, LatticeSum };

/// Shape of the stacking energy V[delta]. The sinusoid form evaluates to
/// -2 v0 cos(2 pi delta / period); the lattice-sum form is tabulated by the
/// atomistic module and carries no closed form here.
struct StackingPotentialSpec {
    StackingForm form = StackingForm::Sinusoid;
    double amplitude = 0.0; // v0, energy per length (or energy when reduced)
    double period = 0.0;

    double evaluate(double disregistry) const; // Sinusoid only
};

} // namespace moire
