#pragma once

#include <span>
#include <vector>

#include "moire/gsfe.hpp"
#include "moire/model.hpp"
#include "moire/optimize.hpp"
#include "moire/pair_potential.hpp"

namespace moire {

/// Bilayer chain in length-nondimensionalized units: layer-1 atoms sit at
/// i + U1, i = 1..M per moire cell, layer-2 atoms at (1-theta)j + U2,
/// j = 1..N = M+1. Displacements are stored per atom and extended
/// periodically over the supercell; `cells` moire cells may be stacked for
/// supercell-consistency checks. Energies are per-atom averages per layer,
/// matching the nondimensional per-cell convention.
struct AtomisticSystem {
    double mismatch = 0;          // theta
    int cells = 1;
    std::vector<double> layer1;   // U1 at X = eps*(i+1), size cells*M
    std::vector<double> layer2;   // U2 at X = theta*(j+1), size cells*N
    PairPotential intra;
    PairPotential inter;
    int image_range = 0;          // J; intra sums run over 0 < |j| <= J
};

/// Builds a zero-displacement system. image_range = 0 selects the smallest
/// range covering both cutoffs; an explicit value below that is rejected.
AtomisticSystem make_system(double mismatch, PairPotential intra, PairPotential inter,
                            int image_range = 0, int cells = 1);

/// Throws ChainCrossing if any adjacent pair in either layer has moved by
/// half a lattice spacing or more (arguments of the pair sums would change
/// sign relative to their unrelaxed values).
void check_chain_order(const AtomisticSystem& system);

double intra_energy(const AtomisticSystem& system);
double inter_energy(const AtomisticSystem& system);
double total_energy(const AtomisticSystem& system);

struct LayerGradient {
    std::vector<double> layer1;
    std::vector<double> layer2;
};

/// Exact derivative of intra + inter energy with respect to every stored
/// displacement.
LayerGradient atomistic_gradient(const AtomisticSystem& system);

/// Cauchy-Born energy density: the lattice sum of the intra potential on a
/// uniformly strained chain, shifted so the unstrained value is zero.
double cauchy_born_density(const PairPotential& potential, double strain);

/// Second strain derivative of the Cauchy-Born density at zero,
/// sum_j j^2 W''(j). Cross-checked internally against a second-order central
/// difference of cauchy_born_density; throws DegenerateStiffness when the
/// result is non-positive.
double stiffness(const PairPotential& potential);

/// Stacking energy from interlayer images: sum_j W_inter(z - (1-theta) j).
/// (1-theta)-periodic in z by construction.
double stacking_potential(const PairPotential& potential, double mismatch, double z);

/// One period of the stacking potential on a uniform grid (z_k = k p / K).
struct TabulatedStacking {
    std::vector<double> values;
    double period = 0;
};

TabulatedStacking tabulate_stacking(const PairPotential& potential, double mismatch, int samples);

/// First-harmonic fit of a tabulated periodic function: the fitted form is
/// mean - 2 v0 cos(2 pi z / period) and the residual is the max-norm of what
/// the mean plus fundamental leave unexplained. Needs >= 64 samples.
struct SinusoidFit {
    double v0 = 0;
    double residual = 0;
    double mean = 0;
};

SinusoidFit fit_sinusoid(std::span<const double> values, double period);
SinusoidFit fit_sinusoid(const TabulatedStacking& tabulated);

/// Continuum parameters extracted from the pair potentials: stiffness
/// kappa_tilde, the tabulated stacking energy, and its sinusoid reduction.
struct DerivedContinuum {
    double kappa_tilde = 0;
    TabulatedStacking v_tilde;
    double v0_tilde = 0;
    double fit_residual = 0;
    double v_mean = 0;

    double delta() const { return v0_tilde / kappa_tilde; }
    StackingPotentialSpec sinusoid() const;
};

DerivedContinuum derive_continuum(const PairPotential& intra, const PairPotential& inter,
                                  double mismatch, int samples = 512);

struct AtomisticRelaxation {
    std::vector<double> layer1;
    std::vector<double> layer2;
    double energy = 0;
    double gradient_norm = 0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes the total energy over the concatenated displacement vector.
/// The rigid-translation zero mode is gauge-fixed by projecting the mean of
/// all displacements to zero; trial states that cross chains are rejected
/// by the line search rather than aborting the run.
AtomisticRelaxation relax_atomistic(const AtomisticSystem& system, const MinimizeOptions& options);

struct ComparisonRow {
    double theta = 0;
    double epsilon = 0;
    double eta = 0;
    double l2_error = 0;
    double energy_gap = 0;
    int atoms = 0;
};

struct StudyOptions {
    int grid_n = 2048;            // continuum grid
    int tabulation_samples = 512;
    MinimizeOptions atomistic{10, 0.0, 20000, LineSearch::StrongWolfe};   // tolerance 0 = auto
    MinimizeOptions continuum{10, 0.0, 20000, LineSearch::ArmijoBacktracking};
};

/// The central experiment: for each mismatch, rescale the interlayer
/// potential so the derived eta matches the requested value, relax both the
/// atomistic chain and the reduced continuum model, and report the discrete
/// L2 distance between the two U_- profiles plus the nondimensional energy
/// gap. Throws if either relaxation fails to converge.
std::vector<ComparisonRow> continuum_comparison(std::span<const double> mismatches, double eta,
                                                const PairPotential& intra,
                                                const PairPotential& inter_unit,
                                                const StudyOptions& options = {});

} // namespace moire
