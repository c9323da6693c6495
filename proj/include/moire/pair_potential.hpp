#pragma once

#include <functional>

#include "moire/errors.hpp"

namespace moire {

/// Even interatomic pair potential with a hard cutoff: value, slope and
/// curvature all evaluate to exactly zero beyond it. Construction samples
/// the callbacks to verify evenness (to 1e-12) and that the supplied first
/// derivative matches a finite difference of the value (to 1e-7); violations
/// throw PotentialContractError. Distances are in nondimensional units of
/// the layer-1 lattice constant.
class PairPotential {
public:
    PairPotential(std::function<double(double)> value, std::function<double(double)> d1,
                  std::function<double(double)> d2, double cutoff);

    double value(double z) const;
    double slope(double z) const;
    double curvature(double z) const;
    double cutoff() const { return cutoff_; }

private:
    std::function<double(double)> value_, d1_, d2_;
    double cutoff_;

    void verify_contract() const;
};

/// Potential multiplied by a constant factor; cutoff unchanged.
PairPotential scaled(const PairPotential& potential, double factor);

/// W(z) = spring/2 (|z| - rest_length)^2. Nearest-neighbor bond when the
/// cutoff excludes second neighbors.
PairPotential harmonic_bond(double spring = 1.0, double rest_length = 1.0, double cutoff = 1.5);

/// 12-6 form with minimum -well_depth at |z| = minimum, blended to zero over
/// [cutoff - 0.5, cutoff] with a quintic switch so value, slope and curvature
/// stay continuous at the cutoff.
PairPotential lennard_jones(double well_depth = 1.0, double minimum = 1.0, double cutoff = 5.0);

/// Attractive well W(z) = -depth exp(-z^2 / (2 width^2)): rewards aligned
/// stacking when used as the interlayer potential.
PairPotential gaussian_well(double depth = 1.0, double width = 0.4, double cutoff = 5.0);

} // namespace moire
