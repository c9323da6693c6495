#include "moire/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace moire {

double positive_mod(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0)
        r += period;
    if (r >= period) // rounding of r += period can land exactly on period
        r = 0.0;
    return r;
}

void ModelParams::validate() const {
    if (!(lattice_constant > 0) || !std::isfinite(lattice_constant))
        throw std::invalid_argument("ModelParams: lattice_constant must be positive");
    if (!(mismatch > 0) || !(mismatch < 1))
        throw std::invalid_argument("ModelParams: mismatch must lie in (0,1)");
    if (!(stiffness > 0) || !std::isfinite(stiffness))
        throw std::invalid_argument("ModelParams: stiffness must be positive");
    // V0 = 0 is admitted as the decoupled-layer limit (eta = 0).
    if (!(stacking_amplitude >= 0) || !std::isfinite(stacking_amplitude))
        throw std::invalid_argument("ModelParams: stacking_amplitude must be non-negative");
}

double moire_period(const ModelParams& params) {
    params.validate();
    return params.lattice_constant * (1.0 - params.mismatch) / params.mismatch;
}

double stacking_period(const ModelParams& params) {
    return (1.0 - params.mismatch) * params.lattice_constant;
}

LatticeCounts lattice_counts(double mismatch) {
    if (!(mismatch > 0) || !(mismatch < 1))
        throw std::invalid_argument("lattice_counts: mismatch must lie in (0,1)");
    const double inverse = 1.0 / mismatch;
    const double rounded = std::round(inverse);
    if (std::abs(inverse - rounded) > 1e-9)
        throw IncommensurateTheta("lattice_counts: 1/theta = " + std::to_string(inverse) +
                                  " is not an integer; no commensurate supercell exists");
    const int n = static_cast<int>(rounded);
    if (n < 2)
        throw IncommensurateTheta("lattice_counts: 1/theta must be at least 2");
    return LatticeCounts{n - 1, n};
}

LatticeCounts lattice_counts(const ModelParams& params) {
    params.validate();
    return lattice_counts(params.mismatch);
}

double unrelaxed_disregistry(double x, const ModelParams& params) {
    return positive_mod(params.mismatch * x, stacking_period(params));
}

DimensionlessGroups dimensionless_groups(const ModelParams& params) {
    params.validate();
    DimensionlessGroups g;
    g.epsilon = params.mismatch / (1.0 - params.mismatch);
    g.delta_ratio = params.stacking_amplitude / params.stiffness;
    g.eta = std::sqrt(g.delta_ratio) / g.epsilon;
    return g;
}

ModelParams params_from_eta(double eta, double mismatch, double lattice_constant) {
    if (!(eta >= 0) || !std::isfinite(eta))
        throw std::invalid_argument("params_from_eta: eta must be non-negative");
    ModelParams params;
    params.lattice_constant = lattice_constant;
    params.mismatch = mismatch;
    params.stiffness = 1.0;
    const double epsilon = mismatch / (1.0 - mismatch);
    params.stacking_amplitude = (eta * epsilon) * (eta * epsilon) * params.stiffness;
    params.validate();
    return params;
}

double StackingPotentialSpec::evaluate(double disregistry) const {
    if (form != StackingForm::Sinusoid)
        throw std::logic_error("StackingPotentialSpec: only the sinusoid form has a closed-form value");
    return -2.0 * amplitude * std::cos(2.0 * std::numbers::pi * disregistry / period);
}

} // namespace moire
