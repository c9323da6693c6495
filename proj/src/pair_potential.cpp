#include "moire/pair_potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace moire {

PairPotential::PairPotential(std::function<double(double)> value, std::function<double(double)> d1,
                             std::function<double(double)> d2, double cutoff)
    : value_(std::move(value)), d1_(std::move(d1)), d2_(std::move(d2)), cutoff_(cutoff) {
    if (!value_ || !d1_ || !d2_)
        throw std::invalid_argument("PairPotential: all three callbacks are required");
    if (!(cutoff_ > 0) || !std::isfinite(cutoff_))
        throw std::invalid_argument("PairPotential: cutoff must be positive");
    verify_contract();
}

double PairPotential::value(double z) const {
    return std::abs(z) > cutoff_ ? 0.0 : value_(z);
}

double PairPotential::slope(double z) const {
    return std::abs(z) > cutoff_ ? 0.0 : d1_(z);
}

double PairPotential::curvature(double z) const {
    return std::abs(z) > cutoff_ ? 0.0 : d2_(z);
}

void PairPotential::verify_contract() const {
    // Probe the working range; the innermost tenth is excluded because
    // steeply repulsive cores (LJ walls) are never reached by bonded pairs
    // and defeat finite differences.
    const int samples = 100;
    for (int k = 0; k < samples; ++k) {
        const double z = cutoff_ * (0.1 + 0.9 * (k + 0.5) / samples);
        const double v_plus = value_(z);
        const double v_minus = value_(-z);
        const double scale = std::max(1.0, std::abs(v_plus));
        if (std::abs(v_plus - v_minus) > 1e-12 * scale)
            throw PotentialContractError("PairPotential: potential is not even at z = " +
                                         std::to_string(z));
        const double h = 3e-6 * std::max(std::abs(z), 0.01);
        const double numeric = (value_(z + h) - value_(z - h)) / (2.0 * h);
        const double d1 = d1_(z);
        if (std::abs(numeric - d1) > 1e-7 * std::max(1.0, std::abs(d1)))
            throw PotentialContractError(
                "PairPotential: d1 disagrees with a finite difference of value at z = " +
                std::to_string(z));
    }
}

PairPotential scaled(const PairPotential& potential, double factor) {
    return PairPotential([potential, factor](double z) { return factor * potential.value(z); },
                         [potential, factor](double z) { return factor * potential.slope(z); },
                         [potential, factor](double z) { return factor * potential.curvature(z); },
                         potential.cutoff());
}

PairPotential harmonic_bond(double spring, double rest_length, double cutoff) {
    auto value = [=](double z) {
        const double stretch = std::abs(z) - rest_length;
        return 0.5 * spring * stretch * stretch;
    };
    auto d1 = [=](double z) {
        const double sign = z < 0 ? -1.0 : 1.0;
        return spring * (std::abs(z) - rest_length) * sign;
    };
    auto d2 = [=](double) { return spring; };
    return PairPotential(value, d1, d2, cutoff);
}

namespace {

// Quintic smoothstep on [0,1]: s(0)=1, s(1)=0 with zero first and second
// derivatives at both ends.
double switch_value(double t) {
    const double u = 1.0 - t;
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}
double switch_d1(double t) {
    const double u = 1.0 - t;
    return -30.0 * u * u * (1.0 - 2.0 * u + u * u);
}
double switch_d2(double t) {
    const double u = 1.0 - t;
    return 60.0 * u * (1.0 - 3.0 * u + 2.0 * u * u);
}

} // namespace

PairPotential lennard_jones(double well_depth, double minimum, double cutoff) {
    if (!(cutoff > minimum))
        throw std::invalid_argument("lennard_jones: cutoff must exceed the minimum position");
    const double width = 0.5;
    const double switch_on = cutoff - width;

    auto raw = [=](double r) {
        const double q = minimum / r;
        const double q6 = q * q * q * q * q * q;
        return well_depth * (q6 * q6 - 2.0 * q6);
    };
    auto raw_d1 = [=](double r) {
        const double q = minimum / r;
        const double q6 = q * q * q * q * q * q;
        return well_depth * (-12.0 * q6 * q6 + 12.0 * q6) / r;
    };
    auto raw_d2 = [=](double r) {
        const double q = minimum / r;
        const double q6 = q * q * q * q * q * q;
        return well_depth * (156.0 * q6 * q6 - 84.0 * q6) / (r * r);
    };

    auto value = [=](double z) {
        const double r = std::abs(z);
        if (r <= switch_on)
            return raw(r);
        const double t = (r - switch_on) / width;
        return raw(r) * switch_value(t);
    };
    auto d1 = [=](double z) {
        const double r = std::abs(z);
        const double sign = z < 0 ? -1.0 : 1.0;
        if (r <= switch_on)
            return sign * raw_d1(r);
        const double t = (r - switch_on) / width;
        return sign * (raw_d1(r) * switch_value(t) + raw(r) * switch_d1(t) / width);
    };
    auto d2 = [=](double z) {
        const double r = std::abs(z);
        if (r <= switch_on)
            return raw_d2(r);
        const double t = (r - switch_on) / width;
        return raw_d2(r) * switch_value(t) + 2.0 * raw_d1(r) * switch_d1(t) / width +
               raw(r) * switch_d2(t) / (width * width);
    };
    return PairPotential(value, d1, d2, cutoff);
}

PairPotential gaussian_well(double depth, double width, double cutoff) {
    if (!(width > 0))
        throw std::invalid_argument("gaussian_well: width must be positive");
    const double inv_w2 = 1.0 / (width * width);
    auto value = [=](double z) { return -depth * std::exp(-0.5 * z * z * inv_w2); };
    auto d1 = [=](double z) { return depth * z * inv_w2 * std::exp(-0.5 * z * z * inv_w2); };
    auto d2 = [=](double z) {
        return depth * inv_w2 * (1.0 - z * z * inv_w2) * std::exp(-0.5 * z * z * inv_w2);
    };
    return PairPotential(value, d1, d2, cutoff);
}

} // namespace moire
