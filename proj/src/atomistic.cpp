#include "moire/atomistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace moire {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const double sqrt2 = std::numbers::sqrt2;

std::size_t wrap(long n, std::size_t count) {
    long c = static_cast<long>(count);
    long r = n % c;
    if (r < 0)
        r += c;
    return static_cast<std::size_t>(r);
}

void validate_system(const AtomisticSystem& system) {
    const LatticeCounts counts = lattice_counts(system.mismatch);
    if (system.cells < 1)
        throw std::invalid_argument("AtomisticSystem: cells must be at least 1");
    const std::size_t expect1 = static_cast<std::size_t>(system.cells) * counts.layer1;
    const std::size_t expect2 = static_cast<std::size_t>(system.cells) * counts.layer2;
    if (system.layer1.size() != expect1 || system.layer2.size() != expect2)
        throw std::invalid_argument("AtomisticSystem: layer sizes must be cells*M and cells*N");
    const double needed = std::max(system.intra.cutoff(), system.inter.cutoff());
    if (system.image_range < needed)
        throw std::invalid_argument("AtomisticSystem: image_range must cover both cutoffs");
}

// Periodic linear interpolation of samples placed at X = spacing*(k+1).
double interp_periodic(std::span<const double> samples, double spacing, double x) {
    const double t = x / spacing - 1.0;
    const double base = std::floor(t);
    const double frac = t - base;
    const long k = static_cast<long>(base);
    const double a = samples[wrap(k, samples.size())];
    const double b = samples[wrap(k + 1, samples.size())];
    return a + frac * (b - a);
}

} // namespace

AtomisticSystem make_system(double mismatch, PairPotential intra, PairPotential inter,
                            int image_range, int cells) {
    const LatticeCounts counts = lattice_counts(mismatch);
    if (image_range == 0)
        image_range = static_cast<int>(std::ceil(std::max(intra.cutoff(), inter.cutoff())));
    AtomisticSystem system{mismatch,
                           cells,
                           std::vector<double>(static_cast<std::size_t>(cells) * counts.layer1, 0.0),
                           std::vector<double>(static_cast<std::size_t>(cells) * counts.layer2, 0.0),
                           std::move(intra),
                           std::move(inter),
                           image_range};
    validate_system(system);
    return system;
}

void check_chain_order(const AtomisticSystem& system) {
    const double ratio = 1.0 - system.mismatch;
    const std::size_t p1 = system.layer1.size();
    for (std::size_t i = 0; i < p1; ++i) {
        const double diff = system.layer1[wrap(i + 1, p1)] - system.layer1[i];
        if (!(std::abs(diff) < 0.5))
            throw ChainCrossing("layer 1 atoms " + std::to_string(i) + " and " +
                                std::to_string(i + 1) + " moved by " + std::to_string(diff) +
                                " lattice spacings relative to each other");
    }
    const std::size_t p2 = system.layer2.size();
    for (std::size_t i = 0; i < p2; ++i) {
        const double diff = (system.layer2[wrap(i + 1, p2)] - system.layer2[i]) / ratio;
        if (!(std::abs(diff) < 0.5))
            throw ChainCrossing("layer 2 atoms " + std::to_string(i) + " and " +
                                std::to_string(i + 1) + " moved by " + std::to_string(diff) +
                                " lattice spacings relative to each other");
    }
}

double intra_energy(const AtomisticSystem& system) {
    validate_system(system);
    check_chain_order(system);
    const double ratio = 1.0 - system.mismatch;
    const int range = system.image_range;

    double layer1_sum = 0;
    const std::size_t p1 = system.layer1.size();
    for (std::size_t i = 0; i < p1; ++i)
        for (int j = -range; j <= range; ++j) {
            if (j == 0)
                continue;
            layer1_sum += system.intra.value(j + system.layer1[wrap(static_cast<long>(i) + j, p1)] -
                                             system.layer1[i]);
        }

    double layer2_sum = 0;
    const std::size_t p2 = system.layer2.size();
    for (std::size_t i = 0; i < p2; ++i)
        for (int j = -range; j <= range; ++j) {
            if (j == 0)
                continue;
            layer2_sum += system.intra.value(
                j + (system.layer2[wrap(static_cast<long>(i) + j, p2)] - system.layer2[i]) / ratio);
        }

    return layer1_sum / static_cast<double>(p1) + layer2_sum / static_cast<double>(p2);
}

double inter_energy(const AtomisticSystem& system) {
    validate_system(system);
    const double ratio = 1.0 - system.mismatch;
    // One extra spacing of margin so displaced atoms cannot slip outside the
    // window; the potential's own cutoff zeroes the surplus terms exactly.
    const double reach = system.inter.cutoff() + 1.0;
    const std::size_t p1 = system.layer1.size();
    const std::size_t p2 = system.layer2.size();

    double sum = 0;
    for (std::size_t i = 0; i < p1; ++i) {
        const double site = static_cast<double>(i + 1); // unrelaxed layer-1 position
        const long j_lo = static_cast<long>(std::floor((site - reach) / ratio));
        const long j_hi = static_cast<long>(std::ceil((site + reach) / ratio));
        for (long j = j_lo; j <= j_hi; ++j)
            sum += system.inter.value(site - ratio * static_cast<double>(j) + system.layer1[i] -
                                      system.layer2[wrap(j - 1, p2)]);
    }
    return sum / static_cast<double>(p1);
}

double total_energy(const AtomisticSystem& system) {
    return intra_energy(system) + inter_energy(system);
}

LayerGradient atomistic_gradient(const AtomisticSystem& system) {
    validate_system(system);
    check_chain_order(system);
    const double ratio = 1.0 - system.mismatch;
    const int range = system.image_range;
    const std::size_t p1 = system.layer1.size();
    const std::size_t p2 = system.layer2.size();

    LayerGradient grad{std::vector<double>(p1, 0.0), std::vector<double>(p2, 0.0)};

    const double weight1 = 1.0 / static_cast<double>(p1);
    for (std::size_t i = 0; i < p1; ++i)
        for (int j = -range; j <= range; ++j) {
            if (j == 0)
                continue;
            const std::size_t other = wrap(static_cast<long>(i) + j, p1);
            const double d = weight1 * system.intra.slope(j + system.layer1[other] - system.layer1[i]);
            grad.layer1[other] += d;
            grad.layer1[i] -= d;
        }

    const double weight2 = 1.0 / static_cast<double>(p2);
    for (std::size_t i = 0; i < p2; ++i)
        for (int j = -range; j <= range; ++j) {
            if (j == 0)
                continue;
            const std::size_t other = wrap(static_cast<long>(i) + j, p2);
            const double d = weight2 / ratio *
                             system.intra.slope(j + (system.layer2[other] - system.layer2[i]) / ratio);
            grad.layer2[other] += d;
            grad.layer2[i] -= d;
        }

    const double reach = system.inter.cutoff() + 1.0;
    for (std::size_t i = 0; i < p1; ++i) {
        const double site = static_cast<double>(i + 1);
        const long j_lo = static_cast<long>(std::floor((site - reach) / ratio));
        const long j_hi = static_cast<long>(std::ceil((site + reach) / ratio));
        for (long j = j_lo; j <= j_hi; ++j) {
            const std::size_t other = wrap(j - 1, p2);
            const double d = weight1 * system.inter.slope(site - ratio * static_cast<double>(j) +
                                                          system.layer1[i] - system.layer2[other]);
            grad.layer1[i] += d;
            grad.layer2[other] -= d;
        }
    }
    return grad;
}

double cauchy_born_density(const PairPotential& potential, double strain) {
    if (!(1.0 + strain > 0))
        throw std::invalid_argument("cauchy_born_density: strain must keep 1+z positive");
    auto chain_sum = [&](double stretch) {
        const int j_max = static_cast<int>(std::ceil(potential.cutoff() / stretch)) + 1;
        double sum = 0;
        for (int j = 1; j <= j_max; ++j)
            sum += potential.value(j * stretch) + potential.value(-j * stretch);
        return sum;
    };
    return chain_sum(1.0 + strain) - chain_sum(1.0);
}

double stiffness(const PairPotential& potential) {
    const int j_max = static_cast<int>(std::floor(potential.cutoff())) + 1;
    double kappa = 0;
    for (int j = 1; j <= j_max; ++j)
        kappa += static_cast<double>(j) * j *
                 (potential.curvature(j) + potential.curvature(-j));
    if (!(kappa > 0))
        throw DegenerateStiffness("stiffness: second derivative of the Cauchy-Born density is " +
                                  std::to_string(kappa) + "; constant displacement is not a "
                                  "non-degenerate minimizer");
    const double h = 1e-4;
    const double numeric =
        (cauchy_born_density(potential, h) + cauchy_born_density(potential, -h)) / (h * h);
    if (std::abs(numeric - kappa) > 1e-6 * std::abs(kappa))
        throw PotentialContractError(
            "stiffness: curvature sum " + std::to_string(kappa) +
            " disagrees with the finite-difference Cauchy-Born value " + std::to_string(numeric));
    return kappa;
}

double stacking_potential(const PairPotential& potential, double mismatch, double z) {
    if (!(mismatch > 0) || !(mismatch < 1))
        throw std::invalid_argument("stacking_potential: mismatch must lie in (0,1)");
    const double period = 1.0 - mismatch;
    const long j_lo = static_cast<long>(std::floor((z - potential.cutoff()) / period)) - 1;
    const long j_hi = static_cast<long>(std::ceil((z + potential.cutoff()) / period)) + 1;
    double sum = 0;
    for (long j = j_lo; j <= j_hi; ++j)
        sum += potential.value(z - period * static_cast<double>(j));
    return sum;
}

TabulatedStacking tabulate_stacking(const PairPotential& potential, double mismatch, int samples) {
    if (samples < 64)
        throw std::invalid_argument("tabulate_stacking: at least 64 samples per period");
    TabulatedStacking tab;
    tab.period = 1.0 - mismatch;
    tab.values.resize(samples);
    for (int k = 0; k < samples; ++k)
        tab.values[k] = stacking_potential(potential, mismatch, tab.period * k / samples);
    return tab;
}

SinusoidFit fit_sinusoid(std::span<const double> values, double period) {
    if (values.size() < 64)
        throw std::invalid_argument("fit_sinusoid: at least 64 samples per period are required");
    if (!(period > 0))
        throw std::invalid_argument("fit_sinusoid: period must be positive");
    const std::size_t count = values.size();
    double mean = 0, a1 = 0, b1 = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double angle = two_pi * static_cast<double>(k) / static_cast<double>(count);
        mean += values[k];
        a1 += values[k] * std::cos(angle);
        b1 += values[k] * std::sin(angle);
    }
    mean /= static_cast<double>(count);
    a1 *= 2.0 / static_cast<double>(count);
    b1 *= 2.0 / static_cast<double>(count);

    SinusoidFit fit;
    fit.mean = mean;
    fit.v0 = -0.5 * a1;
    for (std::size_t k = 0; k < count; ++k) {
        const double angle = two_pi * static_cast<double>(k) / static_cast<double>(count);
        const double fitted = mean + a1 * std::cos(angle) + b1 * std::sin(angle);
        fit.residual = std::max(fit.residual, std::abs(values[k] - fitted));
    }
    return fit;
}

SinusoidFit fit_sinusoid(const TabulatedStacking& tabulated) {
    return fit_sinusoid(tabulated.values, tabulated.period);
}

StackingPotentialSpec DerivedContinuum::sinusoid() const {
    return StackingPotentialSpec{StackingForm::Sinusoid, v0_tilde, v_tilde.period};
}

DerivedContinuum derive_continuum(const PairPotential& intra, const PairPotential& inter,
                                  double mismatch, int samples) {
    DerivedContinuum derived;
    derived.kappa_tilde = stiffness(intra);
    derived.v_tilde = tabulate_stacking(inter, mismatch, samples);
    const SinusoidFit fit = fit_sinusoid(derived.v_tilde);
    derived.v0_tilde = fit.v0;
    derived.fit_residual = fit.residual;
    derived.v_mean = fit.mean;
    return derived;
}

AtomisticRelaxation relax_atomistic(const AtomisticSystem& system, const MinimizeOptions& options) {
    validate_system(system);
    const std::size_t p1 = system.layer1.size();
    const std::size_t p2 = system.layer2.size();
    const std::size_t dim = p1 + p2;

    AtomisticSystem work = system;
    // Gauge fixing: the energy is exactly invariant under a common shift of
    // all displacements, so the mean is projected out of every point seen by
    // the objective (and of the gradient, against rounding drift).
    auto unpack = [&](std::span<const double> x) {
        double mean = 0;
        for (double v : x)
            mean += v;
        mean /= static_cast<double>(dim);
        for (std::size_t i = 0; i < p1; ++i)
            work.layer1[i] = x[i] - mean;
        for (std::size_t i = 0; i < p2; ++i)
            work.layer2[i] = x[p1 + i] - mean;
    };

    Objective objective;
    objective.dimension = static_cast<int>(dim);
    objective.eval = [&](std::span<const double> x) {
        unpack(x);
        try {
            return total_energy(work);
        } catch (const ChainCrossing&) {
            return std::numeric_limits<double>::quiet_NaN(); // reject the step
        }
    };
    objective.grad = [&](std::span<const double> x, std::span<double> out) {
        unpack(x);
        LayerGradient g;
        try {
            g = atomistic_gradient(work);
        } catch (const ChainCrossing&) {
            std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
            return;
        }
        double mean = 0;
        for (double v : g.layer1)
            mean += v;
        for (double v : g.layer2)
            mean += v;
        mean /= static_cast<double>(dim);
        for (std::size_t i = 0; i < p1; ++i)
            out[i] = g.layer1[i] - mean;
        for (std::size_t i = 0; i < p2; ++i)
            out[p1 + i] = g.layer2[i] - mean;
    };

    std::vector<double> start(dim);
    std::copy(system.layer1.begin(), system.layer1.end(), start.begin());
    std::copy(system.layer2.begin(), system.layer2.end(), start.begin() + p1);

    MinimizeResult fit = minimize(objective, start, options);

    AtomisticRelaxation result;
    double mean = 0;
    for (double v : fit.x)
        mean += v;
    mean /= static_cast<double>(dim);
    result.layer1.assign(fit.x.begin(), fit.x.begin() + p1);
    result.layer2.assign(fit.x.begin() + p1, fit.x.end());
    for (double& v : result.layer1)
        v -= mean;
    for (double& v : result.layer2)
        v -= mean;
    result.energy = fit.value;
    result.gradient_norm = fit.gradient_norm;
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    return result;
}

namespace {

ComparisonRow compare_at_mismatch(double theta, double eta, const PairPotential& intra,
                                  const PairPotential& inter_unit, const StudyOptions& options) {
    const LatticeCounts counts = lattice_counts(theta);
    const double epsilon = theta / (1.0 - theta);

    ComparisonRow row;
    row.theta = theta;
    row.epsilon = epsilon;
    row.eta = eta;
    row.atoms = counts.layer1 + counts.layer2;
    if (eta == 0) {
        // Decoupled layers: both minimizers are identically zero and the
        // reduced functional is not defined (delta = 0).
        return row;
    }

    // Rescale the interlayer potential so the eta derived from (stiffness,
    // sinusoid fit) matches the requested value; the Fourier coefficient is
    // linear in the amplitude, so one derivation of the unit potential fixes
    // the scale.
    const DerivedContinuum unit = derive_continuum(intra, inter_unit, theta,
                                                   options.tabulation_samples);
    const double amplitude = eta * eta * epsilon * epsilon * unit.kappa_tilde / unit.v0_tilde;
    const PairPotential inter = scaled(inter_unit, amplitude);
    const DerivedContinuum derived = derive_continuum(intra, inter, theta,
                                                      options.tabulation_samples);
    row.eta = std::sqrt(derived.delta()) / epsilon;

    AtomisticSystem system = make_system(theta, intra, inter);
    MinimizeOptions atom_options = options.atomistic;
    if (atom_options.tolerance == 0)
        atom_options.tolerance = 1e-7 * derived.v0_tilde;
    const AtomisticRelaxation atom = relax_atomistic(system, atom_options);
    if (!atom.converged)
        throw Error("continuum_comparison: atomistic relaxation did not converge at theta = " +
                    std::to_string(theta));

    ReducedParams reduced{epsilon, derived.delta()};
    MinimizeOptions cont_options = options.continuum;
    if (cont_options.tolerance == 0)
        cont_options.tolerance = 1e-9;
    const Grid grid = Grid::uniform(options.grid_n, 1.0);
    const RelaxationResult continuum =
        relax_reduced(DisplacementField::zero(grid), reduced, cont_options);
    if (!continuum.converged)
        throw Error("continuum_comparison: continuum relaxation did not converge at theta = " +
                    std::to_string(theta));

    // Discrete L2 distance between the relative-displacement profiles,
    // sampled at the layer-1 sites X_i = eps*(i+1).
    double sum_sq = 0;
    for (int i = 0; i < counts.layer1; ++i) {
        const double x = epsilon * (i + 1);
        const double u2 = interp_periodic(atom.layer2, theta, x);
        const double u_minus_atomistic = (atom.layer1[i] - u2) / sqrt2;
        const double t = (x - continuum.field.grid.origin) / continuum.field.grid.dx;
        const long base = static_cast<long>(std::floor(t));
        const double frac = t - std::floor(t);
        const double u_minus_continuum = (1.0 - frac) * continuum.field.value(base) +
                                         frac * continuum.field.value(base + 1);
        const double diff = u_minus_atomistic - u_minus_continuum;
        sum_sq += diff * diff;
    }
    row.l2_error = std::sqrt(sum_sq / counts.layer1);

    // Nondimensional energy gap. The continuum reference removes the
    // zero-displacement intralayer energy and the mean of the stacking
    // potential, neither of which the reduced functional carries.
    AtomisticSystem reference = make_system(theta, intra, inter);
    const double e_ref = intra_energy(reference) + derived.v_mean;
    row.energy_gap = std::abs((atom.energy - e_ref) / derived.v0_tilde - continuum.energy);
    return row;
}

} // namespace

std::vector<ComparisonRow> continuum_comparison(std::span<const double> mismatches, double eta,
                                                const PairPotential& intra,
                                                const PairPotential& inter_unit,
                                                const StudyOptions& options) {
    if (!(eta >= 0))
        throw std::invalid_argument("continuum_comparison: eta must be non-negative");
    std::vector<ComparisonRow> rows;
    rows.reserve(mismatches.size());
    for (double theta : mismatches)
        rows.push_back(compare_at_mismatch(theta, eta, intra, inter_unit, options));
    return rows;
}

} // namespace moire
