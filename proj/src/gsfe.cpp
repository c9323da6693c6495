#include "moire/gsfe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace moire {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const double sqrt2 = std::numbers::sqrt2;

std::size_t wrap(long n, int count) {
    long r = n % count;
    if (r < 0)
        r += count;
    return static_cast<std::size_t>(r);
}

void require_domain(const DisplacementField& field, double expected, const char* what) {
    field.grid.validate();
    if (field.values.size() != static_cast<std::size_t>(field.grid.n_points))
        throw std::invalid_argument("DisplacementField: values size does not match grid");
    if (std::abs(field.grid.domain_length - expected) > 1e-12 * std::abs(expected))
        throw GridMismatch(std::string(what) + ": grid spans " +
                           std::to_string(field.grid.domain_length) + " but the model needs " +
                           std::to_string(expected));
}

// Shared discretization kernel. The stacking phase at grid point n is
// phase_offset(x_n) + phase_per_u * u_n; the elastic weight is the
// coefficient of (u')^2 in the functional.
struct Kernel {
    double elastic_weight;
    double stacking_amp; // multiplies -cos(phase); already includes the 2
    double phase_per_u;
};

template <typename PhaseAt>
double energy_sum(const DisplacementField& field, const Kernel& kernel, Stencil stencil,
                  PhaseAt&& phase_at) {
    const int n_points = field.grid.n_points;
    const double dx = field.grid.dx;
    const auto& u = field.values;
    double total = 0;
    for (int n = 0; n < n_points; ++n) {
        double slope;
        if (stencil == Stencil::Central)
            slope = (u[wrap(n + 1, n_points)] - u[wrap(n - 1, n_points)]) / (2.0 * dx);
        else
            slope = (u[wrap(n + 1, n_points)] - u[n]) / dx;
        const double phase = phase_at(n) + kernel.phase_per_u * u[n];
        total += (kernel.elastic_weight * slope * slope - kernel.stacking_amp * std::cos(phase)) * dx;
    }
    return total;
}

template <typename PhaseAt>
std::vector<double> gradient_sum(const DisplacementField& field, const Kernel& kernel,
                                 Stencil stencil, PhaseAt&& phase_at) {
    const int n_points = field.grid.n_points;
    const double dx = field.grid.dx;
    const auto& u = field.values;
    std::vector<double> grad(n_points);
    for (int n = 0; n < n_points; ++n) {
        double elastic;
        if (stencil == Stencil::Central)
            elastic = kernel.elastic_weight / (2.0 * dx) *
                      (2.0 * u[n] - u[wrap(n - 2, n_points)] - u[wrap(n + 2, n_points)]);
        else
            elastic = 2.0 * kernel.elastic_weight / dx *
                      (2.0 * u[n] - u[wrap(n - 1, n_points)] - u[wrap(n + 1, n_points)]);
        const double phase = phase_at(n) + kernel.phase_per_u * u[n];
        grad[n] = elastic + kernel.stacking_amp * kernel.phase_per_u * std::sin(phase) * dx;
    }
    return grad;
}

RelaxationResult run_relaxation(const DisplacementField& initial, const MinimizeOptions& options,
                                std::function<double(const DisplacementField&)> energy,
                                std::function<std::vector<double>(const DisplacementField&)> gradient) {
    DisplacementField work = initial;
    Objective objective;
    objective.dimension = initial.grid.n_points;
    objective.eval = [&](std::span<const double> x) {
        work.values.assign(x.begin(), x.end());
        return energy(work);
    };
    objective.grad = [&](std::span<const double> x, std::span<double> out) {
        work.values.assign(x.begin(), x.end());
        auto g = gradient(work);
        std::copy(g.begin(), g.end(), out.begin());
    };
    MinimizeResult fit = minimize(objective, initial.values, options);
    RelaxationResult result;
    result.field = initial;
    result.field.values = std::move(fit.x);
    result.energy = fit.value;
    result.gradient_norm = fit.gradient_norm;
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    return result;
}

} // namespace

Grid Grid::uniform(int n_points, double domain_length, double origin) {
    Grid grid;
    grid.n_points = n_points;
    grid.domain_length = domain_length;
    grid.dx = domain_length / n_points;
    grid.origin = origin;
    grid.validate();
    return grid;
}

void Grid::validate() const {
    // Below 8 points the +/-2 central-difference stencil degenerates.
    if (n_points < 8)
        throw std::invalid_argument("Grid: n_points must be at least 8");
    if (!(domain_length > 0) || !std::isfinite(domain_length))
        throw std::invalid_argument("Grid: domain_length must be positive");
    if (std::abs(dx * n_points - domain_length) > 1e-12 * domain_length)
        throw std::invalid_argument("Grid: dx * n_points does not match domain_length");
}

DisplacementField DisplacementField::zero(const Grid& grid) {
    grid.validate();
    return DisplacementField{grid, std::vector<double>(grid.n_points, 0.0)};
}

double DisplacementField::value(long n) const {
    return values[wrap(n, grid.n_points)];
}

double discrete_energy(const DisplacementField& field, const ModelParams& params, Stencil stencil) {
    params.validate();
    require_domain(field, moire_period(params), "discrete_energy");
    const double period = stacking_period(params);
    Kernel kernel{0.5 * params.stiffness, 2.0 * params.stacking_amplitude, two_pi * sqrt2 / period};
    return energy_sum(field, kernel, stencil, [&](int n) {
        return two_pi / period * unrelaxed_disregistry(field.grid.x(n), params);
    });
}

std::vector<double> discrete_gradient(const DisplacementField& field, const ModelParams& params,
                                      Stencil stencil) {
    params.validate();
    require_domain(field, moire_period(params), "discrete_gradient");
    const double period = stacking_period(params);
    Kernel kernel{0.5 * params.stiffness, 2.0 * params.stacking_amplitude, two_pi * sqrt2 / period};
    return gradient_sum(field, kernel, stencil, [&](int n) {
        return two_pi / period * unrelaxed_disregistry(field.grid.x(n), params);
    });
}

MinimizeOptions default_relax_options(const ModelParams& params) {
    MinimizeOptions options;
    options.tolerance = 1e-10 * params.stiffness;
    return options;
}

RelaxationResult relax(const DisplacementField& initial, const ModelParams& params,
                       const MinimizeOptions& options, Stencil stencil) {
    params.validate();
    require_domain(initial, moire_period(params), "relax");
    return run_relaxation(
        initial, options,
        [&](const DisplacementField& f) { return discrete_energy(f, params, stencil); },
        [&](const DisplacementField& f) { return discrete_gradient(f, params, stencil); });
}

DisregistryProfile relaxed_disregistry(const RelaxationResult& result, const ModelParams& params) {
    params.validate();
    require_domain(result.field, moire_period(params), "relaxed_disregistry");
    const double period = stacking_period(params);
    const int n_points = result.field.grid.n_points;
    DisregistryProfile profile;
    profile.unreduced.resize(n_points);
    profile.reduced.resize(n_points);
    for (int n = 0; n < n_points; ++n) {
        const double raw =
            params.mismatch * result.field.grid.x(n) + sqrt2 * result.field.values[n];
        profile.unreduced[n] = raw;
        profile.reduced[n] = positive_mod(raw, period);
    }
    return profile;
}

double ReducedParams::eta() const { return std::sqrt(delta) / epsilon; }

void ReducedParams::validate() const {
    if (!(epsilon > 0) || !std::isfinite(epsilon))
        throw std::invalid_argument("ReducedParams: epsilon must be positive");
    if (!(delta > 0) || !std::isfinite(delta))
        throw std::invalid_argument("ReducedParams: delta must be positive");
}

double reduced_energy(const DisplacementField& field, const ReducedParams& params, Stencil stencil) {
    params.validate();
    require_domain(field, 1.0, "reduced_energy");
    const double one_minus_theta = 1.0 - params.mismatch();
    Kernel kernel{params.epsilon * params.epsilon / (2.0 * params.delta), 2.0,
                  two_pi * sqrt2 / one_minus_theta};
    return energy_sum(field, kernel, stencil,
                      [&](int n) { return two_pi * field.grid.x(n); });
}

std::vector<double> reduced_gradient(const DisplacementField& field, const ReducedParams& params,
                                     Stencil stencil) {
    params.validate();
    require_domain(field, 1.0, "reduced_gradient");
    const double one_minus_theta = 1.0 - params.mismatch();
    Kernel kernel{params.epsilon * params.epsilon / (2.0 * params.delta), 2.0,
                  two_pi * sqrt2 / one_minus_theta};
    return gradient_sum(field, kernel, stencil,
                        [&](int n) { return two_pi * field.grid.x(n); });
}

RelaxationResult relax_reduced(const DisplacementField& initial, const ReducedParams& params,
                               const MinimizeOptions& options, Stencil stencil) {
    params.validate();
    require_domain(initial, 1.0, "relax_reduced");
    return run_relaxation(
        initial, options,
        [&](const DisplacementField& f) { return reduced_energy(f, params, stencil); },
        [&](const DisplacementField& f) { return reduced_gradient(f, params, stencil); });
}

double partially_reduced_energy(const DisplacementField& field, double kappa_tilde,
                                double v0_tilde, double epsilon, Stencil stencil) {
    if (!(kappa_tilde > 0) || !(v0_tilde >= 0) || !(epsilon > 0))
        throw std::invalid_argument("partially_reduced_energy: invalid parameters");
    require_domain(field, 1.0, "partially_reduced_energy");
    const double one_minus_theta = 1.0 - epsilon / (1.0 + epsilon);
    Kernel kernel{0.5 * kappa_tilde * epsilon * epsilon, 2.0 * v0_tilde,
                  two_pi * sqrt2 / one_minus_theta};
    return energy_sum(field, kernel, stencil,
                      [&](int n) { return two_pi * field.grid.x(n); });
}

} // namespace moire
