#pragma once

#include <vector>

#include "moire/model.hpp"
#include "moire/optimize.hpp"

namespace moire {

/// Uniform periodic grid over [origin, origin + domain_length).
struct Grid {
    int n_points = 0;
    double dx = 0;
    double domain_length = 0;
    double origin = 0;

    static Grid uniform(int n_points, double domain_length, double origin = 0.0);
    double x(int n) const { return origin + n * dx; }
    void validate() const; // throws std::invalid_argument
};

/// Periodic samples of the relative displacement u_- (or its reduced
/// counterpart U_-). value(n) wraps the index, so the field is defined for
/// every integer n.
struct DisplacementField {
    Grid grid;
    std::vector<double> values;

    static DisplacementField zero(const Grid& grid);
    double value(long n) const;
};

enum class Stencil {
    Central, // (u_{n+1} - u_{n-1}) / (2 dx); decouples even/odd sublattices
    Forward  // (u_{n+1} - u_n) / dx; robustness comparison only
};

/// Riemann-sum discretization of the relaxation functional: elastic term
/// (kappa/2)(u')^2 plus stacking term -2 V0 cos(2pi/((1-theta)a) *
/// (delta0(x) + sqrt(2) u)). The grid must span one moire period.
double discrete_energy(const DisplacementField& field, const ModelParams& params,
                       Stencil stencil = Stencil::Central);

/// Exact gradient of discrete_energy with respect to each sample.
std::vector<double> discrete_gradient(const DisplacementField& field, const ModelParams& params,
                                      Stencil stencil = Stencil::Central);

struct RelaxationResult {
    DisplacementField field;
    double energy = 0;
    double gradient_norm = 0; // max-norm
    int iterations = 0;
    bool converged = false;
};

/// Default minimizer settings for a dimensional relaxation: gradient
/// max-norm tolerance 1e-10 * kappa (dimensionally consistent).
MinimizeOptions default_relax_options(const ModelParams& params);

RelaxationResult relax(const DisplacementField& initial, const ModelParams& params,
                       const MinimizeOptions& options, Stencil stencil = Stencil::Central);

/// Relaxed disregistry delta(x_n) = theta x_n + sqrt(2) u_n, reported both
/// unreduced (carries the winding (1-theta)a across the cell) and wrapped
/// into [0, (1-theta)a).
struct DisregistryProfile {
    std::vector<double> unreduced;
    std::vector<double> reduced;
};

DisregistryProfile relaxed_disregistry(const RelaxationResult& result, const ModelParams& params);

// ---------------------------------------------------------------------------
// Fully nondimensional form on the unit cell. X = x/a_M, U = u/a; the
// functional becomes eps^2/(2 delta) (U')^2 - 2 cos(2pi(X + sqrt(2)U/(1-theta)))
// and equals the dimensional energy divided by v0_tilde = a_M V0.
// ---------------------------------------------------------------------------

struct ReducedParams {
    double epsilon = 0; // a/a_M
    double delta = 0;   // V0/kappa

    double mismatch() const { return epsilon / (1.0 + epsilon); }
    double eta() const;
    void validate() const;
};

double reduced_energy(const DisplacementField& field, const ReducedParams& params,
                      Stencil stencil = Stencil::Central);
std::vector<double> reduced_gradient(const DisplacementField& field, const ReducedParams& params,
                                     Stencil stencil = Stencil::Central);
RelaxationResult relax_reduced(const DisplacementField& initial, const ReducedParams& params,
                               const MinimizeOptions& options, Stencil stencil = Stencil::Central);

/// Mixed form kappa_tilde eps^2/2 (U')^2 - 2 v0_tilde cos(...): length
/// nondimensionalized but still carrying energy units. Equals
/// v0_tilde * reduced_energy when delta = v0_tilde / kappa_tilde.
double partially_reduced_energy(const DisplacementField& field, double kappa_tilde,
                                double v0_tilde, double epsilon,
                                Stencil stencil = Stencil::Central);

} // namespace moire
