#pragma once

#include <functional>
#include <span>
#include <vector>

#include "moire/errors.hpp"

namespace moire {

enum class LineSearch { ArmijoBacktracking, StrongWolfe };

struct MinimizeOptions {
    int memory = 10;          // stored curvature pairs
    double tolerance = 1e-8;  // max-norm of the gradient, same units as grad
    int max_iterations = 5000;
    LineSearch line_search = LineSearch::ArmijoBacktracking;

    void validate() const; // throws std::invalid_argument
};

/// Smooth objective with analytic gradient. `grad` fills a caller-provided
/// buffer of length `dimension`. Callbacks are invoked sequentially within
/// one minimize() call but must tolerate repeated invocation.
struct Objective {
    std::function<double(std::span<const double>)> eval;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    int dimension = 0;
};

enum class MinimizeStatus { Converged, MaxIterations, LineSearchFailure };

struct MinimizeResult {
    std::vector<double> x;
    double value = 0;
    double gradient_norm = 0; // max-norm at x
    int iterations = 0;
    bool converged = false;
    MinimizeStatus status = MinimizeStatus::Converged;
};

/// Limited-memory BFGS with the two-loop recursion and gamma-scaled initial
/// Hessian. Accepted iterates are monotone in f; curvature pairs with
/// s.y <= 1e-12 |s||y| are skipped. A NaN/inf objective value at a trial
/// step is treated as +infinity (the step is rejected); a non-finite value
/// at the starting point throws NonFiniteObjective. Line-search failure and
/// the iteration cap both return the best iterate with converged = false.
MinimizeResult minimize(const Objective& objective, std::span<const double> start,
                        const MinimizeOptions& options);

/// Central-difference check of the analytic gradient. Returns the largest
/// per-coordinate relative error, falling back to absolute error where
/// |grad_i| < 1e-12. Throws NonFiniteObjective if any probe is NaN/inf.
double check_gradient(const Objective& objective, std::span<const double> point, double step);

} // namespace moire
