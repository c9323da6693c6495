#include "moire/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>

namespace moire {

namespace {

double max_norm(std::span<const double> v) {
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

struct CurvaturePair {
    std::vector<double> s, y;
    double rho = 0;
};

constexpr double armijo_c1 = 1e-4;
constexpr double wolfe_c2 = 0.9;

struct SearchState {
    const Objective& objective;
    std::span<const double> x;
    std::span<const double> d;
    double f0;
    double slope0; // d.g at x, negative for a descent direction
    std::vector<double> trial;
    std::vector<double> grad_trial;
    bool have_grad = false;

    explicit SearchState(const Objective& obj, std::span<const double> x_,
                         std::span<const double> d_, double f0_, double slope0_)
        : objective(obj), x(x_), d(d_), f0(f0_), slope0(slope0_),
          trial(x_.size()), grad_trial(x_.size()) {}

    double value_at(double step) {
        for (std::size_t i = 0; i < x.size(); ++i)
            trial[i] = x[i] + step * d[i];
        have_grad = false;
        double f = objective.eval(trial);
        // Overflowing trial points are rejected, not fatal.
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    }

    double slope_at() { // directional derivative at the last trial point
        objective.grad(trial, grad_trial);
        have_grad = true;
        return dot(grad_trial, d);
    }

    bool sufficient_decrease(double step, double f) const {
        return f <= f0 + armijo_c1 * step * slope0;
    }
};

struct SearchOutcome {
    bool ok = false;
    double step = 0;
    double f = 0;
};

SearchOutcome armijo_backtracking(SearchState& state, double initial_step) {
    double step = initial_step;
    for (int attempt = 0; attempt < 64; ++attempt) {
        double f = state.value_at(step);
        if (std::isfinite(f) && state.sufficient_decrease(step, f))
            return {true, step, f};
        step *= 0.5;
    }
    return {};
}

// Nocedal-Wright bracketing + zoom. Non-finite values and slopes are treated
// as "too far": the bracket shrinks toward the last good point.
SearchOutcome strong_wolfe(SearchState& state, double initial_step) {
    const double min_slope = -wolfe_c2 * state.slope0;

    auto zoom = [&](double lo, double f_lo, double hi) -> SearchOutcome {
        for (int attempt = 0; attempt < 48; ++attempt) {
            double step = 0.5 * (lo + hi);
            double f = state.value_at(step);
            if (!std::isfinite(f) || !state.sufficient_decrease(step, f) || f >= f_lo) {
                hi = step;
            } else {
                double slope = state.slope_at();
                if (!std::isfinite(slope))
                    return {}; // gradient blew up inside the bracket
                if (std::abs(slope) <= min_slope)
                    return {true, step, f};
                if (slope * (hi - lo) >= 0)
                    hi = lo;
                lo = step;
                f_lo = f;
            }
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) {
                if (f_lo < state.f0)
                    return {true, lo, f_lo};
                return {};
            }
        }
        if (f_lo < state.f0)
            return {true, lo, f_lo};
        return {};
    };

    double prev_step = 0;
    double prev_f = state.f0;
    double step = initial_step;
    for (int attempt = 0; attempt < 32; ++attempt) {
        double f = state.value_at(step);
        if (!std::isfinite(f) || !state.sufficient_decrease(step, f) ||
            (attempt > 0 && f >= prev_f))
            return zoom(prev_step, prev_f, step);
        double slope = state.slope_at();
        if (!std::isfinite(slope))
            return zoom(prev_step, prev_f, step);
        if (std::abs(slope) <= min_slope)
            return {true, step, f};
        if (slope >= 0)
            return zoom(step, f, prev_step);
        prev_step = step;
        prev_f = f;
        step *= 2.0;
    }
    return {};
}

} // namespace

void MinimizeOptions::validate() const {
    if (memory < 1)
        throw std::invalid_argument("MinimizeOptions: memory must be at least 1");
    if (max_iterations < 1)
        throw std::invalid_argument("MinimizeOptions: max_iterations must be at least 1");
    if (!(tolerance > 0) || !std::isfinite(tolerance))
        throw std::invalid_argument("MinimizeOptions: tolerance must be positive");
}

MinimizeResult minimize(const Objective& objective, std::span<const double> start,
                        const MinimizeOptions& options) {
    options.validate();
    if (objective.dimension < 1 || !objective.eval || !objective.grad)
        throw std::invalid_argument("minimize: objective is incomplete");
    if (static_cast<int>(start.size()) != objective.dimension)
        throw std::invalid_argument("minimize: start point has wrong dimension");

    const std::size_t n = start.size();
    std::vector<double> x(start.begin(), start.end());
    double f = objective.eval(x);
    if (!std::isfinite(f))
        throw NonFiniteObjective("minimize: objective is not finite at the starting point");
    std::vector<double> g(n);
    objective.grad(x, g);
    if (!all_finite(g))
        throw NonFiniteObjective("minimize: gradient is not finite at the starting point");

    MinimizeResult result;
    result.gradient_norm = max_norm(g);
    if (result.gradient_norm <= options.tolerance) {
        result.x = std::move(x);
        result.value = f;
        result.converged = true;
        return result;
    }

    std::deque<CurvaturePair> history;
    double gamma = 1.0;
    std::vector<double> direction(n), alpha;
    int stagnant_steps = 0;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        // Two-loop recursion for d = -H g.
        direction.assign(g.begin(), g.end());
        alpha.assign(history.size(), 0.0);
        for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
            const auto& pair = history[i];
            alpha[i] = pair.rho * dot(pair.s, direction);
            for (std::size_t k = 0; k < n; ++k)
                direction[k] -= alpha[i] * pair.y[k];
        }
        for (std::size_t k = 0; k < n; ++k)
            direction[k] *= gamma;
        for (std::size_t i = 0; i < history.size(); ++i) {
            const auto& pair = history[i];
            double beta = pair.rho * dot(pair.y, direction);
            for (std::size_t k = 0; k < n; ++k)
                direction[k] += (alpha[i] - beta) * pair.s[k];
        }
        for (std::size_t k = 0; k < n; ++k)
            direction[k] = -direction[k];

        double slope = dot(direction, g);
        if (!(slope < 0)) {
            // Stale curvature produced a non-descent direction: restart.
            history.clear();
            gamma = 1.0;
            for (std::size_t k = 0; k < n; ++k)
                direction[k] = -g[k];
            slope = -dot(g, g);
        }

        // The very first step (and any restart step) is the raw gradient,
        // whose magnitude is dimensional; scale it to unit length.
        double initial_step =
            history.empty() ? std::min(1.0, 1.0 / std::max(norm2(g), 1e-300)) : 1.0;

        std::optional<SearchState> state;
        auto attempt = [&](double step0, double slope0) {
            state.emplace(objective, x, direction, f, slope0);
            return options.line_search == LineSearch::ArmijoBacktracking
                       ? armijo_backtracking(*state, step0)
                       : strong_wolfe(*state, step0);
        };

        SearchOutcome outcome = attempt(initial_step, slope);
        if (!outcome.ok && !history.empty()) {
            // The quasi-Newton direction may be poisoned by stale curvature;
            // retry the iteration as plain steepest descent before giving up.
            history.clear();
            gamma = 1.0;
            for (std::size_t k = 0; k < n; ++k)
                direction[k] = -g[k];
            slope = -dot(g, g);
            outcome = attempt(std::min(1.0, 1.0 / std::max(norm2(g), 1e-300)), slope);
        }
        if (!outcome.ok) {
            result.x = std::move(x);
            result.value = f;
            result.gradient_norm = max_norm(g);
            result.iterations = iter - 1;
            result.status = MinimizeStatus::LineSearchFailure;
            return result;
        }

        if (!state->have_grad) {
            objective.grad(state->trial, state->grad_trial);
            state->have_grad = true;
        }
        if (!all_finite(state->grad_trial))
            throw NonFiniteObjective("minimize: gradient is not finite at an accepted step");

        CurvaturePair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            pair.s[k] = state->trial[k] - x[k];
            pair.y[k] = state->grad_trial[k] - g[k];
        }
        double sy = dot(pair.s, pair.y);
        if (sy > 1e-12 * norm2(pair.s) * norm2(pair.y)) {
            gamma = sy / dot(pair.y, pair.y);
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (static_cast<int>(history.size()) > options.memory)
                history.pop_front();
        }

        // Accepted steps whose f-decrease rounds away mean the search has hit
        // the floating-point comparison floor; a couple in a row is a stall.
        stagnant_steps = outcome.f < f ? 0 : stagnant_steps + 1;

        x = state->trial;
        g = state->grad_trial;
        f = outcome.f;

        double gnorm = max_norm(g);
        if (gnorm <= options.tolerance) {
            result.x = std::move(x);
            result.value = f;
            result.gradient_norm = gnorm;
            result.iterations = iter;
            result.converged = true;
            return result;
        }
        if (stagnant_steps >= 3) {
            result.x = std::move(x);
            result.value = f;
            result.gradient_norm = gnorm;
            result.iterations = iter;
            result.status = MinimizeStatus::LineSearchFailure;
            return result;
        }
    }

    result.x = std::move(x);
    result.value = f;
    result.gradient_norm = max_norm(g);
    result.iterations = options.max_iterations;
    result.status = MinimizeStatus::MaxIterations;
    return result;
}

double check_gradient(const Objective& objective, std::span<const double> point, double step) {
    if (!(step > 0))
        throw std::invalid_argument("check_gradient: step must be positive");
    if (static_cast<int>(point.size()) != objective.dimension)
        throw std::invalid_argument("check_gradient: point has wrong dimension");

    std::vector<double> g(point.size());
    objective.grad(point, g);
    if (!all_finite(g))
        throw NonFiniteObjective("check_gradient: analytic gradient is not finite");

    std::vector<double> probe(point.begin(), point.end());
    double worst = 0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        probe[i] = point[i] + step;
        double f_plus = objective.eval(probe);
        probe[i] = point[i] - step;
        double f_minus = objective.eval(probe);
        probe[i] = point[i];
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw NonFiniteObjective("check_gradient: objective is not finite near the point");
        double numeric = (f_plus - f_minus) / (2.0 * step);
        double err = std::abs(numeric - g[i]);
        if (std::abs(g[i]) >= 1e-12)
            err /= std::abs(g[i]);
        worst = std::max(worst, err);
    }
    return worst;
}

} // namespace moire
