#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"

#include "moire/optimize.hpp"

using namespace moire;

namespace {

Objective shifted_quadratic(const std::vector<double>& center) {
    Objective objective;
    objective.dimension = static_cast<int>(center.size());
    objective.eval = [center](std::span<const double> x) {
        double f = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            f += (x[i] - center[i]) * (x[i] - center[i]);
        return f;
    };
    objective.grad = [center](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = 2.0 * (x[i] - center[i]);
    };
    return objective;
}

Objective rosenbrock() {
    Objective objective;
    objective.dimension = 2;
    objective.eval = [](std::span<const double> x) {
        const double t1 = 1.0 - x[0];
        const double t2 = x[1] - x[0] * x[0];
        return t1 * t1 + 100.0 * t2 * t2;
    };
    objective.grad = [](std::span<const double> x, std::span<double> g) {
        const double t2 = x[1] - x[0] * x[0];
        g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * t2;
        g[1] = 200.0 * t2;
    };
    return objective;
}

} // namespace

TEST_CASE("quadratic is solved almost immediately") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> spread(-5.0, 5.0);
    std::vector<double> center(50);
    for (double& c : center)
        c = spread(rng);

    const Objective objective = shifted_quadratic(center);
    MinimizeOptions options;
    options.tolerance = 1e-10;
    const std::vector<double> start(50, 0.0);
    const MinimizeResult result = minimize(objective, start, options);

    CHECK(result.converged);
    CHECK(result.iterations <= 55); // dim + 5
    for (std::size_t i = 0; i < center.size(); ++i)
        CHECK(result.x[i] == doctest::Approx(center[i]).epsilon(1e-8));
}

TEST_CASE("rosenbrock from the classic start") {
    for (LineSearch search : {LineSearch::ArmijoBacktracking, LineSearch::StrongWolfe}) {
        MinimizeOptions options;
        options.tolerance = 1e-10;
        options.line_search = search;
        const std::vector<double> start{-1.2, 1.0};
        const MinimizeResult result = minimize(rosenbrock(), start, options);
        CHECK(result.converged);
        CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(result.x[1] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(result.value < 1e-12);
    }
}

TEST_CASE("already-critical start returns immediately") {
    const Objective objective = shifted_quadratic({1.0, -2.0, 3.0});
    MinimizeOptions options;
    options.tolerance = 1e-8;
    const std::vector<double> start{1.0, -2.0, 3.0};
    const MinimizeResult result = minimize(objective, start, options);
    CHECK(result.converged);
    CHECK(result.iterations == 0);
    CHECK(result.x == start);
}

TEST_CASE("monotone descent under Armijo") {
    // f(k) over increasing iteration caps traces the accepted iterates.
    const Objective objective = rosenbrock();
    const std::vector<double> start{-1.2, 1.0};
    double previous = objective.eval(start);
    for (int cap : {1, 2, 4, 8, 16, 32, 64}) {
        MinimizeOptions options;
        options.tolerance = 1e-14;
        options.max_iterations = cap;
        const MinimizeResult result = minimize(objective, start, options);
        CHECK(result.value <= previous + 1e-15);
        previous = result.value;
    }
}

TEST_CASE("full-memory quadratic terminates quickly") {
    // Strictly convex diagonal quadratic, memory = dimension.
    const int dim = 10;
    std::vector<double> scale(dim);
    for (int i = 0; i < dim; ++i)
        scale[i] = 1.0 + i; // condition number 10

    Objective objective;
    objective.dimension = dim;
    objective.eval = [scale](std::span<const double> x) {
        double f = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            f += 0.5 * scale[i] * x[i] * x[i];
        return f;
    };
    objective.grad = [scale](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = scale[i] * x[i];
    };

    MinimizeOptions options;
    options.memory = dim;
    options.tolerance = 1e-9;
    options.line_search = LineSearch::StrongWolfe;
    const std::vector<double> start(dim, 1.0);
    const MinimizeResult result = minimize(objective, start, options);
    CHECK(result.converged);
    // Exact line search would terminate within dim+1 steps; the Wolfe
    // window (c2 = 0.9) admits inexact steps and lands near 2*dim.
    CHECK(result.iterations <= 2 * dim + 5);
}

TEST_CASE("check_gradient") {
    SUBCASE("affine objective: central differences are exact") {
        Objective objective;
        objective.dimension = 4;
        const std::vector<double> slope{1.5, -0.25, 3.0, 0.75};
        objective.eval = [slope](std::span<const double> x) {
            double f = 0;
            for (std::size_t i = 0; i < x.size(); ++i)
                f += slope[i] * x[i];
            return f;
        };
        objective.grad = [slope](std::span<const double> x, std::span<double> g) {
            (void)x;
            for (std::size_t i = 0; i < g.size(); ++i)
                g[i] = slope[i];
        };
        const std::vector<double> point{0.1, 0.2, -0.3, 0.4};
        CHECK(check_gradient(objective, point, 1e-4) < 1e-10);
    }

    SUBCASE("a corrupted component is detected") {
        // Doubling a component gives |g - 2g| / |2g| = 0.5 under the
        // grad-relative definition; zeroing a unit component trips the
        // absolute fallback and reports the full missing value, ~1.
        Objective doubled = shifted_quadratic({0.5, -0.5});
        auto good = doubled.grad;
        doubled.grad = [good](std::span<const double> x, std::span<double> g) {
            good(x, g);
            g[1] *= 2.0;
        };
        const std::vector<double> point{2.0, 2.0};
        CHECK(check_gradient(doubled, point, 1e-6) == doctest::Approx(0.5).epsilon(1e-4));

        Objective zeroed = shifted_quadratic({0.5, -0.5});
        zeroed.grad = [good](std::span<const double> x, std::span<double> g) {
            good(x, g);
            g[1] = 0.0;
        };
        const std::vector<double> unit_point{0.5, 0.0}; // true gradient (0, 1)
        CHECK(check_gradient(zeroed, unit_point, 1e-6) == doctest::Approx(1.0).epsilon(1e-4));
    }

    SUBCASE("step must be positive") {
        const Objective objective = shifted_quadratic({0.0});
        const std::vector<double> point{1.0};
        CHECK_THROWS_AS(check_gradient(objective, point, 0.0), std::invalid_argument);
    }
}

TEST_CASE("non-finite handling") {
    SUBCASE("NaN at the starting point throws") {
        Objective objective;
        objective.dimension = 1;
        objective.eval = [](std::span<const double>) {
            return std::numeric_limits<double>::quiet_NaN();
        };
        objective.grad = [](std::span<const double>, std::span<double> g) { g[0] = 0.0; };
        const std::vector<double> start{0.0};
        MinimizeOptions options;
        CHECK_THROWS_AS(minimize(objective, start, options), NonFiniteObjective);
    }

    SUBCASE("NaN at a trial step is treated as +inf and backtracked over") {
        // Finite basin around the minimum, NaN wall beyond |x| > 3. The first
        // gradient step from 2.5 overshoots into the wall and must recover.
        Objective objective;
        objective.dimension = 1;
        objective.eval = [](std::span<const double> x) {
            if (std::abs(x[0]) > 3.0)
                return std::numeric_limits<double>::quiet_NaN();
            return 40.0 * (x[0] - 2.0) * (x[0] - 2.0);
        };
        objective.grad = [](std::span<const double> x, std::span<double> g) {
            g[0] = 80.0 * (x[0] - 2.0);
        };
        const std::vector<double> start{2.5};
        MinimizeOptions options;
        options.tolerance = 1e-10;
        const MinimizeResult result = minimize(objective, start, options);
        CHECK(result.converged);
        CHECK(result.x[0] == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("option validation") {
    const Objective objective = shifted_quadratic({0.0});
    const std::vector<double> start{1.0};
    MinimizeOptions options;
    options.memory = 0;
    CHECK_THROWS_AS(minimize(objective, start, options), std::invalid_argument);
    options.memory = 10;
    options.tolerance = -1.0;
    CHECK_THROWS_AS(minimize(objective, start, options), std::invalid_argument);
    options.tolerance = 1e-8;
    options.max_iterations = 0;
    CHECK_THROWS_AS(minimize(objective, start, options), std::invalid_argument);

    const std::vector<double> wrong_size{1.0, 2.0};
    MinimizeOptions good;
    CHECK_THROWS_AS(minimize(objective, wrong_size, good), std::invalid_argument);
}
