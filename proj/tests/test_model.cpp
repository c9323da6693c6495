#include <cmath>
#include <random>

#include "doctest.h"

#include "moire/model.hpp"

using namespace moire;

namespace {

ModelParams graphene() { return ModelParams{0.25, 1.0 / 50.0, 50000.0, 20.0}; }

} // namespace

TEST_CASE("moire period reproduces the graphene supercell") {
    CHECK(moire_period(graphene()) == doctest::Approx(12.25).epsilon(1e-12));
    CHECK(moire_period(ModelParams{1.0, 0.5, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));

    // M a = a_M for the commensurate cell
    const auto counts = lattice_counts(graphene());
    CHECK(counts.layer1 * 0.25 == doctest::Approx(moire_period(graphene())).epsilon(1e-12));
}

TEST_CASE("lattice counts") {
    const auto graphene_counts = lattice_counts(graphene());
    CHECK(graphene_counts.layer1 == 49);
    CHECK(graphene_counts.layer2 == 50);

    CHECK(lattice_counts(0.5).layer1 == 1);
    CHECK(lattice_counts(0.5).layer2 == 2);
    CHECK(lattice_counts(1.0 / 3.0).layer1 == 2);
    CHECK(lattice_counts(1.0 / 3.0).layer2 == 3);

    CHECK_THROWS_AS(lattice_counts(0.3), IncommensurateTheta);
    CHECK_THROWS_AS(lattice_counts(0.021), IncommensurateTheta);

    // M + 1 = N for every commensurate mismatch
    for (int n = 2; n <= 200; ++n) {
        const auto counts = lattice_counts(1.0 / n);
        CHECK(counts.layer1 + 1 == counts.layer2);
        const ModelParams params{0.25, 1.0 / n, 1.0, 1.0};
        const double a_m = moire_period(params);
        CHECK(counts.layer1 * params.lattice_constant == doctest::Approx(a_m).epsilon(1e-12));
        CHECK(counts.layer2 * params.lattice_constant * (1.0 - params.mismatch) ==
              doctest::Approx(a_m).epsilon(1e-12));
    }
}

TEST_CASE("unrelaxed disregistry") {
    const ModelParams params = graphene();
    const double period = stacking_period(params);

    CHECK(unrelaxed_disregistry(0.0, params) == 0.0);

    // theta * a_M equals one full stacking period: wraps back to 0 (or to
    // period minus one ulp, which is the same point of the circle).
    const double at_period = unrelaxed_disregistry(moire_period(params), params);
    CHECK(std::min(at_period, period - at_period) < 1e-12 * period);

    CHECK(unrelaxed_disregistry(moire_period(params) / 2.0, params) ==
          doctest::Approx(0.1225).epsilon(1e-12));

    // negative arguments still land in [0, period)
    const double neg = unrelaxed_disregistry(-0.3 * moire_period(params), params);
    CHECK(neg >= 0.0);
    CHECK(neg < period);

    // periodicity over 1000 random points
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> span(-10.0 * moire_period(params),
                                                10.0 * moire_period(params));
    for (int k = 0; k < 1000; ++k) {
        const double x = span(rng);
        const double a = unrelaxed_disregistry(x, params);
        const double b = unrelaxed_disregistry(x + moire_period(params), params);
        const double diff = std::abs(a - b);
        CHECK(std::min(diff, period - diff) < 1e-12 * period);
    }
}

TEST_CASE("dimensionless groups for graphene") {
    const DimensionlessGroups groups = dimensionless_groups(graphene());
    CHECK(groups.delta_ratio == 0.0004); // 20/50000 is exact in binary rounding
    CHECK(groups.epsilon == doctest::Approx(0.02 / 0.98).epsilon(1e-14));
    CHECK(std::abs(groups.eta - 1.0) < 0.03);
    CHECK(groups.eta_abstract() * groups.eta * groups.eta == doctest::Approx(1.0).epsilon(1e-12));

    const DimensionlessGroups unity = dimensionless_groups(ModelParams{1.0, 0.5, 1.0, 1.0});
    CHECK(unity.epsilon == 1.0);
    CHECK(unity.delta_ratio == 1.0);
    CHECK(unity.eta == 1.0);
}

TEST_CASE("eta and delta are scale invariant in (kappa, V0)") {
    const ModelParams base = graphene();
    const DimensionlessGroups reference = dimensionless_groups(base);
    // powers of two scale exactly; arbitrary factors only up to rounding
    for (double factor : {2.0, 0.5, 1024.0, 1.0 / 4096.0}) {
        ModelParams scaled = base;
        scaled.stiffness *= factor;
        scaled.stacking_amplitude *= factor;
        const DimensionlessGroups groups = dimensionless_groups(scaled);
        CHECK(groups.eta == reference.eta);
        CHECK(groups.delta_ratio == reference.delta_ratio);
    }
    for (double factor : {3.0, 7.5, 0.1}) {
        ModelParams scaled = base;
        scaled.stiffness *= factor;
        scaled.stacking_amplitude *= factor;
        const DimensionlessGroups groups = dimensionless_groups(scaled);
        CHECK(groups.eta == doctest::Approx(reference.eta).epsilon(1e-14));
        CHECK(groups.delta_ratio == doctest::Approx(reference.delta_ratio).epsilon(1e-14));
    }
}

TEST_CASE("params_from_eta") {
    CHECK(params_from_eta(0.0, 1.0 / 50.0, 0.25).stacking_amplitude == 0.0);

    const ModelParams unit = params_from_eta(1.0, 1.0 / 50.0, 0.25);
    const DimensionlessGroups unit_groups = dimensionless_groups(unit);
    CHECK(unit_groups.delta_ratio ==
          doctest::Approx(unit_groups.epsilon * unit_groups.epsilon).epsilon(1e-14));

    for (double eta : {0.3, 1.0, 3.0, 12.5}) {
        const ModelParams params = params_from_eta(eta, 1.0 / 50.0, 0.25);
        CHECK(dimensionless_groups(params).eta == doctest::Approx(eta).epsilon(1e-12));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((ModelParams{-1.0, 0.5, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{1.0, 0.0, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{1.0, 1.0, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{1.0, 0.5, 0.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{1.0, 0.5, 1.0, -1.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((ModelParams{1.0, 0.5, 1.0, 0.0}.validate())); // decoupled layers allowed
}

TEST_CASE("sinusoid stacking spec") {
    const StackingPotentialSpec spec{StackingForm::Sinusoid, 1.5, 0.245};
    CHECK(spec.evaluate(0.0) == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(spec.evaluate(0.245 / 2.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(spec.evaluate(0.245) == doctest::Approx(-3.0).epsilon(1e-12));

    const StackingPotentialSpec tabulated{StackingForm::LatticeSum, 1.0, 1.0};
    CHECK_THROWS_AS(tabulated.evaluate(0.0), std::logic_error);
}
