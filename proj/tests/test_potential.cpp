#include <cmath>

#include "doctest.h"

#include "moire/pair_potential.hpp"

using namespace moire;

TEST_CASE("factory potentials honor the construction contract") {
    CHECK_NOTHROW(harmonic_bond());
    CHECK_NOTHROW(lennard_jones());
    CHECK_NOTHROW(gaussian_well());

    const PairPotential harmonic = harmonic_bond(2.0, 1.0, 1.5);
    CHECK(harmonic.value(1.0) == 0.0);
    CHECK(harmonic.value(-1.25) == doctest::Approx(harmonic.value(1.25)).epsilon(1e-14));
    CHECK(harmonic.slope(-1.25) == doctest::Approx(-harmonic.slope(1.25)).epsilon(1e-14));
    CHECK(harmonic.curvature(0.9) == 2.0);

    const PairPotential lj = lennard_jones(1.0, 1.0, 5.0);
    CHECK(lj.value(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(lj.slope(1.0)) < 1e-10);
    CHECK(lj.curvature(1.0) > 0.0);

    const PairPotential gauss = gaussian_well(2.0, 0.3, 5.0);
    CHECK(gauss.value(0.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(gauss.slope(0.0) == 0.0);
}

TEST_CASE("values vanish exactly beyond the cutoff") {
    const PairPotential harmonic = harmonic_bond(1.0, 1.0, 1.5);
    CHECK(harmonic.value(1.6) == 0.0);
    CHECK(harmonic.slope(-1.7) == 0.0);
    CHECK(harmonic.curvature(2.0) == 0.0);

    const PairPotential lj = lennard_jones(1.0, 1.0, 5.0);
    CHECK(lj.value(5.0 + 1e-12) == 0.0);
    // the switch pulls the value to zero continuously at the cutoff
    CHECK(std::abs(lj.value(5.0 - 1e-9)) < 1e-12);
}

TEST_CASE("contract violations are rejected at construction") {
    SUBCASE("odd potential") {
        auto value = [](double z) { return z; };
        auto d1 = [](double) { return 1.0; };
        auto d2 = [](double) { return 0.0; };
        CHECK_THROWS_AS(PairPotential(value, d1, d2, 2.0), PotentialContractError);
    }
    SUBCASE("wrong first derivative") {
        auto value = [](double z) { return z * z; };
        auto d1 = [](double z) { return 3.0 * z; }; // should be 2z
        auto d2 = [](double) { return 2.0; };
        CHECK_THROWS_AS(PairPotential(value, d1, d2, 2.0), PotentialContractError);
    }
    SUBCASE("missing callbacks or bad cutoff") {
        auto value = [](double z) { return z * z; };
        auto d1 = [](double z) { return 2.0 * z; };
        auto d2 = [](double) { return 2.0; };
        CHECK_THROWS_AS(PairPotential(nullptr, d1, d2, 2.0), std::invalid_argument);
        CHECK_THROWS_AS(PairPotential(value, d1, d2, -1.0), std::invalid_argument);
    }
}

TEST_CASE("scaled potential is pointwise linear in the factor") {
    const PairPotential base = gaussian_well(1.0, 0.25, 4.0);
    const PairPotential twice = scaled(base, 2.5);
    for (double z : {0.0, 0.3, -0.8, 1.9}) {
        CHECK(twice.value(z) == doctest::Approx(2.5 * base.value(z)).epsilon(1e-14));
        CHECK(twice.slope(z) == doctest::Approx(2.5 * base.slope(z)).epsilon(1e-14));
        CHECK(twice.curvature(z) == doctest::Approx(2.5 * base.curvature(z)).epsilon(1e-14));
    }
    CHECK(twice.cutoff() == base.cutoff());
}
