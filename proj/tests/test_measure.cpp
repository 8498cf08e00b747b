#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "epflow/measure.hpp"

using namespace epflow;

TEST_CASE("uniform equal-mass partition uses quantile midpoints") {
    const ReferenceMeasure ref = build_reference(UniformDensity{0.0, 1.0, 1.0}, 4);
    const std::vector<double> expected = {1.0 / 8, 3.0 / 8, 5.0 / 8, 7.0 / 8};
    REQUIRE(ref.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ref.labels[i] == doctest::Approx(expected[i]).epsilon(1e-15));
        CHECK(ref.masses[i] == doctest::Approx(0.25).epsilon(1e-15));
    }
    CHECK(ref.total_mass == doctest::Approx(1.0));
}

TEST_CASE("too few particles or bad mass is rejected") {
    CHECK_THROWS_AS(build_reference(UniformDensity{0.0, 1.0, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_reference(UniformDensity{0.0, 1.0, 0.0}, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_reference(UniformDensity{0.0, 1.0, -2.0}, 4), std::invalid_argument);
}

TEST_CASE("triangular density labels sit at analytic CDF quantiles") {
    // density 2x on [0,1]: CDF x^2, quantiles at mass 1/4 and 3/4 give
    // x = 1/2 and x = sqrt(3)/2.
    SampledDensity density;
    density.grid = {0.0, 0.5, 1.0};
    density.values = {0.0, 1.0, 2.0};
    const ReferenceMeasure ref = build_reference(density, 2);
    CHECK(ref.labels[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ref.labels[1] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
    CHECK(ref.masses[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ref.masses[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("uniform partition masses are equal for any count") {
    for (std::size_t n : {2u, 3u, 7u, 64u, 1000u}) {
        const ReferenceMeasure ref = build_reference(UniformDensity{-2.0, 3.0, 4.0}, n);
        double total = 0.0;
        for (double w : ref.masses) {
            CHECK(w == doctest::Approx(4.0 / n).epsilon(1e-15));
            total += w;
        }
        CHECK(total == doctest::Approx(4.0).epsilon(n * 1e-16));
        for (std::size_t i = 0; i + 1 < n; ++i) CHECK(ref.labels[i + 1] > ref.labels[i]);
    }
}

TEST_CASE("center of mass: symmetry, weights, identity map") {
    ReferenceMeasure ref;
    ref.labels = {0.0, 1.0};
    ref.masses = {0.5, 0.5};
    ref.total_mass = 1.0;
    LagrangianState state;
    state.positions = {-1.0, 1.0};
    state.velocities = {0.0, 0.0};
    CHECK(center_of_mass(state, ref) == doctest::Approx(0.0));

    ref.masses = {0.75, 0.25};
    state.positions = {0.0, 1.0};
    CHECK(center_of_mass(state, ref) == doctest::Approx(0.25));

    const ReferenceMeasure uniform = build_reference(UniformDensity{0.0, 1.0, 1.0}, 16);
    LagrangianState identity;
    identity.positions = uniform.labels;
    identity.velocities.assign(16, 0.0);
    CHECK(center_of_mass(identity, uniform) == doctest::Approx(0.5).epsilon(1e-14));

    LagrangianState mismatched;
    mismatched.positions = {0.0};
    mismatched.velocities = {0.0};
    CHECK_THROWS_AS(center_of_mass(mismatched, uniform), std::invalid_argument);
}

TEST_CASE("center of mass is affine-equivariant under shifts") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const ReferenceMeasure ref = build_reference(UniformDensity{0.0, 1.0, 2.0}, 9);
    LagrangianState state;
    state.velocities.assign(9, 0.0);
    for (std::size_t i = 0; i < 9; ++i) state.positions.push_back(unit(rng));
    const double base = center_of_mass(state, ref);
    for (double shift : {0.5, -3.0, 17.25}) {
        LagrangianState shifted = state;
        for (double& p : shifted.positions) p += shift;
        CHECK(center_of_mass(shifted, ref) == doctest::Approx(base + shift).epsilon(1e-13));
    }
}

TEST_CASE("push forward bins mass and velocity") {
    ReferenceMeasure ref;
    ref.labels = {0.25, 0.75};
    ref.masses = {0.5, 0.5};
    ref.total_mass = 1.0;
    LagrangianState state;
    state.positions = {0.25, 0.75};
    state.velocities = {1.0, -1.0};
    const EulerianField field = push_forward(state, ref, {0.0, 0.5, 1.0});
    CHECK(field.density[0] == doctest::Approx(1.0));
    CHECK(field.density[1] == doctest::Approx(1.0));
    CHECK(field.velocity[0] == doctest::Approx(1.0));
    CHECK(field.velocity[1] == doctest::Approx(-1.0));
}

TEST_CASE("all particles in one bin form a single histogram spike") {
    const ReferenceMeasure ref = build_reference(UniformDensity{0.0, 1.0, 2.0}, 8);
    LagrangianState state;
    state.positions.assign(8, 0.3);
    state.velocities.assign(8, 0.0);
    const EulerianField field = push_forward(state, ref, {0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(field.density[1] == doctest::Approx(2.0 / 0.25));
    CHECK(field.density[0] == 0.0);
    CHECK(field.density[2] == 0.0);
    CHECK(field.velocity[0] == 0.0); // empty bins report zero velocity
}

TEST_CASE("per-bin velocity matches a direct mass-weighted summation oracle") {
    const std::size_t n = 32;
    const ReferenceMeasure ref = build_reference(UniformDensity{0.0, 1.0, 1.0}, n);
    LagrangianState state;
    state.positions = ref.labels;
    state.velocities = ref.labels; // v_i = eta_i
    const std::vector<double> edges = {0.0, 0.3, 0.6, 1.0};
    const EulerianField field = push_forward(state, ref, edges);

    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double mass = 0.0, momentum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool inside = state.positions[i] >= edges[k] &&
                                (state.positions[i] < edges[k + 1] || k + 2 == edges.size());
            if (inside) {
                mass += ref.masses[i];
                momentum += ref.masses[i] * state.velocities[i];
            }
        }
        CHECK(field.velocity[k] == doctest::Approx(momentum / mass).epsilon(1e-14));
    }
}

TEST_CASE("push forward conserves mass exactly and rejects out-of-range particles") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const ReferenceMeasure ref = build_reference(UniformDensity{0.0, 1.0, 3.0}, 25);
    LagrangianState state;
    state.velocities.assign(25, 0.0);
    for (std::size_t i = 0; i < 25; ++i) state.positions.push_back(unit(rng));

    const std::vector<double> edges = {0.0, 0.1, 0.4, 0.9, 1.0};
    const EulerianField field = push_forward(state, ref, edges);
    double mass = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        mass += field.density[k] * (edges[k + 1] - edges[k]);
    CHECK(mass == doctest::Approx(ref.total_mass).epsilon(1e-13));

    state.positions[3] = 1.5;
    CHECK_THROWS_AS(push_forward(state, ref, edges), std::domain_error);
}
