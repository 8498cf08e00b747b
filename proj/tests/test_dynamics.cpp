#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epflow/dynamics.hpp"
#include "epflow/sampling.hpp"

using namespace epflow;

namespace {

ReferenceMeasure unit_ref(std::size_t n) { return build_reference(UniformDensity{0.0, 1.0, 1.0}, n); }

LagrangianState two_body(double separation, double rel_speed = 0.0) {
    LagrangianState state;
    state.positions = {0.0, separation};
    state.velocities = {-rel_speed / 2.0, rel_speed / 2.0};
    return state;
}

double separation(const LagrangianState& state) {
    return std::abs(state.positions[1] - state.positions[0]);
}

} // namespace

TEST_CASE("two-body oscillation has period 2*pi") {
    // d(t) = 1/2 + 1/2 cos t; measure upcrossings of |d| = 1/2. The orbit
    // grazes d = 0 at odd multiples of pi, where a numerical overshoot flips
    // the branch, so the magnitude is the robust observable.
    const ReferenceMeasure ref = unit_ref(2);
    const ModelSpec model = ModelSpec::pressureless();
    const double dt = 1e-3;
    LagrangianState state = two_body(1.0);

    std::vector<double> crossings;
    double prev = separation(state);
    for (std::size_t step = 1; step * dt <= 40.0; ++step) {
        state = step_hamiltonian(state, ref, model, dt);
        const double cur = separation(state);
        if (prev < 0.5 && cur >= 0.5) {
            const double frac = (0.5 - prev) / (cur - prev);
            crossings.push_back((static_cast<double>(step) - 1.0 + frac) * dt);
        }
        prev = cur;
    }
    REQUIRE(crossings.size() >= 4);
    const double period =
        (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    CHECK(period == doctest::Approx(2.0 * M_PI).epsilon(1e-4));
}

TEST_CASE("a free particle advances linearly") {
    ReferenceMeasure ref;
    ref.labels = {0.0};
    ref.masses = {1.0};
    ref.total_mass = 1.0;
    LagrangianState state;
    state.positions = {0.0};
    state.velocities = {1.0};
    const double dt = 1.0 / 1024.0; // exact dyadic
    for (int step = 0; step < 2048; ++step)
        state = step_hamiltonian(state, ref, ModelSpec::pressureless(), dt);
    CHECK(state.positions[0] == 2.0);
    CHECK(state.velocities[0] == 1.0);
}

TEST_CASE("energy drift is bounded and second order in dt") {
    const std::size_t n = 16;
    const ReferenceMeasure ref = unit_ref(n);
    const ModelSpec model = ModelSpec::pressureless();
    Rng rng(5);
    LagrangianState initial;
    initial.positions = pressureless_equilibrium(ref);
    initial.velocities = random_smooth_velocities(rng, ref, 0.05);

    const auto drift = [&](double dt) {
        IntegratorConfig config{Scheme::Leapfrog, dt, 10.0, 25, 0.0};
        const Trajectory traj = run(initial, ref, model, config);
        REQUIRE(traj.merges.empty());
        const double h0 = traj.snapshots.front().energy.total;
        double worst = 0.0;
        for (const auto& snap : traj.snapshots)
            worst = std::max(worst, std::abs(snap.energy.total - h0));
        return worst;
    };
    const double coarse = drift(4e-3);
    const double fine = drift(2e-3);
    CHECK(coarse / fine > 3.0);
    CHECK(coarse / fine < 5.0);
}

TEST_CASE("momentum is conserved by the leapfrog") {
    Rng rng(9);
    const ReferenceMeasure ref = unit_ref(12);
    const ModelSpec model = ModelSpec::pressureless();
    LagrangianState state;
    state.positions = pressureless_equilibrium(ref);
    state.velocities = random_smooth_velocities(rng, ref, 0.1);
    const double p0 = total_momentum(state, ref);
    for (int step = 0; step < 2000; ++step) state = step_hamiltonian(state, ref, model, 1e-3);
    CHECK(std::abs(total_momentum(state, ref) - p0) < 1e-13);
}

TEST_CASE("exact exponential damping on a force-free particle") {
    ReferenceMeasure ref;
    ref.labels = {0.0};
    ref.masses = {1.0};
    ref.total_mass = 1.0;
    LagrangianState state;
    state.positions = {0.0};
    state.velocities = {1.0};
    const double eps = 0.3, dt = 1e-2, s_end = 1.0;
    const std::size_t steps = 100;
    for (std::size_t k = 0; k < steps; ++k)
        state = step_damped(state, ref, ModelSpec::pressureless(), dt, eps);
    CHECK(state.velocities[0] ==
          doctest::Approx(std::exp(-s_end / (eps * eps))).epsilon(1e-12));
}

TEST_CASE("large epsilon reproduces the undamped step in rescaled time") {
    const ReferenceMeasure ref = unit_ref(2);
    const ModelSpec model = ModelSpec::pressureless();
    const double eps = 1e7, dt = 1e-3, ds = eps * dt;

    LagrangianState plain = two_body(0.8, 0.1);
    LagrangianState scaled = plain;
    for (double& v : scaled.velocities) v /= eps;

    plain = step_hamiltonian(plain, ref, model, dt);
    scaled = step_damped(scaled, ref, model, ds, eps);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(scaled.positions[i] == doctest::Approx(plain.positions[i]).epsilon(1e-12));
        CHECK(scaled.velocities[i] * eps == doctest::Approx(plain.velocities[i]).epsilon(1e-9));
    }
}

TEST_CASE("overdamped two-body separation relaxes monotonically to 1/2") {
    const ReferenceMeasure ref = unit_ref(2);
    const ModelSpec model = ModelSpec::pressureless();
    const double eps = 0.05, ds = 1e-4;
    LagrangianState state = two_body(1.0);
    // well-prepared start: gradient-flow velocity
    {
        const auto f = force(state, ref, model);
        for (std::size_t i = 0; i < 2; ++i) state.velocities[i] = f[i] / ref.masses[i];
    }
    double prev = separation(state);
    for (std::size_t k = 1; k * ds <= 2.0; ++k) {
        state = step_damped(state, ref, model, ds, eps);
        const double cur = separation(state);
        if (k * ds > 0.2) CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    CHECK(prev == doctest::Approx(0.5 + 0.5 * std::exp(-2.0)).epsilon(2e-2));
}

TEST_CASE("gradient flow relaxes the two-body gap exponentially") {
    const ReferenceMeasure ref = unit_ref(2);
    const ModelSpec model = ModelSpec::pressureless();
    const double dt = 1e-3;
    LagrangianState state = two_body(1.0);
    for (std::size_t k = 0; k < 2000; ++k) state = step_gradient_flow(state, ref, model, dt);
    CHECK(separation(state) == doctest::Approx(0.5 + 0.5 * std::exp(-2.0)).epsilon(5e-3));
}

TEST_CASE("gradient flow fixes the equilibrium and the center of mass") {
    const ReferenceMeasure ref = unit_ref(2);
    const ModelSpec model = ModelSpec::pressureless();
    LagrangianState state = two_body(0.5);
    const LagrangianState next = step_gradient_flow(state, ref, model, 1e-3);
    CHECK(next.positions[0] == state.positions[0]);
    CHECK(next.positions[1] == state.positions[1]);

    Rng rng(13);
    const ReferenceMeasure ref8 = unit_ref(8);
    LagrangianState random_state = random_monotone_state(rng, ref8);
    const double com0 = center_of_mass(random_state, ref8);
    for (std::size_t k = 0; k < 5000; ++k)
        random_state = step_gradient_flow(random_state, ref8, model, 1e-3);
    CHECK(std::abs(center_of_mass(random_state, ref8) - com0) < 1e-12);
}

TEST_CASE("sticky projection merges crossings and cancels momentum") {
    const ReferenceMeasure ref = unit_ref(2);
    LagrangianState state;
    state.positions = {0.6, 0.4}; // crossed
    state.velocities = {1.0, -1.0};
    const ClusterState projected = sticky_project(state, ref);
    CHECK(projected.n_clusters == 1);
    CHECK(projected.state.positions[0] == doctest::Approx(0.5));
    CHECK(projected.state.velocities[0] == doctest::Approx(0.0));
    CHECK(projected.state.velocities[1] == doctest::Approx(0.0));
}

TEST_CASE("sticky projection is the identity on strictly monotone states") {
    Rng rng(31);
    const ReferenceMeasure ref = unit_ref(10);
    const LagrangianState state = random_monotone_state(rng, ref);
    const ClusterState projected = sticky_project(state, ref);
    CHECK(projected.n_clusters == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(projected.state.positions[i] == state.positions[i]);
        CHECK(projected.state.velocities[i] == state.velocities[i]);
    }
}

TEST_CASE("triple collapse dissipates all kinetic energy") {
    const ReferenceMeasure ref = unit_ref(3);
    const ModelSpec model = ModelSpec::pressureless();
    LagrangianState state;
    state.positions = {0.5, 0.5, 0.5};
    state.velocities = {1.0, 0.0, -1.0};
    const double h_before = eval_energy(state, ref, model).total;
    const ClusterState projected = sticky_project(state, ref);
    const double h_after = eval_energy(projected.state, ref, model).total;
    CHECK(projected.n_clusters == 1);
    CHECK(projected.state.velocities[0] == doctest::Approx(0.0));
    CHECK(h_before == doctest::Approx(1.0 / 3.0)); // kinetic only
    CHECK(h_after == doctest::Approx(0.0));
    CHECK(std::abs(total_momentum(projected.state, ref) - total_momentum(state, ref)) < 1e-15);
}

TEST_CASE("zero-step run returns only the initial snapshot") {
    const ReferenceMeasure ref = unit_ref(4);
    const ModelSpec model = ModelSpec::pressureless();
    Rng rng(3);
    const LagrangianState initial = random_monotone_state(rng, ref);
    IntegratorConfig config{Scheme::Leapfrog, 1e-3, 0.0, 10, 0.0};
    const Trajectory traj = run(initial, ref, model, config);
    CHECK(traj.snapshots.size() == 1);
    CHECK(traj.merges.empty());
}

TEST_CASE("replay is bit-identical") {
    const ReferenceMeasure ref = unit_ref(8);
    const ModelSpec model = ModelSpec::pressureless();
    Rng rng(77);
    LagrangianState initial;
    initial.positions = pressureless_equilibrium(ref);
    initial.velocities = random_smooth_velocities(rng, ref, 0.3);
    IntegratorConfig config{Scheme::Leapfrog, 1e-3, 3.0, 100, 0.0};
    const Trajectory a = run(initial, ref, model, config);
    const Trajectory b = run(initial, ref, model, config);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(a.snapshots[k].state.positions[i] == b.snapshots[k].state.positions[i]);
            CHECK(a.snapshots[k].state.velocities[i] == b.snapshots[k].state.velocities[i]);
        }
    }
}

TEST_CASE("crossing data merges, dissipates, and stays in the cone") {
    const ReferenceMeasure ref = unit_ref(8);
    const ModelSpec model = ModelSpec::pressureless();
    LagrangianState initial;
    initial.positions = pressureless_equilibrium(ref);
    initial.velocities.assign(8, 0.0);
    initial.velocities[3] = 0.5;
    initial.velocities[4] = -0.5;
    IntegratorConfig config{Scheme::Leapfrog, 1e-4, 2.0, 50, 0.0};
    const Trajectory traj = run(initial, ref, model, config);

    REQUIRE(!traj.merges.empty());
    for (const auto& merge : traj.merges) {
        CHECK(merge.energy_after <= merge.energy_before + 1e-14);
        CHECK(std::abs(merge.momentum_after - merge.momentum_before) < 1e-14);
    }
    for (const auto& snap : traj.snapshots) {
        for (std::size_t i = 0; i + 1 < 8; ++i)
            CHECK(snap.state.positions[i + 1] >= snap.state.positions[i]);
    }
    CHECK(traj.snapshots.back().n_clusters < 8);
    // the Hamiltonian never increases across the recorded merges
    const double h0 = traj.snapshots.front().energy.total;
    CHECK(traj.snapshots.back().energy.total <= h0 + 1e-10);
}

TEST_CASE("with-pressure contact is a hard integrator error") {
    const ReferenceMeasure ref = unit_ref(4);
    const ModelSpec model = ModelSpec::with_pressure(0.5, 1.5, 2.0);
    LagrangianState initial;
    initial.positions = ref.labels;
    initial.velocities = {2.0, -2.0, 2.0, -2.0}; // immediate crossing
    IntegratorConfig config{Scheme::Leapfrog, 0.05, 1.0, 1, 0.0};
    CHECK_THROWS_AS(run(initial, ref, model, config), std::domain_error);
}
