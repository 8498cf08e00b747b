#include "epflow/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace epflow {

namespace {

void half_kick(LagrangianState& state, const ReferenceMeasure& ref,
               const std::vector<double>& f, double dt, double mass_scale = 1.0) {
    for (std::size_t i = 0; i < ref.size(); ++i)
        state.velocities[i] += 0.5 * dt * f[i] / (mass_scale * ref.masses[i]);
}

void drift(LagrangianState& state, double dt) {
    for (std::size_t i = 0; i < state.positions.size(); ++i)
        state.positions[i] += dt * state.velocities[i];
}

// Leapfrog with a force known at entry; returns the force at exit so the
// caller can reuse it.
std::vector<double> verlet_step(LagrangianState& state, const ReferenceMeasure& ref,
                                const ModelSpec& model, double dt, std::vector<double> f_in,
                                double mass_scale = 1.0) {
    half_kick(state, ref, f_in, dt, mass_scale);
    drift(state, dt);
    std::vector<double> f_out = force(state, ref, model);
    half_kick(state, ref, f_out, dt, mass_scale);
    return f_out;
}

} // namespace

double total_momentum(const LagrangianState& state, const ReferenceMeasure& ref) {
    double p = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) p += ref.masses[i] * state.velocities[i];
    return p;
}

LagrangianState step_hamiltonian(const LagrangianState& state, const ReferenceMeasure& ref,
                                 const ModelSpec& model, double dt) {
    LagrangianState next = state;
    verlet_step(next, ref, model, dt, force(state, ref, model));
    next.time = state.time + dt;
    return next;
}

LagrangianState step_damped(const LagrangianState& state, const ReferenceMeasure& ref,
                            const ModelSpec& model, double dt, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("step_damped: epsilon must be positive");
    LagrangianState next = state;
    const double eps2 = epsilon * epsilon;
    const double decay = std::exp(-0.5 * dt / eps2);
    for (double& v : next.velocities) v *= decay;
    verlet_step(next, ref, model, dt, force(next, ref, model), eps2);
    for (double& v : next.velocities) v *= decay;
    next.time = state.time + dt;
    return next;
}

LagrangianState step_gradient_flow(const LagrangianState& state, const ReferenceMeasure& ref,
                                   const ModelSpec& model, double dt) {
    LagrangianState next = state;
    const std::vector<double> f = force(state, ref, model);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double speed = f[i] / ref.masses[i];
        next.positions[i] += dt * speed;
        next.velocities[i] = speed;
    }
    next.time = state.time + dt;
    return next;
}

std::size_t count_clusters(const LagrangianState& state) {
    std::size_t n = state.positions.empty() ? 0 : 1;
    for (std::size_t i = 0; i + 1 < state.positions.size(); ++i)
        if (state.positions[i + 1] > state.positions[i]) ++n;
    return n;
}

ClusterState sticky_project(const LagrangianState& state, const ReferenceMeasure& ref) {
    if (state.positions.size() != ref.size())
        throw std::invalid_argument("sticky_project: state/reference length mismatch");
    const std::size_t n = ref.size();

    struct Cluster {
        double mass, moment, momentum;
        std::size_t count, first;
        double position(const LagrangianState& s) const {
            return count == 1 ? s.positions[first] : moment / mass;
        }
    };
    std::vector<Cluster> stack;
    stack.reserve(n);
    // Left-to-right scan; merging overlapping runs is associative, so the
    // fixed point does not depend on the scan order. Singletons keep their
    // original values bitwise, so a strictly monotone state passes through
    // unchanged.
    for (std::size_t i = 0; i < n; ++i) {
        Cluster c{ref.masses[i], ref.masses[i] * state.positions[i],
                  ref.masses[i] * state.velocities[i], 1, i};
        while (!stack.empty() && c.position(state) <= stack.back().position(state)) {
            const Cluster& b = stack.back();
            c.mass += b.mass;
            c.moment += b.moment;
            c.momentum += b.momentum;
            c.count += b.count;
            c.first = b.first;
            stack.pop_back();
        }
        stack.push_back(c);
    }

    ClusterState out;
    out.state = state;
    out.cluster_of.resize(n);
    out.n_clusters = stack.size();
    std::size_t i = 0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
        const Cluster& c = stack[k];
        const double pos = c.position(state);
        const double vel = c.count == 1 ? state.velocities[c.first] : c.momentum / c.mass;
        for (std::size_t member = 0; member < c.count; ++member, ++i) {
            out.state.positions[i] = pos;
            out.state.velocities[i] = vel;
            out.cluster_of[i] = k;
        }
    }
    return out;
}

Trajectory run(const LagrangianState& initial, const ReferenceMeasure& ref,
               const ModelSpec& model, const IntegratorConfig& config,
               const std::vector<Monitor>& monitors) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("integrator.dt: must be positive");
    if (config.scheme == Scheme::DampedLeapfrog && !(config.epsilon > 0.0))
        throw std::invalid_argument("integrator.epsilon: must be positive for the damped scheme");
    if (config.output_stride == 0)
        throw std::invalid_argument("integrator.stride: must be positive");

    const bool project = model.formulation == Formulation::Pressureless;
    const std::size_t steps =
        static_cast<std::size_t>(std::llround(std::max(config.t_end, 0.0) / config.dt));

    Trajectory traj;
    LagrangianState state = initial;
    state.time = initial.time;
    if (project) {
        state = sticky_project(state, ref).state;
    }

    const auto record = [&](const LagrangianState& s) {
        Snapshot snap;
        snap.time = s.time;
        snap.state = s;
        snap.n_clusters = count_clusters(s);
        snap.energy = eval_energy(s, ref, model);
        traj.snapshots.push_back(snap);
        for (const auto& monitor : monitors) monitor(traj.snapshots.back());
    };

    record(state);
    for (std::size_t step = 1; step <= steps; ++step) {
        switch (config.scheme) {
            case Scheme::Leapfrog:
                state = step_hamiltonian(state, ref, model, config.dt);
                break;
            case Scheme::DampedLeapfrog:
                state = step_damped(state, ref, model, config.dt, config.epsilon);
                break;
            case Scheme::GradientEuler:
                state = step_gradient_flow(state, ref, model, config.dt);
                break;
        }
        if (project) {
            const std::size_t before = count_clusters(state);
            ClusterState projected = sticky_project(state, ref);
            if (projected.n_clusters < before) {
                MergeEvent event;
                event.time = state.time;
                event.energy_before = eval_energy(state, ref, model).total;
                event.momentum_before = total_momentum(state, ref);
                event.energy_after = eval_energy(projected.state, ref, model).total;
                event.momentum_after = total_momentum(projected.state, ref);
                traj.merges.push_back(event);
            }
            state = std::move(projected.state);
        }
        if (step % config.output_stride == 0 || step == steps) record(state);
    }
    return traj;
}

} // namespace epflow
