#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epflow/energy.hpp"
#include "epflow/measure.hpp"
#include "epflow/model.hpp"

namespace epflow {

/// Monotone-cone state: particles grouped into clusters that share one
/// position and one velocity; cluster positions strictly increase.
struct ClusterState {
    LagrangianState state;
    std::vector<std::size_t> cluster_of; // per-particle cluster index, non-decreasing
    std::size_t n_clusters = 0;
};

enum class Scheme { Leapfrog, DampedLeapfrog, GradientEuler };

struct IntegratorConfig {
    Scheme scheme = Scheme::Leapfrog;
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t output_stride = 100;
    double epsilon = 0.1; // friction parameter, DampedLeapfrog only
};

/// One velocity-Verlet step of the Hamiltonian flow: half kick, drift,
/// recompute force, half kick. Time advances by dt.
LagrangianState step_hamiltonian(const LagrangianState& state, const ReferenceMeasure& ref,
                                 const ModelSpec& model, double dt);

/// One step of the friction-scaled flow in coarse time:
/// exact exponential damping exp(-dt/ε²) split symmetrically around the
/// conservative leapfrog with effective mass ε²·w.
LagrangianState step_damped(const LagrangianState& state, const ReferenceMeasure& ref,
                            const ModelSpec& model, double dt, double epsilon);

/// Explicit Euler step of the gradient flow η' = f/w; velocities are set to
/// f/w for diagnostics. Callers project afterwards.
LagrangianState step_gradient_flow(const LagrangianState& state, const ReferenceMeasure& ref,
                                   const ModelSpec& model, double dt);

/// Merge adjacent particles/clusters wherever positions fail to strictly
/// increase, at the mass-weighted position with the mass-weighted velocity,
/// until cluster positions strictly increase. Total mass and momentum are
/// preserved exactly.
ClusterState sticky_project(const LagrangianState& state, const ReferenceMeasure& ref);

std::size_t count_clusters(const LagrangianState& state);

struct Snapshot {
    double time = 0.0;
    LagrangianState state;
    std::size_t n_clusters = 0;
    EnergyReport energy;
};

/// Hamiltonian before/after one sticky projection that merged something.
struct MergeEvent {
    double time = 0.0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double momentum_before = 0.0;
    double momentum_after = 0.0;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    std::vector<MergeEvent> merges;
};

using Monitor = std::function<void(const Snapshot&)>;

/// Advance the selected stepper to t_end, applying sticky projection after
/// every step for the pressureless family (WithPressure instead errors on
/// contact inside the stepper). Snapshots are recorded at t=0, every
/// output_stride steps, and at the end. Deterministic: fixed reduction order,
/// no shared state.
Trajectory run(const LagrangianState& initial, const ReferenceMeasure& ref,
               const ModelSpec& model, const IntegratorConfig& config,
               const std::vector<Monitor>& monitors = {});

double total_momentum(const LagrangianState& state, const ReferenceMeasure& ref);

} // namespace epflow
