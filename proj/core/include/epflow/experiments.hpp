#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epflow/dynamics.hpp"
#include "epflow/measure.hpp"
#include "epflow/model.hpp"
#include "epflow/relative.hpp"

namespace epflow {

/// One output-time row of a single run (first 8 columns) or of a comparison
/// run (all columns), in the fixed CSV column order.
struct SeriesRow {
    double t = 0.0;
    double H = 0.0, K = 0.0, E_r = 0.0, E_a = 0.0, E_w = 0.0;
    double com = 0.0;
    std::size_t n_clusters = 0;
    bool has_relative = false;
    double H_rel = 0.0, K_rel = 0.0, Ew_rel = 0.0, Er_rel = 0.0, Ea_rel = 0.0;
    double shift_a = 0.0, work_rate = 0.0, correction = 0.0, residual = 0.0;
};

/// Machine-readable experiment outcome: pass/fail plus the measured
/// quantities that were judged, and the time series it judged them on.
struct ExperimentReport {
    std::string name;
    bool pass = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes;
    std::vector<SeriesRow> series;
};

std::vector<SeriesRow> trajectory_series(const Trajectory& traj, const ReferenceMeasure& ref,
                                         const ModelSpec& model);
std::vector<SeriesRow> comparison_series(const Trajectory& weak, const Trajectory& strong,
                                         const ReferenceMeasure& ref, const ModelSpec& model,
                                         const MonitorSeries& monitor);

/// Same initial data integrated at dt and dt/2; sup_t H_rel between the two
/// must shrink ~16x when both resolutions are halved (squared distance of
/// O(dt²)-accurate trajectories).
ExperimentReport exp_weak_strong_uniqueness(const ModelSpec& model, std::size_t n,
                                            double horizon, double dt, std::uint64_t seed);

/// Rarefaction decay: reference flow with velocities increasing in the
/// label. Checks H_rel(t) + ∫₀ᵗ A(s) E_rel(s) ds ≤ H_rel(0) + tol at each
/// output, with A = min{γ+1, 2-p, 2-q}·ℓ/(Lip(η)+Lip(η̄)) and ℓ the smallest
/// difference quotient of v̄. Aborts (throws) if ℓ(t) < 0.
ExperimentReport exp_rarefaction(const ModelSpec& model, std::size_t n, double horizon,
                                 double dt, double rel_tolerance, std::uint64_t seed);

/// Pressureless L² stability. Without collisions: strictly monotone pair,
/// H_rel non-increasing within rel_tolerance·H_rel(0). With engineered
/// crossing data: fits the running-max envelope of H_rel after the first
/// merge to c0 + C·t, requires C ≥ 0, a sub-linear quadratic residual, and
/// H_rel(t) ≤ H_rel(0) + (sup correction + tol)·t.
ExperimentReport exp_L2_stability(std::size_t n, double horizon, bool with_collision,
                                  double dt, double rel_tolerance, std::uint64_t seed);

/// Large-friction limit: for each ε runs the friction-scaled flow from
/// well-prepared data (η̂(0)=η̄(0), η̂'(0)=f(η̄(0))/w) against the gradient
/// flow; e(ε) = sup_s ‖η̂_ε - η̄_a‖_{L²ρ₀}. Fits slope of log e vs log ε
/// (expected ≈ 2) and checks sup_s ‖η̂'_ε‖ varies by < 2x across the sweep.
/// Aborts (throws) on a merge event.
ExperimentReport exp_friction_limit(const std::vector<double>& epsilons, std::size_t n,
                                    double s_end, std::uint64_t seed, unsigned threads = 1);

/// Relative Hamiltonian identity between two smooth non-colliding flows:
/// max over the output grid of |ΔH_rel/Δt + avg work rate| must be below
/// tolerance and shrink under dt refinement.
ExperimentReport exp_relative_identity(const ModelSpec& model, std::size_t n, double horizon,
                                       double dt, std::size_t stride, double tolerance,
                                       std::uint64_t seed);

} // namespace epflow
