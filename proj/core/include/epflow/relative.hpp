#pragma once

#include <optional>
#include <vector>

#include "epflow/dynamics.hpp"
#include "epflow/measure.hpp"
#include "epflow/model.hpp"

namespace epflow {

/// Relative (Bregman) energies between a state and a reference trajectory
/// state sharing the same ReferenceMeasure.
///
/// kinetic_rel    = ½ Σ w_i (v_i - v̄_i)²
/// pressure_rel   = Σ_cells (ψ(τ) - ψ(τ̄) - ψ'(τ̄)(τ-τ̄)) m_c
/// repulsive_rel  = Σ_{i≠j} w_i w_j (K_r([η]) - K_r([η̄]) - K_r'([η̄])[η-η̄])
/// attractive_rel = analogous with K_a
/// total_rel      = sum of the four, exactly as summed
///
/// For the pressureless family, shift = y_cm[η̄] - y_cm[η] and total_rel
/// coincides with ½‖v-v̄‖² + ½‖η-η̄+shift‖² (squared L² distance after
/// matching centers of mass).
struct RelativeReport {
    double time = 0.0;
    double kinetic_rel = 0.0;
    double pressure_rel = 0.0;
    double repulsive_rel = 0.0;
    double attractive_rel = 0.0;
    double total_rel = 0.0;
    double shift = 0.0;
    double work_rate = 0.0;  // ⟨v̄, f[η|η̄]⟩
    double correction = 0.0; // ½ Σ_{η_i=η_j, x_i>x_j} w_i w_j (v̄_i - v̄_j)
};

/// Energies and shift only; work_rate and correction left at zero.
RelativeReport relative_energies(const LagrangianState& state, const LagrangianState& ref_state,
                                 const ReferenceMeasure& ref, const ModelSpec& model);

/// The relative work rate ⟨v̄, -δE/δη[η] + δE/δη[η̄] + δ²E/δη²[η̄](η-η̄)⟩,
/// assembled from pairwise kernel first/second differences and, for
/// WithPressure, the cell-wise pressure remainder. The reference state must
/// be strictly monotone (strong flow); coincident reference gaps throw.
double relative_work_rate(const LagrangianState& state, const LagrangianState& ref_state,
                          const ReferenceMeasure& ref, const ModelSpec& model);

/// Collision correction term: ½ Σ over ordered pairs with x_i > x_j and
/// η_i = η_j of w_i w_j (v̄_i - v̄_j). Zero when the state is strictly
/// monotone.
double collision_correction(const LagrangianState& state, const LagrangianState& ref_state,
                            const ReferenceMeasure& ref);

/// Full report: energies, shift, work rate and correction.
RelativeReport relative_report(const LagrangianState& state, const LagrangianState& ref_state,
                               const ReferenceMeasure& ref, const ModelSpec& model);

/// Per-snapshot relative reports for two trajectories on a shared time grid,
/// plus the running inequality residual
///   residual(t) = H_rel(t) - H_rel(0) - ∫₀ᵗ (-work_rate) ds   (trapezoid)
/// which the relative Hamiltonian inequality bounds by ~0 from above, and a
/// Gronwall check H_rel(t) ≤ H_rel(0) + C₀ ∫ E_rel with C₀ = max{C1,C2,C3}
/// estimated from the pairwise/cell estimates with φ = v̄.
struct MonitorPoint {
    RelativeReport report;
    double residual = 0.0;
};

struct MonitorSeries {
    std::vector<MonitorPoint> points;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool inequality_ok = false;
    double gronwall_c0 = 0.0;
    bool gronwall_ok = false;
};

MonitorSeries relative_hamiltonian_monitor(const Trajectory& weak, const Trajectory& strong,
                                           const ReferenceMeasure& ref, const ModelSpec& model,
                                           std::optional<double> tolerance_override = {});

/// One convexity lower bound for a relative energy: lhs ≥ rhs within
/// tolerance, with the branch constant and reverse-Hölder parameters used.
struct BoundCertificate {
    int assertion = 0; // 0..5
    double constant = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double beta = 0.0;
    double beta_prime = 0.0;
};

/// Certificates applicable to the model:
///   0: exact vanishing (p=1 repulsive / q=1 attractive)
///   1: q in (1,2)  — split at difference quotient 3·Lip(η̄)
///   2: q >= 2      — c₂ = 1/q (equality for q=2)
///   3: p in (0,1)  — split as assertion 1
///   4: pressure    — reverse Hölder with r(β) = γ/(1-β)
///   5: p in (-1,0) — reverse Hölder with r'(β') = (1-p)/(1-p-β')
/// beta defaults to 1/2; beta_prime defaults to (1-p)/2 clamped into (-p,1).
std::vector<BoundCertificate> lower_bound_certificates(
    const LagrangianState& state, const LagrangianState& ref_state, const ReferenceMeasure& ref,
    const ModelSpec& model, double beta = 0.5,
    std::optional<double> beta_prime = {});

/// Pointwise estimates |⟨φ-difference, kernel remainder⟩| ≤ C · relative
/// integrand, per cell (pressure) and per pair (kernels). ratio_k is the
/// largest observed lhs/rhs; C_k the Lipschitz-based constants from the
/// difference quotients of φ, η, η̄. violation is set if an integrand
/// vanishes while its lhs does not.
struct PpEstimates {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double ratio1 = 0.0, ratio2 = 0.0, ratio3 = 0.0;
    bool violation = false;
};

PpEstimates pp_constants(const LagrangianState& state, const LagrangianState& ref_state,
                         const ReferenceMeasure& ref, const ModelSpec& model,
                         const std::vector<double>& phi);

} // namespace epflow
