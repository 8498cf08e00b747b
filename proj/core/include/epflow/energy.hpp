#pragma once

#include <vector>

#include "epflow/measure.hpp"
#include "epflow/model.hpp"

namespace epflow {

/// Hamiltonian and its constituents for one state.
///
/// K   = Σ w_i v_i²/2
/// E_r = Σ_{i≠j} w_i w_j (K_r(η_i-η_j) - K_r(η*_i-η*_j))   (reference term
///       dropped for the pressureless family, which has no η_*)
/// E_a = analogous with the attractive kernel
/// E_w = Σ_cells (ψ(τ_c) - ψ(τ*_c)) m_c over the N-1 inter-label cells,
///       τ_c = (η_{c+1}-η_c)/m_c, m_c = (w_c + w_{c+1})/2, ψ(s) = s^{1-γ}
///
/// WithPressure requires strictly increasing positions (throws
/// std::domain_error naming the offending cell otherwise). Pressureless
/// accepts any positions: the cone constraint is the integrator's job.
EnergyReport eval_energy(const LagrangianState& state, const ReferenceMeasure& ref,
                         const ModelSpec& model);

/// Interaction part only (E_r + E_a + E_w); what the force differentiates.
double potential_energy(const LagrangianState& state, const ReferenceMeasure& ref,
                        const ModelSpec& model);

/// Exact negative gradient of the discrete energy, f_i = -∂E/∂η_i.
///
/// Pressureless: f_i = 2 w_i Σ_{j≠i} w_j (sgn(η_i-η_j)/4 - (η_i-η_j)/2).
/// WithPressure: pairwise 2 w_i w_j (κ_r sgn(Δ)|Δ|^{p-1} - κ_a sgn(Δ)|Δ|^{q-1})
/// plus the difference of adjacent -ψ'(τ) cell terms. Coincident particles
/// with p < 1 throw std::domain_error.
std::vector<double> force(const LagrangianState& state, const ReferenceMeasure& ref,
                          const ModelSpec& model);

/// Independent check of the variational derivative: central difference
/// -(E(η+h e_i) - E(η-h e_i))/(2h). Throws if a perturbed state leaves the
/// admissible class (reduce h).
std::vector<double> fd_oracle_force(const LagrangianState& state, const ReferenceMeasure& ref,
                                    const ModelSpec& model, double h);

/// The three admissibility integrals that make a bi-Lipschitz state's energy
/// finite, together with bounds assembled from discrete Lipschitz constants
/// (max/min adjacent difference quotients). `ok_k` reports lhs_k < bound_k;
/// the bounds carry a tiny positive guard so the inequality is strict even
/// at η = η_*.
struct AppendixBounds {
    double lhs1 = 0.0, lhs2 = 0.0, lhs3 = 0.0;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    bool ok1 = false, ok2 = false, ok3 = false;
};

AppendixBounds appendix_constants(const LagrangianState& state, const ReferenceMeasure& ref,
                                  const ModelSpec& model);

/// Discrete specific volumes per inter-label cell (size N-1).
std::vector<double> specific_volumes(const std::vector<double>& positions,
                                     const ReferenceMeasure& ref);

/// Inter-label cell masses m_c = (w_c + w_{c+1})/2 (size N-1).
std::vector<double> cell_masses(const ReferenceMeasure& ref);

} // namespace epflow
