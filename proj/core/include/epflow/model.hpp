#pragma once

#include <string>
#include <vector>

#include "epflow/measure.hpp"

namespace epflow {

/// The two model families. WithPressure ("A") is the bi-Lipschitz gas with
/// power-law pair kernels and an isentropic pressure energy; Pressureless
/// ("B") is the normalized pressureless system with kernels -|y|/4 and y^2/4
/// on a unit-mass reference measure, where the monotone cone is enforced by
/// sticky merging.
enum class Formulation { WithPressure, Pressureless };

struct ModelSpec {
    Formulation formulation = Formulation::Pressureless;

    // Pair-kernel exponents: repulsive p in (-1,1]\{0}, attractive q >= 1.
    double p = 1.0;
    double q = 2.0;

    // Kernel coefficients. WithPressure: E_r = kappa_r * sum (-|Δ|^p/p - ref),
    // E_a = kappa_a * sum (+|Δ|^q/q - ref). Pressureless: kappa_r, kappa_a
    // multiply |Δ| and Δ^2 directly (both fixed to 1/4).
    double kappa_r = 0.25;
    double kappa_a = 0.25;

    // Pressure exponent (> 1), WithPressure only.
    double gamma = 2.0;

    // Reference placement η_* per label; empty means identity (the labels
    // themselves). WithPressure only.
    std::vector<double> eta_star;

    static ModelSpec pressureless();
    static ModelSpec with_pressure(double p, double q, double gamma,
                                   double kappa_r = 1.0, double kappa_a = 1.0);

    bool has_pressure() const { return formulation == Formulation::WithPressure; }

    /// Throws std::invalid_argument naming the violated bound.
    void validate(const ReferenceMeasure& ref) const;

    /// η_* resolved against the labels (identity when unset).
    std::vector<double> reference_placement(const ReferenceMeasure& ref) const;
};

struct EnergyReport {
    double kinetic = 0.0;    // K
    double repulsive = 0.0;  // E_r
    double attractive = 0.0; // E_a
    double pressure = 0.0;   // E_w
    double total = 0.0;      // H = K + E_r + E_a + E_w, exactly as summed
};

inline double sgn(double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); }

std::string to_string(Formulation f);

} // namespace epflow
