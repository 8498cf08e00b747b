#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "epflow/measure.hpp"
#include "epflow/model.hpp"

namespace epflow {

using Rng = std::mt19937_64;

struct MonotoneStateOptions {
    double gap_min = 0.02;
    double gap_max = 0.2;
    double velocity_scale = 0.5;
    bool center = true; // shift positions so the center of mass is 0
};

/// Monotone-by-construction random state: positions are cumulative sums of
/// positive increments, velocities uniform in [-scale, scale].
LagrangianState random_monotone_state(Rng& rng, const ReferenceMeasure& ref,
                                      const MonotoneStateOptions& opts = {});

/// Smooth low-frequency velocities (random two-mode Fourier profile over the
/// label range), amplitude `scale`.
std::vector<double> random_smooth_velocities(Rng& rng, const ReferenceMeasure& ref, double scale);

/// Force-free positions of the pressureless family in fixed order:
/// η_i = (mass left of i - mass right of i) / (2 M) + center.
std::vector<double> pressureless_equilibrium(const ReferenceMeasure& ref, double center = 0.0);

} // namespace epflow
