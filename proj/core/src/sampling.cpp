#include "epflow/sampling.hpp"

#include <cmath>

#include "epflow/measure.hpp"

namespace epflow {

LagrangianState random_monotone_state(Rng& rng, const ReferenceMeasure& ref,
                                      const MonotoneStateOptions& opts) {
    std::uniform_real_distribution<double> gap(opts.gap_min, opts.gap_max);
    std::uniform_real_distribution<double> vel(-opts.velocity_scale, opts.velocity_scale);
    LagrangianState state;
    state.positions.resize(ref.size());
    state.velocities.resize(ref.size());
    double x = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (i > 0) x += gap(rng);
        state.positions[i] = x;
        state.velocities[i] = vel(rng);
    }
    if (opts.center) {
        double com = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) com += ref.masses[i] * state.positions[i];
        com /= ref.total_mass;
        for (double& p : state.positions) p -= com;
    }
    return state;
}

std::vector<double> random_smooth_velocities(Rng& rng, const ReferenceMeasure& ref, double scale) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double a1 = unit(rng), b1 = unit(rng), a2 = unit(rng);
    const double lo = ref.labels.front(), hi = ref.labels.back();
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<double> v(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double s = (ref.labels[i] - lo) / span;
        v[i] = scale * (a1 * std::sin(2.0 * M_PI * s) + b1 * std::cos(2.0 * M_PI * s) +
                        0.5 * a2 * std::sin(4.0 * M_PI * s));
    }
    return v;
}

std::vector<double> pressureless_equilibrium(const ReferenceMeasure& ref, double center) {
    // Force balance in fixed order: sgn terms give (mass left - mass right)/4
    // per particle and the quadratic kernel gives -M(eta_i - com)/2.
    std::vector<double> eta(ref.size());
    double left = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double right = ref.total_mass - left - ref.masses[i];
        eta[i] = center + (left - right) / (2.0 * ref.total_mass);
        left += ref.masses[i];
    }
    return eta;
}

} // namespace epflow
