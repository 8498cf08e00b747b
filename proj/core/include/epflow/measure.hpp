#pragma once

#include <cstddef>
#include <vector>

namespace epflow {

/// Discretized reference mass measure: strictly increasing labels x_i with
/// positive masses w_i. Labels live in the referential (Lagrangian)
/// coordinate; masses sum to total_mass.
struct ReferenceMeasure {
    std::vector<double> labels;
    std::vector<double> masses;
    double total_mass = 0.0;

    std::size_t size() const { return labels.size(); }
};

/// Uniform density `mass/(upper-lower)` on [lower, upper].
struct UniformDensity {
    double lower = 0.0;
    double upper = 1.0;
    double mass = 1.0;
};

/// Piecewise-linear density given by samples on an increasing grid.
/// Total mass is the trapezoid integral of the samples.
struct SampledDensity {
    std::vector<double> grid;
    std::vector<double> values;
};

struct LagrangianState {
    std::vector<double> positions;
    std::vector<double> velocities;
    double time = 0.0;

    std::size_t size() const { return positions.size(); }
};

/// Histogram push-forward of a particle state to the spatial coordinate.
struct EulerianField {
    std::vector<double> bin_edges; // size K+1
    std::vector<double> density;   // mass per length, size K
    std::vector<double> velocity;  // mass-weighted mean per bin, size K
};

/// Equal-mass (mass-quantile) partition: n particles of mass M/n placed at
/// the quantile midpoints CDF^{-1}((i+1/2) M/n). Throws std::invalid_argument
/// for n < 2 or nonpositive total mass.
ReferenceMeasure build_reference(const UniformDensity& density, std::size_t n);
ReferenceMeasure build_reference(const SampledDensity& density, std::size_t n);

/// (Σ w_i η_i) / (Σ w_i). Throws on length mismatch.
double center_of_mass(const LagrangianState& state, const ReferenceMeasure& ref);

/// Bin masses into density, mass-weighted mean velocities per bin (0 where
/// empty). The last bin is closed so the maximum position is included.
/// Throws if any particle falls outside the bin range.
EulerianField push_forward(const LagrangianState& state, const ReferenceMeasure& ref,
                           const std::vector<double>& bin_edges);

} // namespace epflow
