#include "epflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epflow {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

} // namespace

ReferenceMeasure build_reference(const UniformDensity& density, std::size_t n) {
    require(n >= 2, "build_reference: particle count must be >= 2");
    require(density.mass > 0.0, "build_reference: total mass must be positive");
    require(density.upper > density.lower, "build_reference: upper bound must exceed lower bound");

    ReferenceMeasure ref;
    ref.labels.resize(n);
    ref.masses.assign(n, density.mass / static_cast<double>(n));
    const double width = density.upper - density.lower;
    for (std::size_t i = 0; i < n; ++i) {
        const double quantile = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        ref.labels[i] = density.lower + quantile * width;
    }
    ref.total_mass = density.mass;
    return ref;
}

ReferenceMeasure build_reference(const SampledDensity& density, std::size_t n) {
    require(n >= 2, "build_reference: particle count must be >= 2");
    const auto& x = density.grid;
    const auto& rho = density.values;
    require(x.size() == rho.size(), "build_reference: grid/value size mismatch");
    require(x.size() >= 2, "build_reference: need at least two density samples");
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        require(x[k + 1] > x[k], "build_reference: density grid must be strictly increasing");
    for (double r : rho)
        require(r >= 0.0 && std::isfinite(r), "build_reference: density must be nonnegative and finite");

    // Trapezoid CDF; exact for piecewise-linear densities.
    std::vector<double> cdf(x.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        cdf[k + 1] = cdf[k] + 0.5 * (rho[k] + rho[k + 1]) * (x[k + 1] - x[k]);
    const double total = cdf.back();
    require(total > 0.0, "build_reference: total mass must be positive");

    ReferenceMeasure ref;
    ref.labels.resize(n);
    ref.masses.assign(n, total / static_cast<double>(n));
    ref.total_mass = total;

    for (std::size_t i = 0; i < n; ++i) {
        const double target = total * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t k = it == cdf.begin() ? 0 : static_cast<std::size_t>(it - cdf.begin()) - 1;
        k = std::min(k, x.size() - 2);
        const double dm = target - cdf[k];
        const double dx = x[k + 1] - x[k];
        const double slope = (rho[k + 1] - rho[k]) / dx;
        // Solve rho[k] t + slope t^2 / 2 = dm on [0, dx]; the form below is
        // stable as slope -> 0.
        const double disc = rho[k] * rho[k] + 2.0 * slope * dm;
        double t;
        if (std::abs(slope) < 1e-300) {
            require(rho[k] > 0.0, "build_reference: density vanishes on an interior interval");
            t = dm / rho[k];
        } else {
            const double root = std::sqrt(std::max(disc, 0.0));
            t = (rho[k] + root) > 0.0 ? 2.0 * dm / (rho[k] + root) : 0.0;
        }
        ref.labels[i] = x[k] + std::clamp(t, 0.0, dx);
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        require(ref.labels[i + 1] > ref.labels[i],
                "build_reference: quantile labels are not strictly increasing "
                "(density support may be disconnected)");
    return ref;
}

double center_of_mass(const LagrangianState& state, const ReferenceMeasure& ref) {
    if (state.positions.size() != ref.size())
        throw std::invalid_argument("center_of_mass: state/reference length mismatch");
    double weighted = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) weighted += ref.masses[i] * state.positions[i];
    return weighted / ref.total_mass;
}

EulerianField push_forward(const LagrangianState& state, const ReferenceMeasure& ref,
                           const std::vector<double>& bin_edges) {
    if (state.positions.size() != ref.size())
        throw std::invalid_argument("push_forward: state/reference length mismatch");
    if (bin_edges.size() < 2) throw std::invalid_argument("push_forward: need at least one bin");
    for (std::size_t k = 0; k + 1 < bin_edges.size(); ++k)
        if (!(bin_edges[k + 1] > bin_edges[k]))
            throw std::invalid_argument("push_forward: bin edges must be strictly increasing");

    const std::size_t nbins = bin_edges.size() - 1;
    std::vector<double> mass(nbins, 0.0), momentum(nbins, 0.0);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double y = state.positions[i];
        if (y < bin_edges.front() || y > bin_edges.back())
            throw std::domain_error("push_forward: particle " + std::to_string(i) +
                                    " lies outside the bin range");
        auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), y);
        std::size_t k = static_cast<std::size_t>(it - bin_edges.begin());
        k = (k == 0) ? 0 : k - 1;
        if (k >= nbins) k = nbins - 1; // closed last bin
        mass[k] += ref.masses[i];
        momentum[k] += ref.masses[i] * state.velocities[i];
    }

    EulerianField field;
    field.bin_edges = bin_edges;
    field.density.resize(nbins);
    field.velocity.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        const double width = bin_edges[k + 1] - bin_edges[k];
        field.density[k] = mass[k] / width;
        field.velocity[k] = mass[k] > 0.0 ? momentum[k] / mass[k] : 0.0;
    }
    return field;
}

} // namespace epflow
