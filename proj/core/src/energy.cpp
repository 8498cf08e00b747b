#include "epflow/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace epflow {

ModelSpec ModelSpec::pressureless() {
    ModelSpec m;
    m.formulation = Formulation::Pressureless;
    m.p = 1.0;
    m.q = 2.0;
    m.kappa_r = 0.25;
    m.kappa_a = 0.25;
    return m;
}

ModelSpec ModelSpec::with_pressure(double p, double q, double gamma, double kappa_r,
                                   double kappa_a) {
    ModelSpec m;
    m.formulation = Formulation::WithPressure;
    m.p = p;
    m.q = q;
    m.gamma = gamma;
    m.kappa_r = kappa_r;
    m.kappa_a = kappa_a;
    return m;
}

std::string to_string(Formulation f) {
    return f == Formulation::WithPressure ? "A" : "B";
}

void ModelSpec::validate(const ReferenceMeasure& ref) const {
    if (!(p > -1.0 && p <= 1.0) || p == 0.0)
        throw std::invalid_argument("model.p: must be in (-1, 1] and nonzero");
    if (!(q >= 1.0)) throw std::invalid_argument("model.q: must be >= 1");
    if (kappa_r < 0.0) throw std::invalid_argument("model.kappa_r: must be >= 0");
    if (kappa_a < 0.0) throw std::invalid_argument("model.kappa_a: must be >= 0");
    if (formulation == Formulation::WithPressure) {
        if (!(gamma > 1.0)) throw std::invalid_argument("model.gamma: must be > 1");
        if (!eta_star.empty()) {
            if (eta_star.size() != ref.size())
                throw std::invalid_argument("model.eta_star: length must match the reference");
            for (std::size_t i = 0; i + 1 < eta_star.size(); ++i)
                if (!(eta_star[i + 1] > eta_star[i]))
                    throw std::invalid_argument("model.eta_star: must be strictly increasing");
        }
    } else {
        if (p != 1.0 || q != 2.0)
            throw std::invalid_argument("pressureless model: requires p = 1 and q = 2");
        if (kappa_r != 0.25 || kappa_a != 0.25)
            throw std::invalid_argument("pressureless model: requires kappa_r = kappa_a = 1/4");
        if (std::abs(ref.total_mass - 1.0) > 1e-12)
            throw std::invalid_argument("pressureless model: reference total mass must be 1");
        if (!eta_star.empty())
            throw std::invalid_argument("pressureless model: eta_star is not used");
    }
    for (std::size_t i = 0; i + 1 < ref.size(); ++i)
        if (!(ref.labels[i + 1] > ref.labels[i]))
            throw std::invalid_argument("reference labels must be strictly increasing");
    for (double w : ref.masses)
        if (!(w > 0.0)) throw std::invalid_argument("reference masses must be positive");
}

std::vector<double> ModelSpec::reference_placement(const ReferenceMeasure& ref) const {
    if (!eta_star.empty()) return eta_star;
    return ref.labels;
}

std::vector<double> cell_masses(const ReferenceMeasure& ref) {
    std::vector<double> m(ref.size() > 0 ? ref.size() - 1 : 0);
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = 0.5 * (ref.masses[c] + ref.masses[c + 1]);
    return m;
}

std::vector<double> specific_volumes(const std::vector<double>& positions,
                                     const ReferenceMeasure& ref) {
    std::vector<double> tau(positions.size() > 0 ? positions.size() - 1 : 0);
    for (std::size_t c = 0; c < tau.size(); ++c) {
        const double m = 0.5 * (ref.masses[c] + ref.masses[c + 1]);
        tau[c] = (positions[c + 1] - positions[c]) / m;
    }
    return tau;
}

namespace {

void check_lengths(const LagrangianState& state, const ReferenceMeasure& ref) {
    if (state.positions.size() != ref.size() || state.velocities.size() != ref.size())
        throw std::invalid_argument("state/reference length mismatch");
    if (ref.size() == 0) throw std::invalid_argument("empty state");
}

void check_strictly_increasing(const std::vector<double>& eta) {
    for (std::size_t c = 0; c + 1 < eta.size(); ++c)
        if (!(eta[c + 1] > eta[c]))
            throw std::domain_error("nonpositive gap in cell " + std::to_string(c) +
                                    ": state leaves the bi-Lipschitz class");
}

// Pair kernels of the with-pressure family, evaluated at the separation r >= 0.
inline double kernel_r(double r, double p) { return -std::pow(r, p) / p; }
inline double kernel_a(double r, double q) { return std::pow(r, q) / q; }

// psi(s) = s^(1-gamma)
inline double psi(double s, double gamma) { return std::pow(s, 1.0 - gamma); }
inline double psi_prime(double s, double gamma) { return (1.0 - gamma) * std::pow(s, -gamma); }

// Off-diagonal double sums are evaluated over i > j and doubled; the kernels
// are even, so both orientations of a pair carry the identical term.
double pair_energy_with_pressure(const std::vector<double>& eta, const std::vector<double>& star,
                                 const ReferenceMeasure& ref, const ModelSpec& model,
                                 double& repulsive, double& attractive) {
    const std::size_t n = eta.size();
    repulsive = 0.0;
    attractive = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double ww = ref.masses[i] * ref.masses[j];
            const double d = std::abs(eta[i] - eta[j]);
            const double ds = std::abs(star[i] - star[j]);
            repulsive += 2.0 * ww * (kernel_r(d, model.p) - kernel_r(ds, model.p));
            attractive += 2.0 * ww * (kernel_a(d, model.q) - kernel_a(ds, model.q));
        }
    }
    repulsive *= model.kappa_r;
    attractive *= model.kappa_a;
    return repulsive + attractive;
}

double pair_energy_pressureless(const std::vector<double>& eta, const ReferenceMeasure& ref,
                                const ModelSpec& model, double& repulsive, double& attractive) {
    const std::size_t n = eta.size();
    repulsive = 0.0;
    attractive = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double ww = ref.masses[i] * ref.masses[j];
            const double d = eta[i] - eta[j];
            repulsive += 2.0 * ww * -std::abs(d);
            attractive += 2.0 * ww * d * d;
        }
    }
    repulsive *= model.kappa_r;
    attractive *= model.kappa_a;
    return repulsive + attractive;
}

} // namespace

EnergyReport eval_energy(const LagrangianState& state, const ReferenceMeasure& ref,
                         const ModelSpec& model) {
    check_lengths(state, ref);
    EnergyReport report;
    for (std::size_t i = 0; i < ref.size(); ++i)
        report.kinetic += 0.5 * ref.masses[i] * state.velocities[i] * state.velocities[i];

    if (model.formulation == Formulation::Pressureless) {
        pair_energy_pressureless(state.positions, ref, model, report.repulsive, report.attractive);
    } else {
        check_strictly_increasing(state.positions);
        const auto star = model.reference_placement(ref);
        pair_energy_with_pressure(state.positions, star, ref, model, report.repulsive,
                                  report.attractive);
        const auto tau = specific_volumes(state.positions, ref);
        const auto tau_star = specific_volumes(star, ref);
        const auto m = cell_masses(ref);
        for (std::size_t c = 0; c < tau.size(); ++c)
            report.pressure += (psi(tau[c], model.gamma) - psi(tau_star[c], model.gamma)) * m[c];
    }
    report.total = report.kinetic + report.repulsive + report.attractive + report.pressure;
    return report;
}

double potential_energy(const LagrangianState& state, const ReferenceMeasure& ref,
                        const ModelSpec& model) {
    const EnergyReport report = eval_energy(state, ref, model);
    return report.repulsive + report.attractive + report.pressure;
}

std::vector<double> force(const LagrangianState& state, const ReferenceMeasure& ref,
                          const ModelSpec& model) {
    check_lengths(state, ref);
    const std::size_t n = ref.size();
    const auto& eta = state.positions;
    std::vector<double> f(n, 0.0);

    if (model.formulation == Formulation::Pressureless) {
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double d = eta[i] - eta[j];
                const double pair =
                    2.0 * ref.masses[i] * ref.masses[j] * (sgn(d) / 4.0 - d / 2.0);
                f[i] += pair;
                f[j] -= pair;
            }
        }
        return f;
    }

    check_strictly_increasing(eta);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double d = eta[i] - eta[j];
            const double r = std::abs(d);
            if (r == 0.0 && model.p < 1.0)
                throw std::domain_error("coincident particles: singular kernel derivative");
            const double pair = 2.0 * ref.masses[i] * ref.masses[j] * sgn(d) *
                                (model.kappa_r * std::pow(r, model.p - 1.0) -
                                 model.kappa_a * std::pow(r, model.q - 1.0));
            f[i] += pair;
            f[j] -= pair;
        }
    }
    // Pressure: f_k = psi'(tau_k) - psi'(tau_{k-1}) with missing boundary
    // cells treated as absent (free boundary).
    const auto tau = specific_volumes(eta, ref);
    for (std::size_t c = 0; c < tau.size(); ++c) {
        const double dp = psi_prime(tau[c], model.gamma);
        f[c] += dp;
        f[c + 1] -= dp;
    }
    return f;
}

std::vector<double> fd_oracle_force(const LagrangianState& state, const ReferenceMeasure& ref,
                                    const ModelSpec& model, double h) {
    check_lengths(state, ref);
    if (!(h > 0.0)) throw std::invalid_argument("fd_oracle_force: step must be positive");
    if (model.formulation == Formulation::WithPressure) {
        for (std::size_t c = 0; c + 1 < state.positions.size(); ++c)
            if (state.positions[c + 1] - state.positions[c] <= 2.0 * h)
                throw std::domain_error(
                    "fd_oracle_force: perturbation breaks monotonicity; reduce the step");
    }
    LagrangianState probe = state;
    std::vector<double> f(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double original = probe.positions[i];
        probe.positions[i] = original + h;
        const double above = potential_energy(probe, ref, model);
        probe.positions[i] = original - h;
        const double below = potential_energy(probe, ref, model);
        probe.positions[i] = original;
        f[i] = -(above - below) / (2.0 * h);
    }
    return f;
}

AppendixBounds appendix_constants(const LagrangianState& state, const ReferenceMeasure& ref,
                                  const ModelSpec& model) {
    check_lengths(state, ref);
    if (model.formulation != Formulation::WithPressure)
        throw std::invalid_argument("appendix_constants: defined for the with-pressure family");
    check_strictly_increasing(state.positions);

    const auto& eta = state.positions;
    const auto star = model.reference_placement(ref);
    const std::size_t n = ref.size();

    // Discrete Lipschitz constants from adjacent difference quotients.
    double lip_eta = 0.0, lip_star = 0.0, min_h_eta = HUGE_VAL, min_h_star = HUGE_VAL;
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double dx = ref.labels[c + 1] - ref.labels[c];
        const double he = (eta[c + 1] - eta[c]) / dx;
        const double hs = (star[c + 1] - star[c]) / dx;
        lip_eta = std::max(lip_eta, he);
        lip_star = std::max(lip_star, hs);
        min_h_eta = std::min(min_h_eta, he);
        min_h_star = std::min(min_h_star, hs);
    }
    const double lip_max = std::max(lip_eta, lip_star);
    const double lip_inv_max = std::max(1.0 / min_h_eta, 1.0 / min_h_star);

    AppendixBounds out;
    double sum_kr = 0.0, sum_ka = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double ww = 2.0 * ref.masses[i] * ref.masses[j];
            const double dx = std::abs(ref.labels[i] - ref.labels[j]);
            const double d = std::abs(eta[i] - eta[j]);
            const double ds = std::abs(star[i] - star[j]);
            const double diff = std::abs((eta[i] - eta[j]) - (star[i] - star[j]));
            out.lhs1 += ww * std::pow(dx, model.p - 1.0) * diff;
            out.lhs2 += ww * std::pow(dx, model.q - 1.0) * diff;
            sum_kr += ww * std::abs((std::pow(d, model.p) - std::pow(ds, model.p)) / model.p);
            sum_ka += ww * std::abs((std::pow(d, model.q) - std::pow(ds, model.q)) / model.q);
        }
    }
    const auto tau = specific_volumes(eta, ref);
    const auto tau_star = specific_volumes(star, ref);
    const auto m = cell_masses(ref);
    double sum_psi = 0.0, tau_max = 0.0;
    for (std::size_t c = 0; c < tau.size(); ++c) {
        out.lhs3 += std::abs(tau[c] - tau_star[c]) * m[c];
        sum_psi += std::abs(psi(tau[c], model.gamma) - psi(tau_star[c], model.gamma)) * m[c];
        tau_max = std::max(tau_max, std::max(tau[c], tau_star[c]));
    }

    const auto guard = [](double rhs) { return rhs + 1e-12 * (1.0 + rhs); };
    out.e1 = guard(std::pow(lip_max, 1.0 - model.p) * sum_kr);
    out.e2 = guard(std::pow(lip_inv_max, model.q - 1.0) * sum_ka);
    out.e3 = guard(std::pow(tau_max, model.gamma) / (model.gamma - 1.0) * sum_psi);
    out.ok1 = out.lhs1 < out.e1;
    out.ok2 = out.lhs2 < out.e2;
    out.ok3 = out.lhs3 < out.e3;
    return out;
}

} // namespace epflow
