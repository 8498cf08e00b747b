#include "epflow/relative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epflow/energy.hpp"
#include "epflow/measure.hpp"

namespace epflow {

namespace {

void check_pair(const LagrangianState& state, const LagrangianState& ref_state,
                const ReferenceMeasure& ref) {
    if (state.positions.size() != ref.size() || ref_state.positions.size() != ref.size())
        throw std::invalid_argument("relative: states do not match the reference measure");
}

void check_strict(const std::vector<double>& eta, const char* who) {
    for (std::size_t c = 0; c + 1 < eta.size(); ++c)
        if (!(eta[c + 1] > eta[c]))
            throw std::domain_error(std::string(who) + ": state must be strictly increasing");
}

// Kernel value / first / second derivative at a signed separation, with the
// model coefficients baked in.
struct Kernels {
    double p, q, kr, ka;
    bool power_law; // with-pressure family

    double r0(double d) const {
        return power_law ? -kr * std::pow(std::abs(d), p) / p : -kr * std::abs(d);
    }
    double r1(double d) const {
        return power_law ? -kr * sgn(d) * std::pow(std::abs(d), p - 1.0) : -kr * sgn(d);
    }
    double r2(double d) const {
        return power_law ? -kr * (p - 1.0) * std::pow(std::abs(d), p - 2.0) : 0.0;
    }
    double a0(double d) const {
        return power_law ? ka * std::pow(std::abs(d), q) / q : ka * d * d;
    }
    double a1(double d) const {
        return power_law ? ka * sgn(d) * std::pow(std::abs(d), q - 1.0) : 2.0 * ka * d;
    }
    double a2(double d) const {
        return power_law ? ka * (q - 1.0) * std::pow(std::abs(d), q - 2.0) : 2.0 * ka;
    }
};

Kernels kernels_of(const ModelSpec& model) {
    return Kernels{model.p, model.q, model.kappa_r, model.kappa_a,
                   model.formulation == Formulation::WithPressure};
}

inline double psi(double s, double g) { return std::pow(s, 1.0 - g); }
inline double psi1(double s, double g) { return (1.0 - g) * std::pow(s, -g); }
inline double psi2(double s, double g) { return g * (g - 1.0) * std::pow(s, -g - 1.0); }

double lip_of(const std::vector<double>& values, const std::vector<double>& labels) {
    double lip = 0.0;
    for (std::size_t c = 0; c + 1 < values.size(); ++c)
        lip = std::max(lip, std::abs(values[c + 1] - values[c]) / (labels[c + 1] - labels[c]));
    return lip;
}

double lip_inverse_of(const std::vector<double>& eta, const std::vector<double>& labels) {
    double lip = 0.0;
    for (std::size_t c = 0; c + 1 < eta.size(); ++c) {
        const double gap = eta[c + 1] - eta[c];
        if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
        lip = std::max(lip, (labels[c + 1] - labels[c]) / gap);
    }
    return lip;
}

} // namespace

RelativeReport relative_energies(const LagrangianState& state, const LagrangianState& ref_state,
                                 const ReferenceMeasure& ref, const ModelSpec& model) {
    check_pair(state, ref_state, ref);
    const std::size_t n = ref.size();
    const auto& eta = state.positions;
    const auto& etab = ref_state.positions;
    const Kernels k = kernels_of(model);
    if (k.power_law) {
        check_strict(eta, "relative_energies");
        check_strict(etab, "relative_energies (reference state)");
    }

    RelativeReport rep;
    rep.time = state.time;
    for (std::size_t i = 0; i < n; ++i) {
        const double dv = state.velocities[i] - ref_state.velocities[i];
        rep.kinetic_rel += 0.5 * ref.masses[i] * dv * dv;
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double ww = 2.0 * ref.masses[i] * ref.masses[j];
            const double d = eta[i] - eta[j];
            const double db = etab[i] - etab[j];
            rep.repulsive_rel += ww * (k.r0(d) - k.r0(db) - k.r1(db) * (d - db));
            rep.attractive_rel += ww * (k.a0(d) - k.a0(db) - k.a1(db) * (d - db));
        }
    }
    if (model.has_pressure()) {
        const auto tau = specific_volumes(eta, ref);
        const auto taub = specific_volumes(etab, ref);
        const auto m = cell_masses(ref);
        for (std::size_t c = 0; c < tau.size(); ++c)
            rep.pressure_rel += (psi(tau[c], model.gamma) - psi(taub[c], model.gamma) -
                                 psi1(taub[c], model.gamma) * (tau[c] - taub[c])) *
                                m[c];
    } else {
        rep.shift = center_of_mass(ref_state, ref) - center_of_mass(state, ref);
    }
    rep.total_rel = rep.kinetic_rel + rep.pressure_rel + rep.repulsive_rel + rep.attractive_rel;
    return rep;
}

double collision_correction(const LagrangianState& state, const LagrangianState& ref_state,
                            const ReferenceMeasure& ref) {
    check_pair(state, ref_state, ref);
    double sum = 0.0;
    // Ordered pairs with x_i > x_j sharing one position; labels increase
    // with the index, and cluster members carry bitwise-equal positions.
    for (std::size_t i = 1; i < ref.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (state.positions[i] == state.positions[j])
                sum += ref.masses[i] * ref.masses[j] *
                       (ref_state.velocities[i] - ref_state.velocities[j]);
    return 0.5 * sum;
}

double relative_work_rate(const LagrangianState& state, const LagrangianState& ref_state,
                          const ReferenceMeasure& ref, const ModelSpec& model) {
    check_pair(state, ref_state, ref);
    const std::size_t n = ref.size();
    const auto& eta = state.positions;
    const auto& etab = ref_state.positions;
    const auto& vb = ref_state.velocities;
    const Kernels k = kernels_of(model);
    check_strict(etab, "relative_work_rate (reference state)");
    if (k.power_law) check_strict(eta, "relative_work_rate");

    double w = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double d = eta[i] - eta[j];
            const double db = etab[i] - etab[j];
            const double rel = (d - db);
            const double g = -(k.r1(d) + k.a1(d)) + (k.r1(db) + k.a1(db)) +
                             (k.r2(db) + k.a2(db)) * rel;
            w += 2.0 * ref.masses[i] * ref.masses[j] * (vb[i] - vb[j]) * g;
        }
    }
    if (model.has_pressure()) {
        const auto tau = specific_volumes(eta, ref);
        const auto taub = specific_volumes(etab, ref);
        for (std::size_t c = 0; c < tau.size(); ++c) {
            const double rem = psi1(tau[c], model.gamma) - psi1(taub[c], model.gamma) -
                               psi2(taub[c], model.gamma) * (tau[c] - taub[c]);
            w -= rem * (vb[c + 1] - vb[c]);
        }
    }
    return w;
}

RelativeReport relative_report(const LagrangianState& state, const LagrangianState& ref_state,
                               const ReferenceMeasure& ref, const ModelSpec& model) {
    RelativeReport rep = relative_energies(state, ref_state, ref, model);
    rep.work_rate = relative_work_rate(state, ref_state, ref, model);
    rep.correction = collision_correction(state, ref_state, ref);
    return rep;
}

MonitorSeries relative_hamiltonian_monitor(const Trajectory& weak, const Trajectory& strong,
                                           const ReferenceMeasure& ref, const ModelSpec& model,
                                           std::optional<double> tolerance_override) {
    const auto& ws = weak.snapshots;
    const auto& ss = strong.snapshots;
    if (ws.size() != ss.size()) throw std::invalid_argument("monitor: time-grid mismatch");
    MonitorSeries series;
    if (ws.empty()) return series;

    for (std::size_t kk = 0; kk < ws.size(); ++kk) {
        if (std::abs(ws[kk].time - ss[kk].time) > 1e-9 * (1.0 + std::abs(ws[kk].time)))
            throw std::invalid_argument("monitor: time-grid mismatch");
        MonitorPoint point;
        point.report = relative_report(ws[kk].state, ss[kk].state, ref, model);
        point.report.time = ws[kk].time;
        series.points.push_back(point);
    }

    // Running trapezoid of the bound integrand (-work_rate) and the
    // resulting inequality residual.
    const double h0 = series.points.front().report.total_rel;
    double integral = 0.0;
    double max_rate = 0.0;
    series.points.front().residual = 0.0;
    for (std::size_t kk = 1; kk < series.points.size(); ++kk) {
        const auto& prev = series.points[kk - 1].report;
        const auto& cur = series.points[kk].report;
        integral += 0.5 * (cur.time - prev.time) * (-prev.work_rate - cur.work_rate);
        series.points[kk].residual = cur.total_rel - h0 - integral;
        max_rate = std::max(max_rate, std::abs(cur.work_rate));
    }

    double dt_out = 0.0;
    if (series.points.size() > 1)
        dt_out = series.points[1].report.time - series.points[0].report.time;
    const double floor = 1e-12 * (1.0 + std::abs(h0));
    series.tolerance = tolerance_override.value_or(10.0 * (dt_out * dt_out + dt_out) * max_rate +
                                                   floor);
    series.max_residual = 0.0;
    for (const auto& point : series.points) series.max_residual = std::max(series.max_residual, point.residual);
    series.inequality_ok = series.max_residual <= series.tolerance;

    // Gronwall form on the strictly monotone prefix: H_rel(t) <= H_rel(0)
    // + C0 * integral of the potential relative energy, C0 = max{C1,C2,C3}
    // with test map v̄.
    std::size_t prefix = 0;
    while (prefix < ws.size() && count_clusters(ws[prefix].state) == ref.size()) ++prefix;
    double c0 = 0.0;
    bool gronwall_ok = true;
    double erel_integral = 0.0;
    for (std::size_t kk = 0; kk < prefix; ++kk) {
        const PpEstimates pp =
            pp_constants(ws[kk].state, ss[kk].state, ref, model, ss[kk].state.velocities);
        c0 = std::max(c0, std::max(pp.c1, std::max(pp.c2, pp.c3)));
    }
    for (std::size_t kk = 0; kk < prefix; ++kk) {
        const auto& cur = series.points[kk].report;
        if (kk > 0) {
            const auto& prev = series.points[kk - 1].report;
            const double e_prev = prev.pressure_rel + prev.repulsive_rel + prev.attractive_rel;
            const double e_cur = cur.pressure_rel + cur.repulsive_rel + cur.attractive_rel;
            erel_integral += 0.5 * (cur.time - prev.time) * (e_prev + e_cur);
        }
        if (cur.total_rel > h0 + c0 * erel_integral + series.tolerance) gronwall_ok = false;
    }
    series.gronwall_c0 = c0;
    series.gronwall_ok = gronwall_ok;
    return series;
}

PpEstimates pp_constants(const LagrangianState& state, const LagrangianState& ref_state,
                         const ReferenceMeasure& ref, const ModelSpec& model,
                         const std::vector<double>& phi) {
    check_pair(state, ref_state, ref);
    if (phi.size() != ref.size())
        throw std::invalid_argument("pp_constants: test map length mismatch");
    check_strict(ref_state.positions, "pp_constants (reference state)");

    const Kernels k = kernels_of(model);
    const auto& eta = state.positions;
    const auto& etab = ref_state.positions;
    const double lip_phi = lip_of(phi, ref.labels);
    const double lip_inv = lip_inverse_of(eta, ref.labels);
    const double lip_inv_bar = lip_inverse_of(etab, ref.labels);
    const double lip_sum = lip_phi * (lip_inv + lip_inv_bar);

    PpEstimates out;
    out.c1 = model.has_pressure() ? (model.gamma + 1.0) * lip_sum : 0.0;
    out.c2 = (2.0 - model.p) * lip_sum;
    out.c3 = std::abs(model.q - 2.0) * lip_sum;

    const double tiny = 1e-14;
    for (std::size_t i = 1; i < ref.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double d = eta[i] - eta[j];
            const double db = etab[i] - etab[j];
            const double dphi = phi[i] - phi[j];
            const double rel = d - db;
            const double lhs_r = std::abs(dphi * (k.r1(d) - k.r1(db) - k.r2(db) * rel));
            const double rhs_r = k.r0(d) - k.r0(db) - k.r1(db) * rel;
            const double lhs_a = std::abs(dphi * (k.a1(d) - k.a1(db) - k.a2(db) * rel));
            const double rhs_a = k.a0(d) - k.a0(db) - k.a1(db) * rel;
            if (rhs_r > 0.0)
                out.ratio2 = std::max(out.ratio2, lhs_r / rhs_r);
            else if (lhs_r > tiny)
                out.violation = true;
            if (rhs_a > 0.0)
                out.ratio3 = std::max(out.ratio3, lhs_a / rhs_a);
            else if (lhs_a > tiny)
                out.violation = true;
        }
    }
    if (model.has_pressure()) {
        const auto tau = specific_volumes(eta, ref);
        const auto taub = specific_volumes(etab, ref);
        const auto m = cell_masses(ref);
        for (std::size_t c = 0; c < tau.size(); ++c) {
            const double g = model.gamma;
            const double lhs = std::abs((phi[c + 1] - phi[c]) / m[c] *
                                        (psi1(tau[c], g) - psi1(taub[c], g) -
                                         psi2(taub[c], g) * (tau[c] - taub[c])));
            const double rhs = psi(tau[c], g) - psi(taub[c], g) - psi1(taub[c], g) * (tau[c] - taub[c]);
            if (rhs > 0.0)
                out.ratio1 = std::max(out.ratio1, lhs / rhs);
            else if (lhs > tiny)
                out.violation = true;
        }
    }
    return out;
}

std::vector<BoundCertificate> lower_bound_certificates(const LagrangianState& state,
                                                       const LagrangianState& ref_state,
                                                       const ReferenceMeasure& ref,
                                                       const ModelSpec& model, double beta,
                                                       std::optional<double> beta_prime_opt) {
    check_pair(state, ref_state, ref);
    check_strict(state.positions, "lower_bound_certificates");
    check_strict(ref_state.positions, "lower_bound_certificates (reference state)");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("beta: must be in (0, 1)");
    double beta_prime = beta_prime_opt.value_or(0.5 * (1.0 - model.p));
    if (model.p < 0.0) {
        beta_prime = std::clamp(beta_prime, -model.p + 1e-9, 1.0 - 1e-9);
        if (beta_prime_opt && !(*beta_prime_opt > -model.p && *beta_prime_opt < 1.0))
            throw std::invalid_argument("beta_prime: must be in (-p, 1)");
    }

    const RelativeReport rel = relative_energies(state, ref_state, ref, model);
    const auto& eta = state.positions;
    const auto& etab = ref_state.positions;
    const std::size_t n = ref.size();
    const double lip_bar = lip_of(etab, ref.labels);
    const double threshold = 3.0 * lip_bar;

    // Effective coefficients in the |y|^p/p, |y|^q/q convention. The
    // pressureless kernels -kr|y| and ka*y^2 correspond to kr*(-|y|^1/1)
    // and 2*ka*(|y|^2/2).
    const bool power_law = model.formulation == Formulation::WithPressure;
    const double kr_eff = model.kappa_r;
    const double ka_eff = power_law ? model.kappa_a : 2.0 * model.kappa_a;
    const double zero_tol = 1e-12;

    std::vector<BoundCertificate> certs;
    const auto push = [&](int assertion, double constant, double lhs, double rhs, double bp) {
        BoundCertificate cert;
        cert.assertion = assertion;
        cert.constant = constant;
        cert.lhs = lhs;
        cert.rhs = rhs;
        cert.beta = beta;
        cert.beta_prime = bp;
        cert.satisfied = lhs >= rhs - 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
        certs.push_back(cert);
    };

    // Pair scans shared by the kernel assertions.
    struct PairSums {
        double low_quad = 0.0;  // sum over h <= 3 Lip: ww [eta-etab]^2 |dx|^(e-2)
        double high_pow = 0.0;  // sum over h > 3 Lip: ww |[eta-etab]|^e
        double full_pow = 0.0;  // all pairs: ww |[eta-etab]|^e
        double high_holder = 0.0;   // ww |[eta-etab]|^(beta'+p) |dx|^(-beta')
        double high_linear = 0.0;   // ww |[eta-etab]| |dx|^(p-1)
    };
    const auto scan = [&](double exponent, bool holder) {
        PairSums s;
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double ww = 2.0 * ref.masses[i] * ref.masses[j];
                const double dx = ref.labels[i] - ref.labels[j];
                const double diff = std::abs((eta[i] - eta[j]) - (etab[i] - etab[j]));
                const double h = (eta[i] - eta[j]) / dx;
                if (diff > 0.0) s.full_pow += ww * std::pow(diff, exponent);
                if (h <= threshold) {
                    s.low_quad += ww * diff * diff * std::pow(dx, exponent - 2.0);
                } else {
                    s.high_pow += ww * std::pow(diff, exponent);
                    if (holder) {
                        s.high_holder +=
                            ww * std::pow(diff, beta_prime + model.p) * std::pow(dx, -beta_prime);
                        s.high_linear += ww * diff * std::pow(dx, model.p - 1.0);
                    }
                }
            }
        }
        return s;
    };

    // Attractive kernel.
    if (model.q == 1.0) {
        push(0, 0.0, rel.attractive_rel, 0.0, 0.0);
        certs.back().satisfied = std::abs(rel.attractive_rel) <= zero_tol;
    } else if (model.q < 2.0) {
        const PairSums s = scan(model.q, false);
        const double c1 = 0.5 * (model.q - 1.0) *
                          std::min(std::pow(threshold, model.q - 2.0), std::pow(2.0, model.q - 2.0));
        push(1, c1, rel.attractive_rel, ka_eff * c1 * (s.low_quad + s.high_pow), 0.0);
    } else {
        const PairSums s = scan(model.q, false);
        const double c2 = 1.0 / model.q;
        push(2, c2, rel.attractive_rel, ka_eff * c2 * s.full_pow, 0.0);
    }

    // Repulsive kernel.
    if (model.p == 1.0) {
        push(0, 0.0, rel.repulsive_rel, 0.0, 0.0);
        certs.back().satisfied = std::abs(rel.repulsive_rel) <= zero_tol;
    } else if (model.p > 0.0) {
        const PairSums s = scan(model.p, false);
        const double c3 = 0.5 * (1.0 - model.p) *
                          std::min(std::pow(threshold, model.p - 2.0), std::pow(2.0, model.p - 2.0));
        push(3, c3, rel.repulsive_rel, kr_eff * c3 * (s.low_quad + s.high_pow), 0.0);
    } else {
        const PairSums s = scan(model.p, true);
        const double b_low = 0.5 * (1.0 - model.p) * std::pow(threshold, model.p - 2.0);
        const double b_high = 0.5 * (1.0 - model.p) * std::pow(2.0, model.p - 2.0);
        const double r_prime = (1.0 - model.p) / (1.0 - model.p - beta_prime);
        double high = 0.0;
        if (s.high_linear > 0.0)
            high = b_high * std::pow(s.high_holder, r_prime) /
                   std::pow(s.high_linear, r_prime - 1.0);
        push(5, b_high, rel.repulsive_rel, kr_eff * (b_low * s.low_quad + high), beta_prime);
    }

    // Pressure.
    if (model.has_pressure()) {
        const auto tau = specific_volumes(eta, ref);
        const auto taub = specific_volumes(etab, ref);
        const auto m = cell_masses(ref);
        const double tau_bar_max = *std::max_element(taub.begin(), taub.end());
        const double tau_threshold = 3.0 * tau_bar_max;
        const double g = model.gamma;
        double s_low = 0.0, s_beta = 0.0, s_lin = 0.0;
        for (std::size_t c = 0; c < tau.size(); ++c) {
            const double dtau = tau[c] - taub[c];
            if (tau[c] <= tau_threshold) {
                s_low += dtau * dtau * m[c];
            } else {
                s_beta += std::pow(std::abs(dtau), beta) * m[c];
                s_lin += dtau * m[c];
            }
        }
        const double b_low = 0.5 * g * (g - 1.0) * std::pow(tau_threshold, -1.0 - g);
        const double b_high = 0.5 * g * (g - 1.0) * std::pow(2.0, -1.0 - g);
        const double r = g / (1.0 - beta);
        double high = 0.0;
        if (s_lin > 0.0) high = b_high * std::pow(s_beta, r) / std::pow(s_lin, r - 1.0);
        push(4, b_low, rel.pressure_rel, b_low * s_low + high, 0.0);
    }
    return certs;
}

} // namespace epflow
