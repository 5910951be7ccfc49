#include "mbloch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mbloch {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

/// Maxwell velocity (dA/dt, dB/dt) of whichever field produced the trajectory.
Eigen::Vector2d maxwell_velocity(const FieldSpec& spec, double t, const VectorXd& state) {
    VectorXd d(state.size());
    switch (spec.kind) {
        case FieldKind::Full: full_rhs(spec.params, spec.pump, t, state, d); break;
        case FieldKind::Reduced: reduced_rhs(spec.params, spec.pump, t, state, d); break;
        case FieldKind::Modified: modified_rhs(spec.params, spec.pump, spec.modified, t, state, d); break;
    }
    return d.head<2>();
}

double relative_excess(double lhs, double rhs, double scale) {
    const double diff = lhs - rhs;
    if (scale <= 0.0) return diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return diff / scale;
}

std::size_t find_sample(const Trajectory& traj, double t, double tol) {
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t - tol);
    if (it == traj.t.end() || std::abs(*it - t) > tol) {
        std::ostringstream os;
        os << "trajectory has no sample at t = " << t;
        throw ConfigError(os.str());
    }
    return static_cast<std::size_t>(it - traj.t.begin());
}

}  // namespace

std::string_view to_string(Relation relation) {
    switch (relation) {
        case Relation::AtMost: return "<=";
        case Relation::AtLeast: return ">=";
        case Relation::Below: return "<";
    }
    return "?";
}

Check make_check(std::string name, double measured, double bound, std::string note, Relation relation) {
    Check c;
    c.name = std::move(name);
    c.measured = measured;
    c.bound = bound;
    c.relation = relation;
    switch (relation) {
        case Relation::AtMost: c.pass = measured <= bound; break;
        case Relation::AtLeast: c.pass = measured >= bound; break;
        case Relation::Below: c.pass = measured < bound; break;
    }
    c.note = std::move(note);
    return c;
}

bool VerificationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void VerificationReport::append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    renormalized = renormalized || other.renormalized;
}

VerificationReport check_charge(const Trajectory& traj, double tol) {
    if (traj.meta.kind != FieldKind::Full) throw ConfigError("check_charge needs a full-system trajectory");
    double worst = 0.0;
    for (const auto& x : traj.states) {
        for (Index k = 2; k + 4 <= x.size(); k += 4) worst = std::max(worst, std::abs(x.segment<4>(k).squaredNorm() - 1.0));
    }
    VerificationReport report;
    report.source = traj.meta;
    report.renormalized = traj.meta.integrator.renormalize;
    report.checks.push_back(make_check("charge_conservation", worst, tol,
                                       report.renormalized ? "renormalized" : std::string{}));
    return report;
}

VerificationReport check_bloch_norm(const Trajectory& traj, double tol) {
    if (traj.meta.kind == FieldKind::Full) throw ConfigError("check_bloch_norm needs a reduced trajectory");
    double worst = 0.0;
    for (const auto& y : traj.states) {
        for (Index k = 2; k + 3 <= y.size(); k += 3) worst = std::max(worst, std::abs(y.segment<3>(k).norm() - 1.0));
    }
    VerificationReport report;
    report.source = traj.meta;
    report.renormalized = traj.meta.integrator.renormalize;
    report.checks.push_back(make_check("bloch_norm_conservation", worst, tol,
                                       report.renormalized ? "renormalized" : std::string{}));
    return report;
}

VerificationReport check_lyapunov(const Trajectory& traj, const FieldSpec& spec, double slack) {
    const double eps = spec.modified.epsilon;
    const auto decay = lyapunov_decay_coeffs(spec.params, spec.modified);
    const double gamma = decay.gamma;
    const double D = decay.D;

    VerificationReport report;
    report.source = traj.meta;
    if (traj.size() == 0) return report;

    const double t0 = traj.t.front();
    const double V0 = lyapunov_V(spec.params, spec.modified, traj.states.front()[0], traj.states.front()[1]);
    double worst_rate = -std::numeric_limits<double>::infinity();
    double worst_envelope = -std::numeric_limits<double>::infinity();
    double worst_differenced = 0.0;
    double prev_V = V0;

    for (std::size_t i = 0; i < traj.size(); ++i) {
        const VectorXd& y = traj.states[i];
        const double V = lyapunov_V(spec.params, spec.modified, y[0], y[1]);
        const Eigen::Vector2d vel = maxwell_velocity(spec, traj.t[i], y);
        const double rate = lyapunov_gradient(spec.params, eps, y[0], y[1]).dot(vel);
        const double rhs = -gamma * V + D;
        worst_rate = std::max(worst_rate, relative_excess(rate, rhs, std::abs(rate) + gamma * V + D));

        const double decay_factor = std::exp(-gamma * (traj.t[i] - t0));
        const double envelope = V0 * decay_factor + (D / gamma) * (1.0 - decay_factor);
        worst_envelope = std::max(worst_envelope, relative_excess(V, envelope, V + envelope));

        if (i > 0) {
            // secondary estimate: one-sided difference against the same inequality at the midpoint
            const double dt = traj.t[i] - traj.t[i - 1];
            const double diff_rate = (V - prev_V) / dt;
            const double mid_rhs = -gamma * 0.5 * (V + prev_V) + D;
            worst_differenced = std::max(worst_differenced, diff_rate - mid_rhs);
        }
        prev_V = V;
    }

    std::ostringstream gamma_note;
    gamma_note << "gamma=" << gamma << " D=" << D;
    report.checks.push_back(make_check("lyapunov_rate", worst_rate, slack, gamma_note.str()));
    std::ostringstream diff_note;
    diff_note << "differenced estimate max excess " << worst_differenced;
    report.checks.push_back(make_check("lyapunov_envelope", worst_envelope, slack, diff_note.str()));
    return report;
}

AprioriConstants apriori_constants(const SystemParams& params, const ModifiedFieldConfig& cfg) {
    const auto decay = lyapunov_decay_coeffs(params, cfg);
    const auto form = lyapunov_form_bounds(params, cfg.epsilon);
    return {form.a2 / form.a1, decay.D / (decay.gamma * form.a1), decay.gamma};
}

double apriori_crossing_time(const AprioriConstants& k, double M0_sq) {
    const double excess = 2.0 * std::sqrt(k.d2) + 1.0;  // (sqrt(d2)+1)^2 - d2
    const double start = k.d1 * M0_sq;
    if (start <= excess) return 0.0;
    return std::log(start / excess) / k.gamma;
}

double entry_time(const Trajectory& traj, double radius) {
    if (traj.size() == 0) return std::numeric_limits<double>::infinity();
    std::size_t i = traj.size();
    while (i > 0 && std::hypot(traj.states[i - 1][0], traj.states[i - 1][1]) <= radius) --i;
    if (i == traj.size()) return std::numeric_limits<double>::infinity();
    return traj.t[i] - traj.t.front();
}

VerificationReport check_apriori(const Trajectory& traj, const SystemParams& params, const ModifiedFieldConfig& cfg,
                                 double entry_margin, double slack) {
    const AprioriConstants k = apriori_constants(params, cfg);
    VerificationReport report;
    report.source = traj.meta;
    if (traj.size() == 0) return report;

    const double t0 = traj.t.front();
    const double M0_sq = traj.states.front().head<2>().squaredNorm();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double M_sq = traj.states[i].head<2>().squaredNorm();
        const double bound = k.d1 * M0_sq * std::exp(-k.gamma * (traj.t[i] - t0)) + k.d2;
        worst = std::max(worst, relative_excess(M_sq, bound, M_sq + bound));
    }
    std::ostringstream note;
    note << "d1=" << k.d1 << " d2=" << k.d2 << " gamma=" << k.gamma;
    report.checks.push_back(make_check("apriori_envelope", worst, slack, note.str()));

    const double radius = std::sqrt(k.d2) + 1.0;
    const double measured = entry_time(traj, radius);
    const double predicted = apriori_crossing_time(k, M0_sq);
    const bool covered = traj.t.back() - t0 >= predicted * (1.0 + entry_margin) || std::isfinite(measured);
    std::ostringstream entry_note;
    entry_note << "entry radius " << radius << ", analytic crossing time " << predicted
               << (covered ? "" : ", trajectory too short");
    // measured / predicted <= 1 + margin; a start inside the ball gives 0 <= anything
    const double ratio = predicted > 0.0 ? measured / predicted : (measured > 0.0 ? measured : 0.0);
    report.checks.push_back(make_check("apriori_entry_time", ratio, 1.0 + entry_margin, entry_note.str()));
    return report;
}

GaugeFactor gauge_factor(const Trajectory& traj, double anchor, double T) {
    if (traj.meta.kind != FieldKind::Full) throw ConfigError("gauge_factor needs a full-system trajectory");
    const double tol = 1e-9 * std::max(1.0, std::abs(anchor) + T);
    const std::size_t i0 = find_sample(traj, anchor, tol);
    const std::size_t i1 = find_sample(traj, anchor + T, tol);
    const FullState a = traj.full_state(i0);
    const FullState b = traj.full_state(i1);

    GaugeFactor out;
    out.anchor = anchor;
    for (std::size_t n = 0; n < a.C.size(); ++n) {
        const Complex overlap = std::conj(a.C[n][0]) * b.C[n][0] + std::conj(a.C[n][1]) * b.C[n][1];
        if (std::abs(overlap) < 1e-6) {
            std::ostringstream os;
            os << "molecule " << n + 1 << ": overlap " << std::abs(overlap) << " too small to define a phase";
            throw NumericalError(os.str());
        }
        const double theta = std::arg(overlap);
        const Complex factor = std::polar(1.0, theta);
        const double dev = std::sqrt(std::norm(b.C[n][0] - factor * a.C[n][0]) + std::norm(b.C[n][1] - factor * a.C[n][1]));
        out.thetas.push_back(wrap_angle(theta));
        out.residual = std::max(out.residual, dev);
    }
    return out;
}

std::vector<GaugeFactor> gauge_factors(const Trajectory& traj, double T, const std::vector<double>& anchors) {
    std::vector<GaugeFactor> out;
    out.reserve(anchors.size());
    for (double a : anchors) out.push_back(gauge_factor(traj, a, T));
    return out;
}

VerificationReport check_periodicity(const Trajectory& traj, double T, double tol) {
    if (traj.size() < 3) throw ConfigError("periodicity check needs a sampled trajectory");
    const double span = traj.t.back() - traj.t.front();
    if (span < 2.0 * T * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "periodicity check needs a span of at least 2T = " << 2.0 * T << " (got " << span << ")";
        throw ConfigError(os.str());
    }
    const double dt = traj.t[1] - traj.t[0];
    const auto shift = static_cast<std::size_t>(std::llround(T / dt));
    if (shift == 0 || std::abs(static_cast<double>(shift) * dt - T) > 1e-8 * T) {
        throw ConfigError("trajectory sampling interval is not commensurate with the period");
    }

    double maxwell = 0.0;
    double bloch = 0.0;
    for (std::size_t i = 0; i + shift < traj.size(); ++i) {
        if (std::abs(traj.t[i + shift] - traj.t[i] - T) > 1e-8 * T) {
            throw ConfigError("trajectory sampling is not uniform");
        }
        const VectorXd& a = traj.states[i];
        const VectorXd& b = traj.states[i + shift];
        maxwell = std::max(maxwell, (b.head<2>() - a.head<2>()).norm());
        if (traj.meta.kind == FieldKind::Full) {
            for (Index k = 2; k + 4 <= a.size(); k += 4) {
                const double wa = a[k + 2] * a[k + 2] + a[k + 3] * a[k + 3] - a[k] * a[k] - a[k + 1] * a[k + 1];
                const double wb = b[k + 2] * b[k + 2] + b[k + 3] * b[k + 3] - b[k] * b[k] - b[k + 1] * b[k + 1];
                bloch = std::max(bloch, std::abs(wb - wa));
            }
        } else {
            bloch = std::max(bloch, (b.tail(b.size() - 2) - a.tail(a.size() - 2)).norm());
        }
    }

    VerificationReport report;
    report.source = traj.meta;
    report.checks.push_back(make_check("maxwell_periodicity", maxwell, tol));
    report.checks.push_back(make_check(traj.meta.kind == FieldKind::Full ? "inversion_periodicity" : "bloch_periodicity",
                                       bloch, tol));
    return report;
}

std::vector<std::vector<double>> population_inversion(const Trajectory& traj) {
    const std::size_t N = traj.meta.molecules;
    std::vector<std::vector<double>> out(N, std::vector<double>(traj.size()));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const ReducedState y = traj.bloch_state(i);
        for (std::size_t n = 0; n < N; ++n) out[n][i] = y.s[n][2];
    }
    return out;
}

std::vector<double> current_trace(const Trajectory& traj, const SystemParams& params) {
    std::vector<double> out(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out[i] = traj.meta.kind == FieldKind::Full ? current(params, traj.full_state(i)) : current(params, traj.reduced_state(i));
    }
    return out;
}

double projection_deviation(const Trajectory& full_traj, const Trajectory& reduced_traj) {
    if (full_traj.meta.kind != FieldKind::Full || reduced_traj.meta.kind == FieldKind::Full) {
        throw ConfigError("projection_deviation needs a full and a reduced trajectory");
    }
    if (full_traj.size() != reduced_traj.size()) throw ConfigError("trajectories have different sample counts");
    double worst = 0.0;
    for (std::size_t i = 0; i < full_traj.size(); ++i) {
        if (std::abs(full_traj.t[i] - reduced_traj.t[i]) > 1e-9 * std::max(1.0, std::abs(full_traj.t[i]))) {
            throw ConfigError("trajectories are sampled at different times");
        }
        const VectorXd projected = hopf_project(full_traj.full_state(i)).to_vector();
        worst = std::max(worst, (projected - reduced_traj.states[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace mbloch
