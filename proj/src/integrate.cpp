#include "mbloch/integrate.hpp"

#include "mbloch/digest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mbloch {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

using RhsFn = std::function<void(double, const VectorXd&, VectorXd&)>;
using ObserverFn = std::function<void(double, const VectorXd&)>;

/// An ODE plus the grouping used by the error norm (max over groups): the first two components
/// are scalars, the remaining ones are grouped in blocks of `group_size`
/// (2 for complex amplitudes, so the norm is invariant under phase rotation).
struct Problem {
    Index dim = 0;
    RhsFn rhs;
    Index group_size = 1;
    std::function<void(VectorXd&)> project;
};

double error_norm(const Problem& pb, const VectorXd& err, const VectorXd& y0, const VectorXd& y1, double atol,
                  double rtol) {
    double worst = 0.0;
    auto add = [&](Index start, Index len) {
        const double e = err.segment(start, len).norm();
        const double scale = atol + rtol * std::max(y0.segment(start, len).norm(), y1.segment(start, len).norm());
        worst = std::max(worst, e / scale);
    };
    add(0, 1);
    add(1, 1);
    for (Index k = 2; k < pb.dim; k += pb.group_size) add(k, std::min(pb.group_size, pb.dim - k));
    return worst;
}

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepCounts {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Sample targets strictly after t0, ending with t1.
std::vector<double> sample_targets(double t0, double t1, double interval) {
    std::vector<double> targets;
    if (interval > 0.0) {
        const double span = t1 - t0;
        const auto count = static_cast<std::size_t>(std::floor(span / interval + 1e-9));
        for (std::size_t k = 1; k <= count; ++k) {
            const double t = t0 + static_cast<double>(k) * interval;
            if (t1 - t > 1e-9 * interval) targets.push_back(t);
        }
    }
    targets.push_back(t1);
    return targets;
}

StepCounts run_rk45(const Problem& pb, const IntegratorConfig& cfg, VectorXd& y, double t0, double t1,
                    const std::vector<double>& targets, bool observe_every_step, const ObserverFn& observe) {
    StepCounts counts;
    const Index n = pb.dim;
    VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

    double t = t0;
    pb.rhs(t, y, k1);

    // Hairer-Wanner starting step
    double h;
    {
        const VectorXd zero = VectorXd::Zero(n);
        const double d0 = error_norm(pb, y, zero, y, cfg.abs_tol, cfg.rel_tol);
        const double d1 = error_norm(pb, k1, zero, y, cfg.abs_tol, cfg.rel_tol);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t1 - t0);
        tmp = y + h0 * k1;
        pb.rhs(t + h0, tmp, k2);
        const double d2 = error_norm(pb, VectorXd(k2 - k1), zero, y, cfg.abs_tol, cfg.rel_tol) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        h = std::min(100.0 * h0, h1);
    }
    if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);

    std::size_t target_index = 0;
    bool last_rejected = false;
    while (target_index < targets.size()) {
        const double target = targets[target_index];
        const double min_step = 1e-14 * std::max(1.0, std::abs(t));
        if (h < min_step) {
            std::ostringstream os;
            os << "step size underflow at t = " << t << " (h = " << h << ")";
            throw NumericalError(os.str());
        }
        if (counts.accepted + counts.rejected >= cfg.max_steps) {
            throw NumericalError("integrator exceeded max_steps = " + std::to_string(cfg.max_steps));
        }

        bool hits_target = false;
        double step = h;
        if (t + step >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            step = target - t;
            hits_target = true;
        }

        tmp = y + step * (a21 * k1);
        pb.rhs(t + c2 * step, tmp, k2);
        tmp = y + step * (a31 * k1 + a32 * k2);
        pb.rhs(t + c3 * step, tmp, k3);
        tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        pb.rhs(t + c4 * step, tmp, k4);
        tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        pb.rhs(t + c5 * step, tmp, k5);
        tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        pb.rhs(t + step, tmp, k6);
        y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double t_new = hits_target ? target : t + step;
        pb.rhs(t_new, y_new, k7);
        err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // error per unit step: the local error may be at most tol * h (for h < 1), so the
        // global error over an interval stays proportional to the tolerance
        const double enorm = error_norm(pb, err, y, y_new, cfg.abs_tol, cfg.rel_tol) / std::min(step, 1.0);
        if (!std::isfinite(enorm)) {
            ++counts.rejected;
            h = 0.2 * step;
            last_rejected = true;
            continue;
        }
        double factor = enorm == 0.0 ? 5.0 : 0.8 * std::pow(enorm, step < 1.0 ? -0.25 : -0.2);
        if (enorm <= 1.0) {
            ++counts.accepted;
            t = t_new;
            y = y_new;
            if (pb.project) {
                pb.project(y);
                pb.rhs(t, y, k1);
            } else {
                k1 = k7;
            }
            factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
            last_rejected = false;
            // a step shortened to hit a target must not shrink the next one
            h = (hits_target && step < h) ? std::max(h, step * factor) : step * factor;
            if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
            if (hits_target) {
                observe(t, y);
                ++target_index;
            } else if (observe_every_step) {
                observe(t, y);
            }
        } else {
            ++counts.rejected;
            last_rejected = true;
            h = step * std::clamp(factor, 0.2, 1.0);
        }
    }
    return counts;
}

StepCounts run_rk4(const Problem& pb, const IntegratorConfig& cfg, VectorXd& y, double t0,
                   const std::vector<double>& targets, bool observe_every_step, const ObserverFn& observe) {
    StepCounts counts;
    const Index n = pb.dim;
    VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = t0;
    for (double target : targets) {
        const double span = target - t;
        const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9)));
        const double h = span / static_cast<double>(steps);
        const double start = t;
        for (std::size_t i = 0; i < steps; ++i) {
            if (counts.accepted >= cfg.max_steps) {
                throw NumericalError("integrator exceeded max_steps = " + std::to_string(cfg.max_steps));
            }
            pb.rhs(t, y, k1);
            tmp = y + 0.5 * h * k1;
            pb.rhs(t + 0.5 * h, tmp, k2);
            tmp = y + 0.5 * h * k2;
            pb.rhs(t + 0.5 * h, tmp, k3);
            tmp = y + h * k3;
            pb.rhs(t + h, tmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (pb.project) pb.project(y);
            ++counts.accepted;
            t = (i + 1 == steps) ? target : start + static_cast<double>(i + 1) * h;
            if (!y.allFinite()) throw NumericalError("non-finite state at t = " + std::to_string(t));
            if (i + 1 == steps) {
                observe(t, y);
            } else if (observe_every_step) {
                observe(t, y);
            }
        }
    }
    return counts;
}

StepCounts run(const Problem& pb, const IntegratorConfig& cfg, VectorXd& y, double t0, double t1,
               const ObserverFn& observe, bool store_samples) {
    if (t1 == t0) return {};
    const double interval = store_samples ? cfg.sample_interval : 0.0;
    const auto targets = sample_targets(t0, t1, interval);
    const bool every_step = store_samples && cfg.sample_interval <= 0.0;
    if (cfg.method == Method::RK4) return run_rk4(pb, cfg, y, t0, targets, every_step, observe);
    return run_rk45(pb, cfg, y, t0, t1, targets, every_step, observe);
}

void normalize_blocks(VectorXd& y, Index block) {
    for (Index k = 2; k + block <= y.size(); k += block) {
        const double norm = y.segment(k, block).norm();
        if (norm > 0.0) y.segment(k, block) /= norm;
    }
}

Problem make_problem(const FieldSpec& spec, const IntegratorConfig& cfg) {
    Problem pb;
    pb.dim = static_cast<Index>(spec.dimension());
    switch (spec.kind) {
        case FieldKind::Full:
            pb.rhs = [&spec](double t, const VectorXd& x, VectorXd& dx) { full_rhs(spec.params, spec.pump, t, x, dx); };
            pb.group_size = 2;
            if (cfg.renormalize) pb.project = [](VectorXd& x) { normalize_blocks(x, 4); };
            break;
        case FieldKind::Reduced:
            pb.rhs = [&spec](double t, const VectorXd& y, VectorXd& dy) {
                reduced_rhs(spec.params, spec.pump, t, y, dy);
            };
            if (cfg.renormalize) pb.project = [](VectorXd& y) { normalize_blocks(y, 3); };
            break;
        case FieldKind::Modified:
            pb.rhs = [&spec](double t, const VectorXd& y, VectorXd& dy) {
                modified_rhs(spec.params, spec.pump, spec.modified, t, y, dy);
            };
            if (cfg.renormalize) pb.project = [](VectorXd& y) { normalize_blocks(y, 3); };
            break;
    }
    return pb;
}

double norm_drift(FieldKind kind, const VectorXd& y) {
    double drift = 0.0;
    if (kind == FieldKind::Full) {
        for (Index k = 2; k + 4 <= y.size(); k += 4) drift = std::max(drift, std::abs(y.segment<4>(k).squaredNorm() - 1.0));
    } else {
        for (Index k = 2; k + 3 <= y.size(); k += 3) drift = std::max(drift, std::abs(y.segment<3>(k).norm() - 1.0));
    }
    return drift;
}

void check_state_dimension(const FieldSpec& spec, const VectorXd& y0) {
    if (static_cast<std::size_t>(y0.size()) != spec.dimension()) {
        throw ConfigError("initial state has dimension " + std::to_string(y0.size()) + ", field expects " +
                          std::to_string(spec.dimension()));
    }
    if (!y0.allFinite()) throw ConfigError("initial state is not finite");
}

}  // namespace

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::Full: return "full";
        case FieldKind::Reduced: return "reduced";
        case FieldKind::Modified: return "modified";
    }
    return "unknown";
}

FieldKind field_kind_from_string(std::string_view name) {
    if (name == "full") return FieldKind::Full;
    if (name == "reduced") return FieldKind::Reduced;
    if (name == "modified") return FieldKind::Modified;
    throw ConfigError("unknown field kind '" + std::string(name) + "' (expected full, reduced or modified)");
}

std::size_t FieldSpec::dimension() const {
    return kind == FieldKind::Full ? FullState::dimension(params.N) : ReducedState::dimension(params.N);
}

void validate_integrator(const IntegratorConfig& cfg) {
    if (cfg.method == Method::RK4 && !(cfg.step > 0.0)) {
        throw ConfigError("invalid parameter 'integrator.step': must be > 0");
    }
    if (!(cfg.abs_tol > 0.0)) throw ConfigError("invalid parameter 'integrator.abs_tol': must be > 0");
    if (!(cfg.rel_tol > 0.0)) throw ConfigError("invalid parameter 'integrator.rel_tol': must be > 0");
    if (cfg.max_step < 0.0) throw ConfigError("invalid parameter 'integrator.max_step': must be >= 0");
    if (cfg.sample_interval < 0.0) throw ConfigError("invalid parameter 'integrator.sample_interval': must be >= 0");
}

FullState Trajectory::full_state(std::size_t i) const {
    if (meta.kind != FieldKind::Full) throw ConfigError("trajectory does not hold full states");
    return FullState::from_vector(states.at(i));
}

ReducedState Trajectory::reduced_state(std::size_t i) const {
    if (meta.kind == FieldKind::Full) throw ConfigError("trajectory does not hold reduced states");
    return ReducedState::from_vector(states.at(i));
}

ReducedState Trajectory::bloch_state(std::size_t i) const {
    return meta.kind == FieldKind::Full ? hopf_project(full_state(i)) : reduced_state(i);
}

std::string params_digest(const FieldSpec& spec) {
    std::ostringstream os;
    const auto& p = spec.params;
    os << to_string(spec.kind) << ";Omega=" << format_double(p.Omega) << ";sigma=" << format_double(p.sigma)
       << ";c=" << format_double(p.c) << ";hbar=" << format_double(p.hbar) << ";omega1=" << format_double(p.omega1)
       << ";omega2=" << format_double(p.omega2) << ";q=" << format_double(p.q) << ";N=" << p.N << ";kappa=";
    for (std::size_t n = 0; n < p.N; ++n) os << format_double(p.kappa_at(n)) << ',';
    os << ";Omega_p=" << format_double(spec.pump.Omega_p) << ";offset=" << format_double(spec.pump.offset) << ";cos=";
    for (double a : spec.pump.cos_coeffs) os << format_double(a) << ',';
    os << ";sin=";
    for (double b : spec.pump.sin_coeffs) os << format_double(b) << ',';
    if (spec.kind == FieldKind::Modified) {
        os << ";R=" << format_double(spec.modified.R) << ";R_c=" << format_double(spec.modified.R_c)
           << ";epsilon=" << format_double(spec.modified.epsilon);
    }
    return sha256_hex(os.str());
}

Trajectory integrate(const FieldSpec& spec, const IntegratorConfig& cfg, const Eigen::VectorXd& y0, double t0,
                     double t1) {
    validate_integrator(cfg);
    check_state_dimension(spec, y0);
    if (!(t1 >= t0)) throw ConfigError("integration interval requires t1 >= t0");

    Trajectory traj;
    traj.meta.kind = spec.kind;
    traj.meta.molecules = spec.params.N;
    traj.meta.integrator = cfg;
    traj.meta.params_digest = params_digest(spec);
    traj.t.push_back(t0);
    traj.states.push_back(y0);
    traj.meta.max_norm_drift = norm_drift(spec.kind, y0);

    const Problem pb = make_problem(spec, cfg);
    VectorXd y = y0;
    const auto counts = run(pb, cfg, y, t0, t1,
                            [&traj, &spec](double t, const VectorXd& state) {
                                traj.t.push_back(t);
                                traj.states.push_back(state);
                                traj.meta.max_norm_drift = std::max(traj.meta.max_norm_drift, norm_drift(spec.kind, state));
                            },
                            true);
    traj.meta.accepted_steps = counts.accepted;
    traj.meta.rejected_steps = counts.rejected;
    return traj;
}

Trajectory integrate(const SystemParams& params, const PumpConfig& pump, const IntegratorConfig& cfg,
                     const FullState& x0, double t0, double t1) {
    FieldSpec spec{FieldKind::Full, params, pump, {}};
    spec.params.N = x0.C.size();
    return integrate(spec, cfg, x0.to_vector(), t0, t1);
}

Trajectory integrate(const SystemParams& params, const PumpConfig& pump, const IntegratorConfig& cfg,
                     const ReducedState& y0, double t0, double t1) {
    FieldSpec spec{FieldKind::Reduced, params, pump, {}};
    spec.params.N = y0.s.size();
    return integrate(spec, cfg, y0.to_vector(), t0, t1);
}

Eigen::VectorXd flow_map(const FieldSpec& spec, const IntegratorConfig& cfg, const Eigen::VectorXd& y0, double t0,
                         double t1) {
    validate_integrator(cfg);
    check_state_dimension(spec, y0);
    if (!(t1 >= t0)) throw ConfigError("integration interval requires t1 >= t0");
    const Problem pb = make_problem(spec, cfg);
    VectorXd y = y0;
    run(pb, cfg, y, t0, t1, [](double, const VectorXd&) {}, false);
    return y;
}

VariationalResult integrate_with_variational(const FieldSpec& spec, const IntegratorConfig& cfg,
                                             const Eigen::VectorXd& y0, double t0, double t1) {
    if (spec.kind == FieldKind::Full) {
        throw ConfigError("variational integration is available for reduced and modified fields only");
    }
    validate_integrator(cfg);
    check_state_dimension(spec, y0);
    if (!(t1 >= t0)) throw ConfigError("integration interval requires t1 >= t0");

    const Index n = y0.size();
    Problem pb;
    pb.dim = n + n * n;
    // scratch captured by value inside the closure; each call of this function owns its own copy
    pb.rhs = [&spec, n, jac = Eigen::MatrixXd(n, n)](double t, const VectorXd& z, VectorXd& dz) mutable {
        const auto y = z.head(n);
        if (spec.kind == FieldKind::Modified) {
            modified_rhs(spec.params, spec.pump, spec.modified, t, y, dz.head(n));
            modified_jacobian(spec.params, spec.pump, spec.modified, t, y, jac);
        } else {
            reduced_rhs(spec.params, spec.pump, t, y, dz.head(n));
            reduced_jacobian(spec.params, spec.pump, t, y, jac);
        }
        const Eigen::Map<const Eigen::MatrixXd> J(z.data() + n, n, n);
        Eigen::Map<Eigen::MatrixXd> dJ(dz.data() + n, n, n);
        dJ.noalias() = jac * J;
    };

    VectorXd z(pb.dim);
    z.head(n) = y0;
    Eigen::Map<Eigen::MatrixXd>(z.data() + n, n, n).setIdentity();
    IntegratorConfig plain = cfg;
    plain.renormalize = false;
    const auto counts = run(pb, plain, z, t0, t1, [](double, const VectorXd&) {}, false);

    VariationalResult out;
    out.state = z.head(n);
    out.tangent = Eigen::Map<const Eigen::MatrixXd>(z.data() + n, n, n);
    out.accepted_steps = counts.accepted;
    return out;
}

Spinor rabi_reference(const SystemParams& params, double a_const, const Spinor& C0, double t) {
    // i C' = H C with Hermitian H = [[w1, i alpha], [-i alpha, w2]], alpha = a/hbar.
    // Spectral form: H = m I + h.sigma with m = (w1+w2)/2, h = (0, -alpha, (w1-w2)/2).
    const double alpha = a_const / params.hbar;
    const double mean = 0.5 * (params.omega1 + params.omega2);
    const double hz = 0.5 * (params.omega1 - params.omega2);
    const double hy = -alpha;
    const double rabi = std::hypot(hy, hz);
    const Complex phase = std::polar(1.0, -mean * t);
    const Complex i{0.0, 1.0};
    const double cs = std::cos(rabi * t);
    // sin(rabi t)/rabi, continuous at rabi = 0
    const double sinc = rabi == 0.0 ? t : std::sin(rabi * t) / rabi;
    // h.sigma = [[hz, -i hy], [i hy, -hz]]
    const Complex s11 = hz, s12 = -i * hy, s21 = i * hy, s22 = -hz;
    const Complex u11 = cs - i * sinc * s11;
    const Complex u12 = -i * sinc * s12;
    const Complex u21 = -i * sinc * s21;
    const Complex u22 = cs - i * sinc * s22;
    return {phase * (u11 * C0[0] + u12 * C0[1]), phase * (u21 * C0[0] + u22 * C0[1])};
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string csv_header(FieldKind kind, std::size_t molecules) {
    std::string header = "t,A,B";
    for (std::size_t n = 1; n <= molecules; ++n) {
        const std::string idx = std::to_string(n);
        if (kind == FieldKind::Full) {
            header += ",reC" + idx + "1,imC" + idx + "1,reC" + idx + "2,imC" + idx + "2";
        } else {
            header += ",u" + idx + ",v" + idx + ",w" + idx;
        }
    }
    return header;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << csv_header(traj.meta.kind, traj.meta.molecules) << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_double(traj.t[i]);
        for (Index k = 0; k < traj.states[i].size(); ++k) os << ',' << format_double(traj.states[i][k]);
        os << '\n';
    }
}

Trajectory read_csv(std::istream& is, FieldKind kind) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty trajectory CSV");
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    const std::size_t per_molecule = kind == FieldKind::Full ? 4 : 3;
    if (columns < 3 + per_molecule || (columns - 3) % per_molecule != 0) {
        throw ConfigError("trajectory CSV header has unexpected column count");
    }
    Trajectory traj;
    traj.meta.kind = kind;
    traj.meta.molecules = (columns - 3) / per_molecule;
    if (line != csv_header(kind, traj.meta.molecules)) throw ConfigError("trajectory CSV header mismatch");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        VectorXd state(static_cast<Index>(columns - 1));
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < columns; ++c) {
            double value = 0.0;
            const auto res = std::from_chars(p, end, value);
            if (res.ec != std::errc{}) throw ConfigError("malformed number in trajectory CSV");
            if (c == 0) {
                traj.t.push_back(value);
            } else {
                state[static_cast<Index>(c - 1)] = value;
            }
            p = res.ptr;
            if (c + 1 < columns) {
                if (p == end || *p != ',') throw ConfigError("trajectory CSV row has too few columns");
                ++p;
            }
        }
        traj.states.push_back(std::move(state));
    }
    return traj;
}

}  // namespace mbloch
