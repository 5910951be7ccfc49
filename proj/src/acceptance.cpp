#include "mbloch/acceptance.hpp"

#include "mbloch/dynamics.hpp"
#include "mbloch/parallel.hpp"
#include "mbloch/poincare.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mbloch {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// shared fixtures

SystemParams sample_params() {
    SystemParams p;
    p.Omega = 1.0;
    p.sigma = 0.1;
    p.omega1 = 0.0;
    p.omega2 = 1.0;
    p.q = 0.2;
    p.kappa = {0.4};
    return p;
}

PumpConfig sample_pump() {
    PumpConfig pump;
    pump.Omega_p = 1.0;
    pump.cos_coeffs = {0.5};
    return pump;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Spinor random_spinor(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Vector4d v;
    for (Index k = 0; k < 4; ++k) v[k] = g(rng);
    v.normalize();
    return {Complex{v[0], v[1]}, Complex{v[2], v[3]}};
}

Eigen::Vector3d random_unit3(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Vector3d v(g(rng), g(rng), g(rng));
    return v.normalized();
}

struct Draw {
    SystemParams params;
    PumpConfig pump;
    FullState x0;
};

/// Moderate random system; `free_kappa` draws independent current weights instead of kappa = 2q.
Draw random_draw(std::mt19937_64& rng, std::size_t N, bool free_kappa) {
    Draw d;
    d.params.Omega = uniform(rng, 0.5, 2.0);
    d.params.sigma = uniform(rng, 0.05, 0.5);
    d.params.omega1 = uniform(rng, -0.5, 0.5);
    d.params.omega2 = d.params.omega1 + uniform(rng, 0.3, 2.0);
    d.params.q = uniform(rng, 0.0, 0.5);
    d.params.N = N;
    if (free_kappa) {
        d.params.kappa.resize(N);
        for (auto& k : d.params.kappa) k = uniform(rng, 0.0, 1.0);
    }
    d.pump.Omega_p = uniform(rng, 0.5, 2.0);
    d.pump.offset = uniform(rng, -0.2, 0.2);
    d.pump.cos_coeffs = {uniform(rng, -1.0, 1.0)};
    d.pump.sin_coeffs = {uniform(rng, -1.0, 1.0)};
    d.x0.A = uniform(rng, -1.0, 1.0);
    d.x0.B = uniform(rng, -1.0, 1.0);
    for (std::size_t n = 0; n < N; ++n) d.x0.C.push_back(random_spinor(rng));
    return d;
}

IntegratorConfig sampled(IntegratorConfig cfg, double interval) {
    cfg.sample_interval = interval;
    return cfg;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

Check renamed(Check c, const std::string& suffix) {
    c.name += suffix;
    return c;
}

// ---------------------------------------------------------------------------
// 1. conservation over 100 pump periods

VerificationReport conservation(const AcceptanceOptions& o) {
    VerificationReport report;
    IntegratorConfig cfg = sampled(o.integrator, 0.0);
    report.renormalized = cfg.renormalize;

    SystemParams one = sample_params();
    SystemParams three = sample_params();
    three.N = 3;
    three.kappa = {0.4, 0.3, 0.2};
    const PumpConfig pump = sample_pump();
    const double t1 = 100.0 * pump.period();

    std::mt19937_64 rng(o.seed + 1);
    for (const SystemParams& p : {one, three}) {
        FullState x0{0.3, -0.2, {}};
        for (std::size_t n = 0; n < p.N; ++n) x0.C.push_back(random_spinor(rng));
        const std::string suffix = "_N" + std::to_string(p.N);
        const Trajectory full = integrate(p, pump, cfg, x0, 0.0, t1);
        const Trajectory reduced = integrate(p, pump, cfg, hopf_project(x0), 0.0, t1);
        for (const auto& c : check_charge(full, 1e-9).checks) report.checks.push_back(renamed(c, suffix));
        for (const auto& c : check_bloch_norm(reduced, 1e-9).checks) report.checks.push_back(renamed(c, suffix));
    }
    return report;
}

// ---------------------------------------------------------------------------
// 2. Hopf projection of full trajectories vs reduced trajectories

VerificationReport reduction(const AcceptanceOptions& o) {
    constexpr std::size_t kDraws = 20;
    std::mt19937_64 rng(o.seed + 2);
    std::vector<Draw> draws;
    for (std::size_t i = 0; i < kDraws; ++i) draws.push_back(random_draw(rng, 1 + i % 3, i % 2 == 1));

    std::vector<double> deviation(kDraws, 0.0);
    parallel_for(kDraws, o.workers, [&](std::size_t i) {
        const Draw& d = draws[i];
        const double T = d.pump.period();
        const IntegratorConfig cfg = sampled(o.integrator, T / 20.0);
        const Trajectory full = integrate(d.params, d.pump, cfg, d.x0, 0.0, 10.0 * T);
        const Trajectory reduced = integrate(d.params, d.pump, cfg, hopf_project(d.x0), 0.0, 10.0 * T);
        deviation[i] = projection_deviation(full, reduced);
    });

    VerificationReport report;
    const auto worst = std::max_element(deviation.begin(), deviation.end());
    report.checks.push_back(make_check("projection_deviation", *worst, 1e-7,
                                       "worst draw " + std::to_string(worst - deviation.begin()) + " of " +
                                           std::to_string(kDraws) + ", 10 periods, N in {1,2,3}"));
    return report;
}

// ---------------------------------------------------------------------------
// 3. gauge equivariance of observables

VerificationReport gauge_equivariance(const AcceptanceOptions& o) {
    constexpr std::size_t kDraws = 10;
    std::mt19937_64 rng(o.seed + 3);
    std::vector<Draw> draws;
    std::vector<GaugePhases> phases;
    for (std::size_t i = 0; i < kDraws; ++i) {
        draws.push_back(random_draw(rng, 1 + i % 3, i % 2 == 1));
        std::vector<double> th(draws.back().params.N);
        for (auto& t : th) t = uniform(rng, 0.0, kTwoPi);
        phases.emplace_back(th);
    }

    std::vector<std::array<double, 3>> diff(kDraws, {0.0, 0.0, 0.0});
    parallel_for(kDraws, o.workers, [&](std::size_t i) {
        const Draw& d = draws[i];
        const double T = d.pump.period();
        const IntegratorConfig cfg = sampled(o.integrator, T / 20.0);
        const Trajectory plain = integrate(d.params, d.pump, cfg, d.x0, 0.0, 5.0 * T);
        const Trajectory rotated = integrate(d.params, d.pump, cfg, gauge_act(phases[i], d.x0), 0.0, 5.0 * T);
        if (plain.size() != rotated.size()) throw NumericalError("gauge runs produced different sample grids");
        const auto j0 = current_trace(plain, d.params);
        const auto j1 = current_trace(rotated, d.params);
        const auto w0 = population_inversion(plain);
        const auto w1 = population_inversion(rotated);
        for (std::size_t k = 0; k < plain.size(); ++k) {
            diff[i][0] = std::max(diff[i][0], (plain.states[k].head<2>() - rotated.states[k].head<2>()).cwiseAbs().maxCoeff());
            diff[i][1] = std::max(diff[i][1], std::abs(j0[k] - j1[k]));
            for (std::size_t n = 0; n < w0.size(); ++n) diff[i][2] = std::max(diff[i][2], std::abs(w0[n][k] - w1[n][k]));
        }
    });

    VerificationReport report;
    const char* names[] = {"maxwell_trace", "current", "population_inversion"};
    for (std::size_t c = 0; c < 3; ++c) {
        double worst = 0.0;
        for (const auto& d : diff) worst = std::max(worst, d[c]);
        report.checks.push_back(make_check(names[c], worst, 1e-9));
    }
    return report;
}

// ---------------------------------------------------------------------------
// 4. Hamilton equations with dissipation from finite-difference gradients of H

VerificationReport hamiltonian_consistency(const AcceptanceOptions& o) {
    constexpr std::size_t kStates = 100;
    std::mt19937_64 rng(o.seed + 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < kStates; ++i) {
        Draw d = random_draw(rng, 1 + i % 3, false);  // kappa = 2q
        d.params.c = uniform(rng, 0.5, 2.0);
        d.params.hbar = uniform(rng, 0.5, 2.0);
        const double t = uniform(rng, 0.0, 10.0);
        const VectorXd x = d.x0.to_vector();

        const auto H = [&](const VectorXd& z) { return hamiltonian(d.params, d.pump, t, FullState::from_vector(z)); };
        VectorXd grad(x.size());
        for (Index k = 0; k < x.size(); ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
            VectorXd xp = x;
            VectorXd xm = x;
            xp[k] += h;
            xm[k] -= h;
            grad[k] = (H(xp) - H(xm)) / (2.0 * h);
        }

        const double c2 = d.params.c * d.params.c;
        VectorXd from_h(x.size());
        from_h[0] = c2 * grad[1];
        from_h[1] = -c2 * grad[0] - d.params.sigma * x[1];
        // i hbar C' = dH/d conj(C) = (dH/dRe + i dH/dIm) / 2
        for (Index k = 2; k < x.size(); k += 2) {
            const Complex wirtinger{0.5 * grad[k], 0.5 * grad[k + 1]};
            const Complex dc = -Complex{0.0, 1.0} * wirtinger / d.params.hbar;
            from_h[k] = dc.real();
            from_h[k + 1] = dc.imag();
        }

        VectorXd field(x.size());
        full_rhs(d.params, d.pump, t, x, field);
        worst = std::max(worst, (from_h - field).norm() / std::max(field.norm(), 1e-12));
    }
    VerificationReport report;
    report.checks.push_back(make_check("hamilton_relative_error", worst, 1e-6, "100 random states, kappa = 2q"));
    return report;
}

// ---------------------------------------------------------------------------
// 5. Lyapunov inequality and integrated envelope

VerificationReport lyapunov_decay(const AcceptanceOptions& o) {
    constexpr std::size_t kRuns = 100;
    std::mt19937_64 rng(o.seed + 5);
    std::vector<FieldSpec> specs;
    std::vector<VectorXd> starts;
    for (std::size_t i = 0; i < kRuns; ++i) {
        Draw d = random_draw(rng, 1 + i % 2, i % 2 == 1);
        const double radius = i < 10 ? 1e3 : std::exp(uniform(rng, std::log(0.1), std::log(1e3)));
        const double angle = uniform(rng, 0.0, kTwoPi);
        d.x0.A = radius * std::cos(angle);
        d.x0.B = radius * std::sin(angle);
        FieldSpec spec;
        spec.kind = i % 4 == 0 ? FieldKind::Full : FieldKind::Reduced;
        spec.params = d.params;
        spec.pump = d.pump;
        spec.modified.epsilon = default_epsilon(d.params);
        starts.push_back(spec.kind == FieldKind::Full ? d.x0.to_vector() : hopf_project(d.x0).to_vector());
        specs.push_back(spec);
    }

    std::vector<VerificationReport> reports(kRuns);
    parallel_for(kRuns, o.workers, [&](std::size_t i) {
        const double t1 = 20.0 * specs[i].pump.period();
        const Trajectory traj = integrate(specs[i], sampled(o.integrator, 0.0), starts[i], 0.0, t1);
        reports[i] = check_lyapunov(traj, specs[i], 1e-8);
    });

    VerificationReport report;
    for (std::size_t c = 0; c < 2; ++c) {
        Check worst = reports.front().checks[c];
        for (const auto& r : reports) {
            if (r.checks[c].measured > worst.measured) worst = r.checks[c];
        }
        worst.note = "worst of " + std::to_string(kRuns) + " runs; " + worst.note;
        worst.pass = std::all_of(reports.begin(), reports.end(), [c](const auto& r) { return r.checks[c].pass; });
        report.checks.push_back(worst);
    }
    return report;
}

// ---------------------------------------------------------------------------
// 6. a priori contraction from radius 10^3

VerificationReport apriori_contraction(const AcceptanceOptions& o) {
    const SystemParams p = sample_params();
    const PumpConfig pump = sample_pump();
    ModifiedFieldConfig cfg;
    cfg.epsilon = default_epsilon(p);
    const AprioriConstants k = apriori_constants(p, cfg);
    const double M0 = 1e3;
    const double t_cross = apriori_crossing_time(k, M0 * M0);

    const std::vector<double> angles = {0.0, 0.25 * std::numbers::pi, 0.5 * std::numbers::pi, std::numbers::pi};
    std::vector<VerificationReport> reports(angles.size());
    parallel_for(angles.size(), o.workers, [&](std::size_t i) {
        ReducedState y0{M0 * std::cos(angles[i]), M0 * std::sin(angles[i]), {Eigen::Vector3d(0.0, 0.0, -1.0)}};
        const Trajectory traj = integrate(p, pump, sampled(o.integrator, 0.05), y0, 0.0, 1.25 * t_cross);
        reports[i] = check_apriori(traj, p, cfg, 0.2, 1e-8);
    });

    VerificationReport report;
    for (std::size_t c = 0; c < 2; ++c) {
        Check worst = reports.front().checks[c];
        for (const auto& r : reports) {
            if (r.checks[c].measured > worst.measured) worst = r.checks[c];
        }
        worst.pass = std::all_of(reports.begin(), reports.end(), [c](const auto& r) { return r.checks[c].pass; });
        report.checks.push_back(worst);
    }
    return report;
}

// ---------------------------------------------------------------------------
// 7. closed-form oracles and RK4 order

VerificationReport oracles(const AcceptanceOptions& o) {
    VerificationReport report;

    // frozen drive: kappa = 0 keeps (A, B) = 0, so a = (q/c) * offset is constant
    SystemParams rabi;
    rabi.omega1 = 0.3;
    rabi.omega2 = 1.1;
    rabi.q = 1.0;
    rabi.kappa = {0.0};
    PumpConfig drive;
    drive.offset = 0.7;
    const Spinor C0{Complex{0.6, 0.0}, Complex{0.0, 0.8}};
    const double t_rabi = 10.0;
    const Spinor ref = rabi_reference(rabi, drive.offset, C0, t_rabi);
    const auto rabi_error = [&](const IntegratorConfig& cfg) {
        const Trajectory traj = integrate(rabi, drive, sampled(cfg, 0.0), FullState{0.0, 0.0, {C0}}, 0.0, t_rabi);
        const Spinor got = traj.full_state(traj.size() - 1).C[0];
        return std::max(std::abs(got[0] - ref[0]), std::abs(got[1] - ref[1]));
    };
    report.checks.push_back(make_check("rabi_final_error", rabi_error(o.integrator), 1e-8, "t = 10, detuned, a = 0.7"));

    SystemParams osc;
    osc.Omega = 1.0;
    osc.sigma = 0.1;
    const PumpConfig none;
    const double t_osc = 10.0 * kTwoPi;
    const Trajectory damped = integrate(osc, none, sampled(o.integrator, 0.0),
                                        FullState{1.0, 0.0, {Spinor{Complex{1.0, 0.0}, Complex{0.0, 0.0}}}}, 0.0, t_osc);
    const double wd = std::sqrt(osc.Omega * osc.Omega - 0.25 * osc.sigma * osc.sigma);
    const double env = std::exp(-0.5 * osc.sigma * t_osc);
    const double A_ref = env * (std::cos(wd * t_osc) + 0.5 * osc.sigma / wd * std::sin(wd * t_osc));
    const double B_ref = -env * osc.Omega * osc.Omega / wd * std::sin(wd * t_osc);
    const VectorXd& end = damped.back();
    report.checks.push_back(make_check("damped_oscillator_final_error",
                                       std::max(std::abs(end[0] - A_ref), std::abs(end[1] - B_ref)), 1e-8,
                                       "10 periods, sigma = 0.1"));

    const std::vector<double> steps = {0.1, 0.05, 0.02, 0.01};
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::ostringstream errors;
    for (double h : steps) {
        IntegratorConfig cfg = o.integrator;
        cfg.method = Method::RK4;
        cfg.step = h;
        cfg.renormalize = false;
        const double e = rabi_error(cfg);
        errors << " e(" << h << ")=" << fmt(e);
        const double lx = std::log(h);
        const double ly = std::log(e);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(steps.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report.checks.push_back(make_check("rk4_order", slope, 3.8, "least-squares slope," + errors.str(), Relation::AtLeast));
    return report;
}

// ---------------------------------------------------------------------------
// 8. decoupled census

void census_checks(VerificationReport& report, const AcceptanceOptions& o, std::size_t N) {
    SystemParams p = sample_params();
    p.q = 0.0;
    p.kappa = {};
    p.omega2 = 0.7;  // omega T = 1.4 pi, away from resonance
    p.N = N;
    FieldSpec spec{FieldKind::Reduced, p, sample_pump(), default_modified_config(p)};
    const double T = spec.pump.period();

    SeedGrid grid;
    grid.radius = spec.modified.R;
    grid.maxwell_count = 4;
    grid.sphere_count = 6;
    grid.molecules = N;
    const PeriodicSearch found = find_all_periodic(spec, o.integrator, grid_seeds(grid), NewtonConfig{}, o.workers);

    const std::string suffix = "_N" + std::to_string(N);
    const double expected = std::pow(2.0, static_cast<double>(N));
    report.checks.push_back(make_check("fixed_point_count_error" + suffix,
                                       std::abs(static_cast<double>(found.points.size()) - expected), 0.0,
                                       std::to_string(found.points.size()) + " points, expected " + fmt(expected)));
    report.checks.push_back(make_check("index_sum_error" + suffix, std::abs(found.index_sum - expected), 0.0,
                                       "index sum " + std::to_string(found.index_sum)));
    const auto not_plus_one = std::count_if(found.points.begin(), found.points.end(), [](const auto& r) { return r.index != 1; });
    report.checks.push_back(make_check("points_with_index_not_plus_one" + suffix, static_cast<double>(not_plus_one), 0.0));

    const double wd = std::sqrt(p.Omega * p.Omega - 0.25 * p.sigma * p.sigma);
    const std::complex<double> mu = std::exp(std::complex<double>{-0.5 * p.sigma, wd} * T);
    const std::complex<double> rot = std::exp(std::complex<double>{0.0, p.omega()} * T);
    double maxwell_err = 0.0;
    double bloch_err = 0.0;
    for (const auto& r : found.points) {
        const auto closest = [&](std::complex<double> target) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& f : r.floquet) best = std::min(best, std::abs(f - target));
            return best;
        };
        maxwell_err = std::max({maxwell_err, closest(mu), closest(std::conj(mu))});
        bloch_err = std::max({bloch_err, closest(rot), closest(std::conj(rot))});
    }
    if (found.points.empty()) maxwell_err = bloch_err = std::numeric_limits<double>::infinity();
    report.checks.push_back(make_check("maxwell_floquet_error" + suffix, maxwell_err, 1e-6));
    report.checks.push_back(make_check("bloch_floquet_error" + suffix, bloch_err, 1e-6));
}

VerificationReport decoupled_census(const AcceptanceOptions& o) {
    VerificationReport report;
    census_checks(report, o, 1);
    census_checks(report, o, 2);
    return report;
}

// ---------------------------------------------------------------------------
// 9 and 10 share the coupled sample search

FieldSpec coupled_spec(FieldKind kind) {
    const SystemParams p = sample_params();
    return {kind, p, sample_pump(), default_modified_config(p)};
}

std::vector<ReducedState> coupled_seeds(const FieldSpec& spec) {
    SeedGrid grid;
    grid.radius = spec.modified.R;
    grid.maxwell_count = 8;
    grid.sphere_count = 6;
    grid.molecules = spec.params.N;
    return grid_seeds(grid);
}

VerificationReport coupled_periodic(const AcceptanceOptions& o) {
    const FieldSpec spec = coupled_spec(FieldKind::Reduced);
    const double T = spec.pump.period();
    const PeriodicSearch found = find_all_periodic(spec, o.integrator, coupled_seeds(spec), NewtonConfig{}, o.workers);

    VerificationReport report;
    report.checks.push_back(make_check("converged_fixed_points", static_cast<double>(found.points.size()), 1.0,
                                       std::to_string(found.converged_seeds) + " of " + std::to_string(found.seeds) +
                                           " seeds converged",
                                       Relation::AtLeast));
    if (found.points.empty()) return report;

    double best_residual = std::numeric_limits<double>::infinity();
    double maxwell = 0.0;
    double inversion = 0.0;
    double unitary = 0.0;
    std::ostringstream thetas;
    for (const auto& point : found.points) {
        best_residual = std::min(best_residual, point.residual);
        const FullState lift = hopf_section(point.Y_sharp);
        const Trajectory traj = integrate(spec.params, spec.pump, sampled(o.integrator, T / 50.0), lift, 0.0, 5.0 * T);
        const VerificationReport per = check_periodicity(traj, T, 1e-7);
        maxwell = std::max(maxwell, per.checks[0].measured);
        inversion = std::max(inversion, per.checks[1].measured);
        for (const auto& g : gauge_factors(traj, T, {0.0, T, 2.0 * T, 3.0 * T, 4.0 * T})) {
            unitary = std::max(unitary, g.residual);
        }
        thetas << " theta=" << fmt(gauge_factor(traj, 0.0, T).thetas.front());
    }
    report.checks.push_back(make_check("best_newton_residual", best_residual, 1e-8));
    report.checks.push_back(make_check("lifted_maxwell_periodicity", maxwell, 1e-7,
                                       std::to_string(found.points.size()) + " points, 5 periods"));
    report.checks.push_back(make_check("lifted_inversion_periodicity", inversion, 1e-7));
    report.checks.push_back(make_check("unitary_factor_residual", unitary, 1e-7, "per-molecule phase" + thetas.str()));
    return report;
}

VerificationReport modified_field(const AcceptanceOptions& o) {
    const FieldSpec spec = coupled_spec(FieldKind::Modified);
    const SystemParams& p = spec.params;
    const ModifiedFieldConfig& m = spec.modified;
    std::mt19937_64 rng(o.seed + 10);
    constexpr std::size_t kPoints = 1000;
    VectorXd y(5), a(5), b(5);

    std::size_t mismatched = 0;
    const double inner = std::min(m.R, m.R_c - 1.0);
    for (std::size_t i = 0; i < kPoints; ++i) {
        const double r = inner * std::sqrt(uniform(rng, 0.0, 1.0));
        const double th = uniform(rng, 0.0, kTwoPi);
        const double t = uniform(rng, 0.0, 10.0);
        y << r * std::cos(th), r * std::sin(th), random_unit3(rng);
        reduced_rhs(p, spec.pump, t, y, a);
        modified_rhs(p, spec.pump, m, t, y, b);
        if (std::memcmp(a.data(), b.data(), sizeof(double) * 5) != 0) ++mismatched;
    }

    double tail_dev = 0.0;
    double worst_cos = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kPoints; ++i) {
        // half the points in the blending ring (R, R_c + 1), half log-spread out to 100 R_c
        const double r = i % 2 == 0 ? uniform(rng, m.R, m.R_c + 1.0)
                                    : m.R * std::exp(uniform(rng, 0.0, std::log(100.0 * m.R_c / m.R)));
        const double th = uniform(rng, 0.0, kTwoPi);
        const double t = uniform(rng, 0.0, 10.0);
        y << r * std::cos(th), r * std::sin(th), random_unit3(rng);
        modified_rhs(p, spec.pump, m, t, y, b);
        const Eigen::Vector2d grad = lyapunov_gradient(p, m.epsilon, y[0], y[1]);
        worst_cos = std::max(worst_cos, grad.dot(b.head<2>()) / (grad.norm() * b.head<2>().norm()));
        if (r >= m.R_c) {
            const Eigen::Vector2d radial = -y.head<2>() / y.head<2>().squaredNorm();
            tail_dev = std::max({tail_dev, (b.head<2>() - radial).norm() / radial.norm(), b.tail<3>().norm()});
        }
    }

    VerificationReport report;
    report.checks.push_back(make_check("inside_mismatched_evaluations", static_cast<double>(mismatched), 0.0,
                                       "bitwise comparison at 1000 points with |M| < " + fmt(inner)));
    report.checks.push_back(make_check("tail_radial_deviation", tail_dev, 1e-15,
                                       "relative to -M/|M|^2 at |M| >= R_c = " + fmt(m.R_c)));
    report.checks.push_back(make_check("max_cos_field_gradV", worst_cos, 0.0, "1000 points with |M| > R = " + fmt(m.R),
                                       Relation::Below));

    const auto seeds = coupled_seeds(spec);
    const PeriodicSearch original =
        find_all_periodic(coupled_spec(FieldKind::Reduced), o.integrator, seeds, NewtonConfig{}, o.workers);
    const PeriodicSearch modified = find_all_periodic(spec, o.integrator, seeds, NewtonConfig{}, o.workers);
    double distance = original.points.size() == modified.points.size() && !original.points.empty()
                          ? 0.0
                          : std::numeric_limits<double>::infinity();
    for (const auto& q : modified.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : original.points) {
            best = std::min(best, (q.Y_sharp.to_vector() - r.Y_sharp.to_vector()).norm());
        }
        distance = std::max(distance, best);
    }
    report.checks.push_back(make_check("fixed_point_set_distance", distance, 1e-8,
                                       std::to_string(modified.points.size()) + " modified vs " +
                                           std::to_string(original.points.size()) + " original points"));
    return report;
}

}  // namespace

std::string criterion_name(int id) {
    switch (id) {
        case 1: return "conservation";
        case 2: return "reduction";
        case 3: return "gauge-equivariance";
        case 4: return "hamiltonian";
        case 5: return "lyapunov-decay";
        case 6: return "apriori-contraction";
        case 7: return "closed-form-oracles";
        case 8: return "decoupled-census";
        case 9: return "coupled-periodic";
        case 10: return "modified-field";
        default: throw ConfigError("unknown acceptance criterion " + std::to_string(id));
    }
}

std::string CriterionResult::line() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << ' ' << std::setw(2) << id << ' ' << std::left << std::setw(20) << name << std::right;
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const Check& c = report.checks[i];
        os << (i == 0 ? " " : ", ") << c.name << '=' << fmt(c.measured) << to_string(c.relation) << fmt(c.bound);
    }
    if (report.renormalized) os << " [renormalized]";
    os << " (" << std::fixed << std::setprecision(1) << seconds << "s)";
    return os.str();
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    CriterionResult result;
    result.id = id;
    result.name = criterion_name(id);
    const auto start = std::chrono::steady_clock::now();
    switch (id) {
        case 1: result.report = conservation(options); break;
        case 2: result.report = reduction(options); break;
        case 3: result.report = gauge_equivariance(options); break;
        case 4: result.report = hamiltonian_consistency(options); break;
        case 5: result.report = lyapunov_decay(options); break;
        case 6: result.report = apriori_contraction(options); break;
        case 7: result.report = oracles(options); break;
        case 8: result.report = decoupled_census(options); break;
        case 9: result.report = coupled_periodic(options); break;
        case 10: result.report = modified_field(options); break;
        default: break;
    }
    result.report.renormalized = result.report.renormalized || options.integrator.renormalize;
    result.pass = result.report.all_pass();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    std::vector<int> ids = options.criteria;
    if (ids.empty()) {
        for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);
    }
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run_criterion(id, options));
    return out;
}

}  // namespace mbloch
