#include <catch_amalgamated.hpp>

#include "mbloch/diagnostics.hpp"
#include "mbloch/poincare.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace mbloch;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory synthetic(FieldKind kind, std::size_t molecules, std::vector<double> t, std::vector<Eigen::VectorXd> states) {
    Trajectory traj;
    traj.t = std::move(t);
    traj.states = std::move(states);
    traj.meta.kind = kind;
    traj.meta.molecules = molecules;
    return traj;
}

FieldSpec sample_spec(FieldKind kind) {
    FieldSpec spec;
    spec.kind = kind;
    spec.params.Omega = 1.0;
    spec.params.sigma = 0.1;
    spec.params.omega2 = 1.0;
    spec.params.q = 0.2;
    spec.params.kappa = {0.4};
    spec.pump.cos_coeffs = {0.5};
    spec.modified = default_modified_config(spec.params);
    return spec;
}

}  // namespace

TEST_CASE("checks compare with the requested relation", "[diagnostics]") {
    CHECK(make_check("x", 1.0, 1.0).pass);
    CHECK_FALSE(make_check("x", 1.0, 1.0, {}, Relation::Below).pass);
    CHECK(make_check("x", 2.0, 1.0, {}, Relation::AtLeast).pass);
    CHECK_FALSE(make_check("x", std::numeric_limits<double>::quiet_NaN(), 1.0).pass);
    CHECK(to_string(Relation::AtMost) == "<=");

    VerificationReport a, b;
    a.checks.push_back(make_check("a", 0.0, 1.0));
    b.checks.push_back(make_check("b", 2.0, 1.0));
    b.renormalized = true;
    CHECK(a.all_pass());
    a.append(b);
    CHECK(a.checks.size() == 2);
    CHECK_FALSE(a.all_pass());
    CHECK(a.renormalized);
}

TEST_CASE("a corrupted spinor fails the charge check", "[diagnostics][charge]") {
    Eigen::VectorXd good(6), bad(6);
    good << 0.0, 0.0, 1.0, 0.0, 0.0, 0.0;
    bad << 0.0, 0.0, 1.1, 0.0, 0.0, 0.0;
    const Trajectory traj = synthetic(FieldKind::Full, 1, {0.0, 1.0}, {good, bad});
    const VerificationReport report = check_charge(traj);
    REQUIRE(report.checks.size() == 1);
    CHECK_THAT(report.checks[0].measured, WithinAbs(0.21, 1e-12));
    CHECK_FALSE(report.all_pass());
    CHECK_THROWS_AS(check_bloch_norm(traj), ConfigError);
}

TEST_CASE("integrated trajectories pass the conservation checks", "[diagnostics][charge]") {
    const FieldSpec spec = sample_spec(FieldKind::Full);
    FullState x0{0.0, 0.0, {Spinor{Complex{1.0, 0.0}, Complex{0.0, 0.0}}}};
    const Trajectory full = integrate(spec, IntegratorConfig{}, x0.to_vector(), 0.0, 50.0);
    CHECK(check_charge(full).all_pass());

    IntegratorConfig renorm;
    renorm.renormalize = true;
    const Trajectory red = integrate(sample_spec(FieldKind::Reduced), renorm, hopf_project(x0).to_vector(), 0.0, 50.0);
    const VerificationReport report = check_bloch_norm(red);
    CHECK(report.all_pass());
    CHECK(report.renormalized);
    CHECK(report.checks[0].note == "renormalized");
}

TEST_CASE("a priori crossing time", "[diagnostics][apriori]") {
    const AprioriConstants k{2.0, 4.0, 0.5};
    // envelope 2*M0^2 e^{-t/2} + 4 meets (sqrt(4)+1)^2 = 9 when 2*M0^2 e^{-t/2} = 5
    CHECK_THAT(apriori_crossing_time(k, 100.0), WithinAbs(2.0 * std::log(200.0 / 5.0), 1e-12));
    CHECK(apriori_crossing_time(k, 1.0) == 0.0);

    const FieldSpec spec = sample_spec(FieldKind::Reduced);
    const AprioriConstants c = apriori_constants(spec.params, spec.modified);
    const auto form = lyapunov_form_bounds(spec.params, spec.modified.epsilon);
    CHECK_THAT(c.d1, WithinAbs(form.a2 / form.a1, 1e-15));
    CHECK(c.d1 >= 1.0);
}

TEST_CASE("entry time is the last exit from the ball", "[diagnostics][apriori]") {
    std::vector<double> t = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<Eigen::VectorXd> s;
    for (double r : {5.0, 0.5, 3.0, 0.5, 0.2}) {
        Eigen::VectorXd y(5);
        y << r, 0.0, 0.0, 0.0, -1.0;
        s.push_back(y);
    }
    const Trajectory traj = synthetic(FieldKind::Reduced, 1, t, s);
    CHECK(entry_time(traj, 1.0) == 3.0);
    CHECK(entry_time(traj, 10.0) == 0.0);
    CHECK(std::isinf(entry_time(traj, 0.1)));
}

TEST_CASE("trajectories from far away satisfy the a priori bounds", "[diagnostics][apriori]") {
    const FieldSpec spec = sample_spec(FieldKind::Reduced);
    ReducedState y0{300.0, 0.0, {Eigen::Vector3d(0.0, 0.0, -1.0)}};
    const AprioriConstants k = apriori_constants(spec.params, spec.modified);
    IntegratorConfig cfg;
    cfg.sample_interval = 0.1;
    const double t1 = 1.25 * apriori_crossing_time(k, 300.0 * 300.0);
    const Trajectory traj = integrate(spec, cfg, y0.to_vector(), 0.0, t1);
    const VerificationReport report = check_apriori(traj, spec.params, spec.modified);
    REQUIRE(report.checks.size() == 2);
    CHECK(report.checks[0].name == "apriori_envelope");
    CHECK(report.all_pass());

    const VerificationReport lyap = check_lyapunov(traj, spec);
    REQUIRE(lyap.checks.size() == 2);
    CHECK(lyap.all_pass());
}

TEST_CASE("Lyapunov check flags a growing synthetic trajectory", "[diagnostics][lyapunov]") {
    const FieldSpec spec = sample_spec(FieldKind::Reduced);
    std::vector<double> t;
    std::vector<Eigen::VectorXd> s;
    for (int i = 0; i <= 10; ++i) {
        Eigen::VectorXd y(5);
        y << 100.0 * std::exp(0.5 * i), 0.0, 0.0, 0.0, -1.0;
        t.push_back(i);
        s.push_back(y);
    }
    const VerificationReport report = check_lyapunov(synthetic(FieldKind::Reduced, 1, t, s), spec);
    REQUIRE(report.checks.size() == 2);
    CHECK(report.checks[0].pass);  // the field itself still points inward
    CHECK_FALSE(report.checks[1].pass);
}

TEST_CASE("gauge factor recovers a synthetic phase", "[diagnostics][gauge]") {
    std::mt19937_64 rng(51);
    const double T = 2.0;
    const FullState a = testing::random_full(rng, 2);
    FullState b = a;
    const double th0 = 0.4, th1 = 5.9;
    for (int c = 0; c < 2; ++c) {
        b.C[0][c] *= std::polar(1.0, th0);
        b.C[1][c] *= std::polar(1.0, th1);
    }
    const Trajectory traj = synthetic(FieldKind::Full, 2, {0.0, 1.0, 2.0}, {a.to_vector(), a.to_vector(), b.to_vector()});
    const GaugeFactor g = gauge_factor(traj, 0.0, T);
    REQUIRE(g.thetas.size() == 2);
    CHECK_THAT(g.thetas[0], WithinAbs(th0, 1e-12));
    CHECK_THAT(g.thetas[1], WithinAbs(th1, 1e-12));
    CHECK(g.residual < 1e-14);

    CHECK_THROWS_AS(gauge_factor(traj, 0.5, T), ConfigError);

    FullState orthogonal = a;
    orthogonal.C[0] = {-std::conj(a.C[0][1]), std::conj(a.C[0][0])};
    const Trajectory bad = synthetic(FieldKind::Full, 2, {0.0, 2.0}, {a.to_vector(), orthogonal.to_vector()});
    CHECK_THROWS_AS(gauge_factor(bad, 0.0, T), NumericalError);
}

TEST_CASE("periodicity check on synthetic signals", "[diagnostics][periodicity]") {
    const double T = 2.0 * kPi;
    const auto build = [&](double drift) {
        std::vector<double> t;
        std::vector<Eigen::VectorXd> s;
        for (int i = 0; i <= 60; ++i) {
            const double ti = i * T / 20.0;
            Eigen::VectorXd y(5);
            const double w = std::cos(ti);
            y << std::cos(ti) + drift * ti, std::sin(ti), std::sqrt(1.0 - w * w), 0.0, w;
            t.push_back(ti);
            s.push_back(y);
        }
        return synthetic(FieldKind::Reduced, 1, t, s);
    };
    const VerificationReport periodic = check_periodicity(build(0.0), T);
    REQUIRE(periodic.checks.size() == 2);
    CHECK(periodic.checks[1].name == "bloch_periodicity");
    CHECK(periodic.all_pass());

    const VerificationReport drifting = check_periodicity(build(1e-3), T);
    CHECK_FALSE(drifting.checks[0].pass);
    CHECK_THAT(drifting.checks[0].measured, WithinAbs(1e-3 * T, 1e-12));

    CHECK_THROWS_AS(check_periodicity(build(0.0), 0.71 * T), ConfigError);
    CHECK_THROWS_AS(check_periodicity(build(0.0), 2.0 * T), ConfigError);
}

TEST_CASE("projection deviation and traces", "[diagnostics]") {
    const FieldSpec full = sample_spec(FieldKind::Full);
    const FieldSpec red = sample_spec(FieldKind::Reduced);
    std::mt19937_64 rng(52);
    const FullState x0 = testing::random_full(rng, 1);
    IntegratorConfig cfg;
    cfg.sample_interval = 0.5;
    const Trajectory a = integrate(full, cfg, x0.to_vector(), 0.0, 20.0);
    const Trajectory b = integrate(red, cfg, hopf_project(x0).to_vector(), 0.0, 20.0);
    CHECK(projection_deviation(a, b) < 1e-7);
    CHECK_THROWS_AS(projection_deviation(b, a), ConfigError);

    const auto ja = current_trace(a, full.params);
    const auto jb = current_trace(b, red.params);
    const auto wa = population_inversion(a);
    const auto wb = population_inversion(b);
    REQUIRE(ja.size() == a.size());
    REQUIRE(wa.size() == 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK_THAT(ja[i], WithinAbs(jb[i], 1e-7));
        CHECK_THAT(wa[0][i], WithinAbs(wb[0][i], 1e-7));
    }
}
