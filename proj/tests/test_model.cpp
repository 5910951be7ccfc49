#include <catch_amalgamated.hpp>

#include "mbloch/model.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace mbloch;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams accepted_params() {
    SystemParams p;
    p.Omega = 1.0;
    p.sigma = 0.1;
    p.omega1 = 0.0;
    p.omega2 = 1.0;
    p.N = 1;
    p.kappa = {2.0};
    p.q = 1.0;
    return p;
}

}  // namespace

TEST_CASE("parameter validation accepts a consistent system", "[model][validate]") {
    const SystemParams p = accepted_params();
    const SystemParams checked = validate_params(p);
    CHECK(checked.kappa == p.kappa);
    CHECK(checked.omega() == 1.0);
}

TEST_CASE("parameter validation names the failing field", "[model][validate]") {
    SystemParams p = accepted_params();

    SECTION("equal level frequencies") {
        p.omega2 = p.omega1;
        CHECK_THROWS_WITH(validate_params(p), ContainsSubstring("omega2") && ContainsSubstring("omega2 > omega1"));
    }
    SECTION("kappa length mismatch") {
        p.N = 2;
        CHECK_THROWS_WITH(validate_params(p), ContainsSubstring("kappa") && ContainsSubstring("N = 2"));
    }
    SECTION("nonpositive resonance") {
        p.Omega = 0.0;
        CHECK_THROWS_WITH(validate_params(p), ContainsSubstring("Omega"));
    }
    SECTION("negative dissipation") {
        p.sigma = -1e-3;
        CHECK_THROWS_WITH(validate_params(p), ContainsSubstring("sigma"));
    }
    SECTION("negative current weight") {
        p.kappa = {-0.1};
        CHECK_THROWS_AS(validate_params(p), ConfigError);
    }
}

TEST_CASE("default current weight is 2q for every molecule", "[model]") {
    SystemParams p;
    p.q = 0.3;
    p.N = 3;
    for (std::size_t n = 0; n < 3; ++n) CHECK(p.kappa_at(n) == 0.6);
    CHECK_THAT(p.current_bound(), WithinAbs(0.9, 1e-15));
}

TEST_CASE("pump waveform is periodic and scales linearly", "[model][pump]") {
    PumpConfig pump;
    pump.Omega_p = 1.7;
    pump.offset = 0.2;
    pump.cos_coeffs = {0.5, -0.1};
    pump.sin_coeffs = {0.3};
    CHECK_NOTHROW(validate_pump(pump));
    CHECK_THAT(pump.period(), WithinAbs(2.0 * kPi / 1.7, 1e-15));

    const PumpConfig doubled = pump.scaled(2.0);
    CHECK(doubled.offset == 0.4);
    CHECK(doubled.cos_coeffs == std::vector<double>{1.0, -0.2});
    CHECK(doubled.sin_coeffs == std::vector<double>{0.6});
    CHECK(doubled.Omega_p == pump.Omega_p);

    pump.Omega_p = 0.0;
    CHECK_THROWS_WITH(validate_pump(pump), ContainsSubstring("Omega_p"));
}

TEST_CASE("flat layouts round-trip", "[model][layout]") {
    std::mt19937_64 rng(11);
    const FullState x = testing::random_full(rng, 3);
    const Eigen::VectorXd v = x.to_vector();
    REQUIRE(v.size() == 14);
    CHECK(v[0] == x.A);
    CHECK(v[7] == x.C[1][0].imag());
    const FullState back = FullState::from_vector(v);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(back.C[n][0] == x.C[n][0]);
        CHECK(back.C[n][1] == x.C[n][1]);
    }

    const ReducedState y = hopf_project(x);
    const ReducedState y2 = ReducedState::from_vector(y.to_vector());
    CHECK(y2.s[2] == y.s[2]);
    CHECK_THROWS_AS(FullState::from_vector(Eigen::VectorXd::Zero(7)), ConfigError);
    CHECK_THROWS_AS(ReducedState::from_vector(Eigen::VectorXd::Zero(6)), ConfigError);
}

TEST_CASE("state validation checks unit charge", "[model][validate]") {
    FullState x{0.0, 0.0, {Spinor{Complex{1.0, 0.0}, Complex{0.0, 0.0}}}};
    CHECK_NOTHROW(validate_state(x));
    x.C[0][0] = Complex{1.0 + 1e-6, 0.0};
    CHECK_THROWS_AS(validate_state(x), ConfigError);
    CHECK_NOTHROW(validate_state(x, 1e-5));

    ReducedState y{0.0, 0.0, {Eigen::Vector3d(0.0, 0.0, 1.1)}};
    CHECK_THROWS_AS(validate_state(y), ConfigError);
}

TEST_CASE("gauge phases are wrapped into [0, 2pi)", "[model][gauge]") {
    CHECK_THAT(wrap_angle(-0.5), WithinAbs(2.0 * kPi - 0.5, 1e-15));
    CHECK_THAT(wrap_angle(7.0), WithinAbs(7.0 - 2.0 * kPi, 1e-15));
    CHECK(wrap_angle(0.0) == 0.0);
    const double w = wrap_angle(2.0 * kPi);
    CHECK(w >= 0.0);
    CHECK(w < 2.0 * kPi);
}

TEST_CASE("gauge action examples", "[model][gauge]") {
    std::mt19937_64 rng(12);
    const FullState x = testing::random_full(rng, 2);

    SECTION("zero phases act as the identity") {
        const FullState y = gauge_act(GaugePhases({0.0, 0.0}), x);
        CHECK(y.to_vector() == x.to_vector());
    }
    SECTION("phase pi flips the sign of the ground state") {
        const FullState g{0.4, -0.3, {Spinor{Complex{1.0, 0.0}, Complex{0.0, 0.0}}}};
        const FullState y = gauge_act(GaugePhases({kPi}), g);
        CHECK_THAT(y.C[0][0].real(), WithinAbs(-1.0, 1e-15));
        CHECK_THAT(y.C[0][0].imag(), WithinAbs(0.0, 1e-15));
        CHECK(y.A == 0.4);
        CHECK(y.B == -0.3);
    }
    SECTION("length mismatch is rejected") {
        CHECK_THROWS_AS(gauge_act(GaugePhases({0.1}), x), ConfigError);
    }
}

TEST_CASE("gauge action is a group action", "[model][gauge][property]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t N = 1 + trial % 3;
        const FullState x = testing::random_full(rng, N);
        std::vector<double> a(N), b(N);
        for (std::size_t n = 0; n < N; ++n) {
            a[n] = testing::uniform(rng, -10.0, 10.0);
            b[n] = testing::uniform(rng, -10.0, 10.0);
        }
        const GaugePhases ga(a), gb(b);
        const FullState twice = gauge_act(ga, gauge_act(gb, x));
        const FullState once = gauge_act(ga.compose(gb), x);
        CHECK((twice.to_vector() - once.to_vector()).cwiseAbs().maxCoeff() < 1e-13);
        const GaugePhases both = ga.compose(gb);
        for (double t : both.angles()) {
            CHECK(t >= 0.0);
            CHECK(t < 2.0 * kPi);
        }
    }
}

TEST_CASE("Hopf projection examples", "[model][hopf]") {
    const Eigen::Vector3d south = bloch_vector({Complex{1.0, 0.0}, Complex{0.0, 0.0}});
    CHECK(south == Eigen::Vector3d(0.0, 0.0, -1.0));

    const double r = 1.0 / std::sqrt(2.0);
    const Eigen::Vector3d s = bloch_vector({Complex{r, 0.0}, Complex{0.0, r}});
    CHECK_THAT(s[0], WithinAbs(0.0, 1e-15));
    CHECK_THAT(s[1], WithinAbs(1.0, 1e-15));
    CHECK_THAT(s[2], WithinAbs(0.0, 1e-15));
}

TEST_CASE("Hopf projection is gauge invariant and norm preserving", "[model][hopf][property]") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t N = 1 + trial % 3;
        FullState x = testing::random_full(rng, N);
        std::vector<double> th(N);
        for (auto& t : th) t = testing::uniform(rng, 0.0, 2.0 * kPi);
        const ReducedState y0 = hopf_project(x);
        const ReducedState y1 = hopf_project(gauge_act(GaugePhases(th), x));
        CHECK((y0.to_vector() - y1.to_vector()).cwiseAbs().maxCoeff() < 1e-12);

        // |s|^2 = (charge)^2 also off the unit sphere
        const double scale = testing::uniform(rng, 0.5, 1.5);
        x.C[0][0] *= scale;
        x.C[0][1] *= scale;
        const double charge = std::norm(x.C[0][0]) + std::norm(x.C[0][1]);
        CHECK_THAT(bloch_vector(x.C[0]).squaredNorm(), WithinAbs(charge * charge, 1e-12));
    }
}

TEST_CASE("canonical section examples", "[model][section]") {
    const Spinor south = spinor_from_bloch(Eigen::Vector3d(0.0, 0.0, -1.0));
    CHECK(south[0] == Complex{1.0, 0.0});
    CHECK(std::abs(south[1]) == 0.0);

    const Spinor north = spinor_from_bloch(Eigen::Vector3d(0.0, 0.0, 1.0));
    CHECK(std::abs(north[0]) == 0.0);
    CHECK(north[1] == Complex{1.0, 0.0});

    const Spinor equator = spinor_from_bloch(Eigen::Vector3d(0.0, 1.0, 0.0));
    CHECK(equator[0].imag() == 0.0);
    CHECK(equator[0].real() > 0.0);

    const ReducedState off{0.0, 0.0, {Eigen::Vector3d(0.0, 0.0, 0.5)}};
    CHECK_THROWS_AS(hopf_section(off), ConfigError);
}

TEST_CASE("section is a right inverse of the projection", "[model][section][property]") {
    std::mt19937_64 rng(15);
    std::vector<Eigen::Vector3d> samples = {Eigen::Vector3d(0.0, 0.0, 1.0), Eigen::Vector3d(0.0, 0.0, -1.0),
                                            Eigen::Vector3d(1e-13, 0.0, 1.0).normalized(),
                                            Eigen::Vector3d(1e-9, -1e-9, -1.0).normalized()};
    for (int k = 0; k < 500; ++k) samples.push_back(testing::random_unit3(rng));
    for (const auto& s : samples) {
        const Spinor C = spinor_from_bloch(s);
        CHECK_THAT(std::norm(C[0]) + std::norm(C[1]), WithinAbs(1.0, 1e-14));
        CHECK((bloch_vector(C) - s).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(C[0].imag() == 0.0);
        CHECK(C[0].real() >= 0.0);
    }

    const ReducedState y{0.1, 0.2, {samples[0], samples[5], samples[6]}};
    const FullState x = hopf_section(y);
    CHECK(x.A == y.A);
    CHECK(x.B == y.B);
    CHECK((hopf_project(x).to_vector() - y.to_vector()).cwiseAbs().maxCoeff() < 1e-12);
}
