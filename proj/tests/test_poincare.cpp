#include <catch_amalgamated.hpp>

#include "mbloch/poincare.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace mbloch;
using Catch::Matchers::WithinAbs;

namespace {

FieldSpec decoupled_spec(std::size_t N) {
    FieldSpec spec;
    spec.kind = FieldKind::Reduced;
    spec.params.Omega = 1.0;
    spec.params.sigma = 0.1;
    spec.params.omega1 = 0.0;
    spec.params.omega2 = 0.7;
    spec.params.q = 0.0;
    spec.params.N = N;
    spec.pump.Omega_p = 1.0;
    spec.pump.cos_coeffs = {0.5};
    return spec;
}

FieldSpec coupled_spec() {
    FieldSpec spec;
    spec.kind = FieldKind::Reduced;
    spec.params.Omega = 1.0;
    spec.params.sigma = 0.1;
    spec.params.omega1 = 0.0;
    spec.params.omega2 = 1.0;
    spec.params.q = 0.2;
    spec.params.N = 1;
    spec.params.kappa = {0.4};
    spec.pump.Omega_p = 1.0;
    spec.pump.cos_coeffs = {0.5};
    return spec;
}

SeedGrid grid_for(const FieldSpec& spec, std::size_t maxwell, std::size_t sphere) {
    SeedGrid grid;
    grid.radius = default_modified_config(spec.params).R;
    grid.maxwell_count = maxwell;
    grid.sphere_count = sphere;
    grid.molecules = spec.params.N;
    return grid;
}

}  // namespace

TEST_CASE("sphere points include both poles and lie on the sphere", "[poincare][grid]") {
    const auto one = sphere_points(1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == Eigen::Vector3d(0.0, 0.0, 1.0));

    for (std::size_t count : {2u, 6u, 25u}) {
        const auto pts = sphere_points(count);
        REQUIRE(pts.size() == count);
        CHECK_THAT(pts.front()[2], WithinAbs(1.0, 1e-15));
        CHECK_THAT(pts.back()[2], WithinAbs(-1.0, 1e-15));
        for (const auto& s : pts) CHECK_THAT(s.norm(), WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("grid seeds are the Maxwell-major product grid", "[poincare][grid]") {
    SeedGrid grid{2.0, 3, 4, 2};
    const auto seeds = grid_seeds(grid);
    REQUIRE(seeds.size() == 3 * 16);
    CHECK(seeds[0].A == 0.0);
    CHECK(seeds[0].B == 0.0);
    const auto sphere = sphere_points(4);
    // second molecule varies fastest
    CHECK(seeds[1].s[0] == sphere[0]);
    CHECK(seeds[1].s[1] == sphere[1]);
    CHECK(seeds[4].s[0] == sphere[1]);
    for (const auto& Y : seeds) CHECK(std::hypot(Y.A, Y.B) <= 2.0 + 1e-12);
    CHECK_THAT(std::hypot(seeds.back().A, seeds.back().B), WithinAbs(2.0, 1e-12));

    CHECK_THROWS_AS(grid_seeds(SeedGrid{-1.0, 3, 4, 1}), ConfigError);
    CHECK_THROWS_AS(grid_seeds(SeedGrid{1.0, 0, 4, 1}), ConfigError);
}

TEST_CASE("tangent basis is orthonormal and tangent to the spheres", "[poincare][property]") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t N = 1 + trial % 3;
        ReducedState Y = hopf_project(testing::random_full(rng, N));
        if (trial == 0) Y.s[0] = Eigen::Vector3d(0.0, 0.0, 1.0);
        if (trial == 1) Y.s[0] = Eigen::Vector3d(0.0, 0.0, -1.0);
        const Eigen::MatrixXd P = tangent_basis(Y);
        REQUIRE(P.rows() == static_cast<Eigen::Index>(2 + 3 * N));
        REQUIRE(P.cols() == static_cast<Eigen::Index>(2 + 2 * N));
        CHECK((P.transpose() * P - Eigen::MatrixXd::Identity(P.cols(), P.cols())).cwiseAbs().maxCoeff() < 1e-14);
        const Eigen::VectorXd normal_parts = P.transpose() * [&] {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(P.rows());
            for (std::size_t n = 0; n < N; ++n) v.segment<3>(static_cast<Eigen::Index>(2 + 3 * n)) = Y.s[n];
            return v;
        }();
        CHECK(normal_parts.cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("bounding radius contains the sublevel set", "[poincare]") {
    const FieldSpec spec = coupled_spec();
    const ModifiedFieldConfig cfg = default_modified_config(spec.params);
    CHECK(cfg.R_c == cfg.R + 2.0);
    CHECK(cfg.R >= 1.0);
    const DecayCoefficients decay = lyapunov_decay_coeffs(spec.params, cfg);
    const QuadraticBounds form = lyapunov_form_bounds(spec.params, cfg.epsilon);
    CHECK_THAT(bounding_radius(spec.params, cfg, 0.0), WithinAbs(std::sqrt(decay.D / (form.a1 * decay.gamma)), 1e-12));
    CHECK_THAT(bounding_radius(spec.params, cfg, 0.5), WithinAbs(1.5 * bounding_radius(spec.params, cfg, 0.0), 1e-12));
}

TEST_CASE("decoupled census finds the poles over the damped cavity", "[poincare][census]") {
    for (std::size_t N : {1u, 2u}) {
        const FieldSpec spec = decoupled_spec(N);
        const PeriodicSearch search =
            find_all_periodic(spec, IntegratorConfig{}, grid_seeds(grid_for(spec, 4, 6)), NewtonConfig{});
        REQUIRE(search.points.size() == (std::size_t{1} << N));
        CHECK(search.index_sum == static_cast<int>(search.points.size()));
        CHECK_FALSE(search.empty_warning);

        const double T = spec.pump.period();
        const double decay = std::exp(-0.5 * spec.params.sigma * T);
        for (const auto& fp : search.points) {
            CHECK(fp.converged);
            CHECK(fp.index == 1);
            CHECK(fp.stable);
            CHECK(fp.marginal);
            CHECK(std::abs(fp.Y_sharp.A) < 1e-9);
            CHECK(std::abs(fp.Y_sharp.B) < 1e-9);
            for (const auto& s : fp.Y_sharp.s) CHECK_THAT(std::abs(s[2]), WithinAbs(1.0, 1e-9));
            // damped pair e^{-sigma T/2 +- i nu T} and rotation pairs e^{+-i omega T}
            int damped = 0, rotation = 0;
            for (const auto& mu : fp.floquet) {
                if (std::abs(std::abs(mu) - decay) < 1e-6) ++damped;
                if (std::abs(std::abs(mu) - 1.0) < 1e-6 &&
                    std::abs(std::abs(std::arg(mu)) - std::abs(std::remainder(0.7 * T, 2.0 * std::numbers::pi))) < 1e-6) {
                    ++rotation;
                }
            }
            CHECK(damped == 2);
            CHECK(rotation == static_cast<int>(2 * N));
        }
    }
}

TEST_CASE("coupled sample has converged orbits with consistent indices", "[poincare][coupled]") {
    const FieldSpec spec = coupled_spec();
    IntegratorConfig cfg;
    const PeriodicSearch search = find_all_periodic(spec, cfg, grid_seeds(grid_for(spec, 8, 6)), NewtonConfig{});
    REQUIRE_FALSE(search.points.empty());
    int sum = 0;
    for (const auto& fp : search.points) {
        CHECK(fp.converged);
        CHECK(fp.residual <= 1e-9);
        sum += fp.index;
        const ReducedState image = poincare_map(spec, cfg, fp.Y_sharp);
        CHECK((image.to_vector() - fp.Y_sharp.to_vector()).norm() < 1e-8);
        for (const auto& s : fp.Y_sharp.s) CHECK_THAT(s.norm(), WithinAbs(1.0, 1e-10));
    }
    CHECK(sum == search.index_sum);
    CHECK(search.converged_seeds >= search.points.size());
}

TEST_CASE("search results do not depend on the worker count", "[poincare][parallel]") {
    const FieldSpec spec = coupled_spec();
    const auto seeds = grid_seeds(grid_for(spec, 4, 4));
    const PeriodicSearch one = find_all_periodic(spec, IntegratorConfig{}, seeds, NewtonConfig{}, 1);
    const PeriodicSearch four = find_all_periodic(spec, IntegratorConfig{}, seeds, NewtonConfig{}, 4);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
        CHECK(one.points[i].Y_sharp.to_vector() == four.points[i].Y_sharp.to_vector());
        CHECK(one.points[i].residual == four.points[i].residual);
    }
}

TEST_CASE("Newton rejects a modified-field seed outside the cutoff", "[poincare][modified]") {
    FieldSpec spec = coupled_spec();
    spec.kind = FieldKind::Modified;
    spec.modified = default_modified_config(spec.params);
    ReducedState seed{2.0 * spec.modified.R_c, 0.0, {Eigen::Vector3d(0.0, 0.0, -1.0)}};
    const FixedPointResult r = newton_fixed_point(spec, IntegratorConfig{}, seed);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.message.empty());
}

TEST_CASE("full field is rejected for Poincare maps", "[poincare]") {
    FieldSpec spec = coupled_spec();
    spec.kind = FieldKind::Full;
    ReducedState Y{0.0, 0.0, {Eigen::Vector3d(0.0, 0.0, -1.0)}};
    CHECK_THROWS_AS(poincare_map(spec, IntegratorConfig{}, Y), ConfigError);
}

TEST_CASE("continuation", "[poincare][continuation]") {
    const FieldSpec spec = coupled_spec();
    IntegratorConfig cfg;
    const auto search = find_all_periodic(spec, cfg, grid_seeds(grid_for(spec, 4, 6)), NewtonConfig{});
    REQUIRE_FALSE(search.points.empty());
    const ReducedState start = search.points.front().Y_sharp;

    SECTION("a single amplitude gives a single point") {
        const Branch b = continuation(spec, cfg, start, {1.0});
        REQUIRE(b.points.size() == 1);
        CHECK_FALSE(b.terminated);
        CHECK((b.points[0].point.Y_sharp.to_vector() - start.to_vector()).norm() < 1e-8);
    }
    SECTION("the branch reaches amplitude zero and agrees with a direct solve") {
        const Branch b = continuation(spec, cfg, start, {1.0, 0.5, 0.0});
        REQUIRE_FALSE(b.terminated);
        REQUIRE(b.points.back().amplitude == 0.0);
        FieldSpec off = spec;
        off.pump = spec.pump.scaled(0.0);
        const FixedPointResult direct = newton_fixed_point(off, cfg, b.points.back().point.Y_sharp);
        REQUIRE(direct.converged);
        CHECK((direct.Y_sharp.to_vector() - b.points.back().point.Y_sharp.to_vector()).norm() < 1e-8);
        for (std::size_t i = 1; i < b.points.size(); ++i) CHECK(b.points[i].amplitude < b.points[i - 1].amplitude);
    }
    SECTION("empty schedules are rejected") {
        CHECK_THROWS_AS(continuation(spec, cfg, start, {}), ConfigError);
    }
}
