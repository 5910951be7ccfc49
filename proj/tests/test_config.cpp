#include <catch_amalgamated.hpp>

#include "mbloch/config.hpp"

#include <filesystem>
#include <fstream>

using namespace mbloch;
using Catch::Matchers::ContainsSubstring;

namespace {

Json sample_doc() {
    return Json::parse(R"({
      "system": {"Omega": 1.0, "sigma": 0.1, "omega1": 0.0, "omega2": 1.0, "q": 0.2, "kappa": [0.4]},
      "pump": {"Omega_p": 1.0, "cos": [0.5]},
      "integrator": {"method": "rk45", "abs_tol": 1e-10, "rel_tol": 1e-10},
      "grid": {"maxwell_count": 8, "sphere_count": 6},
      "simulate": {"field": "full", "periods": 3, "initial": {"A": 0.3, "spinors": [[0.6, 0.0, 0.0, 0.8]]}}
    })");
}

}  // namespace

TEST_CASE("empty document gives the defaults", "[config]") {
    const RunConfig cfg = parse_config(Json::object());
    CHECK(cfg.system.Omega == 1.0);
    CHECK(cfg.system.N == 1);
    CHECK(cfg.integrator.method == Method::RK45);
    CHECK(cfg.simulate.field == FieldKind::Full);
    CHECK(cfg.periodic.field == FieldKind::Reduced);
    CHECK(cfg.output.workers == 1);
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("sample document parses", "[config]") {
    const RunConfig cfg = parse_config(sample_doc());
    CHECK(cfg.system.q == 0.2);
    CHECK(cfg.system.kappa == std::vector<double>{0.4});
    CHECK(cfg.pump.cos_coeffs == std::vector<double>{0.5});
    CHECK(cfg.grid.maxwell_count == 8);
    CHECK(cfg.simulate.periods == 3.0);
    REQUIRE(cfg.simulate.initial.spinors.size() == 1);
    CHECK(cfg.simulate.initial.spinors[0][3] == 0.8);
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("unknown sections and keys are rejected by name", "[config]") {
    Json doc = sample_doc();
    doc["sytem"] = Json::object();
    CHECK_THROWS_WITH(parse_config(doc), ContainsSubstring("sytem"));

    doc = sample_doc();
    doc["system"]["Omgea"] = 1.0;
    CHECK_THROWS_WITH(parse_config(doc), ContainsSubstring("system.Omgea"));

    doc = sample_doc();
    doc["simulate"]["initial"]["C"] = 1.0;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("type errors are configuration errors", "[config]") {
    Json doc = sample_doc();
    doc["system"]["Omega"] = "fast";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc = sample_doc();
    doc["grid"]["maxwell_count"] = -3;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc = sample_doc();
    doc["integrator"]["method"] = "euler";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("invalid parameters fail validation", "[config]") {
    Json doc = sample_doc();
    doc["system"]["omega2"] = 0.0;
    CHECK_THROWS_WITH(validate_config(parse_config(doc)), ContainsSubstring("omega2"));

    doc = sample_doc();
    doc["system"]["N"] = 2;
    CHECK_THROWS_WITH(validate_config(parse_config(doc)), ContainsSubstring("kappa"));

    doc = sample_doc();
    doc["verify"] = {{"criteria", {11}}};
    CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);

    doc = sample_doc();
    doc["modified"] = {{"R", 5.0}, {"R_c", 5.5}};
    CHECK_THROWS_WITH(validate_config(parse_config(doc)), ContainsSubstring("R_c"));
}

TEST_CASE("overrides use dotted paths and JSON values", "[config][override]") {
    Json doc = sample_doc();
    apply_override(doc, "system.q=0.3");
    apply_override(doc, "pump.cos=[0.1,0.2]");
    apply_override(doc, "integrator.renormalize=true");
    apply_override(doc, "simulate.field=reduced");
    apply_override(doc, "simulate.initial.A=1.5");
    apply_override(doc, "output.dir=somewhere");
    const RunConfig cfg = parse_config(doc);
    CHECK(cfg.system.q == 0.3);
    CHECK(cfg.pump.cos_coeffs == std::vector<double>{0.1, 0.2});
    CHECK(cfg.integrator.renormalize);
    CHECK(cfg.simulate.field == FieldKind::Reduced);
    CHECK(cfg.simulate.initial.A == 1.5);
    CHECK(cfg.output.dir == "somewhere");

    CHECK_THROWS_AS(apply_override(doc, "noequals"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "toplevel=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "system..q=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "system.q.x=1"), ConfigError);
}

TEST_CASE("config files are read and bad JSON is reported", "[config]") {
    const auto dir = std::filesystem::temp_directory_path() / "mbloch_test_config";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "good.json") << sample_doc().dump();
        std::ofstream(dir / "bad.json") << "{\"system\": ";
    }
    CHECK(read_config_file(dir / "good.json") == sample_doc());
    CHECK_THROWS_WITH(read_config_file(dir / "bad.json"), ContainsSubstring("not valid JSON"));
    CHECK_THROWS_AS(read_config_file(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("initial states", "[config]") {
    InitialSection init;
    const ReducedState lower = initial_reduced(init, 2);
    REQUIRE(lower.s.size() == 2);
    CHECK(lower.s[1] == Eigen::Vector3d(0.0, 0.0, -1.0));
    const FullState ground = initial_full(init, 1);
    CHECK(ground.C[0][0] == Complex{1.0, 0.0});

    init.bloch = {{0.6, 0.0, 0.8}};
    const FullState lifted = initial_full(init, 1);
    CHECK((hopf_project(lifted).s[0] - Eigen::Vector3d(0.6, 0.0, 0.8)).norm() < 1e-15);

    init.bloch = {{0.6, 0.0, 0.9}};
    CHECK_THROWS_AS(initial_reduced(init, 1), ConfigError);
    init.bloch = {{0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(initial_reduced(init, 2), ConfigError);
}

TEST_CASE("modified settings are resolved from the system", "[config]") {
    const RunConfig cfg = parse_config(sample_doc());
    const ModifiedFieldConfig m = resolve_modified(cfg);
    CHECK(m.epsilon == default_epsilon(cfg.system));
    CHECK(m.R_c == m.R + 2.0);
    const FieldSpec spec = make_field_spec(cfg, FieldKind::Modified);
    CHECK(spec.modified.R == m.R);
    CHECK(spec.params.q == 0.2);
}

TEST_CASE("resolved config is complete and reparses to itself", "[config]") {
    RunConfig cfg = parse_config(sample_doc());
    cfg.output.dir = "elsewhere";
    cfg.output.workers = 7;
    const Json resolved = resolved_config(cfg);
    CHECK_FALSE(resolved.contains("output"));
    CHECK(resolved["system"]["kappa"] == Json::array({0.4}));
    CHECK(resolved["modified"].contains("R"));
    CHECK(resolved_config(parse_config(resolved)) == resolved);
}
