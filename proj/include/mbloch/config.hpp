#pragma once

#include "mbloch/dynamics.hpp"
#include "mbloch/integrate.hpp"
#include "mbloch/model.hpp"
#include "mbloch/poincare.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mbloch {

using Json = nlohmann::ordered_json;

/// Initial condition as written in a config: spinors, Bloch vectors, or neither
/// (every molecule in the lower level).
struct InitialSection {
    double A = 0.0;
    double B = 0.0;
    std::vector<std::array<double, 4>> spinors;  ///< (Re C1, Im C1, Re C2, Im C2) per molecule
    std::vector<std::array<double, 3>> bloch;    ///< (u, v, w) per molecule
};

struct SimulateSection {
    FieldKind field = FieldKind::Full;
    double t0 = 0.0;
    double periods = 10.0;        ///< used when t1 is absent
    std::optional<double> t1;
    InitialSection initial;
    std::vector<std::string> checks = {"norm"};  ///< any of norm, lyapunov, apriori
    double norm_tol = 1e-9;
};

/// Unset values are derived from the system: epsilon from default_epsilon, R from the
/// bounding radius, R_c = R + 2.
struct ModifiedSection {
    std::optional<double> R;
    std::optional<double> R_c;
    std::optional<double> epsilon;
};

struct GridSection {
    std::optional<double> radius;  ///< defaults to the resolved cutoff radius R
    std::size_t maxwell_count = 8;
    std::size_t sphere_count = 6;
};

struct PeriodicSection {
    FieldKind field = FieldKind::Reduced;
};

struct SweepSection {
    FieldKind field = FieldKind::Reduced;
    std::vector<double> amplitudes = {0.0, 0.5, 1.0};
    std::optional<InitialSection> start;  ///< continue from this seed only instead of a grid search
};

struct VerifySection {
    std::vector<int> criteria;  ///< empty runs all
    std::uint64_t seed = 20260101;
};

struct RabiSection {
    double a = 0.7;
    std::array<double, 4> C0 = {1.0, 0.0, 0.0, 0.0};
    double t = 10.0;
    double tol = 1e-8;
};

struct OutputSection {
    std::string dir = "out";
    std::size_t workers = 1;
};

struct RunConfig {
    SystemParams system;
    PumpConfig pump;
    IntegratorConfig integrator;
    ModifiedSection modified;
    NewtonConfig newton;
    GridSection grid;
    SimulateSection simulate;
    PeriodicSection periodic;
    SweepSection sweep;
    VerifySection verify;
    RabiSection rabi;
    OutputSection output;
};

/// Builds a RunConfig from a JSON document. Missing sections and keys take their
/// defaults; unknown sections or keys raise ConfigError naming the offending path.
[[nodiscard]] RunConfig parse_config(const Json& doc);

[[nodiscard]] Json read_config_file(const std::filesystem::path& path);

/// Applies "section.key=value" to `doc`. The value is parsed as JSON when possible
/// (numbers, booleans, arrays) and taken as a string otherwise.
void apply_override(Json& doc, const std::string& assignment);

/// Validates everything a command could touch (parameters, pump, integrator, Newton, grid).
void validate_config(const RunConfig& cfg);

/// Resolved cutoff settings: defaults filled in, then validated.
[[nodiscard]] ModifiedFieldConfig resolve_modified(const RunConfig& cfg);

[[nodiscard]] FieldSpec make_field_spec(const RunConfig& cfg, FieldKind kind);

/// Reduced initial state for the configured molecules.
[[nodiscard]] ReducedState initial_reduced(const InitialSection& init, std::size_t N);
[[nodiscard]] FullState initial_full(const InitialSection& init, std::size_t N);

/// Every setting with defaults and derived values filled in. The output section is
/// left out so documents do not depend on where they were written or on the worker count.
[[nodiscard]] Json resolved_config(const RunConfig& cfg);

}  // namespace mbloch
