#pragma once

#include "mbloch/dynamics.hpp"
#include "mbloch/integrate.hpp"
#include "mbloch/model.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mbloch {

struct NewtonConfig {
    double tol = 1e-9;            ///< ambient-norm residual |U(T)Y - Y|
    int max_iter = 30;
    int max_halvings = 12;
    double degeneracy = 1e-8;     ///< |det(I - DU)| / Hadamard scale below this gives index 0
    double dedup = 1e-6;          ///< ambient distance under which two fixed points are merged
    double marginal = 1e-6;       ///< multipliers this close to the unit circle are marginal
};

struct FixedPointResult {
    ReducedState Y_sharp;
    double residual = 0.0;
    bool converged = false;
    int newton_iterations = 0;
    Eigen::MatrixXd monodromy;             ///< ambient (2+3N) tangent map DU(T)
    Eigen::MatrixXd constrained_monodromy;  ///< DU(T) on the (2+2N) sphere-tangent space
    std::vector<std::complex<double>> floquet;  ///< eigenvalues of the constrained monodromy
    double det_I_minus_DU = 0.0;
    int index = 0;
    bool stable = false;
    bool marginal = false;
    std::string message;
};

/// Product grid: Maxwell points in the disk |M| <= radius times quasi-uniform sphere points per molecule.
struct SeedGrid {
    double radius = 0.0;
    std::size_t maxwell_count = 1;
    std::size_t sphere_count = 2;
    std::size_t molecules = 1;
};

struct PeriodicSearch {
    std::vector<FixedPointResult> points;
    int index_sum = 0;
    std::size_t seeds = 0;
    std::size_t converged_seeds = 0;
    bool empty_warning = false;
};

struct BranchPoint {
    double amplitude = 0.0;
    FixedPointResult point;
    bool stability_changed = false;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool terminated = false;  ///< true if the schedule could not be completed
    std::string message;
};

/// U(T)Y for T = 2 pi / Omega_p, with the field selected by spec.kind (reduced or modified).
[[nodiscard]] ReducedState poincare_map(const FieldSpec& spec, const IntegratorConfig& cfg, const ReducedState& Y);

/// sqrt(D / (a1 gamma)) scaled by (1 + margin): the sublevel set V <= D/gamma contains every periodic orbit.
[[nodiscard]] double bounding_radius(const SystemParams& params, const ModifiedFieldConfig& cfg, double margin = 0.1);

/// epsilon from default_epsilon, R = max(bounding radius, 1), R_c = R + 2.
[[nodiscard]] ModifiedFieldConfig default_modified_config(const SystemParams& params);

/// Orthonormal tangent-space basis at Y: identity on (A, B) and two vectors orthogonal to each s_n.
[[nodiscard]] Eigen::MatrixXd tangent_basis(const ReducedState& Y);

[[nodiscard]] FixedPointResult newton_fixed_point(const FieldSpec& spec, const IntegratorConfig& cfg,
                                                  const ReducedState& seed, const NewtonConfig& newton = {});

/// Fills monodromy-derived fields (floquet, det, index, stability) from `monodromy` at `result.Y_sharp`.
void classify_fixed_point(FixedPointResult& result, const NewtonConfig& newton = {});

void validate_grid(const SeedGrid& grid);
/// Maxwell-major ordering; each Maxwell point is paired with every combination of sphere points.
[[nodiscard]] std::vector<ReducedState> grid_seeds(const SeedGrid& grid);
/// Fibonacci-style sphere points; for count >= 2 the first and last are the north and south poles.
[[nodiscard]] std::vector<Eigen::Vector3d> sphere_points(std::size_t count);

/// sign(det(I - DU(T))) on the constrained tangent space; 0 when degenerate.
[[nodiscard]] int lefschetz_index(const FixedPointResult& result, double degeneracy = 1e-8);

[[nodiscard]] PeriodicSearch find_all_periodic(const FieldSpec& spec, const IntegratorConfig& cfg,
                                               const std::vector<ReducedState>& seeds, const NewtonConfig& newton,
                                               std::size_t workers = 1);

/// Natural-parameter continuation in the pump amplitude: the pump used at amplitude
/// lambda is spec.pump.scaled(lambda). `start` seeds Newton at amplitudes.front().
[[nodiscard]] Branch continuation(const FieldSpec& spec, const IntegratorConfig& cfg, const ReducedState& start,
                                  const std::vector<double>& amplitudes, const NewtonConfig& newton = {});

}  // namespace mbloch
