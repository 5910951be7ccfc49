#include "mbloch/poincare.hpp"

#include "mbloch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace mbloch {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const double kGoldenAngle = std::numbers::pi * (3.0 - std::sqrt(5.0));

void require_reduced_kind(const FieldSpec& spec) {
    if (spec.kind == FieldKind::Full) {
        throw ConfigError("the Poincare map acts on reduced states; use field 'reduced' or 'modified'");
    }
}

ReducedState normalized(ReducedState Y) {
    for (auto& s : Y.s) s.normalize();
    return Y;
}

/// Moves along the tangent step and pulls each Bloch vector back to the unit sphere.
ReducedState retract(const ReducedState& Y, const VectorXd& delta) {
    ReducedState out = Y;
    out.A += delta[0];
    out.B += delta[1];
    for (std::size_t n = 0; n < Y.s.size(); ++n) {
        out.s[n] = (Y.s[n] + delta.segment<3>(static_cast<Index>(2 + 3 * n))).normalized();
    }
    return out;
}

Eigen::Vector3d perpendicular_unit(const Eigen::Vector3d& s) {
    Index axis = 0;
    s.cwiseAbs().minCoeff(&axis);
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[axis] = 1.0;
    return s.cross(e).normalized();
}

double hadamard_scale(const MatrixXd& m) {
    double scale = 1.0;
    for (Index j = 0; j < m.cols(); ++j) scale *= m.col(j).norm();
    return scale;
}

bool lexicographic_less(const VectorXd& a, const VectorXd& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

ReducedState poincare_map(const FieldSpec& spec, const IntegratorConfig& cfg, const ReducedState& Y) {
    require_reduced_kind(spec);
    const VectorXd out = flow_map(spec, cfg, Y.to_vector(), 0.0, spec.pump.period());
    return ReducedState::from_vector(out);
}

double bounding_radius(const SystemParams& params, const ModifiedFieldConfig& cfg, double margin) {
    const DecayCoefficients decay = lyapunov_decay_coeffs(params, cfg);
    const QuadraticBounds form = lyapunov_form_bounds(params, cfg.epsilon);
    return (1.0 + margin) * std::sqrt(decay.D / (form.a1 * decay.gamma));
}

ModifiedFieldConfig default_modified_config(const SystemParams& params) {
    ModifiedFieldConfig cfg;
    cfg.epsilon = default_epsilon(params);
    cfg.R = std::max(bounding_radius(params, cfg), 1.0);
    cfg.R_c = cfg.R + 2.0;
    return cfg;
}

MatrixXd tangent_basis(const ReducedState& Y) {
    const std::size_t N = Y.s.size();
    MatrixXd P = MatrixXd::Zero(static_cast<Index>(2 + 3 * N), static_cast<Index>(2 + 2 * N));
    P(0, 0) = 1.0;
    P(1, 1) = 1.0;
    for (std::size_t n = 0; n < N; ++n) {
        const Eigen::Vector3d s = Y.s[n].normalized();
        const Eigen::Vector3d e1 = perpendicular_unit(s);
        const Eigen::Vector3d e2 = s.cross(e1);
        const auto row = static_cast<Index>(2 + 3 * n);
        const auto col = static_cast<Index>(2 + 2 * n);
        P.block<3, 1>(row, col) = e1;
        P.block<3, 1>(row, col + 1) = e2;
    }
    return P;
}

void classify_fixed_point(FixedPointResult& result, const NewtonConfig& newton) {
    const MatrixXd P = tangent_basis(result.Y_sharp);
    result.constrained_monodromy = P.transpose() * result.monodromy * P;
    const Index m = result.constrained_monodromy.rows();

    Eigen::EigenSolver<MatrixXd> solver(result.constrained_monodromy, false);
    result.floquet.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
    std::sort(result.floquet.begin(), result.floquet.end(), [](const auto& a, const auto& b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        return std::arg(a) < std::arg(b);
    });

    const MatrixXd I_minus = MatrixXd::Identity(m, m) - result.constrained_monodromy;
    result.det_I_minus_DU = I_minus.determinant();
    result.index = lefschetz_index(result, newton.degeneracy);

    result.marginal = false;
    result.stable = true;
    for (const auto& mu : result.floquet) {
        const double modulus = std::abs(mu);
        if (std::abs(modulus - 1.0) <= newton.marginal) {
            result.marginal = true;
        } else if (modulus > 1.0) {
            result.stable = false;
        }
    }
}

int lefschetz_index(const FixedPointResult& result, double degeneracy) {
    if (result.constrained_monodromy.size() == 0) {
        throw ConfigError("fixed point has no monodromy; run newton_fixed_point first");
    }
    const Index m = result.constrained_monodromy.rows();
    const MatrixXd I_minus = MatrixXd::Identity(m, m) - result.constrained_monodromy;
    const double det = I_minus.determinant();
    const double scale = hadamard_scale(I_minus);
    if (!(std::abs(det) > degeneracy * scale)) return 0;
    return det > 0.0 ? 1 : -1;
}

FixedPointResult newton_fixed_point(const FieldSpec& spec, const IntegratorConfig& cfg, const ReducedState& seed,
                                    const NewtonConfig& newton) {
    require_reduced_kind(spec);
    validate_state(seed, 1e-6);
    const double T = spec.pump.period();
    const Index n = static_cast<Index>(ReducedState::dimension(seed.s.size()));

    FixedPointResult result;
    ReducedState Y = normalized(seed);
    bool rank_deficient = false;
    // the compactified field is radial beyond R_c, so its only fixed point out there is the
    // point at infinity, where the ambient residual vanishes spuriously; keep iterates inside
    const auto admissible = [&](const ReducedState& z) {
        return spec.kind != FieldKind::Modified || std::hypot(z.A, z.B) < spec.modified.R_c;
    };
    if (!admissible(Y)) {
        result.Y_sharp = Y;
        result.residual = std::numeric_limits<double>::infinity();
        result.message = "seed lies outside the cutoff radius R_c";
        return result;
    }

    for (int iter = 1; iter <= newton.max_iter; ++iter) {
        const VectorXd y = Y.to_vector();
        const VariationalResult var = integrate_with_variational(spec, cfg, y, 0.0, T);
        const VectorXd r = var.state - y;
        const double res = r.norm();
        result.Y_sharp = Y;
        result.residual = res;
        result.newton_iterations = iter;
        result.monodromy = var.tangent;
        if (res <= newton.tol) {
            result.converged = true;
            break;
        }

        const MatrixXd P = tangent_basis(Y);
        const MatrixXd lhs = (var.tangent - MatrixXd::Identity(n, n)) * P;
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(lhs);
        cod.setThreshold(1e-12);
        if (cod.rank() < lhs.cols()) rank_deficient = true;
        const VectorXd xi = cod.solve(-r);
        const VectorXd delta = P * xi;

        bool improved = false;
        double lambda = 1.0;
        for (int h = 0; h <= newton.max_halvings; ++h, lambda *= 0.5) {
            const ReducedState trial = retract(Y, lambda * delta);
            if (!admissible(trial)) continue;
            const VectorXd ty = trial.to_vector();
            const double trial_res = (flow_map(spec, cfg, ty, 0.0, T) - ty).norm();
            if (std::isfinite(trial_res) && trial_res < res) {
                Y = trial;
                improved = true;
                break;
            }
        }
        if (!improved) {
            std::ostringstream os;
            os << "Newton stalled after " << iter << " iterations at residual " << res;
            result.message = os.str();
            break;
        }
    }

    if (!result.converged && result.message.empty()) {
        std::ostringstream os;
        os << "no convergence in " << newton.max_iter << " iterations; final residual " << result.residual;
        result.message = os.str();
    }
    classify_fixed_point(result, newton);
    if (result.converged && (rank_deficient || result.index == 0)) {
        result.message = "degenerate fixed point (singular I - DU(T))";
    }
    return result;
}

void validate_grid(const SeedGrid& grid) {
    if (!(grid.radius >= 0.0) || !std::isfinite(grid.radius)) {
        throw ConfigError("invalid parameter 'grid.radius': must be finite and >= 0");
    }
    if (grid.maxwell_count < 1) throw ConfigError("invalid parameter 'grid.maxwell_count': must be >= 1");
    if (grid.sphere_count < 1) throw ConfigError("invalid parameter 'grid.sphere_count': must be >= 1");
    if (grid.molecules < 1) throw ConfigError("seed grid needs at least one molecule");
}

std::vector<Eigen::Vector3d> sphere_points(std::size_t count) {
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    if (count == 1) {
        pts.emplace_back(0.0, 0.0, 1.0);
        return pts;
    }
    for (std::size_t k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(count - 1);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = kGoldenAngle * static_cast<double>(k);
        pts.push_back(Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z).normalized());
    }
    return pts;
}

std::vector<ReducedState> grid_seeds(const SeedGrid& grid) {
    validate_grid(grid);
    std::vector<Eigen::Vector2d> disk;
    disk.reserve(grid.maxwell_count);
    disk.emplace_back(0.0, 0.0);
    for (std::size_t k = 1; k < grid.maxwell_count; ++k) {
        const double r = grid.radius * std::sqrt(static_cast<double>(k) / static_cast<double>(grid.maxwell_count - 1));
        const double phi = kGoldenAngle * static_cast<double>(k);
        disk.emplace_back(r * std::cos(phi), r * std::sin(phi));
    }
    const auto sphere = sphere_points(grid.sphere_count);

    std::size_t combos = 1;
    for (std::size_t n = 0; n < grid.molecules; ++n) combos *= grid.sphere_count;

    std::vector<ReducedState> seeds;
    seeds.reserve(disk.size() * combos);
    for (const auto& M : disk) {
        for (std::size_t c = 0; c < combos; ++c) {
            ReducedState Y;
            Y.A = M[0];
            Y.B = M[1];
            Y.s.resize(grid.molecules);
            // mixed-radix digits of c, first molecule most significant
            std::size_t rest = c;
            for (std::size_t n = grid.molecules; n-- > 0;) {
                Y.s[n] = sphere[rest % grid.sphere_count];
                rest /= grid.sphere_count;
            }
            seeds.push_back(std::move(Y));
        }
    }
    return seeds;
}

PeriodicSearch find_all_periodic(const FieldSpec& spec, const IntegratorConfig& cfg,
                                 const std::vector<ReducedState>& seeds, const NewtonConfig& newton,
                                 std::size_t workers) {
    require_reduced_kind(spec);
    std::vector<FixedPointResult> results(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
        try {
            results[i] = newton_fixed_point(spec, cfg, seeds[i], newton);
        } catch (const NumericalError& e) {
            results[i].Y_sharp = seeds[i];
            results[i].message = e.what();
        }
    });

    std::vector<FixedPointResult> converged;
    for (auto& r : results) {
        if (r.converged) converged.push_back(std::move(r));
    }
    PeriodicSearch out;
    out.seeds = seeds.size();
    out.converged_seeds = converged.size();

    // Canonical order first so clustering does not depend on seed order.
    std::vector<VectorXd> keys;
    keys.reserve(converged.size());
    for (const auto& r : converged) keys.push_back(r.Y_sharp.to_vector());
    std::vector<std::size_t> order(converged.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lexicographic_less(keys[a], keys[b])) return true;
        if (lexicographic_less(keys[b], keys[a])) return false;
        return converged[a].residual < converged[b].residual;
    });

    std::vector<std::size_t> anchors;  // first member of each cluster in canonical order
    std::vector<std::size_t> best;     // lowest-residual member of each cluster
    for (std::size_t idx : order) {
        bool merged = false;
        for (std::size_t c = 0; c < anchors.size(); ++c) {
            if ((keys[idx] - keys[anchors[c]]).norm() < newton.dedup) {
                if (converged[idx].residual < converged[best[c]].residual) best[c] = idx;
                merged = true;
                break;
            }
        }
        if (!merged) {
            anchors.push_back(idx);
            best.push_back(idx);
        }
    }

    std::sort(best.begin(), best.end(), [&](std::size_t a, std::size_t b) {
        if (converged[a].residual != converged[b].residual) return converged[a].residual < converged[b].residual;
        return lexicographic_less(keys[a], keys[b]);
    });
    for (std::size_t idx : best) {
        out.index_sum += converged[idx].index;
        out.points.push_back(converged[idx]);
    }
    out.empty_warning = out.points.empty();
    return out;
}

Branch continuation(const FieldSpec& spec, const IntegratorConfig& cfg, const ReducedState& start,
                    const std::vector<double>& amplitudes, const NewtonConfig& newton) {
    require_reduced_kind(spec);
    if (amplitudes.empty()) throw ConfigError("continuation needs at least one amplitude");

    const auto [lo, hi] = std::minmax_element(amplitudes.begin(), amplitudes.end());
    const double min_step = 1e-4 * (*hi - *lo);

    auto solve_at = [&](double amplitude, const ReducedState& seed) {
        FieldSpec at = spec;
        at.pump = spec.pump.scaled(amplitude);
        try {
            return newton_fixed_point(at, cfg, seed, newton);
        } catch (const NumericalError& e) {
            FixedPointResult failed;
            failed.Y_sharp = seed;
            failed.message = e.what();
            return failed;
        }
    };

    Branch branch;
    FixedPointResult first = solve_at(amplitudes.front(), start);
    if (!first.converged) {
        branch.terminated = true;
        branch.message = "branch start did not converge: " + first.message;
        return branch;
    }
    branch.points.push_back({amplitudes.front(), std::move(first), false});

    for (std::size_t k = 1; k < amplitudes.size(); ++k) {
        const double goal = amplitudes[k];
        double step = goal - branch.points.back().amplitude;
        while (branch.points.back().amplitude != goal) {
            const BranchPoint& last = branch.points.back();
            const double remaining = goal - last.amplitude;
            if (std::abs(step) > std::abs(remaining)) step = remaining;
            const double amplitude = std::abs(step) == std::abs(remaining) ? goal : last.amplitude + step;
            FixedPointResult next = solve_at(amplitude, last.point.Y_sharp);
            if (next.converged) {
                const bool changed = next.stable != last.point.stable;
                branch.points.push_back({amplitude, std::move(next), changed});
                step *= 2.0;
                continue;
            }
            step *= 0.5;
            if (std::abs(step) < min_step || step == 0.0) {
                std::ostringstream os;
                os << "continuation stopped at amplitude " << last.amplitude << " while heading to " << goal
                   << ": " << next.message;
                branch.terminated = true;
                branch.message = os.str();
                return branch;
            }
        }
    }
    return branch;
}

}  // namespace mbloch
