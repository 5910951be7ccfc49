#pragma once

#include "mbloch/dynamics.hpp"
#include "mbloch/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mbloch {

enum class FieldKind { Full, Reduced, Modified };

[[nodiscard]] std::string_view to_string(FieldKind kind);
[[nodiscard]] FieldKind field_kind_from_string(std::string_view name);

/// Everything needed to evaluate one of the three vector fields.
struct FieldSpec {
    FieldKind kind = FieldKind::Reduced;
    SystemParams params;
    PumpConfig pump;
    ModifiedFieldConfig modified;  ///< only read for FieldKind::Modified

    [[nodiscard]] std::size_t dimension() const;
};

/// SHA-256 of a canonical text rendering of the field kind, parameters, pump and cutoff settings.
[[nodiscard]] std::string params_digest(const FieldSpec& spec);

enum class Method { RK4, RK45 };

struct IntegratorConfig {
    Method method = Method::RK45;
    double step = 1e-2;      ///< fixed RK4 step; initial-step hint is computed for RK45
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.0;   ///< 0 disables the cap
    bool renormalize = false;
    double sample_interval = 0.0;  ///< 0 records every accepted step
    std::size_t max_steps = 50'000'000;
};

void validate_integrator(const IntegratorConfig& cfg);

struct TrajectoryMetadata {
    FieldKind kind = FieldKind::Reduced;
    std::size_t molecules = 0;
    std::string params_digest;
    IntegratorConfig integrator;
    double max_norm_drift = 0.0;  ///< max over samples of | |C_n|^2 - 1 | (full) or | |s_n| - 1 | (reduced)
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

/// Time-ordered samples of flat state vectors.
struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> states;
    TrajectoryMetadata meta;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] const Eigen::VectorXd& back() const { return states.back(); }
    [[nodiscard]] FullState full_state(std::size_t i) const;
    [[nodiscard]] ReducedState reduced_state(std::size_t i) const;
    /// Reduced view of any sample: full samples go through hopf_project.
    [[nodiscard]] ReducedState bloch_state(std::size_t i) const;
};

/// Integrates `spec` from y0 over [t0, t1]. t1 == t0 yields the single initial sample.
/// Throws NumericalError on step-size underflow or step-count exhaustion.
[[nodiscard]] Trajectory integrate(const FieldSpec& spec, const IntegratorConfig& cfg,
                                   const Eigen::VectorXd& y0, double t0, double t1);

[[nodiscard]] Trajectory integrate(const SystemParams& params, const PumpConfig& pump, const IntegratorConfig& cfg,
                                   const FullState& x0, double t0, double t1);
[[nodiscard]] Trajectory integrate(const SystemParams& params, const PumpConfig& pump, const IntegratorConfig& cfg,
                                   const ReducedState& y0, double t0, double t1);

/// Final state only; no samples are stored.
[[nodiscard]] Eigen::VectorXd flow_map(const FieldSpec& spec, const IntegratorConfig& cfg,
                                       const Eigen::VectorXd& y0, double t0, double t1);

struct VariationalResult {
    Eigen::VectorXd state;
    Eigen::MatrixXd tangent;  ///< solution of J' = DF(y(t), t) J, J(t0) = I
    std::size_t accepted_steps = 0;
};

/// Reduced and modified fields only; the Jacobian is analytic.
[[nodiscard]] VariationalResult integrate_with_variational(const FieldSpec& spec, const IntegratorConfig& cfg,
                                                           const Eigen::VectorXd& y0, double t0, double t1);

/// Closed-form evolution of i hbar C1' = hbar w1 C1 + i a C2, i hbar C2' = hbar w2 C2 - i a C1 for constant a.
[[nodiscard]] Spinor rabi_reference(const SystemParams& params, double a_const, const Spinor& C0, double t);

/// `t,A,B,u1,v1,w1,...` or `t,A,B,reC11,imC11,reC12,imC12,...`; shortest round-trip float formatting.
[[nodiscard]] std::string csv_header(FieldKind kind, std::size_t molecules);
void write_csv(std::ostream& os, const Trajectory& traj);
[[nodiscard]] Trajectory read_csv(std::istream& is, FieldKind kind);

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

}  // namespace mbloch
