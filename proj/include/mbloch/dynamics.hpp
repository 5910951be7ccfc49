#pragma once

#include "mbloch/model.hpp"

#include <Eigen/Core>

namespace mbloch {

/// Cutoff and Lyapunov settings for the compactified (modified) field.
struct ModifiedFieldConfig {
    double R = 1.0;        ///< Bloch cutoff onset radius in the Maxwell plane
    double R_c = 2.0;      ///< radius beyond which the Maxwell field is exactly -M/|M|^2
    double epsilon = 0.0;  ///< cross-term coefficient of V = E + eps*A*B
};

/// Largest admissible cross-term coefficient family used when none is configured.
[[nodiscard]] double default_epsilon(const SystemParams& params);

/// Throws ConfigError unless 0 < eps < sigma/(2+sigma), eps < min(Omega^2, 1) and sigma*eps <= Omega^2.
void validate_epsilon(const SystemParams& params, double epsilon);
void validate_modified(const SystemParams& params, const ModifiedFieldConfig& cfg);

// ---------------------------------------------------------------------------
// scalar pieces

[[nodiscard]] double pump_value(const PumpConfig& pump, double t);

/// a = (q/c)(A + A_p(t)).
[[nodiscard]] double coupling_a(const SystemParams& params, const PumpConfig& pump, double A, double t);

/// j = sum_n kappa_n Im[conj(C_n1) C_n2].
[[nodiscard]] double current(const SystemParams& params, const FullState& x);
/// j = sum_n (kappa_n / 2) v_n.
[[nodiscard]] double current(const SystemParams& params, const ReducedState& y);

// ---------------------------------------------------------------------------
// vector fields on flat state vectors (layouts as in FullState/ReducedState::to_vector)

void full_rhs(const SystemParams& params, const PumpConfig& pump, double t,
              const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> dx);

void reduced_rhs(const SystemParams& params, const PumpConfig& pump, double t,
                 const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy);

void modified_rhs(const SystemParams& params, const PumpConfig& pump, const ModifiedFieldConfig& cfg,
                  double t, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy);

/// Analytic Jacobian of reduced_rhs with respect to y (ambient coordinates).
void reduced_jacobian(const SystemParams& params, const PumpConfig& pump, double t,
                      const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::MatrixXd> jac);

/// Analytic Jacobian of modified_rhs with respect to y.
void modified_jacobian(const SystemParams& params, const PumpConfig& pump, const ModifiedFieldConfig& cfg,
                       double t, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::MatrixXd> jac);

// typed wrappers; the derivative is returned in the state's own container type

[[nodiscard]] FullState field_full(const SystemParams& params, const PumpConfig& pump, double t, const FullState& x);
[[nodiscard]] ReducedState field_reduced(const SystemParams& params, const PumpConfig& pump, double t,
                                         const ReducedState& y);
[[nodiscard]] ReducedState field_modified(const SystemParams& params, const PumpConfig& pump,
                                          const ModifiedFieldConfig& cfg, double t, const ReducedState& y);

/// H = (B^2 + Omega^2 A^2)/(2c^2) + sum_n hbar(w1|C_n1|^2 + w2|C_n2|^2)
///     - ((A + A_p)/c) sum_n kappa_n Im[conj(C_n1) C_n2].
/// With kappa_n = 2q its Hamilton equations (plus the -sigma B damping) are exactly full_rhs.
[[nodiscard]] double hamiltonian(const SystemParams& params, const PumpConfig& pump, double t, const FullState& x);

// ---------------------------------------------------------------------------
// Lyapunov function V = (Omega^2 A^2 + B^2)/2 + eps*A*B

[[nodiscard]] double lyapunov_V(const SystemParams& params, const ModifiedFieldConfig& cfg, double A, double B);
[[nodiscard]] Eigen::Vector2d lyapunov_gradient(const SystemParams& params, double epsilon, double A, double B);

/// dV/dt along the Maxwell equations with the given current value.
[[nodiscard]] double lyapunov_rate(const SystemParams& params, double epsilon, double A, double B, double j);

/// a1 |M|^2 <= V <= a2 |M|^2.
struct QuadraticBounds {
    double a1 = 0.0;
    double a2 = 0.0;
};
[[nodiscard]] QuadraticBounds lyapunov_form_bounds(const SystemParams& params, double epsilon);

/// dV/dt <= -gamma V + D along every trajectory.
struct DecayCoefficients {
    double gamma = 0.0;
    double D = 0.0;
};
[[nodiscard]] DecayCoefficients lyapunov_decay_coeffs(const SystemParams& params, const ModifiedFieldConfig& cfg);

// ---------------------------------------------------------------------------
// cutoff

/// Smooth step: 1 for r <= R, 0 for r >= R + 1, C-infinity in between.
[[nodiscard]] double zeta(double r, double R);
[[nodiscard]] double zeta_derivative(double r, double R);

}  // namespace mbloch
