#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mbloch {

using Complex = std::complex<double>;

/// Raised for invalid parameters, configuration, or state input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure cannot proceed (step underflow etc).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical constants of the cavity mode and the two-level molecules.
///
/// Defaults are nondimensional (hbar = c = 1). `kappa` holds one current
/// weight per molecule; an empty vector means "use 2q for every molecule",
/// which reproduces the single-molecule current j = 2q Im[conj(C1) C2].
struct SystemParams {
    double Omega = 1.0;   ///< cavity resonance frequency
    double sigma = 0.1;   ///< dissipation coefficient
    double c = 1.0;       ///< speed of light
    double hbar = 1.0;
    double omega1 = 0.0;  ///< lower level frequency
    double omega2 = 1.0;  ///< upper level frequency
    double q = 0.0;       ///< coupling constant (omega * dipole)
    std::size_t N = 1;
    std::vector<double> kappa;

    [[nodiscard]] double omega() const { return omega2 - omega1; }
    [[nodiscard]] double kappa_at(std::size_t n) const {
        return kappa.empty() ? 2.0 * q : kappa[n];
    }
    /// Upper bound on |j| for unit-charge states: sum of kappa_n / 2.
    [[nodiscard]] double current_bound() const;
};

/// Periodic external drive A_p(t) = offset + sum_k a_k cos(k Omega_p t) + b_k sin(k Omega_p t).
struct PumpConfig {
    double Omega_p = 1.0;
    double offset = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    [[nodiscard]] double period() const;
    /// Same waveform with every coefficient (offset included) multiplied by `factor`.
    [[nodiscard]] PumpConfig scaled(double factor) const;
};

using Spinor = std::array<Complex, 2>;

/// Maxwell pair plus one unit-norm spinor per molecule.
struct FullState {
    double A = 0.0;
    double B = 0.0;
    std::vector<Spinor> C;

    [[nodiscard]] std::size_t molecules() const { return C.size(); }
    [[nodiscard]] static std::size_t dimension(std::size_t N) { return 2 + 4 * N; }
    /// Flat layout (A, B, Re C11, Im C11, Re C12, Im C12, Re C21, ...).
    [[nodiscard]] Eigen::VectorXd to_vector() const;
    [[nodiscard]] static FullState from_vector(const Eigen::Ref<const Eigen::VectorXd>& x);
};

/// Maxwell pair plus one Bloch vector (u, v, w) per molecule.
struct ReducedState {
    double A = 0.0;
    double B = 0.0;
    std::vector<Eigen::Vector3d> s;

    [[nodiscard]] std::size_t molecules() const { return s.size(); }
    [[nodiscard]] static std::size_t dimension(std::size_t N) { return 2 + 3 * N; }
    /// Flat layout (A, B, u1, v1, w1, u2, ...).
    [[nodiscard]] Eigen::VectorXd to_vector() const;
    [[nodiscard]] static ReducedState from_vector(const Eigen::Ref<const Eigen::VectorXd>& y);
};

/// Per-molecule U(1) phases, stored reduced to [0, 2pi).
class GaugePhases {
public:
    GaugePhases() = default;
    explicit GaugePhases(std::vector<double> thetas);

    [[nodiscard]] const std::vector<double>& angles() const { return thetas_; }
    [[nodiscard]] std::size_t size() const { return thetas_.size(); }
    [[nodiscard]] GaugePhases compose(const GaugePhases& other) const;

private:
    std::vector<double> thetas_;
};

[[nodiscard]] double wrap_angle(double theta);

/// Returns `params` unchanged when every invariant holds; throws ConfigError naming the field otherwise.
SystemParams validate_params(const SystemParams& params);
void validate_pump(const PumpConfig& pump);

/// Throws ConfigError if any spinor deviates from unit charge by more than `tol`.
void validate_state(const FullState& x, double tol = 1e-9);
void validate_state(const ReducedState& y, double tol = 1e-9);

[[nodiscard]] FullState gauge_act(const GaugePhases& phases, const FullState& x);

/// Hopf map: each spinor goes to its Bloch vector
/// u = 2 Re(conj(C1) C2), v = 2 Im(conj(C1) C2), w = |C2|^2 - |C1|^2.
[[nodiscard]] Eigen::Vector3d bloch_vector(const Spinor& C);
[[nodiscard]] ReducedState hopf_project(const FullState& x);

/// Canonical lift of a Bloch vector: C1 real and nonnegative, (0, 1) at the north pole.
[[nodiscard]] Spinor spinor_from_bloch(const Eigen::Vector3d& s);
[[nodiscard]] FullState hopf_section(const ReducedState& y);

}  // namespace mbloch
