#include "mbloch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbloch {

namespace {

// exp(-1/x) for x > 0, else 0
double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_derivative(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

std::size_t molecules_of_reduced(Eigen::Index size) { return static_cast<std::size_t>((size - 2) / 3); }

}  // namespace

double default_epsilon(const SystemParams& p) {
    const double sigma = p.sigma;
    const double omega_sq = p.Omega * p.Omega;
    double eps = std::min({sigma / 4.0, sigma * sigma / (2.0 * sigma + 4.0), omega_sq / 4.0,
                           0.5 * sigma / (2.0 + sigma)});
    if (sigma > 0.0) eps = std::min(eps, omega_sq / (2.0 * sigma));
    return eps;
}

void validate_epsilon(const SystemParams& p, double eps) {
    const double omega_sq = p.Omega * p.Omega;
    std::ostringstream os;
    if (!(p.sigma > 0.0)) {
        os << "Lyapunov bounds need sigma > 0 (got " << p.sigma << ")";
    } else if (!(eps > 0.0)) {
        os << "epsilon must be > 0 (got " << eps << ")";
    } else if (!(eps < p.sigma / (2.0 + p.sigma))) {
        os << "epsilon " << eps << " must be < sigma/(2+sigma) = " << p.sigma / (2.0 + p.sigma);
    } else if (!(eps < std::min(omega_sq, 1.0))) {
        os << "epsilon " << eps << " must be < min(Omega^2, 1)";
    } else if (!(p.sigma * eps <= omega_sq)) {
        os << "epsilon " << eps << " must satisfy sigma*epsilon <= Omega^2";
    } else {
        return;
    }
    throw ConfigError("invalid parameter 'modified.epsilon': " + os.str());
}

void validate_modified(const SystemParams& p, const ModifiedFieldConfig& cfg) {
    validate_epsilon(p, cfg.epsilon);
    if (!(cfg.R > 0.0)) throw ConfigError("invalid parameter 'modified.R': must be > 0");
    if (!(cfg.R_c >= cfg.R + 1.0)) {
        throw ConfigError("invalid parameter 'modified.R_c': requires R_c >= R + 1");
    }
}

double pump_value(const PumpConfig& pump, double t) {
    double value = pump.offset;
    const double phase = pump.Omega_p * t;
    for (std::size_t k = 0; k < pump.cos_coeffs.size(); ++k) {
        value += pump.cos_coeffs[k] * std::cos(static_cast<double>(k + 1) * phase);
    }
    for (std::size_t k = 0; k < pump.sin_coeffs.size(); ++k) {
        value += pump.sin_coeffs[k] * std::sin(static_cast<double>(k + 1) * phase);
    }
    return value;
}

double coupling_a(const SystemParams& p, const PumpConfig& pump, double A, double t) {
    return (p.q / p.c) * (A + pump_value(pump, t));
}

double current(const SystemParams& p, const FullState& x) {
    double j = 0.0;
    for (std::size_t n = 0; n < x.C.size(); ++n) {
        j += p.kappa_at(n) * (std::conj(x.C[n][0]) * x.C[n][1]).imag();
    }
    return j;
}

double current(const SystemParams& p, const ReducedState& y) {
    double j = 0.0;
    for (std::size_t n = 0; n < y.s.size(); ++n) j += 0.5 * p.kappa_at(n) * y.s[n][1];
    return j;
}

void full_rhs(const SystemParams& p, const PumpConfig& pump, double t,
              const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> dx) {
    const std::size_t N = static_cast<std::size_t>((x.size() - 2) / 4);
    const double A = x[0];
    const double B = x[1];
    const double alpha = coupling_a(p, pump, A, t) / p.hbar;
    double j = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const auto k = static_cast<Eigen::Index>(2 + 4 * n);
        const double r1 = x[k], i1 = x[k + 1], r2 = x[k + 2], i2 = x[k + 3];
        // Im[conj(C1) C2] = r1*i2 - i1*r2
        j += p.kappa_at(n) * (r1 * i2 - i1 * r2);
        // dC1 = -i w1 C1 + alpha C2 ; dC2 = -i w2 C2 - alpha C1
        dx[k] = p.omega1 * i1 + alpha * r2;
        dx[k + 1] = -p.omega1 * r1 + alpha * i2;
        dx[k + 2] = p.omega2 * i2 - alpha * r1;
        dx[k + 3] = -p.omega2 * r2 - alpha * i1;
    }
    dx[0] = B;
    dx[1] = -p.Omega * p.Omega * A - p.sigma * B + p.c * j;
}

void reduced_rhs(const SystemParams& p, const PumpConfig& pump, double t,
                 const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy) {
    const std::size_t N = molecules_of_reduced(y.size());
    const double A = y[0];
    const double B = y[1];
    const double drive = 2.0 * coupling_a(p, pump, A, t) / p.hbar;
    const double omega = p.omega();
    double j = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const auto k = static_cast<Eigen::Index>(2 + 3 * n);
        const double u = y[k], v = y[k + 1], w = y[k + 2];
        j += 0.5 * p.kappa_at(n) * v;
        dy[k] = omega * v + drive * w;
        dy[k + 1] = -omega * u;
        dy[k + 2] = -drive * u;
    }
    dy[0] = B;
    dy[1] = -p.Omega * p.Omega * A - p.sigma * B + p.c * j;
}

void reduced_jacobian(const SystemParams& p, const PumpConfig& pump, double t,
                      const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::MatrixXd> jac) {
    const std::size_t N = molecules_of_reduced(y.size());
    const double drive = 2.0 * coupling_a(p, pump, y[0], t) / p.hbar;
    const double drive_dA = 2.0 * p.q / (p.c * p.hbar);
    const double omega = p.omega();
    jac.setZero();
    jac(0, 1) = 1.0;
    jac(1, 0) = -p.Omega * p.Omega;
    jac(1, 1) = -p.sigma;
    for (std::size_t n = 0; n < N; ++n) {
        const auto k = static_cast<Eigen::Index>(2 + 3 * n);
        const double u = y[k], w = y[k + 2];
        jac(1, k + 1) = 0.5 * p.c * p.kappa_at(n);
        jac(k, 0) = drive_dA * w;
        jac(k, k + 1) = omega;
        jac(k, k + 2) = drive;
        jac(k + 1, k) = -omega;
        jac(k + 2, 0) = -drive_dA * u;
        jac(k + 2, k) = -drive;
    }
}

void modified_rhs(const SystemParams& p, const PumpConfig& pump, const ModifiedFieldConfig& cfg, double t,
                  const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy) {
    const double rho = std::hypot(y[0], y[1]);
    reduced_rhs(p, pump, t, y, dy);
    if (rho <= std::min(cfg.R, cfg.R_c - 1.0)) return;

    const double z_bloch = zeta(rho, cfg.R);
    const double z_maxwell = zeta(rho, cfg.R_c - 1.0);
    const double inv_rho_sq = 1.0 / (rho * rho);
    dy[0] = z_maxwell * dy[0] - (1.0 - z_maxwell) * y[0] * inv_rho_sq;
    dy[1] = z_maxwell * dy[1] - (1.0 - z_maxwell) * y[1] * inv_rho_sq;
    dy.tail(dy.size() - 2) *= z_bloch;
}

void modified_jacobian(const SystemParams& p, const PumpConfig& pump, const ModifiedFieldConfig& cfg, double t,
                       const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::MatrixXd> jac) {
    reduced_jacobian(p, pump, t, y, jac);
    const double rho = std::hypot(y[0], y[1]);
    if (rho <= std::min(cfg.R, cfg.R_c - 1.0)) return;

    const Eigen::Index n = y.size();
    Eigen::VectorXd f(n);
    reduced_rhs(p, pump, t, y, f);

    const Eigen::Vector2d M(y[0], y[1]);
    const Eigen::Vector2d grad_rho = M / rho;
    const double z_b = zeta(rho, cfg.R);
    const double dz_b = zeta_derivative(rho, cfg.R);
    const double z_m = zeta(rho, cfg.R_c - 1.0);
    const double dz_m = zeta_derivative(rho, cfg.R_c - 1.0);

    const double rho_sq = rho * rho;
    const Eigen::Vector2d tail = -M / rho_sq;
    const Eigen::Matrix2d tail_jac = -Eigen::Matrix2d::Identity() / rho_sq + 2.0 * M * M.transpose() / (rho_sq * rho_sq);
    const Eigen::Vector2d v = f.head<2>();

    // Maxwell rows: z_m * v + (1 - z_m) * tail
    const Eigen::Matrix<double, 2, Eigen::Dynamic> maxwell_rows = jac.topRows(2);
    jac.topRows(2) = z_m * maxwell_rows;
    jac.topLeftCorner<2, 2>() += (1.0 - z_m) * tail_jac + (v - tail) * (dz_m * grad_rho).transpose();

    // Bloch rows: z_b * F_s
    const Eigen::Index nb = n - 2;
    jac.bottomRows(nb) *= z_b;
    jac.bottomLeftCorner(nb, 2) += f.tail(nb) * (dz_b * grad_rho).transpose();
}

FullState field_full(const SystemParams& p, const PumpConfig& pump, double t, const FullState& x) {
    const Eigen::VectorXd xv = x.to_vector();
    Eigen::VectorXd dx(xv.size());
    full_rhs(p, pump, t, xv, dx);
    return FullState::from_vector(dx);
}

ReducedState field_reduced(const SystemParams& p, const PumpConfig& pump, double t, const ReducedState& y) {
    const Eigen::VectorXd yv = y.to_vector();
    Eigen::VectorXd dy(yv.size());
    reduced_rhs(p, pump, t, yv, dy);
    return ReducedState::from_vector(dy);
}

ReducedState field_modified(const SystemParams& p, const PumpConfig& pump, const ModifiedFieldConfig& cfg, double t,
                            const ReducedState& y) {
    if (!(cfg.R_c >= cfg.R + 1.0)) {
        throw ConfigError("invalid parameter 'modified.R_c': requires R_c >= R + 1");
    }
    const Eigen::VectorXd yv = y.to_vector();
    Eigen::VectorXd dy(yv.size());
    modified_rhs(p, pump, cfg, t, yv, dy);
    return ReducedState::from_vector(dy);
}

double hamiltonian(const SystemParams& p, const PumpConfig& pump, double t, const FullState& x) {
    const double field = (x.B * x.B + p.Omega * p.Omega * x.A * x.A) / (2.0 * p.c * p.c);
    double levels = 0.0;
    double dipole = 0.0;
    for (std::size_t n = 0; n < x.C.size(); ++n) {
        levels += p.hbar * (p.omega1 * std::norm(x.C[n][0]) + p.omega2 * std::norm(x.C[n][1]));
        dipole += p.kappa_at(n) * (std::conj(x.C[n][0]) * x.C[n][1]).imag();
    }
    return field + levels - (x.A + pump_value(pump, t)) / p.c * dipole;
}

double lyapunov_V(const SystemParams& p, const ModifiedFieldConfig& cfg, double A, double B) {
    validate_epsilon(p, cfg.epsilon);
    return 0.5 * (p.Omega * p.Omega * A * A + B * B) + cfg.epsilon * A * B;
}

Eigen::Vector2d lyapunov_gradient(const SystemParams& p, double eps, double A, double B) {
    return {p.Omega * p.Omega * A + eps * B, B + eps * A};
}

double lyapunov_rate(const SystemParams& p, double eps, double A, double B, double j) {
    const Eigen::Vector2d grad = lyapunov_gradient(p, eps, A, B);
    const double dB = -p.Omega * p.Omega * A - p.sigma * B + p.c * j;
    return grad[0] * B + grad[1] * dB;
}

QuadraticBounds lyapunov_form_bounds(const SystemParams& p, double eps) {
    const double omega_sq = p.Omega * p.Omega;
    return {0.5 * std::min(omega_sq, 1.0) - 0.5 * eps, 0.5 * std::max(omega_sq, 1.0) + 0.5 * eps};
}

DecayCoefficients lyapunov_decay_coeffs(const SystemParams& p, const ModifiedFieldConfig& cfg) {
    const double eps = cfg.epsilon;
    validate_epsilon(p, eps);
    // dV/dt <= -pA A^2 - pB B^2 + c j (eps A + B), |j| <= jmax
    const double pA = 0.5 * eps * p.Omega * p.Omega;
    const double pB = 0.5 * p.sigma - eps;
    const double drive = p.c * p.current_bound();
    // Young: drive*eps|A| <= (pA/2)A^2 + (drive*eps)^2/(2pA), same for |B| with pB
    const double D = drive * drive * (eps * eps / (2.0 * pA) + 1.0 / (2.0 * pB));
    const QuadraticBounds form = lyapunov_form_bounds(p, eps);
    const double gamma = 0.5 * std::min(pA, pB) / form.a2;
    return {gamma, D};
}

double zeta(double r, double R) {
    if (r <= R) return 1.0;
    if (r >= R + 1.0) return 0.0;
    const double g = bump(R + 1.0 - r);
    const double h = bump(r - R);
    return g / (g + h);
}

double zeta_derivative(double r, double R) {
    if (r <= R || r >= R + 1.0) return 0.0;
    const double g = bump(R + 1.0 - r);
    const double h = bump(r - R);
    const double dg = -bump_derivative(R + 1.0 - r);
    const double dh = bump_derivative(r - R);
    const double sum = g + h;
    return (dg * h - g * dh) / (sum * sum);
}

}  // namespace mbloch
