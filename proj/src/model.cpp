#include "mbloch/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mbloch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleTolerance = 1e-12;

[[noreturn]] void reject(const std::string& field, const std::string& why) {
    throw ConfigError("invalid parameter '" + field + "': " + why);
}

}  // namespace

double SystemParams::current_bound() const {
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        total += std::abs(kappa_at(n));
    }
    return 0.5 * total;
}

double PumpConfig::period() const { return kTwoPi / Omega_p; }

PumpConfig PumpConfig::scaled(double factor) const {
    PumpConfig out = *this;
    out.offset *= factor;
    for (auto& a : out.cos_coeffs) a *= factor;
    for (auto& b : out.sin_coeffs) b *= factor;
    return out;
}

Eigen::VectorXd FullState::to_vector() const {
    Eigen::VectorXd x(dimension(C.size()));
    x[0] = A;
    x[1] = B;
    for (std::size_t n = 0; n < C.size(); ++n) {
        const auto base = static_cast<Eigen::Index>(2 + 4 * n);
        x[base] = C[n][0].real();
        x[base + 1] = C[n][0].imag();
        x[base + 2] = C[n][1].real();
        x[base + 3] = C[n][1].imag();
    }
    return x;
}

FullState FullState::from_vector(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() < 6 || (x.size() - 2) % 4 != 0) {
        throw ConfigError("full state vector has invalid length " + std::to_string(x.size()));
    }
    FullState out;
    out.A = x[0];
    out.B = x[1];
    const auto N = static_cast<std::size_t>((x.size() - 2) / 4);
    out.C.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        const auto base = static_cast<Eigen::Index>(2 + 4 * n);
        out.C[n] = {Complex{x[base], x[base + 1]}, Complex{x[base + 2], x[base + 3]}};
    }
    return out;
}

Eigen::VectorXd ReducedState::to_vector() const {
    Eigen::VectorXd y(dimension(s.size()));
    y[0] = A;
    y[1] = B;
    for (std::size_t n = 0; n < s.size(); ++n) {
        y.segment<3>(static_cast<Eigen::Index>(2 + 3 * n)) = s[n];
    }
    return y;
}

ReducedState ReducedState::from_vector(const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (y.size() < 5 || (y.size() - 2) % 3 != 0) {
        throw ConfigError("reduced state vector has invalid length " + std::to_string(y.size()));
    }
    ReducedState out;
    out.A = y[0];
    out.B = y[1];
    const auto N = static_cast<std::size_t>((y.size() - 2) / 3);
    out.s.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        out.s[n] = y.segment<3>(static_cast<Eigen::Index>(2 + 3 * n));
    }
    return out;
}

double wrap_angle(double theta) {
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a value just below zero can round up to exactly 2pi
    if (r >= kTwoPi) r = 0.0;
    return r;
}

GaugePhases::GaugePhases(std::vector<double> thetas) : thetas_(std::move(thetas)) {
    for (auto& t : thetas_) {
        if (!std::isfinite(t)) throw ConfigError("gauge phase must be finite");
        t = wrap_angle(t);
    }
}

GaugePhases GaugePhases::compose(const GaugePhases& other) const {
    if (other.size() != size()) {
        throw ConfigError("gauge phase length mismatch in composition");
    }
    std::vector<double> sum(size());
    for (std::size_t n = 0; n < size(); ++n) sum[n] = thetas_[n] + other.thetas_[n];
    return GaugePhases(std::move(sum));
}

SystemParams validate_params(const SystemParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.Omega) || p.Omega <= 0.0) reject("Omega", "must be > 0");
    if (!finite(p.sigma) || p.sigma < 0.0) reject("sigma", "must be >= 0");
    if (!finite(p.c) || p.c <= 0.0) reject("c", "must be > 0");
    if (!finite(p.hbar) || p.hbar <= 0.0) reject("hbar", "must be > 0");
    if (!finite(p.omega1) || !finite(p.omega2)) reject("omega1/omega2", "must be finite");
    if (!(p.omega2 > p.omega1)) reject("omega2", "requires omega2 > omega1");
    if (!finite(p.q)) reject("q", "must be finite");
    if (p.N < 1) reject("N", "must be >= 1");
    if (!p.kappa.empty() && p.kappa.size() != p.N) {
        std::ostringstream os;
        os << "has length " << p.kappa.size() << " but N = " << p.N;
        reject("kappa", os.str());
    }
    for (double k : p.kappa) {
        if (!finite(k) || k < 0.0) reject("kappa", "entries must be >= 0");
    }
    if (p.kappa.empty() && p.q < 0.0) reject("q", "default kappa = 2q must be >= 0");
    return p;
}

void validate_pump(const PumpConfig& pump) {
    if (!std::isfinite(pump.Omega_p) || pump.Omega_p <= 0.0) reject("pump.Omega_p", "must be > 0");
    if (!std::isfinite(pump.offset)) reject("pump.offset", "must be finite");
    for (double a : pump.cos_coeffs) {
        if (!std::isfinite(a)) reject("pump.cos", "must be finite");
    }
    for (double b : pump.sin_coeffs) {
        if (!std::isfinite(b)) reject("pump.sin", "must be finite");
    }
}

void validate_state(const FullState& x, double tol) {
    if (x.C.empty()) throw ConfigError("full state has no molecules");
    for (std::size_t n = 0; n < x.C.size(); ++n) {
        const double charge = std::norm(x.C[n][0]) + std::norm(x.C[n][1]);
        if (!(std::abs(charge - 1.0) <= tol)) {
            throw ConfigError("molecule " + std::to_string(n + 1) + " charge " +
                              std::to_string(charge) + " is not 1");
        }
    }
}

void validate_state(const ReducedState& y, double tol) {
    if (y.s.empty()) throw ConfigError("reduced state has no molecules");
    for (std::size_t n = 0; n < y.s.size(); ++n) {
        const double norm = y.s[n].norm();
        if (!(std::abs(norm - 1.0) <= tol)) {
            throw ConfigError("molecule " + std::to_string(n + 1) + " Bloch vector norm " +
                              std::to_string(norm) + " is not 1");
        }
    }
}

FullState gauge_act(const GaugePhases& phases, const FullState& x) {
    if (phases.size() != x.C.size()) {
        throw ConfigError("gauge phases have length " + std::to_string(phases.size()) +
                          " but state has " + std::to_string(x.C.size()) + " molecules");
    }
    FullState out = x;
    for (std::size_t n = 0; n < x.C.size(); ++n) {
        const Complex factor = std::polar(1.0, phases.angles()[n]);
        out.C[n][0] *= factor;
        out.C[n][1] *= factor;
    }
    return out;
}

Eigen::Vector3d bloch_vector(const Spinor& C) {
    const Complex z = std::conj(C[0]) * C[1];
    return {2.0 * z.real(), 2.0 * z.imag(), std::norm(C[1]) - std::norm(C[0])};
}

ReducedState hopf_project(const FullState& x) {
    ReducedState y;
    y.A = x.A;
    y.B = x.B;
    y.s.reserve(x.C.size());
    for (const auto& C : x.C) y.s.push_back(bloch_vector(C));
    return y;
}

Spinor spinor_from_bloch(const Eigen::Vector3d& s) {
    const double w = std::clamp(s[2], -1.0, 1.0);
    if (w >= 1.0 - kPoleTolerance) {
        return {Complex{0.0, 0.0}, Complex{1.0, 0.0}};
    }
    const Complex transverse{s[0], s[1]};  // u + iv = 2 C1 C2 with C1 real
    if (w <= 0.0) {
        const double c1 = std::sqrt(0.5 * (1.0 - w));
        return {Complex{c1, 0.0}, transverse / (2.0 * c1)};
    }
    // the larger modulus comes from w, the smaller from |u + iv| to keep precision near the pole
    const double c2 = std::sqrt(0.5 * (1.0 + w));
    const double t = std::abs(transverse);
    if (t == 0.0) return {Complex{0.0, 0.0}, Complex{c2, 0.0}};
    return {Complex{t / (2.0 * c2), 0.0}, c2 * transverse / t};
}

FullState hopf_section(const ReducedState& y) {
    validate_state(y);
    FullState x;
    x.A = y.A;
    x.B = y.B;
    x.C.reserve(y.s.size());
    for (const auto& s : y.s) x.C.push_back(spinor_from_bloch(s));
    return x;
}

}  // namespace mbloch
