#pragma once

#include "mbloch/model.hpp"

#include <random>

#include <Eigen/Core>

namespace mbloch::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Spinor random_spinor(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Vector4d v(g(rng), g(rng), g(rng), g(rng));
    v.normalize();
    return {Complex{v[0], v[1]}, Complex{v[2], v[3]}};
}

inline Eigen::Vector3d random_unit3(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
}

inline FullState random_full(std::mt19937_64& rng, std::size_t N, double maxwell = 1.0) {
    FullState x;
    x.A = uniform(rng, -maxwell, maxwell);
    x.B = uniform(rng, -maxwell, maxwell);
    for (std::size_t n = 0; n < N; ++n) x.C.push_back(random_spinor(rng));
    return x;
}

inline SystemParams random_params(std::mt19937_64& rng, std::size_t N) {
    SystemParams p;
    p.Omega = uniform(rng, 0.5, 2.0);
    p.sigma = uniform(rng, 0.05, 0.5);
    p.omega1 = uniform(rng, -0.5, 0.5);
    p.omega2 = p.omega1 + uniform(rng, 0.3, 2.0);
    p.q = uniform(rng, 0.0, 0.5);
    p.N = N;
    return p;
}

inline PumpConfig random_pump(std::mt19937_64& rng) {
    PumpConfig pump;
    pump.Omega_p = uniform(rng, 0.5, 2.0);
    pump.offset = uniform(rng, -0.2, 0.2);
    pump.cos_coeffs = {uniform(rng, -1.0, 1.0)};
    pump.sin_coeffs = {uniform(rng, -1.0, 1.0)};
    return pump;
}

/// exp(M) by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
    int squarings = 0;
    double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXd S = M / std::ldexp(1.0, squarings);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = term * S / static_cast<double>(k);
        sum += term;
    }
    for (int k = 0; k < squarings; ++k) sum = sum * sum;
    return sum;
}

}  // namespace mbloch::testing
