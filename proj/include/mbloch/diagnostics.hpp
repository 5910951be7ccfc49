#pragma once

#include "mbloch/dynamics.hpp"
#include "mbloch/integrate.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mbloch {

/// How a measured value is compared against its bound.
enum class Relation { AtMost, AtLeast, Below };

[[nodiscard]] std::string_view to_string(Relation relation);

/// One measured quantity against its bound.
struct Check {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    Relation relation = Relation::AtMost;
    bool pass = false;
    std::string note;
};

[[nodiscard]] Check make_check(std::string name, double measured, double bound, std::string note = {},
                               Relation relation = Relation::AtMost);

struct VerificationReport {
    std::vector<Check> checks;
    TrajectoryMetadata source;
    bool renormalized = false;

    [[nodiscard]] bool all_pass() const;
    void append(const VerificationReport& other);
};

/// Max over samples and molecules of | |C_n1|^2 + |C_n2|^2 - 1 |.
[[nodiscard]] VerificationReport check_charge(const Trajectory& traj, double tol = 1e-9);

/// Max over samples and molecules of | |s_n| - 1 | for reduced trajectories.
[[nodiscard]] VerificationReport check_bloch_norm(const Trajectory& traj, double tol = 1e-9);

/// dV/dt <= -gamma V + D at every sample (dV/dt from the field, not differenced) and the
/// integrated envelope V(t) <= V(0) e^{-gamma t} + (D/gamma)(1 - e^{-gamma t}).
/// `spec` supplies the field of the trajectory and epsilon via spec.modified.epsilon.
[[nodiscard]] VerificationReport check_lyapunov(const Trajectory& traj, const FieldSpec& spec,
                                                double slack = 1e-8);

struct AprioriConstants {
    double d1 = 0.0;
    double d2 = 0.0;
    double gamma = 0.0;
};
[[nodiscard]] AprioriConstants apriori_constants(const SystemParams& params, const ModifiedFieldConfig& cfg);

/// Time at which the envelope d1 |M0|^2 e^{-gamma t} + d2 first drops to (sqrt(d2) + 1)^2.
[[nodiscard]] double apriori_crossing_time(const AprioriConstants& k, double M0_sq);

/// |M(t)|^2 <= d1 |M(0)|^2 e^{-gamma t} + d2 at every sample, and the first time the
/// trajectory enters |M| <= sqrt(d2) + 1 for good is at most (1 + entry_margin) times
/// apriori_crossing_time.
[[nodiscard]] VerificationReport check_apriori(const Trajectory& traj, const SystemParams& params,
                                               const ModifiedFieldConfig& cfg, double entry_margin = 0.2,
                                               double slack = 1e-8);

/// Measured entry time into |M| <= radius (after which the trajectory stays inside); +inf if never.
[[nodiscard]] double entry_time(const Trajectory& traj, double radius);

struct GaugeFactor {
    double anchor = 0.0;
    std::vector<double> thetas;  ///< in [0, 2pi)
    double residual = 0.0;       ///< max_n |C_n(t+T) - e^{i theta_n} C_n(t)|
};

/// Phase acquired by each spinor over one period starting at `anchor`. Both anchor and
/// anchor + T must be sample times. Throws NumericalError if an overlap is below 1e-6.
[[nodiscard]] GaugeFactor gauge_factor(const Trajectory& full_traj, double anchor, double T);
[[nodiscard]] std::vector<GaugeFactor> gauge_factors(const Trajectory& full_traj, double T,
                                                     const std::vector<double>& anchors);

/// Max over the sample grid of |(A,B)(t+T) - (A,B)(t)|; reduced trajectories also get the
/// Bloch components, full ones the population inversion. Needs uniform sampling
/// commensurate with T and a span of at least 2T.
[[nodiscard]] VerificationReport check_periodicity(const Trajectory& traj, double T, double tol = 1e-7);

/// w_n(t) for every molecule: result[n][i] at sample i.
[[nodiscard]] std::vector<std::vector<double>> population_inversion(const Trajectory& traj);

/// Current j(t) at every sample.
[[nodiscard]] std::vector<double> current_trace(const Trajectory& traj, const SystemParams& params);

/// Max over common samples of |hopf_project(full) - reduced| in the ambient reduced coordinates.
[[nodiscard]] double projection_deviation(const Trajectory& full_traj, const Trajectory& reduced_traj);

}  // namespace mbloch
