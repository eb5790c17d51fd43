#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hambif/bifalgebra.hpp"

namespace hambif {

/// Right-hand side of x' = J grad H(x).
struct HamiltonianField {
    int n = 0;  // state dimension is 2n
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradH;
    std::optional<std::function<double(const Eigen::VectorXd&)>> hamiltonian;

    Eigen::VectorXd fieldAt(const Eigen::VectorXd& x) const;
};

/// Quadratic Hamiltonian H = <Lx, x>/2; its field is exactly J L x.
HamiltonianField quadratic_field(const BlockHessian& L);

/// dim ker(exp(2 pi lambda J L) - I), the linear-flow count of
/// independent 2pi-periodic modes. Nonzero above the L-kernel baseline
/// exactly when lambda is in Lambda(L); this is the independent oracle
/// for lambda_j / lambda_window.
int linear_monodromy_kernel(const BlockHessian& L, double lambda);

struct FlowResult {
    Eigen::VectorXd state;
    std::optional<double> energyDrift;  // |H(x(T)) - H(x(0))| when H given
};

/// x(T) by adaptive high-order integration with local error <= stepTol.
/// Negative T integrates the reversed field.
FlowResult flow(const HamiltonianField& field, const Eigen::VectorXd& x,
                double T, double stepTol);

struct OrbitRecord {
    std::vector<std::pair<double, Eigen::VectorXd>> samples;  // (t, state)
    double period = 0.0;       // 2 pi lambda, the full period found
    double residual = 0.0;     // closure defect of the 2pi map
    double amplitude = 0.0;    // max_t |x(t) - x0|
    double lambda = 0.0;
    std::optional<double> energyDrift;
    bool converged = false;
};

struct ShootFailure {
    int attempts = 0;
    double bestResidual = 0.0;
    std::string reason;
};

using ShootOutcome = std::variant<OrbitRecord, ShootFailure>;

struct ShootOptions {
    double shootTol = 1e-9;
    double stepTol = 1e-11;
    int maxNewtonIter = 40;
    int maxRetries = 6;           // amplitude halvings after the first try
    double lambdaDriftTol = 0.1;  // accepted relative excursion of lambda
    int sampleCount = 256;
};

/// Newton search for a periodic orbit of x' = lambda J grad H near x0:
/// unknowns (xi, lambda), residuals = 2pi-closure, amplitude pinning
/// |xi| = amplitude, and a phase condition (xi orthogonal to the field).
/// The initial direction is the kernel mode of G_j(lambda0 L); nu = 0
/// directions never enter (they produce no G-kernel). On failure the
/// amplitude is halved, up to maxRetries times. Failure is a first-class
/// result, not an exception.
ShootOutcome shoot_periodic(const HamiltonianField& field,
                            const BlockHessian& hessianAtX0,
                            const Eigen::VectorXd& x0, double lambda0,
                            double amplitude, const ShootOptions& opts = {});

struct TrajectoryMetrics {
    double hausdorffToPoint = 0.0;  // == max_t |x(t) - x0| for a point target
    double minimalPeriod = 0.0;
};

/// Hausdorff distance of the sampled trajectory to {x0} and the minimal
/// period by the subharmonic test: smallest T/k (k <= 8) whose flow
/// returns to the start within 10 * shootTol.
TrajectoryMetrics trajectory_metrics(const HamiltonianField& field,
                                     const OrbitRecord& rec,
                                     const Eigen::VectorXd& x0,
                                     double shootTol = 1e-9);

/// Tabular dump (t, state components, H when available), one sample per
/// line, for external plotting.
std::string orbit_dump(const HamiltonianField& field, const OrbitRecord& rec);

}  // namespace hambif
