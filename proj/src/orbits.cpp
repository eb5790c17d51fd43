#include "hambif/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <boost/numeric/odeint.hpp>

namespace hambif {

namespace {

namespace odeint = boost::numeric::odeint;

using State = std::vector<double>;

Eigen::VectorXd to_eigen(const State& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
}

State to_state(const Eigen::VectorXd& v) {
    return State(v.data(), v.data() + v.size());
}

}  // namespace

Eigen::VectorXd HamiltonianField::fieldAt(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd g = gradH(x);
    // J (p, q) = (-q, p) applied to grad H.
    Eigen::VectorXd out(2 * n);
    out.head(n) = -g.tail(n);
    out.tail(n) = g.head(n);
    return out;
}

HamiltonianField quadratic_field(const BlockHessian& L) {
    HamiltonianField f;
    f.n = L.n();
    const Eigen::MatrixXd mat = L.assemble().mat();
    f.gradH = [mat](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return mat * x;
    };
    f.hamiltonian = [mat](const Eigen::VectorXd& x) {
        return 0.5 * x.dot(mat * x);
    };
    return f;
}

int linear_monodromy_kernel(const BlockHessian& L, double lambda) {
    if (lambda <= 0.0)
        throw Error("linear_monodromy_kernel: lambda must be positive");
    const int n = L.n();
    const Eigen::MatrixXd jl = symplectic_j(n) * L.assemble().mat();
    const Eigen::MatrixXd monodromy =
        (2.0 * M_PI * lambda * jl).exp();
    const Eigen::MatrixXd shifted =
        monodromy - Eigen::MatrixXd::Identity(2 * n, 2 * n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
    const double maxSv = svd.singularValues().maxCoeff();
    // Strongly hyperbolic modes blow the dynamic range of the monodromy
    // past what a relative singular-value threshold can resolve: the
    // kernel count would be meaningless noise, so refuse loudly.
    if (maxSv > 1e8) {
        std::ostringstream os;
        os << "linear_monodromy_kernel: |exp(2 pi lambda J L)| ~ " << maxSv
           << " at lambda = " << lambda
           << "; hyperbolic growth exceeds the resolvable range";
        throw Error(os.str());
    }
    const double tol = 1e-9 * std::max(1.0, maxSv);
    int kernel = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) <= tol) ++kernel;
    return kernel;
}

FlowResult flow(const HamiltonianField& field, const Eigen::VectorXd& x,
                double T, double stepTol) {
    if (!field.gradH) throw Error("flow: field has no gradient evaluator");

    FlowResult result;
    if (T == 0.0) {
        result.state = x;
        if (field.hamiltonian) result.energyDrift = 0.0;
        return result;
    }

    const double direction = T > 0.0 ? 1.0 : -1.0;
    const double duration = std::abs(T);
    auto rhs = [&](const State& s, State& dsdt, double /*t*/) {
        const Eigen::VectorXd v = direction * field.fieldAt(to_eigen(s));
        dsdt = to_state(v);
    };

    State state = to_state(x);
    try {
        auto stepper = odeint::make_controlled(
            stepTol, stepTol,
            odeint::runge_kutta_fehlberg78<State>());
        odeint::integrate_adaptive(stepper, rhs, state, 0.0, duration,
                                   std::min(duration, 1e-2));
    } catch (const hambif::Error&) {
        throw;
    } catch (const std::exception& e) {
        throw DivergenceError(std::string("flow: integrator step-size "
                                          "underflow or divergence: ") +
                              e.what());
    }

    result.state = to_eigen(state);
    if (field.hamiltonian) {
        const auto& h = *field.hamiltonian;
        result.energyDrift = std::abs(h(result.state) - h(x));
    }
    return result;
}

namespace {

// Initial displacement for the shooting search: the t = 0 snapshot
// (u, 0) of the linearized 2pi/j-periodic mode cos(jt)(u,0) + sin(jt)(0,v)
// built from the (near-)kernel vector (u, v) of G_j(lambda0 L).
Eigen::VectorXd kernel_direction(const BlockHessian& L, double lambda0) {
    const int n = L.n();
    int j0 = 1;
    bool matched = false;
    for (const auto& cand : lambda_j(L, 1)) {
        // lambda0 in Lambda_j iff lambda0 = j * (1/sqrt(nu)); find the
        // smallest such j across nu.
        const double ratio = lambda0 / cand.lambda0;
        const int jNear = static_cast<int>(std::lround(ratio));
        if (jNear >= 1 && std::abs(ratio - jNear) <= 1e-6 * jNear) {
            if (!matched || jNear < j0) j0 = jNear;
            matched = true;
        }
    }
    const SymMatrix g = build_gj(L, j0, lambda0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.mat());
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best)))
            best = i;
    const Eigen::VectorXd kv = es.eigenvectors().col(best);
    Eigen::VectorXd u = kv.head(n);
    if (u.norm() < 1e-12) u = Eigen::VectorXd::Unit(n, 0);

    Eigen::VectorXd xi = Eigen::VectorXd::Zero(2 * n);
    xi.head(n) = u / u.norm();
    return xi;
}

struct NewtonState {
    Eigen::VectorXd xi;
    double lambda = 0.0;
};

Eigen::VectorXd shoot_residual(const HamiltonianField& field,
                               const Eigen::VectorXd& x0,
                               const NewtonState& s, double amplitude,
                               double stepTol) {
    const int d = static_cast<int>(x0.size());
    const Eigen::VectorXd start = x0 + s.xi;
    // 2pi-periodicity of the rescaled problem == physical period
    // 2 pi lambda of x' = J grad H.
    const Eigen::VectorXd end =
        flow(field, start, 2.0 * M_PI * s.lambda, stepTol).state;
    Eigen::VectorXd r(d + 2);
    r.head(d) = end - start;
    r(d) = s.xi.norm() - amplitude;
    const Eigen::VectorXd f = field.fieldAt(start);
    const double fn = f.norm();
    r(d + 1) = fn > 0 ? s.xi.dot(f) / (amplitude * fn) : 0.0;
    return r;
}

}  // namespace

ShootOutcome shoot_periodic(const HamiltonianField& field,
                            const BlockHessian& hessianAtX0,
                            const Eigen::VectorXd& x0, double lambda0,
                            double amplitude, const ShootOptions& opts) {
    if (amplitude <= 0.0)
        throw Error("shoot_periodic: amplitude must be positive");
    const int d = static_cast<int>(x0.size());
    const Eigen::VectorXd direction = kernel_direction(hessianAtX0, lambda0);

    double bestResidual = std::numeric_limits<double>::infinity();
    std::string reason = "Newton iteration did not reach shootTol";
    int attempts = 0;

    double a = amplitude;
    for (int retry = 0; retry <= opts.maxRetries; ++retry, a *= 0.5) {
        ++attempts;
        NewtonState s{a * direction, lambda0};
        bool diverged = false;

        Eigen::VectorXd r;
        try {
            r = shoot_residual(field, x0, s, a, opts.stepTol);
        } catch (const DivergenceError&) {
            continue;
        }

        for (int iter = 0; iter < opts.maxNewtonIter; ++iter) {
            const double rNorm = r.cwiseAbs().maxCoeff();
            bestResidual = std::min(bestResidual, rNorm);
            if (rNorm <= opts.shootTol) break;

            // Central-difference Gauss-Newton step on (xi, lambda). The
            // integrator noise floor (~stepTol) limits forward
            // differences too much near convergence.
            Eigen::MatrixXd jac(d + 2, d + 1);
            try {
                for (int c = 0; c < d; ++c) {
                    const double h = 1e-4 * std::max(0.1, std::abs(s.xi(c)));
                    NewtonState plus = s, minus = s;
                    plus.xi(c) += h;
                    minus.xi(c) -= h;
                    jac.col(c) =
                        (shoot_residual(field, x0, plus, a, opts.stepTol) -
                         shoot_residual(field, x0, minus, a, opts.stepTol)) /
                        (2 * h);
                }
                const double h = 1e-4 * std::max(0.1, s.lambda);
                NewtonState plus = s, minus = s;
                plus.lambda += h;
                minus.lambda = std::max(1e-8, minus.lambda - h);
                jac.col(d) =
                    (shoot_residual(field, x0, plus, a, opts.stepTol) -
                     shoot_residual(field, x0, minus, a, opts.stepTol)) /
                    (plus.lambda - minus.lambda);
            } catch (const DivergenceError&) {
                diverged = true;
                break;
            }

            const Eigen::VectorXd step =
                jac.colPivHouseholderQr().solve(-r);
            if (!step.allFinite()) {
                diverged = true;
                break;
            }

            double damp = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 10; ++ls, damp *= 0.5) {
                NewtonState cand = s;
                cand.xi += damp * step.head(d);
                cand.lambda += damp * step(d);
                if (cand.lambda <= 0.0) continue;
                Eigen::VectorXd rc;
                try {
                    rc = shoot_residual(field, x0, cand, a, opts.stepTol);
                } catch (const DivergenceError&) {
                    continue;
                }
                if (rc.cwiseAbs().maxCoeff() <= opts.shootTol ||
                    rc.norm() < r.norm()) {
                    s = cand;
                    r = rc;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
        }

        if (diverged) continue;
        const double rNorm = r.cwiseAbs().maxCoeff();
        bestResidual = std::min(bestResidual, rNorm);
        if (rNorm > opts.shootTol) continue;

        if (std::abs(s.lambda - lambda0) > opts.lambdaDriftTol * lambda0) {
            std::ostringstream os;
            os << "converged to lambda = " << s.lambda
               << ", outside the accepted excursion around " << lambda0;
            reason = os.str();
            continue;
        }

        // Converged: sample the orbit over one full period.
        OrbitRecord rec;
        rec.lambda = s.lambda;
        rec.period = 2.0 * M_PI * s.lambda;
        rec.residual = r.head(d).norm();
        rec.converged = true;
        const int N = opts.sampleCount;
        Eigen::VectorXd state = x0 + s.xi;
        double maxDrift = 0.0;
        const double h0 =
            field.hamiltonian ? (*field.hamiltonian)(state) : 0.0;
        rec.samples.reserve(N + 1);
        rec.samples.emplace_back(0.0, state);
        const double dt = rec.period / N;
        for (int k = 1; k <= N; ++k) {
            state = flow(field, state, dt, opts.stepTol).state;
            rec.samples.emplace_back(k * dt, state);
            if (field.hamiltonian)
                maxDrift = std::max(
                    maxDrift, std::abs((*field.hamiltonian)(state) - h0));
        }
        double amp = 0.0;
        for (const auto& [t, xs] : rec.samples)
            amp = std::max(amp, (xs - x0).norm());
        rec.amplitude = amp;
        if (field.hamiltonian) rec.energyDrift = maxDrift;
        return rec;
    }

    return ShootFailure{attempts, bestResidual, reason};
}

TrajectoryMetrics trajectory_metrics(const HamiltonianField& field,
                                     const OrbitRecord& rec,
                                     const Eigen::VectorXd& x0,
                                     double shootTol) {
    if (!rec.converged)
        throw Error("trajectory_metrics: record is not converged");
    TrajectoryMetrics m;
    for (const auto& [t, x] : rec.samples)
        m.hausdorffToPoint = std::max(m.hausdorffToPoint, (x - x0).norm());

    // Subharmonic test: the smallest T/k, k <= 8, that closes the orbit.
    const Eigen::VectorXd start = rec.samples.front().second;
    m.minimalPeriod = rec.period;
    for (int k = 8; k >= 2; --k) {
        const double tk = rec.period / k;
        const Eigen::VectorXd xk = flow(field, start, tk, 1e-12).state;
        if ((xk - start).norm() <= 10.0 * shootTol) {
            m.minimalPeriod = tk;
            break;
        }
    }
    return m;
}

std::string orbit_dump(const HamiltonianField& field, const OrbitRecord& rec) {
    std::ostringstream os;
    os.precision(17);
    os << "# t";
    for (int i = 0; i < 2 * field.n; ++i) os << " x" << (i + 1);
    if (field.hamiltonian) os << " H";
    os << "\n";
    for (const auto& [t, x] : rec.samples) {
        os << t;
        for (int i = 0; i < x.size(); ++i) os << ' ' << x(i);
        if (field.hamiltonian) os << ' ' << (*field.hamiltonian)(x);
        os << "\n";
    }
    return os.str();
}

}  // namespace hambif
