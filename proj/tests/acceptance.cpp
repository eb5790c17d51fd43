// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned in code; HAMBIF_SEED replays the randomized
// suites.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "hambif/analyze.hpp"
#include "hambif/degree.hpp"
#include "test_util.hpp"

using namespace hambif;

namespace {

struct Check {
    int failures = 0;
    std::ostringstream log;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            log << "      FAILED: " << what << "\n";
        }
    }
};

BlockHessian exmin_blocks() {
    return BlockHessian(SymMatrix::Diag({2, 4}), SymMatrix::Diag({2, 0}));
}

int run_criterion(int number, const std::string& title,
                  const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        ++c.failures;
        c.log << "      EXCEPTION: " << e.what() << "\n";
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ostringstream line;
    line.precision(3);
    line << (c.failures == 0 ? "[PASS]" : "[FAIL]") << " criterion " << number
         << ": " << title << " (" << std::fixed << seconds << " s)";
    std::cout << line.str() << "\n" << c.log.str();
    return c.failures == 0 ? 0 : 1;
}

// --------------------------------------------------------------------
// 1. R^6 worked example reproduction.
// --------------------------------------------------------------------
void criterion1(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    auto spec = load_problem("paper-example-1");
    const auto rp = resolve_critical_point(spec, spec.criticalPoints[0]);

    const auto ps = product_spectrum(rp.cp.hessian);
    c.require(ps.real.size() == 3, "sigma(AB) has three real eigenvalues");
    const double s7 = std::sqrt(7.0);
    if (ps.real.size() == 3) {
        c.require(std::abs(ps.real[0].nu - (2 - 2 * s7)) <= 1e-9,
                  "nu = 2 - 2*sqrt(7) within 1e-9");
        c.require(std::abs(ps.real[1].nu) <= 1e-9, "nu = 0 within 1e-9");
        c.require(std::abs(ps.real[2].nu - (2 + 2 * s7)) <= 1e-9,
                  "nu = 2 + 2*sqrt(7) within 1e-9");
    }

    VectorField field{6, spec.gradH, std::nullopt};
    const int index = topological_index(field, rp.cp.x0, 0.5);
    c.require(index == -1, "topological_index == -1 exactly");

    const double nu0 = 2 + 2 * s7;
    for (int j0 = 1; j0 <= 4; ++j0) {
        const auto cand = CandidateParam::make(j0, nu0, 1);
        const auto verdict = check_local(rp.cp, cand, 8);
        c.require(verdict.certified && verdict.theorem == "localodd",
                  "check_local certifies via OddMultiplicity for j0 = " +
                      std::to_string(j0));
    }

    const auto cand1 = CandidateParam::make(1, nu0, 1);
    const auto rep =
        emanation_report(rp.cp, cand1, check_local(rp.cp, cand1, 8), 8);
    c.require(rep.targetPeriod.has_value(), "target period present");
    if (rep.targetPeriod) {
        const double expected = 2.0 * M_PI / std::sqrt(nu0);
        c.require(std::abs(*rep.targetPeriod - expected) <= 1e-12 * expected,
                  "target period == 2 pi / sqrt(2 + 2 sqrt 7) to 1e-12");
    }
    c.require(rep.minimalPeriodCertified, "minimal period certified");

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    c.require(seconds < 10.0, "runtime < 10 s");
}

// --------------------------------------------------------------------
// 2. Strict-minimum worked example reproduction.
// --------------------------------------------------------------------
void criterion2(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    auto spec = load_problem("paper-example-exmin");
    const int jMax = spec.analysis.jMax;  // default 8

    c.require(index_shortcut(StrictExtremum{}) == 1, "shortcut index == 1");
    VectorField field{4, spec.gradH, std::nullopt};
    const auto rp = resolve_critical_point(spec, spec.criticalPoints[0]);
    c.require(topological_index(field, rp.cp.x0, 0.5) == 1,
              "subdivision index == 1");

    for (int j = 1; j <= jMax; ++j) {
        const auto cands = lambda_j(rp.cp.hessian, j);
        c.require(cands.size() == 1 &&
                      std::abs(cands[0].lambda0 - 0.5 * j) <= 1e-12 * j,
                  "Lambda_" + std::to_string(j) + " == {j/2}");
    }

    const auto cand = CandidateParam::make(1, 4.0, 1);
    const auto bi = bifurcation_index(rp.cp, cand, jMax);
    c.require(bi.etas.at(1) == 1, "eta_1 == 1 at lambda0 = 1/2");

    const auto verdict = check_local(rp.cp, cand, jMax);
    c.require(verdict.certified && verdict.theorem == "localpos",
              "certified via localpos");

    const auto rep = emanation_report(rp.cp, cand, verdict, jMax);
    c.require(rep.targetPeriod &&
                  std::abs(*rep.targetPeriod - M_PI) <= 1e-12 * M_PI,
              "minimal period pi");
    c.require(rep.minimalPeriodCertified, "minimal period certified");

    const auto g = classify_global({rp.cp}, rp.cp.index);
    bool unboundedEveryJ = false;
    for (const auto& f : g.findings)
        if (f.corollary == "globalone") unboundedEveryJ = true;
    c.require(unboundedEveryJ,
              "classify_global reports an unbounded branch for every j0");
    for (int j0 = 1; j0 <= jMax; ++j0) {
        const auto bij =
            bifurcation_index(rp.cp, CandidateParam::make(j0, 4.0, 1), jMax);
        c.require(bij.etas.at(j0) == 1,
                  "eta_{j0} == 1 at lambda0 = j0/2, j0 = " +
                      std::to_string(j0));
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    c.require(seconds < 5.0, "runtime < 5 s");
}

// --------------------------------------------------------------------
// 3. Determinant/kernel/conjugation identity suite.
// --------------------------------------------------------------------
void criterion3(Check& c) {
    auto gen = testutil::rng();
    std::uniform_int_distribution<int> nDist(1, 4);
    std::uniform_int_distribution<int> jDist(1, 4);
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = nDist(gen);
        const int j = jDist(gen);
        SymMatrix cBlock = [&] {
            if (trial % 10 == 9) {
                // Engineered singular case: CD has eigenvalue j^2.
                std::vector<double> d(n, 0.5);
                d[0] = j;
                return SymMatrix::Diag(d);
            }
            return SymMatrix(testutil::random_symmetric(gen, n, 2.0));
        }();
        SymMatrix dBlock = [&] {
            if (trial % 10 == 9) {
                std::vector<double> d(n, -0.4);
                d[0] = j;
                return SymMatrix::Diag(d);
            }
            return SymMatrix(testutil::random_symmetric(gen, n, 2.0));
        }();
        BlockHessian L(cBlock, dBlock);
        const SymMatrix K = L.assemble();
        const SymMatrix g = build_gj(L, j, 1.0);

        if (!conjugation_check(K, j)) ++failures;

        const Eigen::MatrixXd cdShift =
            cBlock.mat() * dBlock.mat() -
            static_cast<double>(j) * j * Eigen::MatrixXd::Identity(n, n);
        const double detG = g.mat().determinant();
        const double detCD = cdShift.determinant();
        if (std::abs(detG - detCD) > 1e-9 * std::max(1.0, std::abs(detCD)))
            ++failures;

        const double tol = default_cluster_tol(g);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(cdShift);
        int kerCD = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) <= tol) ++kerCD;
        if (spectrum(g, tol).kernelDim() != kerCD) ++failures;
    }
    c.require(failures == 0, "all 200 trials satisfy the three identities");
}

// --------------------------------------------------------------------
// 4. Route-agreement suite.
// --------------------------------------------------------------------
void criterion4(Check& c) {
    auto gen = testutil::rng();
    std::uniform_int_distribution<int> nDist(1, 4);
    std::uniform_int_distribution<int> jDist(1, 3);
    std::bernoulli_distribution pickDefinite(0.5);
    int instances = 0;
    int mismatches = 0;
    int guard = 0;
    while (instances < 500 && ++guard < 5000) {
        const int n = nDist(gen);
        BlockHessian L = [&] {
            if (pickDefinite(gen)) {
                auto [a, b] = testutil::random_definite_pair(gen, n);
                return BlockHessian(SymMatrix(a), SymMatrix(b));
            }
            auto [a, b] = testutil::random_commuting_pair(gen, n);
            return BlockHessian(SymMatrix(a), SymMatrix(b));
        }();
        const auto cands = lambda_j(L, 1);
        if (cands.empty()) continue;
        std::uniform_int_distribution<size_t> pick(0, cands.size() - 1);
        const double l0 = cands[pick(gen)].lambda0;
        const int j = jDist(gen);

        const bool definiteApplies = definite_block_sign(L).has_value();
        const bool commutes = L.commutes();
        if (!definiteApplies && !commutes) continue;

        ++instances;
        const int direct = morse_jump_direct(L, l0, j).jump;
        if (definiteApplies &&
            morse_jump_definite(L, l0, j).jump != direct)
            ++mismatches;
        if (commutes && morse_jump_commuting(L, l0, j).jump != direct)
            ++mismatches;
    }
    c.require(instances == 500, "generated 500 multi-route instances");
    c.require(mismatches == 0, "Morse jumps identical as integers");
}

// --------------------------------------------------------------------
// 5. Certificate soundness.
// --------------------------------------------------------------------
void criterion5(Check& c) {
    auto gen = testutil::rng();
    std::uniform_int_distribution<int> nDist(1, 3);
    std::bernoulli_distribution structured(0.3);
    int fired = 0;
    int unsound = 0;
    int guard = 0;
    while (fired < 100 && ++guard < 3000) {
        const int n = nDist(gen);
        BlockHessian L = [&] {
            if (structured(gen)) {
                // Shared eigenbasis with repeated products: eigenspace
                // intersections of dimension > mult/2 arise.
                Eigen::MatrixXd q = testutil::random_orthogonal(gen, n);
                Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.5);
                Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
                return BlockHessian(SymMatrix(a),
                                    SymMatrix(0.5 * Eigen::MatrixXd(a)));
            }
            return BlockHessian(
                SymMatrix(testutil::random_symmetric(gen, n, 2.0)),
                SymMatrix(testutil::random_symmetric(gen, n, 2.0)));
        }();
        for (const auto& cand : lambda_j(L, 1)) {
            const auto certs =
                jump_nonzero_certificates(L, cand.lambda0, 1);
            if (certs.empty()) continue;
            ++fired;
            if (morse_jump_direct(L, cand.lambda0, 1).jump == 0) ++unsound;
        }
    }
    // Both worked examples must fire as well.
    const double nu0 = 2 + 2 * std::sqrt(7.0);
    Eigen::MatrixXd b(3, 3);
    b << 0, 0, 0, 0, 2, -1, 0, -1, 2;
    BlockHessian paper1(SymMatrix::Diag({2, 4, -2}), SymMatrix(b));
    const double l0 = 1.0 / std::sqrt(nu0);
    c.require(!jump_nonzero_certificates(paper1, l0, 1).empty() &&
                  morse_jump_direct(paper1, l0, 1).jump != 0,
              "R^6 example certificate is sound");
    c.require(!jump_nonzero_certificates(exmin_blocks(), 0.5, 1).empty() &&
                  morse_jump_direct(exmin_blocks(), 0.5, 1).jump != 0,
              "strict-minimum example certificate is sound");

    c.require(fired >= 100, "at least 100 certificate firings generated");
    c.require(unsound == 0, "every certificate implies a nonzero jump");
}

// --------------------------------------------------------------------
// 6. Degree oracle on random nondegenerate linear gradient fields.
// --------------------------------------------------------------------
void criterion6(Check& c) {
    auto gen = testutil::rng();
    std::uniform_int_distribution<int> dims(2, 6);
    int failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dims(gen);
        int detSign = 0;
        const Eigen::MatrixXd m =
            testutil::random_nondegenerate_symmetric(gen, d, &detSign);
        VectorField f;
        f.dim = d;
        f.eval = [m](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return m * x;
        };
        f.lipschitzHint = m.operatorNorm() * 1.01;
        Box box{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, 1.0)};
        const auto r = brouwer_degree(f, box);
        if (r.degree != detSign) ++failures;
    }
    c.require(failures == 0,
              "subdivision degree == sign(det) on all 100 fields");
}

// --------------------------------------------------------------------
// 7. Monodromy oracle vs lambda_window.
// --------------------------------------------------------------------
void criterion7(Check& c) {
    auto gen = testutil::rng();
    std::uniform_int_distribution<int> nDist(1, 3);
    std::uniform_real_distribution<double> mag(0.3, 2.5);
    int misses = 0, extras = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = nDist(gen);
        // Definite blocks keep the flow elliptic, so the exponential
        // stays within numeric range over the whole window.
        Eigen::MatrixXd qa = testutil::random_orthogonal(gen, n);
        Eigen::MatrixXd qb = testutil::random_orthogonal(gen, n);
        Eigen::VectorXd da(n), db(n);
        for (int i = 0; i < n; ++i) {
            da(i) = mag(gen);
            db(i) = mag(gen);
        }
        const double signA = trial % 2 == 0 ? 1.0 : -1.0;
        BlockHessian L(
            SymMatrix(signA * qa * da.asDiagonal() * qa.transpose()),
            SymMatrix(signA * qb * db.asDiagonal() * qb.transpose()));

        const auto window = lambda_window(L, 0.05, 20.0);
        auto offGrid = [&](double lambda) {
            for (const auto& p : window)
                if (std::abs(p.lambda - lambda) <= 1e-3 * (1.0 + lambda))
                    return false;
            return true;
        };
        double base = 0.777;
        while (!offGrid(base)) base += 0.0131;
        const int baseline = linear_monodromy_kernel(L, base);

        // Every window point must jump ("no misses")…
        for (const auto& p : window)
            if (linear_monodromy_kernel(L, p.lambda) <= baseline) ++misses;
        // …and off-grid samples must not ("no extras").
        std::uniform_real_distribution<double> sample(0.05, 20.0);
        for (int k = 0; k < 20; ++k) {
            const double lambda = sample(gen);
            if (!offGrid(lambda)) continue;
            if (linear_monodromy_kernel(L, lambda) != baseline) ++extras;
        }
    }
    c.require(misses == 0, "every lambda_window element jumps the kernel");
    c.require(extras == 0, "no kernel jumps off the window");
}

// --------------------------------------------------------------------
// 8. Orbit validation on the strict-minimum example.
// --------------------------------------------------------------------
void criterion8(Check& c) {
    auto spec = load_problem("paper-example-exmin");
    HamiltonianField field{spec.n, spec.gradH, spec.hamiltonian};
    const Eigen::VectorXd x0 = spec.criticalPoints[0].point;

    const auto outcome =
        shoot_periodic(field, exmin_blocks(), x0, 0.5, 1e-2);
    c.require(std::holds_alternative<OrbitRecord>(outcome),
              "shooting at lambda0 = 1/2, amplitude 1e-2 converges");
    if (std::holds_alternative<OrbitRecord>(outcome)) {
        const auto& rec = std::get<OrbitRecord>(outcome);
        c.require(rec.residual <= 1e-9, "residual <= 1e-9");
        c.require(rec.amplitude <= 1e-2 * 1.5,
                  "amplitude within the <= 1e-2 policy");
        const auto metrics = trajectory_metrics(field, rec, x0);
        c.require(std::abs(metrics.minimalPeriod - M_PI) <= 0.05 * M_PI,
                  "minimal period within 5% of pi");
        c.require(rec.energyDrift && *rec.energyDrift <= 1e-6,
                  "energy drift <= 1e-6 over one period");
    }

    const auto offGrid =
        shoot_periodic(field, exmin_blocks(), x0, 0.37, 1e-2);
    c.require(std::holds_alternative<ShootFailure>(offGrid),
              "off-grid lambda = 0.37 reports Failure");
}

// --------------------------------------------------------------------
// 9. Global sum properties.
// --------------------------------------------------------------------
void criterion9(Check& c) {
    // (a) Single point with nonzero eta: every per-j sum at the
    // candidate j is nonzero, exactly +1.
    auto spec = load_problem("paper-example-exmin");
    const auto rp = resolve_critical_point(spec, spec.criticalPoints[0]);
    for (int j0 = 1; j0 <= 4; ++j0) {
        const auto sums = global_sum_check(
            {{rp.cp, CandidateParam::make(j0, 4.0, 1)}}, 4);
        c.require(sums.sums.at(j0) == 1 && !sums.allZero,
                  "single-point sum at j0 = " + std::to_string(j0) +
                      " equals 1 (unbounded branch)");
    }

    // (b) Opposite indices cancel exactly.
    auto cpNeg = rp.cp;
    cpNeg.index = -1;
    cpNeg.name = "mirror";
    const auto cancel = global_sum_check(
        {{rp.cp, CandidateParam::make(1, 4.0, 1)},
         {cpNeg, CandidateParam::make(1, 4.0, 1)}},
        6);
    c.require(cancel.allZero, "opposite indices cancel to Theta");

    // (c) Engineered p/n bookkeeping: two minimum-type points and one
    // maximum-type point, |ind * mult| = 1 constant: E(H) = 1 and the
    // lower bound is |#p - #n| = 1.
    CriticalPoint p1{Eigen::VectorXd::Zero(2),
                     BlockHessian(SymMatrix::Diag({2}), SymMatrix::Diag({2})),
                     1, IndexSource::UserAsserted, "p1"};
    CriticalPoint p2{Eigen::VectorXd::Zero(2),
                     BlockHessian(SymMatrix::Diag({3}), SymMatrix::Diag({3})),
                     1, IndexSource::UserAsserted, "p2"};
    CriticalPoint m1{Eigen::VectorXd::Zero(2),
                     BlockHessian(SymMatrix::Diag({-2}),
                                  SymMatrix::Diag({-2})),
                     1, IndexSource::UserAsserted, "m1"};
    const auto g = classify_global({p1, p2, m1});
    c.require(g.EH == 1, "E(H) == 1 exactly");
    c.require(g.pH.size() == 2 && g.nH.size() == 1, "#p == 2, #n == 1");
    bool sawLowerBound = false;
    for (const auto& f : g.findings)
        if (f.corollary == "constant-magnitude" &&
            f.statement.find("at least 1") != std::string::npos)
            sawLowerBound = true;
    c.require(sawLowerBound, "|#p - #n| lower-bound bookkeeping");

    // (d) classify_global's E(H) equals the per-j candidate sums.
    for (int j : {1, 2, 3}) {
        std::vector<std::pair<CriticalPoint, CandidateParam>> cands;
        for (const auto& cp : {p1, p2, m1})
            for (const auto& e : product_spectrum(cp.hessian).positive())
                cands.emplace_back(
                    cp, CandidateParam::make(j, e.nu, e.multiplicity));
        const auto sums = global_sum_check(cands, j);
        c.require(sums.sums.at(j) == g.EH,
                  "per-j sum equals E(H) at j = " + std::to_string(j));
    }
}

}  // namespace

int main() {
    std::cout << "hambif acceptance suite (seed " << testutil::seed()
              << ")\n";
    int failures = 0;
    failures += run_criterion(
        1, "R^6 example: spectrum, index -1, localodd certification, period",
        criterion1);
    failures += run_criterion(
        2, "strict-minimum example: index 1, Lambda grid, eta, localpos, "
           "global",
        criterion2);
    failures += run_criterion(
        3, "determinant/kernel/conjugation identities on 200 random "
           "block-diagonal K",
        criterion3);
    failures += run_criterion(
        4, "route agreement on 500 multi-route instances", criterion4);
    failures += run_criterion(
        5, "certificate soundness on 100+ firings", criterion5);
    failures += run_criterion(
        6, "degree == sign(det) on 100 linear gradient fields (dims 2-6)",
        criterion6);
    failures += run_criterion(
        7, "monodromy kernel jumps coincide with lambda_window (100 "
           "instances)",
        criterion7);
    failures += run_criterion(
        8, "shooting validates the pi-period orbit and fails off-grid",
        criterion8);
    failures += run_criterion(9, "global sum corollary arithmetic",
                              criterion9);

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED"
                                : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
