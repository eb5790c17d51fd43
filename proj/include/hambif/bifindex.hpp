#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hambif/bifalgebra.hpp"

namespace hambif {

enum class IndexSource { Computed, Shortcut, UserAsserted };

const char* to_string(IndexSource s);

/// An isolated critical point of H with its block Hessian and
/// topological index.
struct CriticalPoint {
    Eigen::VectorXd x0;
    BlockHessian hessian;
    int index = 0;
    IndexSource indexSource = IndexSource::UserAsserted;
    std::string name;
};

/// The sparse sequence eta_j = ind(grad H, x0) * jump_j / 2 over a
/// finite j-window, with the per-j Morse-jump evidence that produced it.
struct BifurcationIndex {
    CandidateParam at;
    int jMax = 0;
    std::map<int, int> etas;          // j -> eta_j, complete on 1..jMax
    std::vector<MorseJump> evidence;  // per j, route recorded

    bool nonzero() const;
    std::vector<int> nonzeroJs() const;
};

struct TrailEntry {
    std::string hypothesis;
    bool pass = false;
    std::string evidence;
};

/// Minimal-period prediction per Remarks on trajectories: periods
/// 2 pi lambda0 / j for each nonzero eta_j, and the sqrt(nu/nu0) not in N
/// certification for minimality when j0 = 1.
struct EmanationReport {
    std::vector<std::pair<int, double>> predictedPeriods;  // (j, 2 pi l0 / j)
    bool minimalPeriodCertified = false;
    std::optional<double> targetPeriod;  // 2 pi / sqrt(nu0) when j0 == 1
    std::vector<TrailEntry> integerRatioTrail;
};

struct Verdict {
    bool certified = false;
    std::string theorem;  // certifying criterion when certified
    std::vector<TrailEntry> trail;
    std::optional<EmanationReport> emanation;
};

/// Best applicable Morse-jump route at (lambda0, j): Definite over
/// Commuting over Direct, with the Direct route cross-checked for
/// n <= 4. Disagreement throws RouteDisagreement.
MorseJump best_morse_jump(const BlockHessian& L, double lambda0, int j);

/// eta_j for j = 1..jMax. Throws RouteDisagreement on any internal
/// inconsistency; off-grid lambda0 yields all zeros.
BifurcationIndex bifurcation_index(const CriticalPoint& cp,
                                   const CandidateParam& cand, int jMax);

/// Evaluates (A1)-(A3) and the four sufficient branching criteria,
/// recording every trail entry. Certification priority: definite block,
/// commuting Y-sets, eigenspace intersection, odd multiplicity.
Verdict check_local(const CriticalPoint& cp, const CandidateParam& cand,
                    int jMax = 8);

EmanationReport emanation_report(const CriticalPoint& cp,
                                 const CandidateParam& cand,
                                 const Verdict& verdict, int jMax = 8);

struct GlobalSumResult {
    std::map<int, int> sums;  // j -> sum of eta_j over the supplied set
    bool allZero = true;
    /// Nonzero sums contradict the bounded-branch alternative: a branch
    /// through these trivial solutions must be unbounded.
    std::vector<int> unboundedWitnessJs;
};

GlobalSumResult global_sum_check(
    const std::vector<std::pair<CriticalPoint, CandidateParam>>& points,
    int jMax);

struct GlobalFinding {
    std::string corollary;
    std::string statement;
};

/// The global invariants of a problem whose critical points all carry a
/// strictly definite block: S+-, p(H), n(H), E(H) and the corollary
/// findings they trigger.
struct GlobalClassification {
    std::vector<std::string> Splus;   // names of points with ind * s > 0
    std::vector<std::string> Sminus;
    // (point name, omega, mult(omega), ind, s) over p(H) and n(H).
    struct Pair {
        std::string point;
        double omega = 0.0;
        int multiplicity = 0;
        int index = 0;
        int s = 0;
    };
    std::vector<Pair> pH;
    std::vector<Pair> nH;
    long EH = 0;
    std::vector<GlobalFinding> findings;
};

GlobalClassification classify_global(const std::vector<CriticalPoint>& points,
                                     std::optional<int> totalDegree = {});

/// s(xi) = +1 / -1 when A or B is strictly positive / negative definite;
/// nullopt otherwise.
std::optional<int> definite_block_sign(const BlockHessian& L);

}  // namespace hambif
