#include "hambif/bifindex.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hambif {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool lambda_in_window(const BlockHessian& L, double lambda0) {
    if (lambda0 <= 0.0) return false;
    for (const auto& p : lambda_window(L, lambda0 / 2.0, 2.0 * lambda0)) {
        if (std::abs(p.lambda - lambda0) <=
            kMatchTol * std::max(p.lambda, lambda0))
            return true;
    }
    return false;
}

}  // namespace

const char* to_string(IndexSource s) {
    switch (s) {
        case IndexSource::Computed: return "Computed";
        case IndexSource::Shortcut: return "Shortcut";
        case IndexSource::UserAsserted: return "UserAsserted";
    }
    return "?";
}

bool BifurcationIndex::nonzero() const {
    for (const auto& [j, eta] : etas)
        if (eta != 0) return true;
    return false;
}

std::vector<int> BifurcationIndex::nonzeroJs() const {
    std::vector<int> out;
    for (const auto& [j, eta] : etas)
        if (eta != 0) out.push_back(j);
    return out;
}

std::optional<int> definite_block_sign(const BlockHessian& L) {
    const auto defA = definiteness(L.A);
    const auto defB = definiteness(L.B);
    if (defA == Definiteness::StrictlyPositive ||
        defB == Definiteness::StrictlyPositive)
        return 1;
    if (defA == Definiteness::StrictlyNegative ||
        defB == Definiteness::StrictlyNegative)
        return -1;
    return std::nullopt;
}

MorseJump best_morse_jump(const BlockHessian& L, double lambda0, int j) {
    MorseJump chosen;
    if (definite_block_sign(L).has_value()) {
        chosen = morse_jump_definite(L, lambda0, j);
    } else if (L.commutes()) {
        chosen = morse_jump_commuting(L, lambda0, j);
    } else {
        chosen = morse_jump_direct(L, lambda0, j);
    }

    // The direct route is the definition; closed forms must match it.
    if (chosen.route != JumpRoute::Direct && L.n() <= 4) {
        const MorseJump direct = morse_jump_direct(L, lambda0, j);
        if (direct.jump != chosen.jump) {
            std::ostringstream os;
            os << "best_morse_jump: route disagreement at lambda0 = "
               << lambda0 << ", j = " << j << ": " << to_string(chosen.route)
               << " gives " << chosen.jump << ", Direct gives " << direct.jump;
            throw RouteDisagreement(os.str());
        }
    }
    return chosen;
}

BifurcationIndex bifurcation_index(const CriticalPoint& cp,
                                   const CandidateParam& cand, int jMax) {
    BifurcationIndex out;
    out.at = cand;
    out.jMax = jMax;

    const BlockHessian& L = cp.hessian;
    const bool onGrid = lambda_in_window(L, cand.lambda0);

    // Which j <= jMax have lambda0 in Lambda_j: lambda0 = j/sqrt(nu).
    std::set<int> activeJs;
    if (onGrid) {
        for (const auto& e : product_spectrum(L).positive()) {
            const double jReal = cand.lambda0 * std::sqrt(e.nu);
            const int j = static_cast<int>(std::lround(jReal));
            if (j >= 1 && j <= jMax &&
                std::abs(jReal - j) <= kMatchTol * j)
                activeJs.insert(j);
        }
    }

    for (int j = 1; j <= jMax; ++j) {
        MorseJump jump;
        if (activeJs.count(j)) {
            jump = best_morse_jump(L, cand.lambda0, j);
        } else {
            // lambda0 is not a root of det G_j(lambda L), so the Morse
            // index is locally constant there and the jump vanishes.
            jump = MorseJump{j, cand.lambda0, 0.0, 0, JumpRoute::Definite};
            if (onGrid) {
                jump = best_morse_jump(L, cand.lambda0, j);
                if (jump.jump != 0) {
                    std::ostringstream os;
                    os << "bifurcation_index: nonzero jump " << jump.jump
                       << " at j = " << j
                       << " although lambda0 is not in Lambda_j";
                    throw RouteDisagreement(os.str());
                }
            }
        }
        if (jump.jump % 2 != 0)
            throw RouteDisagreement("bifurcation_index: odd Morse jump");
        out.etas[j] = cp.index * (jump.jump / 2);
        out.evidence.push_back(jump);
    }
    return out;
}

Verdict check_local(const CriticalPoint& cp, const CandidateParam& cand,
                    int jMax) {
    Verdict v;
    const BlockHessian& L = cp.hessian;

    // (A1) isolated critical point with nonzero topological index.
    {
        TrailEntry t;
        t.hypothesis = "(A1) x0 isolated, ind(grad H, x0) != 0";
        t.pass = cp.index != 0;
        std::ostringstream os;
        os << "ind = " << cp.index << " (" << to_string(cp.indexSource)
           << "), isolation from problem data";
        t.evidence = os.str();
        v.trail.push_back(t);
    }

    // (A2) block Hessian with nu0 in sigma_+(AB).
    bool nu0Valid = false;
    int nu0Mult = 0;
    {
        TrailEntry t;
        t.hypothesis = "(A2) blockdiag Hessian, nu0 in sigma_+(AB)";
        for (const auto& e : product_spectrum(L).positive()) {
            if (std::abs(e.nu - cand.nu) <=
                kMatchTol * std::max(1.0, std::abs(cand.nu))) {
                nu0Valid = true;
                nu0Mult = e.multiplicity;
                break;
            }
        }
        t.pass = nu0Valid;
        std::ostringstream os;
        os << "nu0 = " << cand.nu
           << (nu0Valid ? " matched with multiplicity " : " not found; mult ")
           << nu0Mult;
        t.evidence = os.str();
        v.trail.push_back(t);
    }

    // (A3) lambda0 = j0 / sqrt(nu0).
    {
        TrailEntry t;
        t.hypothesis = "(A3) lambda0 = j0/sqrt(nu0)";
        const double expected = cand.j / std::sqrt(cand.nu);
        t.pass = std::abs(cand.lambda0 - expected) <= 1e-12 * expected;
        std::ostringstream os;
        os << "lambda0 = " << cand.lambda0 << ", j0 = " << cand.j;
        t.evidence = os.str();
        v.trail.push_back(t);
    }

    const bool premise =
        v.trail[0].pass && v.trail[1].pass && v.trail[2].pass;

    // Sufficient criteria, strongest closed form first. Every entry is
    // recorded; certification takes the first passer.
    struct Criterion {
        std::string id;
        bool pass = false;
        std::string evidence;
    };
    std::vector<Criterion> criteria;

    {
        Criterion c;
        c.id = "localpos";
        const auto s = definite_block_sign(L);
        c.pass = s.has_value();
        c.evidence = s ? (std::string("definite block, s = ") +
                          (*s > 0 ? "+1" : "-1"))
                       : "neither block strictly definite";
        criteria.push_back(c);
    }
    {
        Criterion c;
        c.id = "localcom";
        if (!L.commutes()) {
            c.pass = false;
            c.evidence = "AB != BA";
        } else {
            for (int j = 1; j <= jMax && !c.pass; ++j) {
                const auto y = y_sets(L, cand.lambda0, j);
                if (y.plus.size() != y.minus.size()) {
                    c.pass = true;
                    std::ostringstream os;
                    os << "(A4) #Y+ = " << y.plus.size()
                       << " != #Y- = " << y.minus.size() << " at j = " << j;
                    c.evidence = os.str();
                }
            }
            if (!c.pass) c.evidence = "#Y+ == #Y- for every j <= jMax";
        }
        criteria.push_back(c);
    }
    {
        Criterion cEig;
        cEig.id = "localeigen";
        Criterion cOdd;
        cOdd.id = "localodd";
        if (nu0Valid) {
            try {
                const auto certs =
                    jump_nonzero_certificates(L, cand.lambda0, cand.j);
                for (const auto& cert : certs) {
                    if (cert.kind == CertificateKind::EigenspaceIntersection &&
                        !cEig.pass) {
                        cEig.pass = true;
                        cEig.evidence = cert.detail;
                    }
                    if (cert.kind == CertificateKind::OddMultiplicity &&
                        !cOdd.pass) {
                        cOdd.pass = true;
                        cOdd.evidence = cert.detail;
                    }
                }
            } catch (const CandidateError& e) {
                cEig.evidence = cOdd.evidence = e.what();
            }
        } else {
            cEig.evidence = cOdd.evidence = "nu0 not in sigma_+(AB)";
        }
        if (!cEig.pass && cEig.evidence.empty())
            cEig.evidence = "no eigenspace intersection above mult(nu0)/2";
        if (!cOdd.pass && cOdd.evidence.empty()) {
            std::ostringstream os;
            os << "mult(nu0) = " << nu0Mult << " is even";
            cOdd.evidence = os.str();
        }
        criteria.push_back(cEig);
        criteria.push_back(cOdd);
    }

    for (const auto& c : criteria) {
        TrailEntry t;
        t.hypothesis = c.id;
        t.pass = c.pass;
        t.evidence = c.evidence;
        v.trail.push_back(t);
        if (premise && c.pass && !v.certified) {
            v.certified = true;
            v.theorem = c.id;
        }
    }

    if (premise) {
        const auto bi = bifurcation_index(cp, cand, std::max(jMax, cand.j));

        // Fallback to the bifurcation-index theorem itself: when no
        // closed-form criterion fires but the directly computed eta is
        // nonzero, the point is still a certified branching point.
        if (!v.certified && bi.nonzero()) {
            v.certified = true;
            v.theorem = "local-eta";
            TrailEntry t;
            t.hypothesis = "local-eta";
            t.pass = true;
            std::ostringstream os;
            os << "inconclusive by closed-form certificates; Direct route "
                  "gives nonzero eta at j in {";
            for (int j : bi.nonzeroJs()) os << ' ' << j;
            os << " }";
            t.evidence = os.str();
            v.trail.push_back(t);
        } else if (v.certified) {
            // Soundness tie-down: a criterion-certified verdict must
            // come with a nonzero eta_j (eta_{j0} at the latest).
            TrailEntry t;
            t.hypothesis = "eta != Theta in window";
            t.pass = bi.nonzero();
            std::ostringstream os;
            os << "nonzero eta at j in {";
            for (int j : bi.nonzeroJs()) os << ' ' << j;
            os << " }";
            t.evidence = os.str();
            v.trail.push_back(t);
            if (!t.pass) {
                std::ostringstream err;
                err << "check_local: criterion " << v.theorem
                    << " certified but every eta_j vanishes in the window "
                    << "(internal inconsistency)";
                throw RouteDisagreement(err.str());
            }
        }
    }
    return v;
}

EmanationReport emanation_report(const CriticalPoint& cp,
                                 const CandidateParam& cand,
                                 const Verdict& verdict, int jMax) {
    if (!verdict.certified)
        throw Error("emanation_report: requires a certified verdict");

    EmanationReport rep;
    const auto bi = bifurcation_index(cp, cand, jMax);
    for (int j : bi.nonzeroJs())
        rep.predictedPeriods.emplace_back(j, 2.0 * kPi * cand.lambda0 / j);

    if (cand.j == 1)
        rep.targetPeriod = 2.0 * kPi / std::sqrt(cand.nu);

    bool certified = cand.j == 1;
    {
        TrailEntry t;
        t.hypothesis = "j0 == 1";
        t.pass = cand.j == 1;
        t.evidence = "j0 = " + std::to_string(cand.j);
        rep.integerRatioTrail.push_back(t);
    }
    for (const auto& e : product_spectrum(cp.hessian).positive()) {
        if (std::abs(e.nu - cand.nu) <=
            kMatchTol * std::max(1.0, std::abs(cand.nu)))
            continue;  // nu0 itself
        const double ratio = std::sqrt(e.nu / cand.nu);
        const long k = std::lround(ratio);
        const bool integer =
            k >= 1 && std::abs(ratio - k) <= kMatchTol * std::max(1.0, ratio);
        TrailEntry t;
        std::ostringstream os;
        os << "sqrt(nu/nu0) not in N for nu = " << e.nu;
        t.hypothesis = os.str();
        t.pass = !integer;
        std::ostringstream ev;
        ev << "ratio = " << ratio;
        t.evidence = ev.str();
        rep.integerRatioTrail.push_back(t);
        if (integer) certified = false;
    }
    rep.minimalPeriodCertified = certified;
    return rep;
}

GlobalSumResult global_sum_check(
    const std::vector<std::pair<CriticalPoint, CandidateParam>>& points,
    int jMax) {
    GlobalSumResult out;
    for (int j = 1; j <= jMax; ++j) out.sums[j] = 0;
    for (const auto& [cp, cand] : points) {
        const auto bi = bifurcation_index(cp, cand, jMax);
        for (const auto& [j, eta] : bi.etas) out.sums[j] += eta;
    }
    for (const auto& [j, sum] : out.sums) {
        if (sum != 0) {
            out.allZero = false;
            out.unboundedWitnessJs.push_back(j);
        }
    }
    return out;
}

GlobalClassification classify_global(const std::vector<CriticalPoint>& points,
                                     std::optional<int> totalDegree) {
    GlobalClassification g;

    std::vector<std::string> offending;
    for (const auto& cp : points)
        if (!definite_block_sign(cp.hessian).has_value())
            offending.push_back(cp.name.empty() ? "unnamed" : cp.name);
    if (!offending.empty()) {
        std::ostringstream os;
        os << "classify_global: no strictly definite block at:";
        for (const auto& n : offending) os << ' ' << n;
        throw Error(os.str());
    }

    for (const auto& cp : points) {
        const int s = *definite_block_sign(cp.hessian);
        const std::string name = cp.name.empty() ? "unnamed" : cp.name;
        const long signedIndex = static_cast<long>(cp.index) * s;
        if (signedIndex > 0)
            g.Splus.push_back(name);
        else if (signedIndex < 0)
            g.Sminus.push_back(name);
        else
            continue;  // ind == 0 contributes to neither set

        for (const auto& e : product_spectrum(cp.hessian).positive()) {
            GlobalClassification::Pair pair{name, e.nu, e.multiplicity,
                                            cp.index, s};
            if (signedIndex > 0)
                g.pH.push_back(pair);
            else
                g.nH.push_back(pair);
        }
    }

    for (const auto& pr : g.pH)
        g.EH += static_cast<long>(pr.index) * pr.s * pr.multiplicity;
    for (const auto& pr : g.nH)
        g.EH += static_cast<long>(pr.index) * pr.s * pr.multiplicity;

    const size_t pairCount = g.pH.size() + g.nH.size();

    if (g.EH != 0 && pairCount > 0) {
        {
            GlobalFinding f;
            f.corollary = "EH-nonzero";
            std::ostringstream os;
            os << "E(H) = " << g.EH
               << " != 0: for every j there is (xi, omega) in p(H) u n(H) "
                  "with C(xi, j/sqrt(omega)) unbounded";
            f.statement = os.str();
            g.findings.push_back(f);
        }
        if (g.pH.empty() || g.nH.empty()) {
            GlobalFinding f;
            f.corollary = "EH-nonzero-onesided";
            f.statement =
                "p(H) or n(H) empty: C(xi, j/sqrt(omega)) is unbounded for "
                "every j and every (xi, omega)";
            g.findings.push_back(f);
        }

        bool constMag = true;
        long mag = -1;
        for (const auto& list : {g.pH, g.nH}) {
            for (const auto& pr : list) {
                const long m = std::labs(static_cast<long>(pr.index)) *
                               pr.multiplicity;
                if (mag < 0) mag = m;
                if (m != mag) constMag = false;
            }
        }
        if (constMag && mag > 0) {
            GlobalFinding f;
            f.corollary = "constant-magnitude";
            const long lower =
                std::labs(static_cast<long>(g.pH.size()) -
                          static_cast<long>(g.nH.size()));
            std::ostringstream os;
            os << "|ind * mult| = " << mag
               << " constant: for every j at least " << lower
               << " of the C(xi, j/sqrt(omega)) are unbounded";
            f.statement = os.str();
            g.findings.push_back(f);
        }
    }

    if (totalDegree.has_value() && *totalDegree != 0 && pairCount > 0) {
        // Counts per point: distinct omegas, s, and mult(omega) must all
        // be constant across p(H) u n(H) for the total-degree corollary.
        std::map<std::string, int> omegaCount;
        std::set<int> sValues;
        std::set<int> multValues;
        for (const auto& list : {g.pH, g.nH}) {
            for (const auto& pr : list) {
                omegaCount[pr.point] += 1;
                sValues.insert(pr.s);
                multValues.insert(pr.multiplicity);
            }
        }
        bool constantB = true;
        int b = -1;
        for (const auto& [name, count] : omegaCount) {
            if (b < 0) b = count;
            if (count != b) constantB = false;
        }
        if (constantB && sValues.size() == 1 && multValues.size() == 1) {
            GlobalFinding f;
            f.corollary = "total-degree";
            std::ostringstream os;
            os << "deg(grad H, U, 0) = " << *totalDegree
               << " != 0 with constant (b, s, m) = (" << b << ", "
               << *sValues.begin() << ", " << *multValues.begin()
               << "): for every j some C(xi, j/sqrt(omega)) is unbounded";
            f.statement = os.str();
            g.findings.push_back(f);
        }
    }

    if (points.size() == 1 && pairCount > 0) {
        GlobalFinding f;
        f.corollary = "globalone";
        f.statement =
            "grad H has a single zero: C(x0, lambda0) is unbounded for "
            "every candidate lambda0 = j0/sqrt(nu0)";
        g.findings.push_back(f);
    }

    return g;
}

}  // namespace hambif
