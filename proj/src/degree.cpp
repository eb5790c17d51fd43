#include "hambif/degree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

namespace hambif {

namespace {

// An axis-aligned piece of a k-dimensional coordinate plane in R^d:
// axes with lo == hi are fixed, the rest are free. The sign is the
// orientation relative to the standard orientation of the free axes in
// ascending order.
struct Cell {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    int sign = 1;
    int depth = 0;

    std::vector<int> freeAxes() const {
        std::vector<int> out;
        for (int i = 0; i < lo.size(); ++i)
            if (lo(i) < hi(i)) out.push_back(i);
        return out;
    }
};

struct LabeledCell {
    Cell cell;
    int comp = -1;  // certified component
    int sgn = 0;    // certified sign of that component
};

struct Ctx {
    const VectorField* field = nullptr;
    int maxDepth = 0;
    double maxNormSeen = 0.0;
    long evaluations = 0;
    long pieces = 0;
    int maxDepthUsed = 0;
    double boundaryMinNorm = std::numeric_limits<double>::infinity();
    bool sampledFallback = false;

    double zeroTol() const { return 1e-12 * (1.0 + maxNormSeen); }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) {
        Eigen::VectorXd v = field->eval(x);
        ++evaluations;
        const double norm = v.cwiseAbs().maxCoeff();
        boundaryMinNorm = std::min(boundaryMinNorm, norm);
        if (norm <= zeroTol()) {
            std::ostringstream os;
            os << "brouwer_degree: |F|_inf = " << norm
               << " on the boundary, below zero tolerance " << zeroTol();
            throw ZeroOnBoundary(os.str(), x);
        }
        maxNormSeen = std::max(maxNormSeen, norm);
        return v;
    }
};

struct CertifyOutcome {
    bool certified = false;
    int comp = -1;
    int sgn = 0;
    int splitAxis = -1;  // suggestion when not certified
};

// Sign certificate via the global Lipschitz bound: constant sign on the
// closed cell follows from |f_c(center)| > L * ||halfwidths||_2.
CertifyOutcome certify_lipschitz(Ctx& ctx, const Cell& cell,
                                 const std::vector<int>& comps,
                                 const std::vector<int>& free) {
    Eigen::VectorXd center = 0.5 * (cell.lo + cell.hi);
    const Eigen::VectorXd v = ctx.eval(center);
    double radius2 = 0.0;
    for (int a : free) {
        const double hw = 0.5 * (cell.hi(a) - cell.lo(a));
        radius2 += hw * hw;
    }
    const double bound = *ctx.field->lipschitzHint * std::sqrt(radius2);

    CertifyOutcome out;
    double bestMargin = 0.0;
    for (int c : comps) {
        const double margin = std::abs(v(c)) - bound;
        if (margin > 0.0 && margin > bestMargin) {
            out.certified = true;
            out.comp = c;
            out.sgn = v(c) > 0 ? 1 : -1;
            bestMargin = margin;
        }
    }
    if (!out.certified && !free.empty()) {
        // Widest axis; nothing finer is known without samples.
        int widest = free[0];
        for (int a : free)
            if (cell.hi(a) - cell.lo(a) > cell.hi(widest) - cell.lo(widest))
                widest = a;
        out.splitAxis = widest;
    }
    return out;
}

// Heuristic certificate from a 3^m sample grid: a component qualifies
// when its sign is uniform and min |f_c| exceeds 10x the largest
// adjacent-sample difference. Flagged as "sampled, not certified".
CertifyOutcome certify_sampled(Ctx& ctx, const Cell& cell,
                               const std::vector<int>& comps,
                               const std::vector<int>& free) {
    const int m = static_cast<int>(free.size());
    int total = 1;
    for (int i = 0; i < m; ++i) total *= 3;

    std::vector<Eigen::VectorXd> values(total);
    Eigen::VectorXd x = 0.5 * (cell.lo + cell.hi);
    std::vector<int> digits(m, 0);
    for (int idx = 0; idx < total; ++idx) {
        int rem = idx;
        for (int i = 0; i < m; ++i) {
            digits[i] = rem % 3;
            rem /= 3;
            const int a = free[i];
            x(a) = cell.lo(a) + 0.5 * digits[i] * (cell.hi(a) - cell.lo(a));
        }
        values[idx] = ctx.eval(x);
    }

    // Strides for neighbor lookups along each free axis.
    std::vector<int> stride(m, 1);
    for (int i = 1; i < m; ++i) stride[i] = stride[i - 1] * 3;

    CertifyOutcome out;
    double bestCertScore = -1.0;
    double bestSplitScore = -1.0;
    std::vector<double> splitAxisVar(m, 0.0);

    for (int c : comps) {
        double minAbs = std::numeric_limits<double>::infinity();
        bool uniform = true;
        const double first = values[0](c);
        std::vector<double> axisVar(m, 0.0);
        double maxVar = 0.0;
        for (int idx = 0; idx < total; ++idx) {
            const double v = values[idx](c);
            minAbs = std::min(minAbs, std::abs(v));
            if (v == 0.0 || (v > 0.0) != (first > 0.0)) uniform = false;
            int rem = idx;
            for (int i = 0; i < m; ++i) {
                const int digit = rem % 3;
                rem /= 3;
                if (digit < 2) {
                    const double diff =
                        std::abs(values[idx + stride[i]](c) - v);
                    axisVar[i] = std::max(axisVar[i], diff);
                    maxVar = std::max(maxVar, diff);
                }
            }
        }
        if (uniform && minAbs > 10.0 * maxVar) {
            const double score = minAbs / (maxVar + 1e-300);
            if (score > bestCertScore) {
                out.certified = true;
                out.comp = c;
                out.sgn = first > 0.0 ? 1 : -1;
                bestCertScore = score;
            }
        }
        // Split heuristic: prefer the component closest to certifiable
        // (uniform sign, best margin ratio); among sign-changing
        // components, the steepest one separates its zero set fastest.
        const double splitScore =
            uniform ? 1.0 + minAbs / (maxVar + 1e-300) : maxVar;
        if (splitScore > bestSplitScore) {
            bestSplitScore = splitScore;
            splitAxisVar = axisVar;
        }
    }

    if (!out.certified && m > 0) {
        int axis = 0;
        double best = -1.0;
        for (int i = 0; i < m; ++i) {
            if (splitAxisVar[i] > best) {
                best = splitAxisVar[i];
                axis = i;
            }
        }
        if (best <= 0.0) {
            for (int i = 0; i < m; ++i)
                if (cell.hi(free[i]) - cell.lo(free[i]) >
                    cell.hi(free[axis]) - cell.lo(free[axis]))
                    axis = i;
        }
        out.splitAxis = free[axis];
    }
    return out;
}

CertifyOutcome certify(Ctx& ctx, const Cell& cell,
                       const std::vector<int>& comps) {
    const std::vector<int> free = cell.freeAxes();
    if (ctx.field->lipschitzHint.has_value())
        return certify_lipschitz(ctx, cell, comps, free);
    ctx.sampledFallback = true;
    return certify_sampled(ctx, cell, comps, free);
}

std::pair<Cell, Cell> split_cell(const Cell& cell, int axis) {
    Cell a = cell, b = cell;
    const double mid = 0.5 * (cell.lo(axis) + cell.hi(axis));
    a.hi(axis) = mid;
    b.lo(axis) = mid;
    a.depth = b.depth = cell.depth + 1;
    return {a, b};
}

// Oriented boundary facets of a cell: at the max end of the p-th free
// axis the induced sign is sign * (-1)^p, at the min end the opposite.
void append_boundary(const Cell& cell, std::vector<Cell>& out) {
    const std::vector<int> free = cell.freeAxes();
    for (size_t p = 0; p < free.size(); ++p) {
        const int a = free[p];
        const int oriented = (p % 2 == 0) ? cell.sign : -cell.sign;
        Cell maxEnd = cell;
        maxEnd.lo(a) = maxEnd.hi(a) = cell.hi(a);
        maxEnd.sign = oriented;
        maxEnd.depth = 0;
        Cell minEnd = cell;
        minEnd.lo(a) = minEnd.hi(a) = cell.lo(a);
        minEnd.sign = -oriented;
        minEnd.depth = 0;
        out.push_back(std::move(maxEnd));
        out.push_back(std::move(minEnd));
    }
}

// Cancel oppositely oriented overlapping facets. Facets can only
// overlap when they share every fixed coordinate; within such a group
// they are fragmented on the common cut grid and net signs accumulated.
// All coordinates descend from midpoint bisections of one root box, so
// exact double comparisons are sound.
std::vector<Cell> cancel_boundary(const std::vector<Cell>& facets) {
    using Signature = std::vector<std::pair<int, double>>;
    std::map<Signature, std::vector<const Cell*>> groups;
    for (const Cell& f : facets) {
        Signature sig;
        for (int i = 0; i < f.lo.size(); ++i)
            if (f.lo(i) == f.hi(i)) sig.emplace_back(i, f.lo(i));
        groups[sig].push_back(&f);
    }

    std::vector<Cell> out;
    for (const auto& [sig, members] : groups) {
        const std::vector<int> free = members[0]->freeAxes();
        const int m = static_cast<int>(free.size());

        std::vector<std::vector<double>> cuts(m);
        for (const Cell* f : members) {
            for (int i = 0; i < m; ++i) {
                cuts[i].push_back(f->lo(free[i]));
                cuts[i].push_back(f->hi(free[i]));
            }
        }
        for (auto& c : cuts) {
            std::sort(c.begin(), c.end());
            c.erase(std::unique(c.begin(), c.end()), c.end());
        }

        std::map<std::vector<int>, int> atoms;
        for (const Cell* f : members) {
            std::vector<int> idxLo(m), idxHi(m);
            for (int i = 0; i < m; ++i) {
                idxLo[i] = static_cast<int>(
                    std::lower_bound(cuts[i].begin(), cuts[i].end(),
                                     f->lo(free[i])) -
                    cuts[i].begin());
                idxHi[i] = static_cast<int>(
                    std::lower_bound(cuts[i].begin(), cuts[i].end(),
                                     f->hi(free[i])) -
                    cuts[i].begin());
            }
            std::vector<int> idx = idxLo;
            while (true) {
                atoms[idx] += f->sign;
                int i = 0;
                for (; i < m; ++i) {
                    if (++idx[i] < idxHi[i]) break;
                    idx[i] = idxLo[i];
                }
                if (i == m) break;
            }
        }

        for (const auto& [idx, net] : atoms) {
            if (net == 0) continue;
            // |net| >= 2 is legitimate: a selected region can pinch along
            // a codimension-2 locus of the original box (three cycle
            // sheets meet there), and the recursion is linear in the
            // chain, so weighted cells propagate correctly.
            Cell atom;
            atom.lo = members[0]->lo;
            atom.hi = members[0]->hi;
            for (int i = 0; i < m; ++i) {
                atom.lo(free[i]) = cuts[i][idx[i]];
                atom.hi(free[i]) = cuts[i][idx[i] + 1];
            }
            atom.sign = net;
            atom.depth = 0;
            out.push_back(std::move(atom));
        }
    }
    return out;
}

// Degree of the Gauss map F_C/|F_C| over an oriented cycle of dimension
// |C| - 1. The recursion certifies a sign-covering, keeps the pieces
// where the selected component is certified positive, and descends to
// their boundary with that component dropped.
int gauss_degree(Ctx& ctx, std::vector<Cell> cycle, std::vector<int> comps) {
    if (comps.size() == 1) {
        const int c = comps[0];
        int total = 0;
        for (const Cell& cell : cycle) {
            const Eigen::VectorXd v = ctx.eval(cell.lo);
            if (v(c) > 0.0) total += cell.sign;
        }
        return total;
    }

    std::vector<LabeledCell> labeled;
    std::vector<Cell> work = std::move(cycle);
    while (!work.empty()) {
        Cell cell = std::move(work.back());
        work.pop_back();
        const CertifyOutcome res = certify(ctx, cell, comps);
        if (res.certified) {
            ctx.maxDepthUsed = std::max(ctx.maxDepthUsed, cell.depth);
            labeled.push_back(LabeledCell{std::move(cell), res.comp, res.sgn});
            continue;
        }
        if (cell.depth >= ctx.maxDepth) {
            std::ostringstream os;
            os << "brouwer_degree: no component sign could be certified at "
                  "depth "
               << cell.depth << " (maxDepth " << ctx.maxDepth
               << "); cell center";
            const Eigen::VectorXd center = 0.5 * (cell.lo + cell.hi);
            for (int i = 0; i < center.size(); ++i) os << ' ' << center(i);
            throw DepthExceeded(os.str());
        }
        auto [a, b] = split_cell(cell, res.splitAxis);
        work.push_back(std::move(a));
        work.push_back(std::move(b));
    }
    ctx.pieces += static_cast<long>(labeled.size());

    // Any selected component gives the same degree; the one with the
    // fewest positive pieces minimizes the recursion, and zero pieces
    // means the Gauss map misses that pole entirely.
    int best = comps[0];
    long bestCount = std::numeric_limits<long>::max();
    for (int c : comps) {
        long count = 0;
        for (const auto& lc : labeled)
            if (lc.comp == c && lc.sgn > 0) ++count;
        if (count < bestCount) {
            bestCount = count;
            best = c;
        }
    }
    if (bestCount == 0) return 0;

    std::vector<Cell> facets;
    for (const auto& lc : labeled)
        if (lc.comp == best && lc.sgn > 0) append_boundary(lc.cell, facets);
    std::vector<Cell> boundary = cancel_boundary(facets);

    std::vector<int> rest;
    int position = 0;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (comps[i] == best)
            position = static_cast<int>(i);
        else
            rest.push_back(comps[i]);
    }
    const int orientation = (position % 2 == 0) ? 1 : -1;
    return orientation * gauss_degree(ctx, std::move(boundary), rest);
}

}  // namespace

DegreeResult brouwer_degree(const VectorField& F, const Box& box,
                            int maxDepth) {
    if (F.dim < 1 || !F.eval)
        throw Error("brouwer_degree: field must have dim >= 1 and an "
                    "evaluator");
    if (box.center.size() != F.dim || box.halfWidths.size() != F.dim)
        throw DimensionError("brouwer_degree: box/field dimension mismatch");
    if ((box.halfWidths.array() <= 0.0).any())
        throw Error("brouwer_degree: halfWidths must be positive");

    Ctx ctx;
    ctx.field = &F;
    ctx.maxDepth = maxDepth;

    Cell root;
    root.lo = box.center - box.halfWidths;
    root.hi = box.center + box.halfWidths;
    root.sign = 1;
    root.depth = 0;

    std::vector<Cell> cycle;
    append_boundary(root, cycle);

    std::vector<int> comps(F.dim);
    for (int i = 0; i < F.dim; ++i) comps[i] = i;

    DegreeResult result;
    result.degree = gauss_degree(ctx, std::move(cycle), comps);
    result.certificate.grade = ctx.sampledFallback
                                   ? CertGrade::SampledHeuristic
                                   : CertGrade::LipschitzCertified;
    result.certificate.evaluations = ctx.evaluations;
    result.certificate.pieces = ctx.pieces;
    result.certificate.maxDepthUsed = ctx.maxDepthUsed;
    result.certificate.boundaryMinNorm = ctx.boundaryMinNorm;
    return result;
}

namespace {

// Damped Newton with finite-difference Jacobian. Returns the refined
// point when it reaches |F|_inf <= tol, nullopt otherwise.
std::optional<Eigen::VectorXd> newton_polish(const VectorField& F,
                                             Eigen::VectorXd x, double tol,
                                             double stayRadius,
                                             const Eigen::VectorXd& anchor) {
    const int d = F.dim;
    Eigen::VectorXd fx = F.eval(x);
    for (int iter = 0; iter < 20; ++iter) {
        if (fx.cwiseAbs().maxCoeff() <= tol) return x;
        Eigen::MatrixXd jac(d, d);
        for (int j = 0; j < d; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (F.eval(xp) - F.eval(xm)) / (2.0 * h);
        }
        Eigen::VectorXd step = jac.fullPivLu().solve(-fx);
        if (!step.allFinite()) return std::nullopt;
        double damp = 1.0;
        const double fNorm = fx.norm();
        for (int ls = 0; ls < 8; ++ls) {
            Eigen::VectorXd cand = x + damp * step;
            Eigen::VectorXd fc = F.eval(cand);
            if (fc.norm() < fNorm) {
                x = cand;
                fx = fc;
                break;
            }
            damp *= 0.5;
            if (ls == 7) return std::nullopt;
        }
        if ((x - anchor).cwiseAbs().maxCoeff() > stayRadius)
            return std::nullopt;
    }
    return fx.cwiseAbs().maxCoeff() <= tol ? std::optional(x) : std::nullopt;
}

}  // namespace

int topological_index(const VectorField& F, const Eigen::VectorXd& x0,
                      double initialHalfWidth, int maxDepth) {
    return topological_index_certified(F, x0, initialHalfWidth, maxDepth)
        .degree;
}

DegreeResult topological_index_certified(const VectorField& F,
                                         const Eigen::VectorXd& x0,
                                         double initialHalfWidth,
                                         int maxDepth) {
    if (initialHalfWidth <= 0.0)
        throw Error("topological_index: initialHalfWidth must be positive");

    const int d = F.dim;
    const int perAxis = d <= 2 ? 15 : d == 3 ? 9 : d == 4 ? 6 : d == 5 ? 5 : 4;

    double h = initialHalfWidth;
    for (int shrink = 0; shrink <= 6; ++shrink) {
        // Coarse scan: Newton-polish the most suspicious outer grid
        // points; a polished zero inside the box away from x0 is a
        // confirmed second zero. Flat degenerate approaches to x0 polish
        // back into the excluded core and are ignored.
        long total = 1;
        for (int i = 0; i < d; ++i) total *= perAxis;
        std::vector<std::pair<double, Eigen::VectorXd>> suspects;
        Eigen::VectorXd x(d);
        for (long idx = 0; idx < total; ++idx) {
            long rem = idx;
            double distInf = 0.0;
            for (int i = 0; i < d; ++i) {
                const int digit = static_cast<int>(rem % perAxis);
                rem /= perAxis;
                x(i) = x0(i) - h + 2.0 * h * digit / (perAxis - 1);
                distInf = std::max(distInf, std::abs(x(i) - x0(i)));
            }
            if (distInf <= 0.3 * h) continue;
            suspects.emplace_back(F.eval(x).cwiseAbs().maxCoeff(), x);
        }
        std::partial_sort(suspects.begin(),
                          suspects.begin() + std::min<size_t>(3, suspects.size()),
                          suspects.end(),
                          [](const auto& a, const auto& b) {
                              return a.first < b.first;
                          });

        std::optional<Eigen::VectorXd> second;
        for (size_t i = 0; i < std::min<size_t>(3, suspects.size()); ++i) {
            auto zero = newton_polish(F, suspects[i].second,
                                      1e-10 * (1.0 + suspects[i].first),
                                      2.0 * h, x0);
            if (!zero) continue;
            const double dist = (*zero - x0).cwiseAbs().maxCoeff();
            if (dist > 0.2 * h && dist <= h) {
                second = zero;
                break;
            }
        }

        if (!second) {
            Box box;
            box.center = x0;
            box.halfWidths = Eigen::VectorXd::Constant(d, h);
            return brouwer_degree(F, box, maxDepth);
        }
        if (shrink == 6) {
            std::ostringstream os;
            os << "topological_index: a second zero persists away from x0 "
                  "after 6 box halvings";
            throw SecondZeroSuspected(os.str(), *second);
        }
        h *= 0.5;
    }
    return DegreeResult{};  // unreachable
}

int index_shortcut(StrictExtremum) { return 1; }

int index_shortcut(const Nondegenerate& n) {
    if (n.det == 0.0)
        throw Error("index_shortcut: nondegenerate case requires det != 0");
    return n.det > 0.0 ? 1 : -1;
}

}  // namespace hambif
