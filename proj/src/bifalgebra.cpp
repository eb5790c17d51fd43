#include "hambif/bifalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace hambif {

namespace {

double rel_close_tol(double value) { return kMatchTol * std::max(1.0, std::abs(value)); }

bool lambda_matches(double lambda, double target) {
    return std::abs(lambda - target) <= kMatchTol * std::max(lambda, target);
}

}  // namespace

Eigen::MatrixXd symplectic_j(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    j.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    return j;
}

BlockHessian::BlockHessian(SymMatrix a, SymMatrix b)
    : A(std::move(a)), B(std::move(b)) {
    if (A.dim() != B.dim())
        throw DimensionError("BlockHessian: blocks must share one dimension");
}

SymMatrix BlockHessian::assemble() const {
    const int m = n();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    l.topLeftCorner(m, m) = A.mat();
    l.bottomRightCorner(m, m) = B.mat();
    return SymMatrix(l);
}

Eigen::MatrixXd BlockHessian::productAB() const { return A.mat() * B.mat(); }

BlockHessian BlockHessian::scaled(double c) const {
    return BlockHessian(A.scaled(c), B.scaled(c));
}

bool BlockHessian::commutes() const {
    const Eigen::MatrixXd ab = productAB();
    const Eigen::MatrixXd ba = B.mat() * A.mat();
    const double scale = 1.0 + A.infNorm() * B.infNorm();
    return (ab - ba).cwiseAbs().maxCoeff() <= kCommuteTol * scale;
}

CandidateParam CandidateParam::make(int j, double nu, int nuMultiplicity) {
    if (j < 1) throw Error("CandidateParam: j must be a positive integer");
    if (nu <= 0.0) throw Error("CandidateParam: nu must be strictly positive");
    CandidateParam c;
    c.j = j;
    c.nu = nu;
    c.lambda0 = j / std::sqrt(nu);
    c.nuMultiplicity = nuMultiplicity;
    return c;
}

const char* to_string(JumpRoute r) {
    switch (r) {
        case JumpRoute::Direct: return "Direct";
        case JumpRoute::Commuting: return "Commuting";
        case JumpRoute::Definite: return "Definite";
        case JumpRoute::OddMult: return "OddMult";
        case JumpRoute::EigenspaceIntersect: return "EigenspaceIntersect";
    }
    return "?";
}

SymMatrix build_qj(const SymMatrix& K, int j) {
    if (K.dim() % 2 != 0)
        throw DimensionError("build_qj: K must have even dimension 2n");
    if (j < 1) throw Error("build_qj: j must be a positive integer");
    const int n = K.dim() / 2;
    const Eigen::MatrixXd J = symplectic_j(n);
    const int d = 2 * n;
    Eigen::MatrixXd q(2 * d, 2 * d);
    q.topLeftCorner(d, d) = -K.mat();
    q.bottomRightCorner(d, d) = -K.mat();
    q.topRightCorner(d, d) = j * J.transpose();
    q.bottomLeftCorner(d, d) = j * J;
    return SymMatrix(q);
}

SymMatrix build_gj(const BlockHessian& L, int j, double scale) {
    if (j < 1) throw Error("build_gj: j must be a positive integer");
    if (scale <= 0.0) throw Error("build_gj: scale must be positive");
    const int n = L.n();
    Eigen::MatrixXd g(2 * n, 2 * n);
    g.topLeftCorner(n, n) = -scale * L.A.mat();
    g.bottomRightCorner(n, n) = -scale * L.B.mat();
    g.topRightCorner(n, n) = j * Eigen::MatrixXd::Identity(n, n);
    g.bottomLeftCorner(n, n) = j * Eigen::MatrixXd::Identity(n, n);
    return SymMatrix(g);
}

bool conjugation_check(const SymMatrix& K, int j) {
    if (K.dim() % 2 != 0)
        throw DimensionError("conjugation_check: K must have dimension 2n");
    const int n = K.dim() / 2;
    const SymMatrix C(Eigen::MatrixXd(K.mat().topLeftCorner(n, n)));
    const SymMatrix D(Eigen::MatrixXd(K.mat().bottomRightCorner(n, n)));

    // X = [I 0 0 0; 0 0 0 -I; 0 0 I 0; 0 I 0 0] in n-blocks.
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    X.block(0, 0, n, n) = I;
    X.block(n, 3 * n, n, n) = -I;
    X.block(2 * n, 2 * n, n, n) = I;
    X.block(3 * n, n, n, n) = I;

    const Eigen::MatrixXd lhs = X.transpose() * build_qj(K, j).mat() * X;

    const SymMatrix g = build_gj(BlockHessian(C, D), j, 1.0);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    rhs.topLeftCorner(2 * n, 2 * n) = g.mat();
    rhs.bottomRightCorner(2 * n, 2 * n) = g.mat();

    return (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12;
}

ProductSpectrum product_spectrum(const BlockHessian& L) {
    const Eigen::MatrixXd ab = L.productAB();
    const int n = L.n();

    Eigen::EigenSolver<Eigen::MatrixXd> solver(ab, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw EigenSolveError("product_spectrum: eigen-solver failure", ab);

    ProductSpectrum out;
    const double scale =
        std::max(1.0, ab.cwiseAbs().rowwise().sum().maxCoeff());
    out.realTol = 1e-9 * scale;

    std::vector<double> realValues;
    for (int i = 0; i < n; ++i) {
        const std::complex<double> v = solver.eigenvalues()(i);
        if (std::abs(v.imag()) <= 1e-9 * (1.0 + std::abs(v)))
            realValues.push_back(v.real());
        else
            out.complexValues.push_back(v);
    }
    std::sort(realValues.begin(), realValues.end());

    // Cluster width 1e-7 * scale: wide enough to reassemble a degenerate
    // eigenvalue that the nonsymmetric solver split by O(sqrt(eps)), so
    // the cluster size is the algebraic multiplicity.
    const double clusterWidth = 1e-7 * scale;
    size_t start = 0;
    while (start < realValues.size()) {
        size_t end = start + 1;
        while (end < realValues.size() &&
               realValues[end] - realValues[end - 1] <= clusterWidth) {
            ++end;
        }
        double mean = 0.0;
        for (size_t i = start; i < end; ++i) mean += realValues[i];
        mean /= static_cast<double>(end - start);
        out.real.push_back({mean, static_cast<int>(end - start), 0});
        start = end;
    }

    // Cross-check for positive nu: dim ker G_1(lambda L) at
    // lambda = 1/sqrt(nu) equals dim ker(AB - nu I). It matches the
    // algebraic multiplicity whenever AB is diagonalizable at nu and is
    // recorded for consumers that need the geometric count.
    for (auto& eig : out.real) {
        if (eig.nu <= out.realTol) continue;
        const double lambda = 1.0 / std::sqrt(eig.nu);
        const SymMatrix g = build_gj(L, 1, lambda);
        eig.kernelDim = spectrum(g).kernelDim();
    }
    return out;
}

std::vector<ProductSpectrum::RealEig> ProductSpectrum::positive() const {
    std::vector<RealEig> out;
    for (const auto& e : real)
        if (e.nu > realTol) out.push_back(e);
    return out;
}

std::vector<CandidateParam> lambda_j(const BlockHessian& L, int j) {
    if (j < 1) throw Error("lambda_j: j must be a positive integer");
    std::vector<CandidateParam> out;
    for (const auto& e : product_spectrum(L).positive())
        out.push_back(CandidateParam::make(j, e.nu, e.multiplicity));
    std::sort(out.begin(), out.end(),
              [](const CandidateParam& a, const CandidateParam& b) {
                  return a.lambda0 < b.lambda0;
              });
    return out;
}

std::vector<LambdaPoint> lambda_window(const BlockHessian& L, double a,
                                       double b) {
    if (!(0.0 < a && a < b))
        throw Error("lambda_window: need 0 < a < b");
    struct Entry {
        double lambda;
        int j;
        double nu;
        int mult;
    };
    std::vector<Entry> entries;
    for (const auto& e : product_spectrum(L).positive()) {
        const double sqrtNu = std::sqrt(e.nu);
        const int jLo = std::max(1, static_cast<int>(std::ceil(a * sqrtNu - 1e-12)));
        const int jHi = static_cast<int>(std::floor(b * sqrtNu + 1e-12));
        for (int j = jLo; j <= jHi; ++j) {
            const double lambda = j / sqrtNu;
            if (lambda < a - 1e-15 || lambda > b + 1e-15) continue;
            entries.push_back({lambda, j, e.nu, e.multiplicity});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& x, const Entry& y) { return x.lambda < y.lambda; });

    std::vector<LambdaPoint> out;
    for (const auto& e : entries) {
        if (!out.empty() && lambda_matches(e.lambda, out.back().lambda)) {
            out.back().multiplicity += e.mult;
            out.back().contributors.emplace_back(e.j, e.nu);
        } else {
            LambdaPoint p;
            p.lambda = e.lambda;
            p.multiplicity = e.mult;
            p.contributors.emplace_back(e.j, e.nu);
            out.push_back(std::move(p));
        }
    }
    return out;
}

GammaPair gamma_pm(double alpha, double beta, int j, double lambda) {
    if (lambda <= 0.0) throw Error("gamma_pm: lambda must be positive");
    const double disc =
        std::sqrt(lambda * lambda * (alpha - beta) * (alpha - beta) +
                  4.0 * static_cast<double>(j) * j);
    const double s = -lambda * (alpha + beta);
    return GammaPair{0.5 * (s + disc), 0.5 * (s - disc)};
}

std::optional<JointDiagonalization> joint_diagonalize(const BlockHessian& L) {
    if (!L.commutes()) return std::nullopt;
    const int n = L.n();
    const auto decA = spectrum(L.A);

    JointDiagonalization jd;
    jd.E = Eigen::MatrixXd::Zero(n, n);
    int col = 0;
    for (const auto& pa : decA.pairs) {
        // B restricted to this A-eigenspace is symmetric because B maps
        // the eigenspace into itself (commuting case).
        const Eigen::MatrixXd bSub =
            pa.basis.transpose() * L.B.mat() * pa.basis;
        const auto decSub = spectrum(SymMatrix(bSub), default_cluster_tol(L.B));
        for (const auto& pb : decSub.pairs) {
            const Eigen::MatrixXd cols = pa.basis * pb.basis;
            jd.E.middleCols(col, pb.multiplicity) = cols;
            for (int i = 0; i < pb.multiplicity; ++i) {
                jd.alphas.push_back(pa.value);
                jd.betas.push_back(pb.value);
            }
            col += pb.multiplicity;
        }
    }

    // Both conjugations must come out diagonal within the shared scale.
    const Eigen::MatrixXd da = jd.E.transpose() * L.A.mat() * jd.E;
    const Eigen::MatrixXd db = jd.E.transpose() * L.B.mat() * jd.E;
    const double tol =
        1e-7 * (1.0 + std::max(L.A.infNorm(), L.B.infNorm()));
    Eigen::MatrixXd offA = da, offB = db;
    offA.diagonal().setZero();
    offB.diagonal().setZero();
    if (offA.cwiseAbs().maxCoeff() > tol || offB.cwiseAbs().maxCoeff() > tol)
        throw EigenSolveError("joint_diagonalize: residual off-diagonal mass",
                              db);
    return jd;
}

YSets y_sets(const BlockHessian& L, double lambda0, int j) {
    const auto jd = joint_diagonalize(L);
    if (!jd)
        throw NotCommutingError(
            "y_sets: AB != BA; use the eigenspace-intersection, "
            "odd-multiplicity, or direct routes instead");
    YSets out;
    for (int k = 0; k < static_cast<int>(jd->alphas.size()); ++k) {
        const double prod = jd->alphas[k] * jd->betas[k];
        if (prod <= 0.0) continue;
        if (std::abs(lambda0 * std::sqrt(prod) - j) <= kMatchTol * j) {
            out.all.push_back(k);
            if (jd->alphas[k] > 0.0)
                out.plus.push_back(k);
            else
                out.minus.push_back(k);
        }
    }
    return out;
}

double isolation_epsilon(const BlockHessian& L, double lambda0) {
    if (lambda0 <= 0.0)
        throw CandidateError("isolation_epsilon: lambda0 must be positive");
    const auto window = lambda_window(L, lambda0 / 2.0, 2.0 * lambda0);
    bool found = false;
    double nearestOther = std::numeric_limits<double>::infinity();
    for (const auto& p : window) {
        if (lambda_matches(p.lambda, lambda0)) {
            found = true;
        } else {
            nearestOther = std::min(nearestOther, std::abs(p.lambda - lambda0));
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "isolation_epsilon: lambda0 = " << lambda0
           << " is not an element of Lambda(L)";
        throw CandidateError(os.str());
    }
    return std::min(lambda0 / 2.0, nearestOther / 2.0);
}

MorseJump morse_jump_direct(const BlockHessian& L, double lambda0, int j) {
    const double eps = isolation_epsilon(L, lambda0);
    const SymMatrix lFull = L.assemble();
    const SymMatrix qPlus =
        build_qj(SymMatrix((lambda0 + eps) * lFull.mat()), j);
    const SymMatrix qMinus =
        build_qj(SymMatrix((lambda0 - eps) * lFull.mat()), j);
    // One cluster tolerance for both sides; eigenvalue signs near zero
    // decide the count.
    const double tol =
        std::max(default_cluster_tol(qPlus), default_cluster_tol(qMinus));
    const int jump = morse_index(qPlus, tol) - morse_index(qMinus, tol);
    if (jump % 2 != 0) {
        std::ostringstream os;
        os << "morse_jump_direct: odd jump " << jump << " at lambda0 = "
           << lambda0 << ", j = " << j
           << " (spectrum of Q_j doubles that of G_j, so jumps are even)";
        throw RouteDisagreement(os.str());
    }
    return MorseJump{j, lambda0, eps, jump, JumpRoute::Direct};
}

MorseJump morse_jump_commuting(const BlockHessian& L, double lambda0, int j) {
    const double eps = isolation_epsilon(L, lambda0);
    const auto y = y_sets(L, lambda0, j);
    const int jump =
        2 * (static_cast<int>(y.plus.size()) - static_cast<int>(y.minus.size()));
    return MorseJump{j, lambda0, eps, jump, JumpRoute::Commuting};
}

MorseJump morse_jump_definite(const BlockHessian& L, double lambda0, int j) {
    const auto defA = definiteness(L.A);
    const auto defB = definiteness(L.B);
    int s = 0;
    if (defA == Definiteness::StrictlyPositive ||
        defB == Definiteness::StrictlyPositive)
        s = 1;
    else if (defA == Definiteness::StrictlyNegative ||
             defB == Definiteness::StrictlyNegative)
        s = -1;
    else
        throw DefiniteRouteError(
            "morse_jump_definite: neither block is strictly definite");

    const double eps = isolation_epsilon(L, lambda0);
    int jump = 0;
    for (const auto& e : product_spectrum(L).positive()) {
        if (lambda_matches(lambda0, j / std::sqrt(e.nu))) {
            jump = 2 * s * e.multiplicity;
            break;
        }
    }
    return MorseJump{j, lambda0, eps, jump, JumpRoute::Definite};
}

int subspace_intersection_dim(const Eigen::MatrixXd& V,
                              const Eigen::MatrixXd& W, double tol) {
    if (V.cols() == 0 || W.cols() == 0) return 0;
    Eigen::MatrixXd stacked(V.rows(), V.cols() + W.cols());
    stacked << V, W;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
    return static_cast<int>(V.cols() + W.cols()) - rank;
}

std::vector<JumpCertificate> jump_nonzero_certificates(const BlockHessian& L,
                                                       double lambda0,
                                                       int j0) {
    const auto positive = product_spectrum(L).positive();
    const ProductSpectrum::RealEig* nu0 = nullptr;
    for (const auto& e : positive) {
        if (lambda_matches(lambda0, j0 / std::sqrt(e.nu))) {
            nu0 = &e;
            break;
        }
    }
    if (nu0 == nullptr) {
        std::ostringstream os;
        os << "jump_nonzero_certificates: lambda0 = " << lambda0
           << " does not equal j0/sqrt(nu) for any nu in sigma_+(AB)";
        throw CandidateError(os.str());
    }

    std::vector<JumpCertificate> out;
    if (nu0->multiplicity % 2 == 1) {
        JumpCertificate c;
        c.kind = CertificateKind::OddMultiplicity;
        std::ostringstream os;
        os << "mult(nu0 = " << nu0->nu << ") = " << nu0->multiplicity
           << " is odd";
        c.detail = os.str();
        out.push_back(std::move(c));
    }

    const auto decA = spectrum(L.A);
    const auto decB = spectrum(L.B);
    // Shared cluster tolerance; the stacked basis has orthonormal
    // columns, so its singular values live on the unit scale.
    const double svTol = 1e-9 * std::sqrt(2.0);
    for (const auto& pa : decA.pairs) {
        for (const auto& pb : decB.pairs) {
            const double prod = pa.value * pb.value;
            if (prod <= 0.0) continue;
            if (std::abs(prod - nu0->nu) > rel_close_tol(nu0->nu)) continue;
            const int q =
                subspace_intersection_dim(pa.basis, pb.basis, svTol);
            if (2 * q > nu0->multiplicity) {
                JumpCertificate c;
                c.kind = CertificateKind::EigenspaceIntersection;
                c.alpha = pa.value;
                c.beta = pb.value;
                c.intersectionDim = q;
                std::ostringstream os;
                os << "dim(V_A(" << pa.value << ") cap V_B(" << pb.value
                   << ")) = " << q << " > mult(nu0)/2 = "
                   << 0.5 * nu0->multiplicity;
                c.detail = os.str();
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

}  // namespace hambif
