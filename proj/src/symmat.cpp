#include "hambif/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace hambif {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        std::ostringstream os;
        os << "SymMatrix: expected square matrix of dim >= 1, got "
           << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
    mat_ = 0.5 * (m + m.transpose());
    // Averaging can still leave the pair asymmetric in the last bit when
    // the additions round differently; mirror the lower triangle.
    for (int i = 0; i < mat_.rows(); ++i)
        for (int j = 0; j < i; ++j) mat_(j, i) = mat_(i, j);
}

SymMatrix SymMatrix::Zero(int dim) {
    return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SymMatrix SymMatrix::Identity(int dim) {
    return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymMatrix SymMatrix::Diag(const std::vector<double>& values) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(values.size(), values.size());
    for (size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return SymMatrix(m);
}

double SymMatrix::infNorm() const {
    return mat_.cwiseAbs().rowwise().sum().maxCoeff();
}

double default_cluster_tol(const SymMatrix& s) {
    return 1e-9 * std::max(1.0, s.infNorm());
}

int SpectralDecomposition::totalMultiplicity() const {
    int total = 0;
    for (const auto& p : pairs) total += p.multiplicity;
    return total;
}

Eigen::MatrixXd SpectralDecomposition::reconstruct() const {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& p : pairs)
        acc += p.value * (p.basis * p.basis.transpose());
    return acc;
}

int SpectralDecomposition::negativeCount() const {
    int count = 0;
    for (const auto& p : pairs)
        if (p.value < -clusterTol) count += p.multiplicity;
    return count;
}

int SpectralDecomposition::kernelDim() const {
    int count = 0;
    for (const auto& p : pairs)
        if (std::abs(p.value) <= clusterTol) count += p.multiplicity;
    return count;
}

SpectralDecomposition spectrum(const SymMatrix& s, double clusterTol) {
    if (clusterTol < 0.0)
        throw Error("spectrum: clusterTol must be nonnegative");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.mat());
    if (solver.info() != Eigen::Success)
        throw EigenSolveError("spectrum: eigen-solver iteration failure",
                              s.mat());

    const Eigen::VectorXd values = solver.eigenvalues();  // ascending
    const Eigen::MatrixXd vectors = solver.eigenvectors();
    const int n = s.dim();

    SpectralDecomposition dec;
    dec.clusterTol = clusterTol;
    dec.dim = n;

    int start = 0;
    while (start < n) {
        int end = start + 1;
        // Chain-merge: successive gaps <= clusterTol belong together.
        while (end < n && values(end) - values(end - 1) <= clusterTol) ++end;
        Eigenpair pair;
        pair.multiplicity = end - start;
        pair.value = values.segment(start, end - start).mean();
        pair.basis = vectors.middleCols(start, end - start);
        dec.pairs.push_back(std::move(pair));
        start = end;
    }

    const double scale = s.infNorm();
    const double eps = std::numeric_limits<double>::epsilon();
    const double bound = 10.0 * n * eps * std::max(1.0, scale);
    // With clustering the projector reconstruction differs from the raw
    // V D V^t by at most clusterTol on each merged eigenspace.
    const double err = (dec.reconstruct() - s.mat()).cwiseAbs().maxCoeff();
    if (err > bound + clusterTol)
        throw EigenSolveError("spectrum: reconstruction check failed",
                              s.mat());
    return dec;
}

SpectralDecomposition spectrum(const SymMatrix& s) {
    return spectrum(s, default_cluster_tol(s));
}

int morse_index(const SymMatrix& s, double clusterTol) {
    return spectrum(s, clusterTol).negativeCount();
}

int morse_index(const SymMatrix& s) {
    return morse_index(s, default_cluster_tol(s));
}

Definiteness definiteness(const SymMatrix& s, double clusterTol) {
    const auto dec = spectrum(s, clusterTol);
    bool hasPos = false, hasNeg = false, hasZero = false;
    for (const auto& p : dec.pairs) {
        if (p.value > clusterTol)
            hasPos = true;
        else if (p.value < -clusterTol)
            hasNeg = true;
        else
            hasZero = true;
    }
    if (hasPos && hasNeg) return Definiteness::Indefinite;
    if (hasPos) return hasZero ? Definiteness::NonnegativeSingular
                               : Definiteness::StrictlyPositive;
    if (hasNeg) return hasZero ? Definiteness::NonpositiveSingular
                               : Definiteness::StrictlyNegative;
    return Definiteness::Zero;
}

Definiteness definiteness(const SymMatrix& s) {
    return definiteness(s, default_cluster_tol(s));
}

const char* to_string(Definiteness d) {
    switch (d) {
        case Definiteness::StrictlyPositive: return "StrictlyPositive";
        case Definiteness::StrictlyNegative: return "StrictlyNegative";
        case Definiteness::NonnegativeSingular: return "NonnegativeSingular";
        case Definiteness::NonpositiveSingular: return "NonpositiveSingular";
        case Definiteness::Indefinite: return "Indefinite";
        case Definiteness::Zero: return "Zero";
    }
    return "?";
}

AbsSqrtSgn abs_sqrt_sgn(const SymMatrix& s, double clusterTol) {
    const auto dec = spectrum(s, clusterTol);
    const int n = s.dim();
    Eigen::MatrixXd abs = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sqrtAbs = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : dec.pairs) {
        const Eigen::MatrixXd proj = p.basis * p.basis.transpose();
        abs += std::abs(p.value) * proj;
        sqrtAbs += std::sqrt(std::abs(p.value)) * proj;
    }

    std::optional<int> sgn;
    switch (definiteness(s, clusterTol)) {
        case Definiteness::StrictlyPositive:
        case Definiteness::NonnegativeSingular: sgn = 1; break;
        case Definiteness::StrictlyNegative:
        case Definiteness::NonpositiveSingular: sgn = -1; break;
        case Definiteness::Zero: sgn = 0; break;
        case Definiteness::Indefinite: sgn = std::nullopt; break;
    }
    return AbsSqrtSgn{SymMatrix(abs), SymMatrix(sqrtAbs), sgn};
}

AbsSqrtSgn abs_sqrt_sgn(const SymMatrix& s) {
    return abs_sqrt_sgn(s, default_cluster_tol(s));
}

}  // namespace hambif
