#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hambif/errors.hpp"

namespace hambif {

/// Real symmetric matrix. Symmetry is enforced at construction by
/// averaging (S + S^t)/2, so user-entered Hessians with rounding noise
/// are accepted; the stored entries satisfy m(i,j) == m(j,i) exactly.
class SymMatrix {
public:
    explicit SymMatrix(const Eigen::MatrixXd& m);

    static SymMatrix Zero(int dim);
    static SymMatrix Identity(int dim);
    static SymMatrix Diag(const std::vector<double>& values);

    int dim() const { return static_cast<int>(mat_.rows()); }
    double operator()(int i, int j) const { return mat_(i, j); }
    const Eigen::MatrixXd& mat() const { return mat_; }

    /// Max-row-sum norm, the scale used by the default cluster tolerance.
    double infNorm() const;

    SymMatrix scaled(double c) const { return SymMatrix(c * mat_); }

private:
    Eigen::MatrixXd mat_;
};

/// The single source of truth for "numerically equal eigenvalues":
/// 1e-9 * max(1, ||S||_inf).
double default_cluster_tol(const SymMatrix& s);

struct Eigenpair {
    double value = 0.0;
    int multiplicity = 0;
    Eigen::MatrixXd basis;  // dim x multiplicity, orthonormal columns
};

/// Eigenvalues with multiplicities and orthonormal eigenspace bases.
/// Eigenvalues within clusterTol of each other (chained) are merged into
/// one pair; representatives of distinct pairs are separated by more
/// than clusterTol.
struct SpectralDecomposition {
    std::vector<Eigenpair> pairs;  // sorted ascending by value
    double clusterTol = 0.0;
    int dim = 0;

    int totalMultiplicity() const;
    Eigen::MatrixXd reconstruct() const;
    /// Total multiplicity of eigenvalues < -clusterTol.
    int negativeCount() const;
    /// Total multiplicity of eigenvalues with |value| <= clusterTol.
    int kernelDim() const;
};

SpectralDecomposition spectrum(const SymMatrix& s, double clusterTol);
SpectralDecomposition spectrum(const SymMatrix& s);  // default tolerance

/// Morse index: total multiplicity of strictly negative eigenvalues,
/// where |value| <= clusterTol counts as zero.
int morse_index(const SymMatrix& s, double clusterTol);
int morse_index(const SymMatrix& s);

enum class Definiteness {
    StrictlyPositive,
    StrictlyNegative,
    NonnegativeSingular,
    NonpositiveSingular,
    Indefinite,
    Zero,
};

Definiteness definiteness(const SymMatrix& s, double clusterTol);
Definiteness definiteness(const SymMatrix& s);

const char* to_string(Definiteness d);

/// |S| = sqrt(S^2), its square root, and sgn(S). sgn is defined only for
/// semidefinite S (1 if no negative part and S != 0, -1 symmetrically,
/// 0 for S == 0); nullopt marks the indefinite case, where absS and
/// sqrtAbsS are still valid.
struct AbsSqrtSgn {
    SymMatrix absS;
    SymMatrix sqrtAbsS;
    std::optional<int> sgn;
};

AbsSqrtSgn abs_sqrt_sgn(const SymMatrix& s, double clusterTol);
AbsSqrtSgn abs_sqrt_sgn(const SymMatrix& s);

}  // namespace hambif
