#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hambif/symmat.hpp"

namespace hambif {

/// Relative tolerance for "lambda equals j/sqrt(nu)" matches. Candidates
/// are constructed, not measured, so this is deliberately tight.
inline constexpr double kMatchTol = 1e-9;

/// Relative tolerance below which AB and BA count as equal. Commutation
/// is a structural hypothesis; near-misses must not be silently
/// jointly diagonalized.
inline constexpr double kCommuteTol = 1e-10;

/// Standard symplectic matrix J_n = [0 -I; I 0], dimension 2n.
Eigen::MatrixXd symplectic_j(int n);

/// The pair (A, B) of symmetric blocks of a block-diagonal Hessian
/// L = blockdiag(A, B).
struct BlockHessian {
    SymMatrix A;
    SymMatrix B;

    BlockHessian(SymMatrix a, SymMatrix b);

    int n() const { return A.dim(); }
    SymMatrix assemble() const;          // 2n x 2n blockdiag(A, B)
    Eigen::MatrixXd productAB() const;   // generally non-symmetric
    BlockHessian scaled(double c) const;
    bool commutes() const;
};

/// A root lambda0 = j / sqrt(nu) of det G_j(lambda L), nu in sigma_+(AB).
struct CandidateParam {
    int j = 0;
    double nu = 0.0;
    double lambda0 = 0.0;
    int nuMultiplicity = 0;

    static CandidateParam make(int j, double nu, int nuMultiplicity);
};

enum class JumpRoute { Direct, Commuting, Definite, OddMult, EigenspaceIntersect };

const char* to_string(JumpRoute r);

/// Morse-index change of Q_j(lambda L) across lambda0:
/// m^-(Q_j((l0+eps)L)) - m^-(Q_j((l0-eps)L)).
struct MorseJump {
    int j = 0;
    double lambda0 = 0.0;
    double epsilon = 0.0;
    int jump = 0;
    JumpRoute route = JumpRoute::Direct;
};

/// Q_j(K) = [-K jJ^t; jJ -K], a 4n x 4n symmetric matrix.
SymMatrix build_qj(const SymMatrix& K, int j);

/// G_j(scale * L) = [-scale*A jI; jI -scale*B], 2n x 2n symmetric.
SymMatrix build_gj(const BlockHessian& L, int j, double scale);

/// Verifies X^t Q_j(K) X == blockdiag(G_j(K), G_j(K)) entrywise for
/// block-diagonal K. Test instrumentation.
bool conjugation_check(const SymMatrix& K, int j);

struct ProductSpectrum {
    struct RealEig {
        double nu = 0.0;
        int multiplicity = 0;  // algebraic (cluster size)
        int kernelDim = 0;     // dim ker G_1 at lambda = 1/sqrt(nu); 0 for nu <= 0
    };
    std::vector<RealEig> real;                   // ascending by nu
    std::vector<std::complex<double>> complexValues;  // excluded from candidates
    double realTol = 0.0;

    std::vector<RealEig> positive() const;       // nu > realTol
};

/// Real eigenvalues of AB with algebraic multiplicities; complex pairs
/// reported separately. For positive nu the multiplicity is
/// cross-checked against dim ker G_1(lambda L) at lambda = 1/sqrt(nu)
/// (equal whenever AB is diagonalizable at nu; the kernel dimension is
/// recorded alongside, since defective products split the two counts).
ProductSpectrum product_spectrum(const BlockHessian& L);

/// Lambda_j(L) = {j/sqrt(nu) : nu in sigma_+(AB)}, ascending in lambda.
std::vector<CandidateParam> lambda_j(const BlockHessian& L, int j);

struct LambdaPoint {
    double lambda = 0.0;
    int multiplicity = 0;  // summed over contributors
    std::vector<std::pair<int, double>> contributors;  // (j, nu)
};

/// All elements of Lambda(L) in [a, b], 0 < a < b. Complete: since
/// Lambda_j = j * Lambda_1, the j range per nu is finite and enumerable.
std::vector<LambdaPoint> lambda_window(const BlockHessian& L, double a,
                                       double b);

struct GammaPair {
    double plus = 0.0;
    double minus = 0.0;
};

/// Eigenvalue curves gamma_kj^{+-}(lambda) of the commuting-case pencil:
/// [-(alpha+beta)lambda +- sqrt(lambda^2 (alpha-beta)^2 + 4 j^2)] / 2.
GammaPair gamma_pm(double alpha, double beta, int j, double lambda);

struct JointDiagonalization {
    Eigen::MatrixXd E;           // orthogonal, diagonalizes both blocks
    std::vector<double> alphas;  // paired so E^t AB E = diag(alpha_k beta_k)
    std::vector<double> betas;
};

/// Joint eigenbasis of a commuting pair, computed by diagonalizing A and
/// then B restricted to each A-eigenspace; ties inside degenerate
/// A-eigenspaces are resolved by ascending beta. nullopt when AB != BA.
std::optional<JointDiagonalization> joint_diagonalize(const BlockHessian& L);

struct YSets {
    std::vector<int> all;    // k with alpha_k beta_k > 0 and lambda0 = j/sqrt(..)
    std::vector<int> plus;   // subset with alpha_k > 0
    std::vector<int> minus;  // subset with alpha_k < 0
};

/// Y_j(lambda0) and its sign split; commuting case only.
YSets y_sets(const BlockHessian& L, double lambda0, int j);

/// eps with lambda0 - eps > 0 and Lambda(L) cap [l0-eps, l0+eps] = {l0}:
/// half the gap to the nearest other Lambda element, floored at l0/2.
double isolation_epsilon(const BlockHessian& L, double lambda0);

MorseJump morse_jump_direct(const BlockHessian& L, double lambda0, int j);
MorseJump morse_jump_commuting(const BlockHessian& L, double lambda0, int j);
MorseJump morse_jump_definite(const BlockHessian& L, double lambda0, int j);

enum class CertificateKind { OddMultiplicity, EigenspaceIntersection };

struct JumpCertificate {
    CertificateKind kind;
    std::string detail;
    // EigenspaceIntersection data: the witnessing eigenvalue pair and
    // the intersection dimension.
    double alpha = 0.0;
    double beta = 0.0;
    int intersectionDim = 0;
};

/// Sufficient certificates that the Morse jump at (lambda0, j0) is
/// nonzero: odd multiplicity of nu0, or an eigenspace intersection with
/// dim(V_A(alpha) cap V_B(beta)) > mult(nu0)/2. An empty list is not a
/// contradiction.
std::vector<JumpCertificate> jump_nonzero_certificates(const BlockHessian& L,
                                                       double lambda0,
                                                       int j0);

/// dim(V cap W) = dim V + dim W - rank [V | W] for orthonormal-column
/// bases, rank counted by singular values above tol.
int subspace_intersection_dim(const Eigen::MatrixXd& V,
                              const Eigen::MatrixXd& W, double tol);

}  // namespace hambif
