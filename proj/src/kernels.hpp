#ifndef CATGP_KERNELS_HPP
#define CATGP_KERNELS_HPP

#include <string>
#include <vector>

#include "types.hpp"

namespace catgp::kernels {

// Categorical kernel parameterizations. "NC" variants allow negative
// correlations (hypersphere angles up to pi instead of pi/2).
enum class Family {
  OneHot,
  CS,
  Diffusion,
  LVGP,
  Ho,
  HoNC,
  He,
  HeNC,
  HoLowRank,
  EHH,
  FE,
  Multiplicative,
  Nested
};

// Between/within structure of a nested kernel. CS blocks carry a single
// variance (within) or a variance+covariance pair (between); He blocks are
// heteroscedastic hypersphere factors.
enum class BlockKind { CS, He };

std::string family_name(Family f);
Family family_from_name(const std::string& name);
std::string block_name(BlockKind k);
BlockKind block_from_name(const std::string& name);

struct KernelSpec {
  Family family = Family::CS;
  int levels = 0;           // C
  int rank = 0;             // q, only LVGP / HoLowRank
  GroupPartition partition; // only Nested
  BlockKind between = BlockKind::CS;
  BlockKind within = BlockKind::CS;

  void validate() const;
  std::string to_json() const;
  static KernelSpec parse_json(const std::string& text);
};

struct Bounds {
  VectorXd lower;
  VectorXd upper;
};

// Optimizer boxes use closed intervals; this margin keeps the open-interval
// constraints (angles, CS ratio) strict numerically.
inline constexpr double kAngleMargin = 1e-6;
inline constexpr double kEhhEpsilon = 1e-6;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Number of free parameters of a family; for Nested this follows the
// Table-1 block counts (see nested_param_count).
int param_count(const KernelSpec& spec);
Bounds param_bounds(const KernelSpec& spec);

// ---- individual parameterizations ----------------------------------------

// Product of per-coordinate squared-exponential factors,
// prod_i exp(-(x_i-x'_i)^2 / (2 theta_i^2)).
double rbf_ard(const VectorXd& x, const VectorXd& x2, const VectorXd& lengthscales);

// One-hot encoding pushed through the RBF, in closed form:
// 1 if z=z', else exp(-(theta_z^-2 + theta_z'^-2)/2).
double one_hot_corr(int z, int z2, const VectorXd& theta);

// Hypersphere Cholesky factor L (C x C, lower triangular). Heteroscedastic
// takes params = [radii(C), angles(C(C-1)/2)], homoscedastic just the
// angles; angles live in (0, pi/2), or (0, pi) when allow_negative.
MatrixXd hypersphere_lower(const VectorXd& params, int C, bool heteroscedastic,
                           bool allow_negative);

// Low-rank variant: C x q factor with rows on the unit sphere of R^q;
// angles beyond column q are pinned to zero, leaving (q-1)(C-q/2) params.
MatrixXd lowrank_hypersphere(const VectorXd& params, int C, int q);

// LVGP latent positions, C x q; phi(1)=0 and row i zeroes coordinates i..q.
MatrixXd lvgp_embed(const VectorXd& params, int C, int q);

// Compound symmetry: v on the diagonal, c off it. Valid iff v > 0 and
// c/v in (-1/(C-1), 1); violations throw naming the bound.
MatrixXd cs_matrix(double v, double c, int C);

// Diffusion kernel on the complete graph with C nodes (closed form).
MatrixXd diffusion_corr(double beta, int C);

double multiplicative_corr(const VectorXd& theta, int z, int z2);
MatrixXd multiplicative_matrix(const VectorXd& theta, int C);

enum class ExpMode { EHH, FE };

// Exponential reparameterizations of the homoscedastic hypersphere:
// off-diagonals eps^(1-(LL^T)_ij), FE additionally scales by
// exp(-theta_ii - theta_jj). EHH params are the angles; FE appends the C
// nonnegative diagonal entries.
MatrixXd ehh_fe_matrix(const VectorXd& params, int C, ExpMode mode, double eps = kEhhEpsilon);

// n x (n-1) Helmert basis: columns are an orthonormal basis of the
// orthogonal complement of the ones vector. Fixed choice so nested
// parameterizations are reproducible.
MatrixXd helmert_basis(int n);

// Assembles the block covariance from the gamma x gamma between matrix and
// the centered within matrices M_l of size (n_l-1); level order follows the
// partition's listing.
MatrixXd nested_matrix(const MatrixXd& between_star, const std::vector<MatrixXd>& within,
                       const GroupPartition& partition);

struct GcsDiagnostics {
  bool valid = true;
  std::string failure;   // empty when valid
  double eigenvalue = 0; // offending eigenvalue when invalid
};

// Generalized compound symmetry validity: every within block PSD, every
// within block minus its mean matrix PSD, block-mean matrix PD.
bool validate_gcs(const MatrixXd& T, const GroupPartition& partition,
                  GcsDiagnostics* diag = nullptr);

struct NestedParams {
  MatrixXd between_star;
  std::vector<MatrixXd> within;  // sizes (n_l-1) x (n_l-1)
};

// Unpacks a nested ParamVector laid out as [between | within group 1 | ...].
// Between CS is (v, ratio); between He is a hypersphere of size gamma.
// Within CS is one variance per group; within He is a full hypersphere of
// the group size projected onto the centered subspace, so the parameter
// count matches the published per-group n_l(n_l+1)/2.
NestedParams nested_param_unpack(const KernelSpec& spec, const VectorXd& params);
int nested_param_count(BlockKind between, BlockKind within, const std::vector<int>& group_sizes);

// C x C matrix of any family from its ParamVector.
MatrixXd level_matrix(const KernelSpec& spec, const VectorXd& params);

// Mixed-input kernel value: RBF over continuous coordinates times the
// product of per-variable level matrices.
double mixed_kernel(const VectorXd& x, const VectorXd& x2, const VectorXd& lengthscales,
                    const std::vector<MatrixXd>& level_matrices, const VectorXi& z,
                    const VectorXi& z2);

void write_matrix_csv(const MatrixXd& T, const std::string& path);

}  // namespace catgp::kernels

#endif
