#ifndef CATGP_GROUPING_HPP
#define CATGP_GROUPING_HPP

#include <vector>

#include "types.hpp"

namespace catgp::grouping {

// Target MSD encoding: per level, the mean and population standard
// deviation of the outputs observed at that level.
struct LevelEmbedding {
  VectorXd mu;
  VectorXd sigma;
  int levels() const { return static_cast<int>(mu.size()); }
};

// Throws naming the first level 1..C with no observation.
LevelEmbedding target_msd(const VectorXi& z_col, const VectorXd& y, int C);

// Euclidean distances between the (mu, sigma) points.
MatrixXd embedding_distances(const LevelEmbedding& embedding);

// Pseudo-distance induced by a PSD level matrix:
// d(z,z') = sqrt(T_zz + T_z'z' - 2 T_zz'). Radicands in [-1e-12, 0) clamp
// to zero; anything lower is an invalid T and throws.
MatrixXd kernel_distance(const MatrixXd& T);

// Average-linkage agglomeration from singletons down to Q clusters.
// Ties merge the lexicographically smallest cluster pair (clusters keyed by
// their smallest level), so results are reproducible.
GroupPartition agglomerative(const MatrixXd& D, int Q);

// Mean silhouette: per-cluster average of point silhouettes, then averaged
// over clusters. Singleton clusters score zero. Defined for 2 <= Q <= C-1.
double silhouette(const MatrixXd& D, const GroupPartition& partition);

struct GroupSelection {
  GroupPartition partition;
  int n_groups = 0;
  double score = 0.0;
  std::vector<std::pair<int, double>> scores;  // silhouette per candidate Q
};

// Sweeps Q = 2..C-1, clusters, scores, and keeps the best partition (ties
// prefer the smallest Q). C must be >= 3; with fewer levels fall back to CS
// (one group) or a plain hypersphere (all singletons).
GroupSelection select_groups(const MatrixXd& D);

// Convenience pipelines.
GroupSelection groups_from_msd(const VectorXi& z_col, const VectorXd& y, int C);
GroupSelection groups_from_latent(const MatrixXd& latent_rows);

}  // namespace catgp::grouping

#endif
