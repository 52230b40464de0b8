#ifndef CATGP_TYPES_HPP
#define CATGP_TYPES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace catgp {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

// A set of mixed continuous/categorical samples. Level indices are 1-based:
// Z(i,j) in {1..level_counts[j]}.
struct MixedDataset {
  MatrixXd X;                     // N x n continuous inputs (natural units)
  MatrixXi Z;                     // N x m level indices
  VectorXd y;                     // N outputs
  std::vector<int> level_counts;  // C_1..C_m

  Eigen::Index rows() const { return y.size(); }
  int cont_dims() const { return static_cast<int>(X.cols()); }
  int cat_dims() const { return static_cast<int>(Z.cols()); }

  // Throws std::invalid_argument on shape mismatch or out-of-range levels.
  void validate() const;
};

// Column-wise standardization statistics fitted on a training set.
struct Scaler {
  VectorXd x_mean;
  VectorXd x_std;  // population std, strictly positive
  double y_mean = 0.0;
  double y_std = 1.0;
};

// Partition of levels 1..C into disjoint non-empty groups.
struct GroupPartition {
  std::vector<std::vector<int>> groups;

  int group_count() const { return static_cast<int>(groups.size()); }
  int level_count() const;
  std::vector<int> group_sizes() const;
  // membership[z-1] = index of the group containing level z
  std::vector<int> membership(int C) const;
  void validate(int C) const;

  static GroupPartition singletons(int C);
  static GroupPartition single_group(int C);

  // Nested integer lists, e.g. [[1,4],[2,3]]. Levels stay 1-based.
  std::string to_json() const;
  static GroupPartition parse_json(const std::string& text);

  bool operator==(const GroupPartition& other) const;
};

}  // namespace catgp

#endif
