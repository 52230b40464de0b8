#ifndef CATGP_DATASETS_HPP
#define CATGP_DATASETS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "types.hpp"

namespace catgp::datasets {

// Analytic test problems. The *2 variants are the merged-categorical
// versions of Borehole/OTL/Piston (single product variable).
enum class Problem {
  F1,
  F2,
  BeamBending,
  Borehole,
  Borehole2,
  OTL,
  OTL2,
  Piston,
  Piston2,
  Goldstein
};

Problem problem_from_name(const std::string& name);
std::string problem_name(Problem p);
std::vector<std::string> problem_names();

struct ProblemInfo {
  int cont_dims = 0;
  std::vector<int> level_counts;                  // before merging
  std::vector<std::pair<double, double>> box;     // continuous input ranges
  std::vector<int> allowed_samples_per_level;     // training sizes knob
  int test_size = 0;
  bool merged = false;       // true for the *2 variants
  Problem base;              // evaluation target (Borehole2 -> Borehole, ...)
  bool has_known_groups = false;
  GroupPartition true_groups;                     // only when known
};

const ProblemInfo& problem_info(Problem p);

struct DatasetSpec {
  Problem problem = Problem::F1;
  int samples_per_level = 3;
  std::uint64_t seed = 0;
  bool merged = false;  // redundant for *2 names; kept for explicit requests

  void validate() const;
};

// Default base seeds, one per problem family (merged variants share the
// parent's). Replicate k trains with base+k; the test set of a problem is
// fixed and uses base + kTestSeedOffset. The same table is checked in as
// configs/base_seeds.cfg.
std::uint64_t base_seed(Problem p);
inline constexpr std::uint64_t kTestSeedOffset = 1000000;

// Sliced Latin hypercube design in [0,1]^dim with n_slices slices of
// points_per_slice points: the full design is Latin on N = t*s bins per
// coordinate and every slice is Latin on t bins. Rows are slice-major.
MatrixXd slhd(int points_per_slice, int n_slices, int dim, std::uint64_t seed);

// Exact analytic value of a base problem at continuous x (natural units)
// and 1-based levels z. Throws on out-of-box x or invalid levels.
double eval_function(Problem p, const VectorXd& x, const std::vector<int>& z);

// Goldstein design constraint g(x1,x2,z) with the level's (c1,c2); training
// inputs are accepted when g <= 0.
double goldstein_constraint(double x1, double x2, int level);

// Uniform rejection sampling of the Goldstein design, n_per_level accepted
// points per level. Attempts are capped at 10^6 per level.
MixedDataset goldstein_sample(int n_per_level, std::uint64_t seed);

// One training replicate plus the problem's fixed test set.
std::pair<MixedDataset, MixedDataset> generate_replicate(const DatasetSpec& spec);

struct StandardizedPair {
  MixedDataset train;
  MixedDataset test;
  Scaler scaler;
};

// Zero-mean/unit-variance scaling (population variance) of continuous
// columns and y, fitted on train and applied to both. Throws on constant
// columns.
StandardizedPair standardize(const MixedDataset& train, const MixedDataset& test);
Scaler fit_scaler(const MixedDataset& train);
MixedDataset apply_scaler(const MixedDataset& d, const Scaler& s);

// Fuses all categorical variables into one with prod(C_j) levels,
// lexicographic z1-major indexing.
MixedDataset merge_categoricals(const MixedDataset& d);
// Inverse of merge_categoricals given the original level counts.
MixedDataset unmerge_categoricals(const MixedDataset& d, const std::vector<int>& level_counts);

// CSV schema: header x1..xn,z1..zm,y; levels are 1-based integers.
void write_csv(const MixedDataset& d, const std::string& path);
MixedDataset read_csv(const std::string& path);

}  // namespace catgp::datasets

#endif
