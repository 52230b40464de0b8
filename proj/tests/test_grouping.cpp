#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "datasets.hpp"
#include "grouping.hpp"
#include "kernels.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace catgp;
using namespace catgp::grouping;

namespace {

MatrixXd line_distances(const std::vector<double>& points) {
  const int n = static_cast<int>(points.size());
  MatrixXd D = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = std::abs(points[static_cast<std::size_t>(i)] -
                                                   points[static_cast<std::size_t>(j)]);
  return D;
}

bool same_partition(const GroupPartition& a, const GroupPartition& b) {
  auto canon = [](const GroupPartition& p) {
    std::vector<std::vector<int>> gs = p.groups;
    for (auto& g : gs) std::sort(g.begin(), g.end());
    std::sort(gs.begin(), gs.end());
    return gs;
  };
  return canon(a) == canon(b);
}

}  // namespace

TEST_CASE("target MSD encoding") {
  VectorXi z(7);
  z << 1, 1, 1, 2, 2, 3, 3;
  VectorXd y(7);
  y << 1.0, 1.0, 1.0, 0.0, 2.0, 5.0, 5.0;
  const LevelEmbedding e = target_msd(z, y, 3);
  CHECK(e.mu[0] == doctest::Approx(1.0));
  CHECK(e.sigma[0] == doctest::Approx(0.0));
  CHECK(e.mu[1] == doctest::Approx(1.0));
  CHECK(e.sigma[1] == doctest::Approx(1.0));  // population std of {0,2}
  CHECK(e.mu[2] == doctest::Approx(5.0));
  CHECK(e.sigma[2] == doctest::Approx(0.0));

  VectorXi z_single(1);
  z_single << 1;
  VectorXd y_single(1);
  y_single << 5.0;
  const LevelEmbedding single = target_msd(z_single, y_single, 1);
  CHECK(single.mu[0] == doctest::Approx(5.0));
  CHECK(single.sigma[0] == doctest::Approx(0.0));

  VectorXi z_missing(2);
  z_missing << 1, 3;
  VectorXd y2(2);
  y2 << 0.0, 1.0;
  CHECK_THROWS_AS(target_msd(z_missing, y2, 3), std::invalid_argument);
  try {
    target_msd(z_missing, y2, 3);
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("kernel-induced distances") {
  const MatrixXd I = MatrixXd::Identity(3, 3);
  const MatrixXd D1 = kernel_distance(I);
  CHECK(D1(0, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(D1(0, 0) == 0.0);

  const MatrixXd ones = MatrixXd::Ones(3, 3);
  CHECK(kernel_distance(ones).cwiseAbs().maxCoeff() == 0.0);

  const MatrixXd cs = kernels::cs_matrix(1.0, 0.5, 3);
  CHECK(kernel_distance(cs)(0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  MatrixXd bad = ones;
  bad(0, 1) = bad(1, 0) = 2.0;  // not PSD, negative squared distance
  CHECK_THROWS(kernel_distance(bad));

  // Pseudo-metric sanity on random PSD matrices: symmetry, zero diagonal,
  // triangle inequality.
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const int C = 3 + rng.index(6);
    MatrixXd G(C, C);
    for (int i = 0; i < C; ++i)
      for (int j = 0; j < C; ++j) G(i, j) = rng.uniform(-1.0, 1.0);
    const MatrixXd T = G * G.transpose();
    const MatrixXd D = kernel_distance(T);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(D.diagonal().cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < C; ++i)
      for (int j = 0; j < C; ++j)
        for (int k = 0; k < C; ++k) CHECK(D(i, j) <= D(i, k) + D(k, j) + 1e-10);
  }
}

TEST_CASE("agglomerative clustering on the four-point line") {
  const MatrixXd D = line_distances({0.0, 0.1, 5.0, 5.1});
  const GroupPartition q2 = agglomerative(D, 2);
  CHECK(same_partition(q2, GroupPartition{{{1, 2}, {3, 4}}}));
  CHECK(agglomerative(D, 4).group_count() == 4);
  CHECK(agglomerative(D, 1).group_count() == 1);
  CHECK_THROWS(agglomerative(D, 5));

  // Brute force over all 2-partitions: {1,2}/{3,4} minimizes the average
  // within-cluster distance.
  const GroupPartition best = q2;
  double best_within = 1e300;
  std::vector<std::vector<int>> best_groups;
  for (int mask = 1; mask < 8; ++mask) {  // nonempty proper subsets up to symmetry
    std::vector<int> a, b;
    for (int z = 1; z <= 4; ++z) ((mask >> (z - 1)) & 1 ? a : b).push_back(z);
    if (a.empty() || b.empty()) continue;
    double within = 0.0;
    int count = 0;
    for (const auto& g : {a, b})
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) {
          within += D(g[i] - 1, g[j] - 1);
          ++count;
        }
    const double score = count ? within / count : 0.0;
    if (score < best_within) {
      best_within = score;
      best_groups = {a, b};
    }
  }
  CHECK(same_partition(best, GroupPartition{best_groups}));
}

TEST_CASE("silhouette hand cases") {
  {
    // Two tight pairs far apart.
    const MatrixXd D = line_distances({0.0, 0.1, 10.0, 10.1});
    const GroupPartition p{{{1, 2}, {3, 4}}};
    const double s = silhouette(D, p);
    // s(z) = (b - 0.1) / b with b in {10.05, 9.95, ...}; all close to 0.99.
    CHECK(s == doctest::Approx(0.99).epsilon(2e-3));
  }
  {
    // Splitting a tight pair scores worse than keeping it together.
    const MatrixXd D = line_distances({0.0, 0.1, 5.0, 5.1});
    const double split = silhouette(D, GroupPartition{{{1, 3}, {2, 4}}});
    const double keep = silhouette(D, GroupPartition{{{1, 2}, {3, 4}}});
    CHECK(keep > split);
  }
  {
    // All pairwise distances equal: every 2-partition scores <= 0.
    MatrixXd D = MatrixXd::Ones(4, 4);
    D.diagonal().setZero();
    CHECK(silhouette(D, GroupPartition{{{1, 2}, {3, 4}}}) <= 0.0);
    CHECK(silhouette(D, GroupPartition{{{1}, {2, 3, 4}}}) <= 0.0);
    CHECK(silhouette(D, GroupPartition{{{1, 2, 3}, {4}}}) <= 0.0);
  }
  const MatrixXd D = line_distances({0.0, 0.1, 5.0, 5.1});
  CHECK_THROWS(silhouette(D, GroupPartition::singletons(4)));
  CHECK_THROWS(silhouette(D, GroupPartition::single_group(4)));
}

TEST_CASE("select_groups recovers well separated triples") {
  std::vector<double> pts;
  for (double base : {0.0, 50.0, 100.0})
    for (double off : {0.0, 0.3, 0.6}) pts.push_back(base + off);
  const GroupSelection sel = select_groups(line_distances(pts));
  CHECK(sel.n_groups == 3);
  CHECK(same_partition(sel.partition,
                       GroupPartition{{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}}));
  CHECK(sel.scores.size() == 7);  // Q = 2..8

  MatrixXd tiny = MatrixXd::Zero(2, 2);
  CHECK_THROWS(select_groups(tiny));

  // C = 3 forces Q = 2; identical pair ends up together.
  const GroupSelection forced = select_groups(line_distances({0.0, 0.0, 9.0}));
  CHECK(forced.n_groups == 2);
  CHECK(same_partition(forced.partition, GroupPartition{{{1, 2}, {3}}}));
}

TEST_CASE("select_groups is invariant to level relabeling") {
  Rng rng(11);
  std::vector<double> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(rng.uniform(0.0, 10.0));
  const MatrixXd D = line_distances(pts);
  const GroupSelection base = select_groups(D);

  // Permute levels, cluster, and map back.
  std::vector<int> perm = rng.permutation(8);
  MatrixXd Dp(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      Dp(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = D(i, j);
  const GroupSelection permuted = select_groups(Dp);
  GroupPartition mapped = permuted.partition;
  for (auto& g : mapped.groups)
    for (int& z : g) {
      const int idx = static_cast<int>(
          std::find(perm.begin(), perm.end(), z - 1) - perm.begin());
      z = idx + 1;
    }
  CHECK(same_partition(base.partition, mapped));
}

TEST_CASE("MSD pipeline is invariant under affine output transforms") {
  Rng rng(23);
  VectorXi z(40);
  VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    z[i] = 1 + (i % 5);
    y[i] = 0.5 * z[i] + rng.uniform(-0.2, 0.2);
  }
  const GroupSelection base = groups_from_msd(z, y, 5);
  const VectorXd y2 = (3.5 * y.array() - 11.0).matrix();
  const GroupSelection scaled = groups_from_msd(z, y2, 5);
  CHECK(same_partition(base.partition, scaled.partition));

  const LevelEmbedding e = target_msd(z, y, 5);
  const LevelEmbedding e2 = target_msd(z, y2, 5);
  for (int c = 0; c < 5; ++c) {
    CHECK(e2.mu[c] == doctest::Approx(3.5 * e.mu[c] - 11.0).epsilon(1e-12));
    CHECK(e2.sigma[c] == doctest::Approx(3.5 * e.sigma[c]).epsilon(1e-12));
  }
}

TEST_CASE("latent groups: zero-distance rows never split, collinear case") {
  MatrixXd latents(3, 1);
  latents << 0.0, 1.0, 10.0;
  const GroupSelection sel = groups_from_latent(latents);
  CHECK(sel.n_groups == 2);
  CHECK(same_partition(sel.partition, GroupPartition{{{1, 2}, {3}}}));

  MatrixXd dup(4, 2);
  dup << 0.0, 0.0, 0.0, 0.0, 3.0, 3.0, 5.0, -1.0;
  for (int Q = 2; Q <= 3; ++Q) {
    const GroupPartition p = agglomerative(
        [&] {
          MatrixXd D = MatrixXd::Zero(4, 4);
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) D(i, j) = (dup.row(i) - dup.row(j)).norm();
          return D;
        }(),
        Q);
    bool together = false;
    for (const auto& g : p.groups)
      together |= (std::find(g.begin(), g.end(), 1) != g.end() &&
                   std::find(g.begin(), g.end(), 2) != g.end());
    CHECK(together);
  }
}

TEST_CASE("beam bending MSD pipeline runs fast and recovers groups at 9+ samples") {
  datasets::DatasetSpec spec;
  spec.problem = datasets::Problem::BeamBending;
  spec.samples_per_level = 9;
  spec.seed = datasets::base_seed(datasets::Problem::BeamBending);
  const auto [train, test] = datasets::generate_replicate(spec);
  const GroupSelection sel = groups_from_msd(train.Z.col(0), train.y, 12);
  CHECK(sel.n_groups == 3);
  CHECK(same_partition(sel.partition,
                       datasets::problem_info(datasets::Problem::BeamBending).true_groups));
}
