#include "grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace catgp::grouping {

LevelEmbedding target_msd(const VectorXi& z_col, const VectorXd& y, int C) {
  if (z_col.size() != y.size()) throw std::invalid_argument("target_msd: length mismatch");
  LevelEmbedding e;
  e.mu = VectorXd::Zero(C);
  e.sigma = VectorXd::Zero(C);
  VectorXd counts = VectorXd::Zero(C);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int z = z_col[i];
    if (z < 1 || z > C) throw std::invalid_argument("target_msd: level out of range");
    counts[z - 1] += 1.0;
    e.mu[z - 1] += y[i];
  }
  for (int c = 0; c < C; ++c) {
    if (counts[c] == 0.0)
      throw std::invalid_argument("target_msd: level " + std::to_string(c + 1) +
                                  " has no observation");
    e.mu[c] /= counts[c];
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double d = y[i] - e.mu[z_col[i] - 1];
    e.sigma[z_col[i] - 1] += d * d;
  }
  for (int c = 0; c < C; ++c) e.sigma[c] = std::sqrt(e.sigma[c] / counts[c]);
  return e;
}

MatrixXd embedding_distances(const LevelEmbedding& embedding) {
  const int C = embedding.levels();
  MatrixXd D = MatrixXd::Zero(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = i + 1; j < C; ++j) {
      const double dm = embedding.mu[i] - embedding.mu[j];
      const double ds = embedding.sigma[i] - embedding.sigma[j];
      D(i, j) = D(j, i) = std::sqrt(dm * dm + ds * ds);
    }
  return D;
}

MatrixXd kernel_distance(const MatrixXd& T) {
  if (T.rows() != T.cols()) throw std::invalid_argument("kernel_distance: T must be square");
  const int C = static_cast<int>(T.rows());
  MatrixXd D = MatrixXd::Zero(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = i + 1; j < C; ++j) {
      double r = T(i, i) + T(j, j) - 2.0 * T(i, j);
      if (r < -1e-12)
        throw std::invalid_argument("kernel_distance: negative squared distance, T not PSD");
      if (r < 0.0) r = 0.0;
      D(i, j) = D(j, i) = std::sqrt(r);
    }
  return D;
}

namespace {

double average_linkage(const MatrixXd& D, const std::vector<int>& a, const std::vector<int>& b) {
  double s = 0.0;
  for (int i : a)
    for (int j : b) s += D(i - 1, j - 1);
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

GroupPartition agglomerative(const MatrixXd& D, int Q) {
  const int C = static_cast<int>(D.rows());
  if (Q < 1 || Q > C) throw std::invalid_argument("agglomerative: Q must lie in 1..C");
  // Clusters stay sorted by their smallest level, which makes the
  // first-strictly-smaller scan below a lexicographic tie-break.
  std::vector<std::vector<int>> clusters;
  for (int z = 1; z <= C; ++z) clusters.push_back({z});
  while (static_cast<int>(clusters.size()) > Q) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = average_linkage(D, clusters[i], clusters[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    std::vector<int> merged = clusters[bi];
    merged.insert(merged.end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(merged.begin(), merged.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = std::move(merged);
  }
  GroupPartition p;
  p.groups = std::move(clusters);
  p.validate(C);
  return p;
}

double silhouette(const MatrixXd& D, const GroupPartition& partition) {
  const int C = static_cast<int>(D.rows());
  const int Q = partition.group_count();
  if (Q < 2 || Q > C - 1)
    throw std::invalid_argument("silhouette: defined for 2 <= Q <= C-1 clusters");
  partition.validate(C);

  double global = 0.0;
  for (int q = 0; q < Q; ++q) {
    const auto& cluster = partition.groups[static_cast<std::size_t>(q)];
    double cluster_sum = 0.0;
    for (int z : cluster) {
      double s = 0.0;
      if (cluster.size() > 1) {
        double a = 0.0;
        for (int z2 : cluster)
          if (z2 != z) a += D(z - 1, z2 - 1);
        a /= static_cast<double>(cluster.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int q2 = 0; q2 < Q; ++q2) {
          if (q2 == q) continue;
          const auto& other = partition.groups[static_cast<std::size_t>(q2)];
          double mean = 0.0;
          for (int z2 : other) mean += D(z - 1, z2 - 1);
          mean /= static_cast<double>(other.size());
          b = std::min(b, mean);
        }
        const double m = std::max(a, b);
        s = (m > 0.0) ? (b - a) / m : 0.0;
      }
      // Singletons score zero: with a(z) pinned to 0 the ratio is not
      // informative about cohesion.
      cluster_sum += s;
    }
    global += cluster_sum / static_cast<double>(cluster.size());
  }
  return global / static_cast<double>(Q);
}

GroupSelection select_groups(const MatrixXd& D) {
  const int C = static_cast<int>(D.rows());
  if (C < 3)
    throw std::invalid_argument(
        "select_groups: needs >= 3 levels; use CS (one group) or a hypersphere "
        "(all singletons) instead");
  GroupSelection out;
  out.score = -std::numeric_limits<double>::infinity();
  for (int Q = 2; Q <= C - 1; ++Q) {
    GroupPartition p = agglomerative(D, Q);
    const double s = silhouette(D, p);
    out.scores.emplace_back(Q, s);
    if (s > out.score) {
      out.score = s;
      out.n_groups = Q;
      out.partition = std::move(p);
    }
  }
  return out;
}

GroupSelection groups_from_msd(const VectorXi& z_col, const VectorXd& y, int C) {
  return select_groups(embedding_distances(target_msd(z_col, y, C)));
}

GroupSelection groups_from_latent(const MatrixXd& latent_rows) {
  const int C = static_cast<int>(latent_rows.rows());
  MatrixXd D = MatrixXd::Zero(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = i + 1; j < C; ++j)
      D(i, j) = D(j, i) = (latent_rows.row(i) - latent_rows.row(j)).norm();
  return select_groups(D);
}

}  // namespace catgp::grouping
