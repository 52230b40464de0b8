#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "datasets.hpp"
#include "test_util.hpp"
#include "rng.hpp"

using namespace catgp;
using namespace catgp::datasets;

namespace {

// Bin index of a point among n equal-width bins of [0,1].
int bin_of(double u, int n) {
  int b = static_cast<int>(u * n);
  if (b == n) b = n - 1;
  return b;
}

bool is_latin(const MatrixXd& design, int n_bins) {
  for (int k = 0; k < design.cols(); ++k) {
    std::set<int> bins;
    for (int i = 0; i < design.rows(); ++i) bins.insert(bin_of(design(i, k), n_bins));
    if (static_cast<int>(bins.size()) != n_bins) return false;
  }
  return true;
}

// Independent re-derivations of the analytic functions, arranged differently
// from the library's to catch transcription slips.
double f1_check(double x, int z) {
  double phase = 7.0 * M_PI * x / 2.0 - z / 20.0;
  if (z > 9) phase += 0.4 + z / 15.0;
  return std::cos(phase);
}

double borehole_check(double r, double rw, double Tu, double Hu, double Tl, double Hl, double L,
                      double Kw) {
  const double lnr = std::log(r) - std::log(rw);
  const double inner = 1.0 + (2.0 * L * Tu) / (lnr * rw * rw * Kw) + Tu / Tl;
  return (2.0 * M_PI * Tu * (Hu - Hl)) / (lnr * inner);
}

double otl_check(double Rb1, double Rb2, double Rf, double Rc1, double Rc2, double beta) {
  const double Vb1 = 12.0 * Rb2 / (Rb1 + Rb2);
  const double D = beta * (Rc2 + 9.0) + Rf;
  double v = (Vb1 + 0.74) * beta * (Rc2 + 9.0) / D;
  v += 11.35 * Rf / D;
  v += 0.74 * Rf * beta * (Rc2 + 9.0) / (Rc1 * D);
  return v;
}

double piston_check(double M, double S, double V0, double k, double P0, double Ta, double T0) {
  const double A = P0 * S + 19.62 * M - k * V0 / S;
  const double B = P0 * V0 * Ta / T0;
  const double V = (S / (2.0 * k)) * (std::sqrt(A * A + 4.0 * k * B) - A);
  return 2.0 * M_PI * std::sqrt((k + S * S * B / (V * V)) / M);
}

}  // namespace

TEST_CASE("slhd basic shapes and Latin properties") {
  const MatrixXd single = slhd(1, 1, 1, 42);
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) >= 0.0);
  CHECK(single(0, 0) < 1.0);

  // 2 points per slice, 2 slices: one point per quartile globally, and each
  // slice covers both halves.
  const MatrixXd four = slhd(2, 2, 1, 0);
  CHECK(is_latin(four, 4));
  for (int s = 0; s < 2; ++s) {
    std::set<int> halves;
    for (int p = 0; p < 2; ++p) halves.insert(bin_of(four(2 * s + p, 0), 2));
    CHECK(halves.size() == 2);
  }

  const MatrixXd design = slhd(3, 4, 2, 7);
  CHECK(design.rows() == 12);
  CHECK(design.cols() == 2);
  CHECK(is_latin(design, 12));
  for (int s = 0; s < 4; ++s) {
    MatrixXd slice = design.block(3 * s, 0, 3, 2);
    CHECK(is_latin(slice, 3));
  }
}

TEST_CASE("slhd slice property over random shapes") {
  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    const int t = 1 + rng.index(6);
    const int s = 1 + rng.index(6);
    const int d = 1 + rng.index(3);
    const MatrixXd design = slhd(t, s, d, rng.next());
    CHECK(is_latin(design, t * s));
    for (int j = 0; j < s; ++j) {
      MatrixXd slice = design.block(t * j, 0, t, d);
      CHECK(is_latin(slice, t));
    }
  }
}

TEST_CASE("eval_function matches hand values") {
  VectorXd x(2);
  x << 10.0, 1.0;
  const double beam = eval_function(Problem::BeamBending, x, {1});
  CHECK(beam == doctest::Approx(1000.0 / (3.0 * 0.0833)).epsilon(1e-12));

  VectorXd x1(1);
  x1 << 0.0;
  CHECK(eval_function(Problem::F1, x1, {1}) == doctest::Approx(std::cos(-0.05)).epsilon(1e-15));
  CHECK(eval_function(Problem::F2, x1, {5}) == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS(eval_function(Problem::F1, x1, {14}));
  VectorXd bad(1);
  bad << 2.0;
  CHECK_THROWS(eval_function(Problem::F1, bad, {1}));
  CHECK_THROWS(problem_from_name("nope"));
}

TEST_CASE("analytic functions agree with independent re-derivations") {
  Rng rng(123);
  for (int rep = 0; rep < 100; ++rep) {
    {
      VectorXd x(1);
      x << rng.uniform();
      const int z = 1 + rng.index(13);
      CHECK(eval_function(Problem::F1, x, {z}) ==
            doctest::Approx(f1_check(x[0], z)).epsilon(1e-12));
    }
    {
      const ProblemInfo& info = problem_info(Problem::Borehole);
      VectorXd x(6);
      for (int k = 0; k < 6; ++k)
        x[k] = rng.uniform(info.box[static_cast<std::size_t>(k)].first,
                           info.box[static_cast<std::size_t>(k)].second);
      const int zr = 1 + rng.index(3), zh = 1 + rng.index(4);
      const double rw = 0.05 * zr;
      const double hl = 700.0 + 40.0 * (zh - 1);
      CHECK(eval_function(Problem::Borehole, x, {zr, zh}) ==
            doctest::Approx(borehole_check(x[0], rw, x[1], x[2], x[3], hl, x[4], x[5]))
                .epsilon(1e-12));
    }
    {
      const ProblemInfo& info = problem_info(Problem::OTL);
      VectorXd x(4);
      for (int k = 0; k < 4; ++k)
        x[k] = rng.uniform(info.box[static_cast<std::size_t>(k)].first,
                           info.box[static_cast<std::size_t>(k)].second);
      const int zf = 1 + rng.index(4), zb = 1 + rng.index(6);
      const double rf[] = {0.5, 1.2, 2.1, 2.9};
      CHECK(eval_function(Problem::OTL, x, {zf, zb}) ==
            doctest::Approx(otl_check(x[0], x[1], rf[zf - 1], x[2], x[3], 50.0 * zb))
                .epsilon(1e-12));
    }
    {
      const ProblemInfo& info = problem_info(Problem::Piston);
      VectorXd x(5);
      for (int k = 0; k < 5; ++k)
        x[k] = rng.uniform(info.box[static_cast<std::size_t>(k)].first,
                           info.box[static_cast<std::size_t>(k)].second);
      const int zk = 1 + rng.index(5), zp = 1 + rng.index(3);
      CHECK(eval_function(Problem::Piston, x, {zk, zp}) ==
            doctest::Approx(
                piston_check(x[0], x[1], x[2], 1000.0 * zk, 90000.0 + 10000.0 * (zp - 1), x[3], x[4]))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("generate_replicate sizes") {
  {
    DatasetSpec spec{Problem::F2, 3, 0, false};
    const auto [train, test] = generate_replicate(spec);
    CHECK(train.rows() == 30);
    CHECK(test.rows() == 1000);
    CHECK(train.level_counts == std::vector<int>{10});
  }
  {
    DatasetSpec spec{Problem::Borehole, 3, 0, false};
    const auto [train, test] = generate_replicate(spec);
    CHECK(train.rows() == 36);
    CHECK(test.rows() == 1008);
    CHECK(train.level_counts == std::vector<int>{3, 4});
  }
  {
    DatasetSpec spec{Problem::OTL, 3, 0, true};
    const auto [train, test] = generate_replicate(spec);
    CHECK(train.rows() == 72);
    CHECK(train.level_counts == std::vector<int>{24});
    CHECK(test.level_counts == std::vector<int>{24});
  }
  {
    DatasetSpec spec{Problem::BeamBending, 3, 0, false};
    const auto [train, test] = generate_replicate(spec);
    CHECK(train.rows() == 36);
    CHECK(test.rows() == 1000);  // 12 levels do not divide 1000; remainder spread
  }
  CHECK_THROWS(generate_replicate(DatasetSpec{Problem::OTL, 12, 0, false}));
}

TEST_CASE("generate_replicate is deterministic in the seed") {
  DatasetSpec a{Problem::F1, 3, 17, false};
  const auto [train1, test1] = generate_replicate(a);
  const auto [train2, test2] = generate_replicate(a);
  CHECK(exact_equal(train1.X, train2.X));
  CHECK(exact_equal(train1.y, train2.y));
  CHECK(exact_equal(test1.X, test2.X));

  DatasetSpec b{Problem::F1, 3, 18, false};
  const auto [train3, test3] = generate_replicate(b);
  CHECK(!exact_equal(train1.X, train3.X));
  CHECK(exact_equal(test1.X, test3.X));  // the test set is fixed per dataset
}

TEST_CASE("goldstein rejection sampling") {
  const MixedDataset d = goldstein_sample(3, 0);
  CHECK(d.rows() == 27);
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    CHECK(goldstein_constraint(d.X(i, 0), d.X(i, 1), d.Z(i, 0)) <= 0.0);
  CHECK(goldstein_constraint(0.0, 0.0, 1) == doctest::Approx(0.5));
  CHECK(goldstein_constraint(0.0, 0.0, 1) > 0.0);
}

TEST_CASE("standardize") {
  MixedDataset train;
  train.X.resize(3, 1);
  train.X << 1.0, 2.0, 3.0;
  train.Z.resize(3, 1);
  train.Z << 1, 2, 1;
  train.y.resize(3);
  train.y << 4.0, 5.0, 9.0;
  train.level_counts = {2};
  MixedDataset test = train;
  test.X(0, 0) = 10.0;

  const auto [train_s, test_s, scaler] = standardize(train, test);
  CHECK(train_s.X(0, 0) == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-12));
  CHECK(train_s.X(1, 0) == doctest::Approx(0.0));
  CHECK(train_s.X(2, 0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  CHECK(std::abs(train_s.y.mean()) < 1e-12);
  CHECK((train_s.y.array() - train_s.y.mean()).square().sum() / 3.0 == doctest::Approx(1.0));

  // Re-standardizing already standardized data changes nothing.
  const auto [again, again_test, scaler2] = standardize(train_s, test_s);
  CHECK((again.X - train_s.X).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((again.y - train_s.y).cwiseAbs().maxCoeff() < 1e-12);

  // The test set keeps the train statistics, so its mean is generally nonzero.
  CHECK(std::abs(test_s.X.col(0).mean()) > 0.1);

  MixedDataset constant = train;
  constant.X.col(0).setConstant(1.0);
  CHECK_THROWS(standardize(constant, test));
}

TEST_CASE("merge and unmerge categoricals") {
  MixedDataset d;
  d.X.resize(3, 1);
  d.X << 0.1, 0.2, 0.3;
  d.Z.resize(3, 2);
  d.Z << 1, 1, 3, 4, 2, 3;
  d.y.resize(3);
  d.y << 1, 2, 3;
  d.level_counts = {3, 4};

  const MixedDataset merged = merge_categoricals(d);
  CHECK(merged.level_counts == std::vector<int>{12});
  CHECK(merged.Z(0, 0) == 1);
  CHECK(merged.Z(1, 0) == 12);
  CHECK(merged.Z(2, 0) == 7);

  const MixedDataset back = unmerge_categoricals(merged, {3, 4});
  CHECK(exact_equal(back.Z, d.Z));

  MixedDataset single = merged;
  CHECK_THROWS(merge_categoricals(single));
}

TEST_CASE("dataset CSV round trip") {
  DatasetSpec spec{Problem::Borehole, 3, 5, false};
  const auto [train, test] = generate_replicate(spec);
  const std::string path =
      (std::filesystem::temp_directory_path() / "catgp_ds_test.csv").string();
  write_csv(train, path);
  const MixedDataset loaded = read_csv(path);
  CHECK(loaded.rows() == train.rows());
  CHECK(exact_equal(loaded.X, train.X));
  CHECK(exact_equal(loaded.Z, train.Z));
  CHECK(exact_equal(loaded.y, train.y));
  CHECK(loaded.level_counts == train.level_counts);
  std::filesystem::remove(path);
}
