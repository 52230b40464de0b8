#include <doctest.h>

#include <cmath>

#include "kernels.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace catgp;
using namespace catgp::kernels;

namespace {

VectorXd random_in(const Bounds& b, Rng& rng) {
  VectorXd x(b.lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(b.lower[i], b.upper[i]);
  return x;
}

double min_eig(const MatrixXd& T) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

KernelSpec make_spec(Family family, int C, int q = 0) {
  KernelSpec spec;
  spec.family = family;
  spec.levels = C;
  spec.rank = q;
  return spec;
}

KernelSpec nested_spec(int C, const GroupPartition& partition, BlockKind between,
                       BlockKind within) {
  KernelSpec spec;
  spec.family = Family::Nested;
  spec.levels = C;
  spec.partition = partition;
  spec.between = between;
  spec.within = within;
  return spec;
}

}  // namespace

TEST_CASE("rbf_ard hand values") {
  VectorXd x0(1), x1(1), theta(1);
  x0 << 0.0;
  x1 << 1.0;
  theta << 1.0;
  CHECK(rbf_ard(x0, x0, theta) == doctest::Approx(1.0));
  CHECK(rbf_ard(x0, x1, theta) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

  VectorXd a(2), b(2), t(2);
  a << 0.0, 0.0;
  b << 1.0, 2.0;
  t << 1.0, 2.0;
  CHECK(rbf_ard(a, b, t) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  VectorXd bad(1);
  bad << -1.0;
  CHECK_THROWS(rbf_ard(x0, x1, bad));
  CHECK_THROWS(rbf_ard(x0, a, t));
}

TEST_CASE("one_hot_corr equals the RBF on one-hot encodings") {
  VectorXd theta(2);
  theta << 1.0, 1.0;
  CHECK(one_hot_corr(1, 1, theta) == doctest::Approx(1.0));
  CHECK(one_hot_corr(1, 2, theta) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const int C = 2 + rng.index(8);
    VectorXd th(C);
    for (int i = 0; i < C; ++i) th[i] = rng.uniform(0.05, 5.0);
    const int z = 1 + rng.index(C), z2 = 1 + rng.index(C);
    VectorXd ez = VectorXd::Zero(C), ez2 = VectorXd::Zero(C);
    ez[z - 1] = 1.0;
    ez2[z2 - 1] = 1.0;
    CHECK(std::abs(one_hot_corr(z, z2, th) - rbf_ard(ez, ez2, th)) <= 1e-14);
  }
}

TEST_CASE("hypersphere_lower hand values and row norms") {
  {
    VectorXd angles(1);
    angles << kPi / 2.0;
    const MatrixXd L = hypersphere_lower(angles, 2, false, false);
    CHECK(exact_equal(L * L.transpose(), MatrixXd::Identity(2, 2)));
  }
  {
    VectorXd angles(1);
    angles << kPi / 3.0;
    const MatrixXd T = hypersphere_lower(angles, 2, false, false) *
                       hypersphere_lower(angles, 2, false, false).transpose();
    CHECK(T(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    VectorXd angles(3);
    for (int i = 0; i < 3; ++i) angles[i] = rng.uniform(1e-6, kPi / 2 - 1e-6);
    const MatrixXd L = hypersphere_lower(angles, 3, false, false);
    for (int i = 0; i < 3; ++i) CHECK(L.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  VectorXd bad(1);
  bad << kPi;  // outside (0, pi/2)
  CHECK_THROWS(hypersphere_lower(bad, 2, false, false));
  VectorXd wrong(2);
  CHECK_THROWS(hypersphere_lower(wrong, 2, false, false));
}

TEST_CASE("lowrank hypersphere") {
  CHECK(param_count(make_spec(Family::HoLowRank, 4, 2)) == 3);
  Rng rng(5);
  const KernelSpec spec = make_spec(Family::HoLowRank, 6, 3);
  const Bounds b = param_bounds(spec);
  for (int rep = 0; rep < 100; ++rep) {
    const VectorXd params = random_in(b, rng);
    const MatrixXd U = lowrank_hypersphere(params, 6, 3);
    const MatrixXd T = U * U.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
    int rank = 0;
    for (int i = 0; i < 6; ++i)
      if (es.eigenvalues()[i] > 1e-10) ++rank;
    CHECK(rank <= 3);
    for (int i = 0; i < 6; ++i) CHECK(T(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(lowrank_hypersphere(VectorXd::Ones(3), 4, 4));
}

TEST_CASE("lvgp embedding") {
  const KernelSpec spec = make_spec(Family::LVGP, 5, 2);
  CHECK(param_count(spec) == 7);
  VectorXd params = VectorXd::LinSpaced(7, -1.0, 1.0);
  const MatrixXd phi = lvgp_embed(params, 5, 2);
  CHECK(phi.row(0).norm() == 0.0);
  CHECK(phi(1, 1) == 0.0);  // second row has one free coordinate
  const MatrixXd T = level_matrix(spec, params);
  for (int i = 0; i < 5; ++i) CHECK(T(i, i) == doctest::Approx(1.0));
  CHECK(T(0, 1) == doctest::Approx(std::exp(-phi.row(1).squaredNorm())).epsilon(1e-12));
}

TEST_CASE("cs_matrix validity and spectrum") {
  CHECK(exact_equal(cs_matrix(1.0, 0.0, 5), MatrixXd::Identity(5, 5)));
  CHECK_THROWS_AS(cs_matrix(1.0, -1.0 / 3.0, 4), std::invalid_argument);
  try {
    cs_matrix(1.0, -1.0 / 3.0, 4);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("-1/(C-1)") != std::string::npos);
  }
  CHECK_THROWS(cs_matrix(0.0, 0.0, 3));
  CHECK_THROWS(cs_matrix(1.0, 1.0, 3));

  // Closed-form CS spectrum: v + (C-1)c once, v - c with multiplicity C-1.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cs_matrix(2.0, 1.0, 3), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es.eigenvalues()[2] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("diffusion kernel closed form") {
  {
    const MatrixXd T = diffusion_corr(50.0, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(T(i, j) - 1.0 / 3.0) <= 1e-15);
  }
  {
    const MatrixXd T = diffusion_corr(1.0, 2);
    CHECK(T(0, 0) == doctest::Approx((1.0 + std::exp(-2.0)) / 2.0).epsilon(1e-15));
    CHECK(T(0, 1) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-15));
  }
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int C = 2 + rng.index(10);
    const double beta = rng.uniform(1e-3, 5.0);
    const MatrixXd T = diffusion_corr(beta, C);
    const double e = std::exp(-beta * C);
    const MatrixXd cs = cs_matrix((1.0 + (C - 1) * e) / C, (1.0 - e) / C, C);
    CHECK((T - cs).cwiseAbs().maxCoeff() <= 1e-15);
  }
  CHECK_THROWS(diffusion_corr(0.0, 3));
}

TEST_CASE("multiplicative covariance") {
  VectorXd zero = VectorXd::Zero(3);
  CHECK(exact_equal(multiplicative_matrix(zero, 3), MatrixXd::Ones(3, 3)));
  VectorXd theta(2);
  theta << std::log(2.0), std::log(2.0);
  CHECK(multiplicative_corr(theta, 1, 2) == doctest::Approx(0.25).epsilon(1e-14));

  // Off-diagonal part is the outer product of u_i = exp(-theta_i).
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const int C = 3 + rng.index(6);
    VectorXd th(C);
    for (int i = 0; i < C; ++i) th[i] = rng.uniform(0.0, 3.0);
    const MatrixXd T = multiplicative_matrix(th, C);
    for (int i = 0; i < C; ++i)
      for (int j = 0; j < C; ++j)
        if (i != j)
          CHECK(T(i, j) ==
                doctest::Approx(std::exp(-th[i]) * std::exp(-th[j])).epsilon(1e-12));
  }
  VectorXd neg(2);
  neg << -0.1, 0.0;
  CHECK_THROWS(multiplicative_corr(neg, 1, 2));
}

TEST_CASE("multiplicative equals one_hot under reparameterization") {
  Rng rng(29);
  for (int rep = 0; rep < 50; ++rep) {
    const int C = 2 + rng.index(10);
    VectorXd theta_onehot(C), theta_mult(C);
    for (int i = 0; i < C; ++i) {
      theta_onehot[i] = rng.uniform(0.05, 5.0);
      theta_mult[i] = 0.5 / (theta_onehot[i] * theta_onehot[i]);
    }
    for (int z = 1; z <= C; ++z)
      for (int z2 = 1; z2 <= C; ++z2)
        CHECK(std::abs(multiplicative_corr(theta_mult, z, z2) -
                       one_hot_corr(z, z2, theta_onehot)) <= 1e-12);
  }
}

TEST_CASE("EHH and FE matrices") {
  const int C = 3;
  const int n_angles = 3;
  {
    VectorXd angles = VectorXd::Constant(n_angles, kPi / 2.0 - 1e-9);
    const MatrixXd T = ehh_fe_matrix(angles, C, ExpMode::EHH);
    for (int i = 0; i < C; ++i)
      for (int j = 0; j < C; ++j)
        if (i != j) CHECK(T(i, j) == doctest::Approx(1e-6).epsilon(1e-4));
  }
  {
    VectorXd angles = VectorXd::Constant(n_angles, 1e-9);
    const MatrixXd T = ehh_fe_matrix(angles, C, ExpMode::EHH);
    for (int i = 0; i < C; ++i)
      for (int j = 0; j < C; ++j)
        if (i != j) CHECK(T(i, j) == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(param_count(make_spec(Family::EHH, 6)) == 15);
  CHECK(param_count(make_spec(Family::FE, 6)) == 21);
  // FE with a zero diagonal reduces to EHH.
  Rng rng(31);
  VectorXd angles(n_angles);
  for (int i = 0; i < n_angles; ++i) angles[i] = rng.uniform(0.1, 1.4);
  VectorXd fe_params(n_angles + C);
  fe_params << angles, VectorXd::Zero(C);
  CHECK((ehh_fe_matrix(fe_params, C, ExpMode::FE) - ehh_fe_matrix(angles, C, ExpMode::EHH))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
}

TEST_CASE("nested matrix construction and GCS validity") {
  const GroupPartition partition{{{1, 2}, {3, 4}}};
  {
    // Zero within-structure: constant blocks, block means equal B*.
    MatrixXd bstar(2, 2);
    bstar << 1.0, 0.3, 0.3, 0.8;
    std::vector<MatrixXd> ms = {MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)};
    const MatrixXd T = nested_matrix(bstar, ms, partition);
    CHECK(T(0, 1) == doctest::Approx(1.0));
    CHECK(T(2, 3) == doctest::Approx(0.8));
    CHECK(T(0, 2) == doctest::Approx(0.3));
    GcsDiagnostics diag;
    CHECK(validate_gcs(T, partition, &diag));
  }
  {
    // Single group: CS-like plus centered structure.
    const GroupPartition one{{{1, 2, 3}}};
    MatrixXd bstar = MatrixXd::Constant(1, 1, 2.0);
    std::vector<MatrixXd> ms = {0.5 * MatrixXd::Identity(2, 2)};
    const MatrixXd T = nested_matrix(bstar, ms, one);
    CHECK(validate_gcs(T, one));
    CHECK(T.mean() == doctest::Approx(2.0).epsilon(1e-12));
  }
  {
    // CS(1, 0.5, 4) against {{1,2},{3,4}}: valid, block means 0.75 / 0.5.
    const MatrixXd T = cs_matrix(1.0, 0.5, 4);
    GcsDiagnostics diag;
    CHECK(validate_gcs(T, partition, &diag));
    CHECK(validate_gcs(MatrixXd::Identity(4, 4), partition));
  }
  {
    // A block structure violating the centered condition is rejected.
    MatrixXd T = cs_matrix(1.0, 0.5, 4);
    T(0, 0) = 0.2;  // breaks PSD of W_1 minus its mean
    T(1, 1) = 0.2;
    GcsDiagnostics diag;
    CHECK_FALSE(validate_gcs(T, partition, &diag));
    CHECK(!diag.failure.empty());
  }
}

TEST_CASE("nested parameter counts follow the block formulas") {
  const std::vector<int> shape{4, 3, 3};
  CHECK(nested_param_count(BlockKind::CS, BlockKind::CS, shape) == 5);       // gamma + 2
  CHECK(nested_param_count(BlockKind::He, BlockKind::CS, shape) == 9);       // gamma(gamma+3)/2
  CHECK(nested_param_count(BlockKind::CS, BlockKind::He, shape) == 24);      // sum n(n+1)/2 + 2
  CHECK(nested_param_count(BlockKind::He, BlockKind::He, shape) == 28);      // ... + gamma(gamma+1)/2
  CHECK(nested_param_count(BlockKind::He, BlockKind::He, {1, 1}) == 5);
}

TEST_CASE("nested random draws stay valid") {
  GroupPartition partition{{{1, 2, 3, 4}, {5, 6, 7}, {8, 9, 10}}};
  Rng rng(41);
  for (BlockKind between : {BlockKind::CS, BlockKind::He})
    for (BlockKind within : {BlockKind::CS, BlockKind::He}) {
      const KernelSpec spec = nested_spec(10, partition, between, within);
      const Bounds b = param_bounds(spec);
      CHECK(b.lower.size() == param_count(spec));
      for (int rep = 0; rep < 100; ++rep) {
        const VectorXd params = random_in(b, rng);
        const MatrixXd T = level_matrix(spec, params);
        CHECK(validate_gcs(T, partition));
        CHECK(min_eig(T) >= -1e-10);
      }
    }
}

TEST_CASE("param_count matches builder-accepted lengths") {
  Rng rng(43);
  for (int C : {3, 5, 10, 13, 24}) {
    std::vector<KernelSpec> specs = {
        make_spec(Family::OneHot, C),       make_spec(Family::CS, C),
        make_spec(Family::Diffusion, C),    make_spec(Family::LVGP, C, 2),
        make_spec(Family::Ho, C),           make_spec(Family::HoNC, C),
        make_spec(Family::He, C),           make_spec(Family::HeNC, C),
        make_spec(Family::HoLowRank, C, 2), make_spec(Family::EHH, C),
        make_spec(Family::FE, C),           make_spec(Family::Multiplicative, C)};
    for (const auto& spec : specs) {
      const Bounds b = param_bounds(spec);
      REQUIRE(b.lower.size() == param_count(spec));
      const VectorXd params = random_in(b, rng);
      const MatrixXd T = level_matrix(spec, params);
      CHECK(T.rows() == C);
      CHECK_THROWS(level_matrix(spec, VectorXd::Zero(param_count(spec) + 1)));
    }
  }
  CHECK(param_count(make_spec(Family::He, 5)) == 15);
  CHECK(param_count(make_spec(Family::Ho, 5)) == 10);
  CHECK(param_count(make_spec(Family::LVGP, 13, 2)) == 23);
}

TEST_CASE("family Gram matrices are PSD over random in-bounds draws") {
  Rng rng(47);
  for (int C : {3, 5, 10}) {
    std::vector<KernelSpec> specs = {
        make_spec(Family::OneHot, C),       make_spec(Family::CS, C),
        make_spec(Family::Diffusion, C),    make_spec(Family::LVGP, C, 2),
        make_spec(Family::Ho, C),           make_spec(Family::HoNC, C),
        make_spec(Family::He, C),           make_spec(Family::HeNC, C),
        make_spec(Family::HoLowRank, C, 2), make_spec(Family::EHH, C),
        make_spec(Family::FE, C),           make_spec(Family::Multiplicative, C)};
    for (const auto& spec : specs) {
      const Bounds b = param_bounds(spec);
      for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd T = level_matrix(spec, random_in(b, rng));
        CHECK((T - T.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(min_eig(T) >= -1e-10);
      }
    }
  }
}

TEST_CASE("homoscedastic hypersphere correlation ranges") {
  Rng rng(53);
  const KernelSpec ho = make_spec(Family::Ho, 5);
  const KernelSpec ho_nc = make_spec(Family::HoNC, 5);
  const Bounds b1 = param_bounds(ho), b2 = param_bounds(ho_nc);
  bool saw_negative = false;
  for (int rep = 0; rep < 200; ++rep) {
    const MatrixXd T1 = level_matrix(ho, random_in(b1, rng));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) {
          CHECK(T1(i, j) > 0.0);
          CHECK(T1(i, j) < 1.0);
        }
    const MatrixXd T2 = level_matrix(ho_nc, random_in(b2, rng));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) {
          CHECK(T2(i, j) > -1.0);
          CHECK(T2(i, j) < 1.0);
          if (T2(i, j) < 0.0) saw_negative = true;
        }
  }
  CHECK(saw_negative);
}

TEST_CASE("mixed kernel product form") {
  VectorXd x(1), x2(1), ls(1);
  x << 0.2;
  x2 << 0.7;
  ls << 0.5;
  std::vector<MatrixXd> mats = {cs_matrix(1.0, 0.3, 3), cs_matrix(1.0, 0.6, 4)};
  VectorXi z(2), z2(2);
  z << 1, 2;
  z2 << 2, 3;
  const double value = mixed_kernel(x, x2, ls, mats, z, z2);
  CHECK(value == doctest::Approx(rbf_ard(x, x2, ls) * 0.3 * 0.6).epsilon(1e-14));
  CHECK(mixed_kernel(x2, x, ls, mats, z2, z) == doctest::Approx(value).epsilon(1e-15));
  // Unit-diagonal factors drop out when the levels agree.
  CHECK(mixed_kernel(x, x2, ls, mats, z, z) == doctest::Approx(rbf_ard(x, x2, ls)).epsilon(1e-14));
}

TEST_CASE("kernel spec JSON round trip") {
  KernelSpec spec = nested_spec(10, GroupPartition{{{1, 2, 3, 4}, {5, 6, 7}, {8, 9, 10}}},
                                BlockKind::He, BlockKind::CS);
  const KernelSpec back = KernelSpec::parse_json(spec.to_json());
  CHECK(back.family == Family::Nested);
  CHECK(back.levels == 10);
  CHECK(back.between == BlockKind::He);
  CHECK(back.within == BlockKind::CS);
  CHECK(back.partition == spec.partition);

  KernelSpec lvgp = make_spec(Family::LVGP, 6, 2);
  const KernelSpec lv_back = KernelSpec::parse_json(lvgp.to_json());
  CHECK(lv_back.family == Family::LVGP);
  CHECK(lv_back.rank == 2);
}
