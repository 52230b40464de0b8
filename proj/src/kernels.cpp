#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace catgp::kernels {

namespace {

using nlohmann::json;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int tri(int n) { return n * (n + 1) / 2; }

double angle_limit(bool allow_negative) { return allow_negative ? kPi : kPi / 2.0; }

void check_angle(double a, double limit) {
  if (!(a > 0.0) || !(a < limit))
    throw std::invalid_argument("hypersphere angle out of open interval (0, " +
                                std::to_string(limit) + ")");
}

// Point on the unit sphere of R^{d+1} from d angles:
// (cos t1, sin t1 cos t2, ..., prod sin ti).
void sphere_point(const double* angles, int d, double* out) {
  double sin_prod = 1.0;
  for (int j = 0; j < d; ++j) {
    out[j] = sin_prod * std::cos(angles[j]);
    sin_prod *= std::sin(angles[j]);
  }
  out[d] = sin_prod;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::OneHot: return "one_hot";
    case Family::CS: return "CS";
    case Family::Diffusion: return "diffusion";
    case Family::LVGP: return "LVGP";
    case Family::Ho: return "Ho";
    case Family::HoNC: return "Ho_NC";
    case Family::He: return "He";
    case Family::HeNC: return "He_NC";
    case Family::HoLowRank: return "Ho_lowrank";
    case Family::EHH: return "EHH";
    case Family::FE: return "FE";
    case Family::Multiplicative: return "multiplicative";
    case Family::Nested: return "nested";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::OneHot, Family::CS, Family::Diffusion, Family::LVGP, Family::Ho,
                   Family::HoNC, Family::He, Family::HeNC, Family::HoLowRank, Family::EHH,
                   Family::FE, Family::Multiplicative, Family::Nested})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string block_name(BlockKind k) { return k == BlockKind::CS ? "CS" : "He"; }

BlockKind block_from_name(const std::string& name) {
  if (name == "CS") return BlockKind::CS;
  if (name == "He") return BlockKind::He;
  throw std::invalid_argument("unknown nested block kind: " + name);
}

void KernelSpec::validate() const {
  require(levels >= 2, "kernel spec: levels must be >= 2");
  if (family == Family::LVGP)
    require(rank >= 1 && rank < levels, "LVGP: rank must satisfy 1 <= q < C");
  else if (family == Family::HoLowRank)
    require(rank > 1 && rank < levels, "low-rank hypersphere: rank must satisfy 1 < q < C");
  else
    require(rank == 0, "rank is only meaningful for LVGP / low-rank kernels");
  if (family == Family::Nested)
    partition.validate(levels);
  else
    require(partition.groups.empty(), "partition is only meaningful for nested kernels");
}

std::string KernelSpec::to_json() const {
  json j;
  j["family"] = family_name(family);
  j["levels"] = levels;
  if (rank > 0) j["rank"] = rank;
  if (family == Family::Nested) {
    j["between"] = block_name(between);
    j["within"] = block_name(within);
    j["partition"] = json::parse(partition.to_json());
  }
  return j.dump();
}

KernelSpec KernelSpec::parse_json(const std::string& text) {
  const json j = json::parse(text);
  KernelSpec spec;
  spec.family = family_from_name(j.at("family").get<std::string>());
  spec.levels = j.at("levels").get<int>();
  if (j.contains("rank")) spec.rank = j["rank"].get<int>();
  if (spec.family == Family::Nested) {
    spec.between = block_from_name(j.at("between").get<std::string>());
    spec.within = block_from_name(j.at("within").get<std::string>());
    spec.partition = GroupPartition::parse_json(j.at("partition").dump());
  }
  spec.validate();
  return spec;
}

int nested_param_count(BlockKind between, BlockKind within, const std::vector<int>& group_sizes) {
  const int gamma = static_cast<int>(group_sizes.size());
  int count = (between == BlockKind::CS) ? 2 : tri(gamma);
  if (within == BlockKind::CS) {
    count += gamma;
  } else {
    for (int n : group_sizes) count += tri(n);
  }
  return count;
}

int param_count(const KernelSpec& spec) {
  spec.validate();
  const int C = spec.levels, q = spec.rank;
  switch (spec.family) {
    case Family::OneHot:
    case Family::Multiplicative: return C;
    case Family::CS: return 2;
    case Family::Diffusion: return 1;
    case Family::LVGP: return q * C - tri(q);
    case Family::Ho:
    case Family::HoNC:
    case Family::EHH: return tri(C - 1);
    case Family::He:
    case Family::HeNC:
    case Family::FE: return tri(C);
    case Family::HoLowRank: return q * (q - 1) / 2 + (C - q) * (q - 1);
    case Family::Nested:
      return nested_param_count(spec.between, spec.within, spec.partition.group_sizes());
  }
  return 0;
}

namespace {

// Shared building blocks for bounds vectors.
void append_const(std::vector<double>& lo, std::vector<double>& hi, int n, double l, double h) {
  lo.insert(lo.end(), static_cast<std::size_t>(n), l);
  hi.insert(hi.end(), static_cast<std::size_t>(n), h);
}

constexpr double kRadiusLo = 1e-3, kRadiusHi = 10.0;
constexpr double kVarianceLo = 1e-3, kVarianceHi = 10.0;

void append_hypersphere_bounds(std::vector<double>& lo, std::vector<double>& hi, int C,
                               bool heteroscedastic, bool allow_negative) {
  if (heteroscedastic) append_const(lo, hi, C, kRadiusLo, kRadiusHi);
  append_const(lo, hi, tri(C - 1), kAngleMargin, angle_limit(allow_negative) - kAngleMargin);
}

}  // namespace

Bounds param_bounds(const KernelSpec& spec) {
  const int C = spec.levels;
  std::vector<double> lo, hi;
  switch (spec.family) {
    case Family::OneHot:
      append_const(lo, hi, C, 1e-2, 10.0);
      break;
    case Family::Multiplicative:
      append_const(lo, hi, C, 0.0, 10.0);
      break;
    case Family::CS:
      append_const(lo, hi, 1, kVarianceLo, kVarianceHi);
      append_const(lo, hi, 1, -1.0 / (C - 1) + kAngleMargin, 1.0 - kAngleMargin);
      break;
    case Family::Diffusion:
      append_const(lo, hi, 1, 1e-3, 10.0);
      break;
    case Family::LVGP:
      append_const(lo, hi, param_count(spec), -3.0, 3.0);
      break;
    case Family::Ho:
      append_hypersphere_bounds(lo, hi, C, false, false);
      break;
    case Family::HoNC:
      append_hypersphere_bounds(lo, hi, C, false, true);
      break;
    case Family::He:
      append_hypersphere_bounds(lo, hi, C, true, false);
      break;
    case Family::HeNC:
      append_hypersphere_bounds(lo, hi, C, true, true);
      break;
    case Family::HoLowRank:
      append_const(lo, hi, param_count(spec), kAngleMargin, kPi / 2.0 - kAngleMargin);
      break;
    case Family::EHH:
      append_const(lo, hi, tri(C - 1), kAngleMargin, kPi / 2.0 - kAngleMargin);
      break;
    case Family::FE:
      append_const(lo, hi, tri(C - 1), kAngleMargin, kPi / 2.0 - kAngleMargin);
      append_const(lo, hi, C, 0.0, 10.0);
      break;
    case Family::Nested: {
      const int gamma = spec.partition.group_count();
      if (spec.between == BlockKind::CS) {
        append_const(lo, hi, 1, kVarianceLo, kVarianceHi);
        const double ratio_lo = (gamma > 1) ? -1.0 / (gamma - 1) + kAngleMargin : -1.0 + kAngleMargin;
        append_const(lo, hi, 1, ratio_lo, 1.0 - kAngleMargin);
      } else {
        // Nested hypersphere blocks use the pi upper bound.
        append_const(lo, hi, gamma, kRadiusLo, kRadiusHi);
        append_const(lo, hi, tri(gamma - 1), kAngleMargin, kPi - kAngleMargin);
      }
      for (int n : spec.partition.group_sizes()) {
        if (spec.within == BlockKind::CS) {
          append_const(lo, hi, 1, 1e-6, kVarianceHi);
        } else {
          append_const(lo, hi, n, kRadiusLo, kRadiusHi);
          append_const(lo, hi, tri(n - 1), kAngleMargin, kPi - kAngleMargin);
        }
      }
      break;
    }
  }
  Bounds b;
  b.lower = Eigen::Map<VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  b.upper = Eigen::Map<VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  if (b.lower.size() != param_count(spec))
    throw std::logic_error("param_bounds: length mismatch with param_count");
  return b;
}

double rbf_ard(const VectorXd& x, const VectorXd& x2, const VectorXd& lengthscales) {
  require(x.size() == x2.size() && x.size() == lengthscales.size(),
          "rbf_ard: mismatched dimensions");
  require((lengthscales.array() > 0.0).all(), "rbf_ard: lengthscales must be positive");
  double expo = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - x2[i];
    expo += d * d / (2.0 * lengthscales[i] * lengthscales[i]);
  }
  return std::exp(-expo);
}

double one_hot_corr(int z, int z2, const VectorXd& theta) {
  const int C = static_cast<int>(theta.size());
  require(z >= 1 && z <= C && z2 >= 1 && z2 <= C, "one_hot_corr: invalid level");
  if (z == z2) return 1.0;
  const double a = theta[z - 1], b = theta[z2 - 1];
  return std::exp(-0.5 * (1.0 / (a * a) + 1.0 / (b * b)));
}

MatrixXd hypersphere_lower(const VectorXd& params, int C, bool heteroscedastic,
                           bool allow_negative) {
  const int n_angles = tri(C - 1);
  const int expected = n_angles + (heteroscedastic ? C : 0);
  require(static_cast<int>(params.size()) == expected,
          "hypersphere_lower: wrong parameter length");
  const double limit = angle_limit(allow_negative);
  const double* radii = heteroscedastic ? params.data() : nullptr;
  const double* angles = params.data() + (heteroscedastic ? C : 0);
  if (heteroscedastic)
    for (int i = 0; i < C; ++i) require(radii[i] > 0.0, "hypersphere_lower: radius must be > 0");
  for (int a = 0; a < n_angles; ++a) check_angle(angles[a], limit);

  MatrixXd L = MatrixXd::Zero(C, C);
  int offset = 0;
  std::vector<double> row(static_cast<std::size_t>(C));
  for (int i = 0; i < C; ++i) {
    sphere_point(angles + offset, i, row.data());
    const double r = heteroscedastic ? radii[i] : 1.0;
    for (int j = 0; j <= i; ++j) L(i, j) = r * row[static_cast<std::size_t>(j)];
    offset += i;
  }
  return L;
}

MatrixXd lowrank_hypersphere(const VectorXd& params, int C, int q) {
  require(q > 1 && q < C, "lowrank_hypersphere: rank must satisfy 1 < q < C");
  KernelSpec spec;
  spec.family = Family::HoLowRank;
  spec.levels = C;
  spec.rank = q;
  require(static_cast<int>(params.size()) == param_count(spec),
          "lowrank_hypersphere: wrong parameter length");
  MatrixXd U = MatrixXd::Zero(C, q);
  int offset = 0;
  std::vector<double> row(static_cast<std::size_t>(q));
  for (int i = 0; i < C; ++i) {
    // Row i of the full hypersphere with the angles past column q-1 fixed
    // to zero: rows beyond q live on the sphere of R^q with q-1 angles.
    const int d = std::min(i, q - 1);
    for (int a = 0; a < d; ++a) check_angle(params[offset + a], kPi / 2.0);
    sphere_point(params.data() + offset, d, row.data());
    for (int j = 0; j <= d; ++j) U(i, j) = row[static_cast<std::size_t>(j)];
    offset += d;
  }
  return U;
}

MatrixXd lvgp_embed(const VectorXd& params, int C, int q) {
  require(q >= 1 && q < C, "lvgp_embed: rank must satisfy 1 <= q < C");
  const int expected = q * C - tri(q);
  require(static_cast<int>(params.size()) == expected, "lvgp_embed: wrong parameter length");
  MatrixXd phi = MatrixXd::Zero(C, q);
  int offset = 0;
  for (int i = 1; i < C; ++i) {
    const int d = std::min(i, q);
    for (int j = 0; j < d; ++j) phi(i, j) = params[offset + j];
    offset += d;
  }
  return phi;
}

MatrixXd cs_matrix(double v, double c, int C) {
  if (!(v > 0.0)) throw std::invalid_argument("cs_matrix: requires v > 0");
  if (C > 1) {
    const double ratio = c / v;
    if (!(ratio > -1.0 / (C - 1)))
      throw std::invalid_argument("cs_matrix: requires c/v > -1/(C-1)");
    if (!(ratio < 1.0)) throw std::invalid_argument("cs_matrix: requires c/v < 1");
  }
  MatrixXd T = MatrixXd::Constant(C, C, c);
  T.diagonal().setConstant(v);
  return T;
}

MatrixXd diffusion_corr(double beta, int C) {
  if (!(beta > 0.0)) throw std::invalid_argument("diffusion_corr: requires beta > 0");
  const double e = std::exp(-beta * C);
  const double diag = (1.0 + (C - 1) * e) / C;
  const double off = (1.0 - e) / C;
  MatrixXd T = MatrixXd::Constant(C, C, off);
  T.diagonal().setConstant(diag);
  return T;
}

double multiplicative_corr(const VectorXd& theta, int z, int z2) {
  const int C = static_cast<int>(theta.size());
  require(z >= 1 && z <= C && z2 >= 1 && z2 <= C, "multiplicative_corr: invalid level");
  require((theta.array() >= 0.0).all(), "multiplicative_corr: theta must be nonnegative");
  if (z == z2) return 1.0;
  return std::exp(-theta[z - 1] - theta[z2 - 1]);
}

MatrixXd multiplicative_matrix(const VectorXd& theta, int C) {
  MatrixXd T(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = 0; j < C; ++j) T(i, j) = multiplicative_corr(theta, i + 1, j + 1);
  return T;
}

MatrixXd ehh_fe_matrix(const VectorXd& params, int C, ExpMode mode, double eps) {
  require(eps > 0.0 && eps < 1.0, "ehh_fe_matrix: eps must lie in (0,1)");
  const int n_angles = tri(C - 1);
  const int expected = n_angles + (mode == ExpMode::FE ? C : 0);
  require(static_cast<int>(params.size()) == expected, "ehh_fe_matrix: wrong parameter length");
  const VectorXd angles = params.head(n_angles);
  const MatrixXd L = hypersphere_lower(angles, C, false, false);
  const MatrixXd R = L * L.transpose();
  const double log_eps_half = 0.5 * std::log(eps);
  VectorXd tau_diag = VectorXd::Zero(C);
  if (mode == ExpMode::FE) {
    tau_diag = params.tail(C);
    require((tau_diag.array() >= 0.0).all(), "ehh_fe_matrix: FE diagonal must be nonnegative");
  }
  MatrixXd T = MatrixXd::Ones(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = 0; j < C; ++j) {
      if (i == j) continue;
      const double tau_off = log_eps_half * (R(i, j) - 1.0);
      T(i, j) = std::exp(-tau_diag[i] - tau_diag[j] - 2.0 * tau_off);
    }
  return T;
}

MatrixXd helmert_basis(int n) {
  require(n >= 1, "helmert_basis: n >= 1");
  MatrixXd A = MatrixXd::Zero(n, n - 1);
  for (int j = 1; j < n; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) A(i, j - 1) = 1.0 / norm;
    A(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return A;
}

MatrixXd nested_matrix(const MatrixXd& between_star, const std::vector<MatrixXd>& within,
                       const GroupPartition& partition) {
  const int gamma = partition.group_count();
  const int C = partition.level_count();
  partition.validate(C);
  require(between_star.rows() == gamma && between_star.cols() == gamma,
          "nested_matrix: between matrix must be gamma x gamma");
  require(static_cast<int>(within.size()) == gamma,
          "nested_matrix: one within matrix per group");
  require(between_star.isApprox(between_star.transpose(), 1e-12),
          "nested_matrix: between matrix must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(between_star, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= -1e-10)
      throw std::invalid_argument("nested_matrix: between matrix not positive definite");
  }
  MatrixXd T = MatrixXd::Zero(C, C);
  for (int l = 0; l < gamma; ++l) {
    const auto& gl = partition.groups[static_cast<std::size_t>(l)];
    const int nl = static_cast<int>(gl.size());
    const auto& M = within[static_cast<std::size_t>(l)];
    require(M.rows() == nl - 1 && M.cols() == nl - 1,
            "nested_matrix: within matrix for group " + std::to_string(l + 1) +
                " must have size (n_l-1)");
    MatrixXd W = MatrixXd::Constant(nl, nl, between_star(l, l));
    if (nl > 1) {
      const MatrixXd A = helmert_basis(nl);
      W += A * M * A.transpose();
    }
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < nl; ++b) T(gl[static_cast<std::size_t>(a)] - 1,
                                     gl[static_cast<std::size_t>(b)] - 1) = W(a, b);
    for (int m = l + 1; m < gamma; ++m) {
      const auto& gm = partition.groups[static_cast<std::size_t>(m)];
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < static_cast<int>(gm.size()); ++b) {
          T(gl[static_cast<std::size_t>(a)] - 1, gm[static_cast<std::size_t>(b)] - 1) =
              between_star(l, m);
          T(gm[static_cast<std::size_t>(b)] - 1, gl[static_cast<std::size_t>(a)] - 1) =
              between_star(m, l);
        }
    }
  }
  return T;
}

bool validate_gcs(const MatrixXd& T, const GroupPartition& partition, GcsDiagnostics* diag) {
  const int C = static_cast<int>(T.rows());
  partition.validate(C);
  require(T.cols() == C, "validate_gcs: T must be square");
  GcsDiagnostics local;
  auto fail = [&](const std::string& what, double eig) {
    local.valid = false;
    local.failure = what;
    local.eigenvalue = eig;
    if (diag) *diag = local;
    return false;
  };
  const int gamma = partition.group_count();
  MatrixXd block_means(gamma, gamma);
  for (int l = 0; l < gamma; ++l) {
    const auto& gl = partition.groups[static_cast<std::size_t>(l)];
    const int nl = static_cast<int>(gl.size());
    MatrixXd W(nl, nl);
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < nl; ++b)
        W(a, b) = T(gl[static_cast<std::size_t>(a)] - 1, gl[static_cast<std::size_t>(b)] - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-10)
      return fail("within block " + std::to_string(l + 1) + " not PSD", min_eig);
    const double mean = W.mean();
    block_means(l, l) = mean;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es2(
        MatrixXd(W - MatrixXd::Constant(nl, nl, mean)), Eigen::EigenvaluesOnly);
    const double min_eig2 = es2.eigenvalues().minCoeff();
    if (min_eig2 < -1e-10)
      return fail("within block " + std::to_string(l + 1) + " minus its mean not PSD", min_eig2);
    for (int m = l + 1; m < gamma; ++m) {
      const auto& gm = partition.groups[static_cast<std::size_t>(m)];
      double s = 0.0;
      for (int a : gl)
        for (int b : gm) s += T(a - 1, b - 1);
      block_means(l, m) = block_means(m, l) = s / (nl * static_cast<double>(gm.size()));
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(block_means, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  // PD up to the same numerical tolerance used for the PSD checks.
  if (min_eig <= -1e-10) return fail("block-mean matrix not positive definite", min_eig);
  if (diag) *diag = local;
  return true;
}

NestedParams nested_param_unpack(const KernelSpec& spec, const VectorXd& params) {
  spec.validate();
  require(spec.family == Family::Nested, "nested_param_unpack: not a nested spec");
  require(static_cast<int>(params.size()) == param_count(spec),
          "nested_param_unpack: wrong parameter length");
  const int gamma = spec.partition.group_count();
  NestedParams out;
  int offset = 0;
  if (spec.between == BlockKind::CS) {
    const double v = params[0];
    const double ratio = params[1];
    offset = 2;
    out.between_star = (gamma > 1) ? cs_matrix(v, ratio * v, gamma) : MatrixXd::Constant(1, 1, v);
  } else {
    const int n_between = tri(gamma);
    const MatrixXd L = hypersphere_lower(params.segment(0, n_between), gamma, true, true);
    out.between_star = L * L.transpose();
    offset = n_between;
  }
  for (int n : spec.partition.group_sizes()) {
    if (spec.within == BlockKind::CS) {
      const double v = params[offset];
      require(v >= 0.0, "nested_param_unpack: within variance must be nonnegative");
      offset += 1;
      out.within.push_back(v * MatrixXd::Identity(n - 1, n - 1));
    } else {
      // Full He hypersphere of the group size, projected onto the centered
      // subspace; keeps the per-group count at n(n+1)/2.
      const int n_within = tri(n);
      const MatrixXd L = hypersphere_lower(params.segment(offset, n_within), n, true, true);
      offset += n_within;
      const MatrixXd S = L * L.transpose();
      if (n > 1) {
        const MatrixXd A = helmert_basis(n);
        out.within.push_back(A.transpose() * S * A);
      } else {
        out.within.push_back(MatrixXd(0, 0));
      }
    }
  }
  return out;
}

MatrixXd level_matrix(const KernelSpec& spec, const VectorXd& params) {
  spec.validate();
  require(static_cast<int>(params.size()) == param_count(spec),
          "level_matrix: wrong parameter length for " + family_name(spec.family));
  const int C = spec.levels;
  switch (spec.family) {
    case Family::OneHot: {
      MatrixXd T(C, C);
      for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j) T(i, j) = one_hot_corr(i + 1, j + 1, params);
      return T;
    }
    case Family::CS:
      return cs_matrix(params[0], params[1] * params[0], C);
    case Family::Diffusion:
      return diffusion_corr(params[0], C);
    case Family::LVGP: {
      const MatrixXd phi = lvgp_embed(params, C, spec.rank);
      MatrixXd T(C, C);
      for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j)
          T(i, j) = std::exp(-(phi.row(i) - phi.row(j)).squaredNorm());
      return T;
    }
    case Family::Ho:
    case Family::HoNC:
    case Family::He:
    case Family::HeNC: {
      const bool het = spec.family == Family::He || spec.family == Family::HeNC;
      const bool neg = spec.family == Family::HoNC || spec.family == Family::HeNC;
      const MatrixXd L = hypersphere_lower(params, C, het, neg);
      return L * L.transpose();
    }
    case Family::HoLowRank: {
      const MatrixXd U = lowrank_hypersphere(params, C, spec.rank);
      return U * U.transpose();
    }
    case Family::EHH:
      return ehh_fe_matrix(params, C, ExpMode::EHH);
    case Family::FE:
      return ehh_fe_matrix(params, C, ExpMode::FE);
    case Family::Multiplicative:
      return multiplicative_matrix(params, C);
    case Family::Nested: {
      const NestedParams np = nested_param_unpack(spec, params);
      return nested_matrix(np.between_star, np.within, spec.partition);
    }
  }
  throw std::logic_error("level_matrix: unhandled family");
}

double mixed_kernel(const VectorXd& x, const VectorXd& x2, const VectorXd& lengthscales,
                    const std::vector<MatrixXd>& level_matrices, const VectorXi& z,
                    const VectorXi& z2) {
  require(z.size() == z2.size() &&
              static_cast<std::size_t>(z.size()) == level_matrices.size(),
          "mixed_kernel: categorical dimension mismatch");
  double value = rbf_ard(x, x2, lengthscales);
  for (Eigen::Index v = 0; v < z.size(); ++v)
    value *= level_matrices[static_cast<std::size_t>(v)](z[v] - 1, z2[v] - 1);
  return value;
}

void write_matrix_csv(const MatrixXd& T, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[32];
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", T(i, j));
      out << buf << (j + 1 < T.cols() ? "," : "");
    }
    out << '\n';
  }
}

}  // namespace catgp::kernels
