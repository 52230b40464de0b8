#include "datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace catgp::datasets {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Categorical surrogate values.
const double kBoreholeRw[] = {0.05, 0.10, 0.15};
const double kBoreholeHl[] = {700.0, 740.0, 780.0, 820.0};
const double kOtlRf[] = {0.5, 1.2, 2.1, 2.9};
const double kOtlBeta[] = {50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
const double kPistonK[] = {1000.0, 2000.0, 3000.0, 4000.0, 5000.0};
const double kPistonP0[] = {90000.0, 100000.0, 110000.0};
const double kBeamInertia[] = {0.0833, 0.139, 0.380, 0.0796, 0.133, 0.363,
                               0.0859, 0.136, 0.360, 0.0922, 0.138, 0.369};
// Goldstein level constants, level-1 indexed: {x3, x4, c1, c2}.
const double kGoldstein[9][4] = {
    {20, 20, 2, 0.5}, {20, 50, 2, -1}, {20, 80, 2, -2},
    {50, 20, -2, 0.5}, {50, 50, -2, -1}, {50, 80, -2, -2},
    {80, 20, 1, 0.5}, {80, 50, 1, -1}, {80, 80, 1, -2}};

GroupPartition groups_f1() {
  return GroupPartition{{{1, 2, 3, 4, 5, 6, 7, 8, 9}, {10, 11, 12, 13}}};
}
GroupPartition groups_f2() {
  return GroupPartition{{{1, 2, 3, 4}, {5, 6, 7}, {8, 9, 10}}};
}
// The three filling configurations of the twelve beam shapes.
GroupPartition groups_beam() {
  return GroupPartition{{{1, 4, 7, 10}, {2, 5, 8, 11}, {3, 6, 9, 12}}};
}

ProblemInfo make_info(Problem p) {
  ProblemInfo info;
  info.base = p;
  const std::vector<int> all_sizes = {3, 6, 9, 12, 15};
  const std::vector<int> short_sizes = {3, 6, 9};
  switch (p) {
    case Problem::F1:
      info.cont_dims = 1;
      info.level_counts = {13};
      info.box = {{0.0, 1.0}};
      info.allowed_samples_per_level = all_sizes;
      info.test_size = 1001;
      info.has_known_groups = true;
      info.true_groups = groups_f1();
      break;
    case Problem::F2:
      info.cont_dims = 1;
      info.level_counts = {10};
      info.box = {{0.0, 1.0}};
      info.allowed_samples_per_level = all_sizes;
      info.test_size = 1000;
      info.has_known_groups = true;
      info.true_groups = groups_f2();
      break;
    case Problem::BeamBending:
      info.cont_dims = 2;
      info.level_counts = {12};
      info.box = {{10.0, 20.0}, {1.0, 2.0}};
      info.allowed_samples_per_level = all_sizes;
      info.test_size = 1000;
      info.has_known_groups = true;
      info.true_groups = groups_beam();
      break;
    case Problem::Borehole:
    case Problem::Borehole2:
      info.base = Problem::Borehole;
      info.cont_dims = 6;
      info.level_counts = {3, 4};
      info.box = {{100.0, 50000.0}, {63070.0, 115000.0}, {990.0, 1110.0},
                  {63.1, 116.0},    {1120.0, 1680.0},    {9855.0, 12045.0}};
      info.allowed_samples_per_level = all_sizes;
      info.test_size = 1008;
      info.merged = (p == Problem::Borehole2);
      break;
    case Problem::OTL:
    case Problem::OTL2:
      info.base = Problem::OTL;
      info.cont_dims = 4;
      info.level_counts = {4, 6};
      info.box = {{50.0, 150.0}, {25.0, 70.0}, {1.2, 2.5}, {0.25, 1.2}};
      info.allowed_samples_per_level = short_sizes;
      info.test_size = 1008;
      info.merged = (p == Problem::OTL2);
      break;
    case Problem::Piston:
    case Problem::Piston2:
      info.base = Problem::Piston;
      info.cont_dims = 5;
      info.level_counts = {5, 3};
      info.box = {{30.0, 60.0}, {0.005, 0.02}, {0.002, 0.01}, {290.0, 296.0}, {340.0, 360.0}};
      info.allowed_samples_per_level = short_sizes;
      info.test_size = 1005;
      info.merged = (p == Problem::Piston2);
      break;
    case Problem::Goldstein:
      info.cont_dims = 2;
      info.level_counts = {9};
      info.box = {{0.0, 100.0}, {0.0, 100.0}};
      info.allowed_samples_per_level = all_sizes;
      info.test_size = 999;
      break;
  }
  return info;
}

void check_box(const ProblemInfo& info, const VectorXd& x) {
  if (x.size() != info.cont_dims)
    throw std::invalid_argument("eval_function: wrong continuous dimension");
  for (int k = 0; k < info.cont_dims; ++k) {
    const auto [lo, hi] = info.box[static_cast<std::size_t>(k)];
    const double slack = 1e-9 * (hi - lo);
    if (x[k] < lo - slack || x[k] > hi + slack)
      throw std::invalid_argument("eval_function: x" + std::to_string(k + 1) + " out of box");
  }
}

void check_levels(const std::vector<int>& counts, const std::vector<int>& z) {
  if (z.size() != counts.size())
    throw std::invalid_argument("eval_function: wrong number of categorical variables");
  for (std::size_t j = 0; j < z.size(); ++j)
    if (z[j] < 1 || z[j] > counts[j])
      throw std::invalid_argument("eval_function: invalid level for variable " +
                                  std::to_string(j + 1));
}

double eval_f1(double x, int z) {
  const double indicator = (z > 9) ? (0.4 + z / 15.0) : 0.0;
  return std::cos(7.0 * kPi * x / 2.0 + indicator - z / 20.0);
}

double eval_f2(double x, int z) {
  if (z <= 4) return x + 0.01 * (x - 0.5) * (x - 0.5) * z / 10.0;
  if (z <= 7) return 0.9 * std::cos(2.0 * kPi * (x + (z - 4) * z / 20.0)) * std::exp(-x);
  return -0.7 * std::cos(2.0 * kPi * (x + (z - 7) * z / 20.0)) * std::exp(-x);
}

double eval_beam(double L, double S, int z) {
  const double I = kBeamInertia[z - 1];
  return L * L * L / (3.0 * S * S * I);
}

double eval_borehole(const VectorXd& x, int z_rw, int z_hl) {
  const double r = x[0], Tu = x[1], Hu = x[2], Tl = x[3], L = x[4], Kw = x[5];
  const double rw = kBoreholeRw[z_rw - 1];
  const double Hl = kBoreholeHl[z_hl - 1];
  const double lnr = std::log(r / rw);
  return 2.0 * kPi * Tu * (Hu - Hl) /
         (lnr * (1.0 + 2.0 * L * Tu / (lnr * rw * rw * Kw) + Tu / Tl));
}

double eval_otl(const VectorXd& x, int z_rf, int z_beta) {
  const double Rb1 = x[0], Rb2 = x[1], Rc1 = x[2], Rc2 = x[3];
  const double Rf = kOtlRf[z_rf - 1];
  const double beta = kOtlBeta[z_beta - 1];
  const double Vb1 = 12.0 * Rb2 / (Rb1 + Rb2);
  const double denom = beta * (Rc2 + 9.0) + Rf;
  return (Vb1 + 0.74) * beta * (Rc2 + 9.0) / denom + 11.35 * Rf / denom +
         0.74 * Rf * beta * (Rc2 + 9.0) / (Rc1 * denom);
}

double eval_piston(const VectorXd& x, int z_k, int z_p0) {
  const double M = x[0], S = x[1], V0 = x[2], Ta = x[3], T0 = x[4];
  const double k = kPistonK[z_k - 1];
  const double P0 = kPistonP0[z_p0 - 1];
  const double A = P0 * S + 19.62 * M - k * V0 / S;
  const double B = P0 * V0 * Ta / T0;
  const double V = S / (2.0 * k) * (std::sqrt(A * A + 4.0 * k * B) - A);
  return 2.0 * kPi * std::sqrt((k + S * S * B / (V * V)) / M);
}

double eval_goldstein(double x1, double x2, int z) {
  const double x3 = kGoldstein[z - 1][0];
  const double x4 = kGoldstein[z - 1][1];
  return 53.3108 + 0.184901 * x1 - 5.02914e-6 * x1 * x1 * x1 +
         7.72522e-8 * x1 * x1 * x1 * x1 - 0.0870775 * x2 - 0.106959 * x3 +
         7.98772e-6 * x3 * x3 * x3 + 0.00242482 * x4 + 1.32851e-6 * x4 * x4 * x4 -
         0.00146393 * x1 * x2 - 0.00301588 * x1 * x3 - 0.00272291 * x1 * x4 +
         0.0017004 * x2 * x3 + 0.0038428 * x2 * x4 - 0.000198969 * x3 * x4 +
         1.86025e-5 * x1 * x2 * x3 - 1.88719e-6 * x1 * x2 * x4 +
         2.50923e-5 * x1 * x3 * x4 - 5.62199e-5 * x2 * x3 * x4;
}

// Lexicographic z1-major tuple index in 0..prod(C)-1.
int tuple_index(const std::vector<int>& counts, const std::vector<int>& z) {
  int idx = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) idx = idx * counts[j] + (z[j] - 1);
  return idx;
}

std::vector<int> tuple_from_index(const std::vector<int>& counts, int idx) {
  std::vector<int> z(counts.size());
  for (std::size_t j = counts.size(); j-- > 0;) {
    z[j] = idx % counts[j] + 1;
    idx /= counts[j];
  }
  return z;
}

}  // namespace

Problem problem_from_name(const std::string& name) {
  std::string s;
  for (char c : name)
    if (c != ' ' && c != '-') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "f1") return Problem::F1;
  if (s == "f2") return Problem::F2;
  if (s == "beam_bending" || s == "beambending") return Problem::BeamBending;
  if (s == "borehole") return Problem::Borehole;
  if (s == "borehole2") return Problem::Borehole2;
  if (s == "otl") return Problem::OTL;
  if (s == "otl2") return Problem::OTL2;
  if (s == "piston") return Problem::Piston;
  if (s == "piston2") return Problem::Piston2;
  if (s == "goldstein") return Problem::Goldstein;
  throw std::invalid_argument("unknown dataset: " + name);
}

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::F1: return "f1";
    case Problem::F2: return "f2";
    case Problem::BeamBending: return "beam_bending";
    case Problem::Borehole: return "borehole";
    case Problem::Borehole2: return "borehole2";
    case Problem::OTL: return "otl";
    case Problem::OTL2: return "otl2";
    case Problem::Piston: return "piston";
    case Problem::Piston2: return "piston2";
    case Problem::Goldstein: return "goldstein";
  }
  return "?";
}

std::vector<std::string> problem_names() {
  return {"f1",   "f2",   "beam_bending", "borehole", "borehole2",
          "otl",  "otl2", "piston",       "piston2",  "goldstein"};
}

const ProblemInfo& problem_info(Problem p) {
  static const ProblemInfo infos[] = {
      make_info(Problem::F1),      make_info(Problem::F2),
      make_info(Problem::BeamBending), make_info(Problem::Borehole),
      make_info(Problem::Borehole2),   make_info(Problem::OTL),
      make_info(Problem::OTL2),        make_info(Problem::Piston),
      make_info(Problem::Piston2),     make_info(Problem::Goldstein)};
  return infos[static_cast<int>(p)];
}

std::uint64_t base_seed(Problem p) {
  // Mirror of configs/base_seeds.cfg.
  switch (problem_info(p).base) {
    case Problem::F1: return 1000;
    case Problem::F2: return 2000;
    case Problem::BeamBending: return 3000;
    case Problem::Borehole: return 4000;
    case Problem::OTL: return 5000;
    case Problem::Piston: return 6000;
    case Problem::Goldstein: return 7000;
    default: return 0;
  }
}

void DatasetSpec::validate() const {
  const ProblemInfo& info = problem_info(problem);
  const auto& allowed = info.allowed_samples_per_level;
  if (std::find(allowed.begin(), allowed.end(), samples_per_level) == allowed.end())
    throw std::invalid_argument("samples_per_level " + std::to_string(samples_per_level) +
                                " not offered for " + problem_name(problem));
  if (merged && info.level_counts.size() < 2 && !info.merged)
    throw std::invalid_argument("merged requested for a single-variable dataset");
}

MatrixXd slhd(int points_per_slice, int n_slices, int dim, std::uint64_t seed) {
  if (points_per_slice < 1 || n_slices < 1 || dim < 1)
    throw std::invalid_argument("slhd: all arguments must be >= 1");
  const int t = points_per_slice, s = n_slices, N = t * s;
  MatrixXd design(N, dim);
  Rng rng(seed);
  std::vector<int> slice_values(static_cast<std::size_t>(t));
  for (int k = 0; k < dim; ++k) {
    // Block i holds fine bins [i*s, (i+1)*s); slice j receives one bin from
    // each block, so each slice is Latin on the t coarse bins and the union
    // is Latin on all N fine bins.
    std::vector<std::vector<int>> block_perm(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) block_perm[static_cast<std::size_t>(i)] = rng.permutation(s);
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < t; ++i)
        slice_values[static_cast<std::size_t>(i)] =
            i * s + block_perm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      rng.shuffle(slice_values);
      for (int p = 0; p < t; ++p) {
        const double u = rng.uniform();
        design(j * t + p, k) = (slice_values[static_cast<std::size_t>(p)] + u) / N;
      }
    }
  }
  return design;
}

double eval_function(Problem p, const VectorXd& x, const std::vector<int>& z) {
  const ProblemInfo& info = problem_info(p);
  check_box(info, x);
  std::vector<int> levels = z;
  if (info.merged) {
    // The *2 variants take the single fused level and evaluate the base
    // problem on the decoded tuple.
    if (z.size() != 1) throw std::invalid_argument("eval_function: merged variant takes one level");
    const ProblemInfo& base = problem_info(info.base);
    int total = 1;
    for (int c : base.level_counts) total *= c;
    if (z[0] < 1 || z[0] > total) throw std::invalid_argument("eval_function: invalid merged level");
    levels = tuple_from_index(base.level_counts, z[0] - 1);
    return eval_function(info.base, x, levels);
  }
  check_levels(info.level_counts, levels);
  switch (p) {
    case Problem::F1: return eval_f1(x[0], levels[0]);
    case Problem::F2: return eval_f2(x[0], levels[0]);
    case Problem::BeamBending: return eval_beam(x[0], x[1], levels[0]);
    case Problem::Borehole: return eval_borehole(x, levels[0], levels[1]);
    case Problem::OTL: return eval_otl(x, levels[0], levels[1]);
    case Problem::Piston: return eval_piston(x, levels[0], levels[1]);
    case Problem::Goldstein: return eval_goldstein(x[0], x[1], levels[0]);
    default: throw std::invalid_argument("eval_function: unhandled problem");
  }
}

double goldstein_constraint(double x1, double x2, int level) {
  if (level < 1 || level > 9) throw std::invalid_argument("goldstein_constraint: invalid level");
  const double c1 = kGoldstein[level - 1][2];
  const double c2 = kGoldstein[level - 1][3];
  const double s = std::sin(x1 / 10.0);
  const double c = std::cos(x2 / 10.0);
  return c1 * s * s * s + c2 * c * c;
}

MixedDataset goldstein_sample(int n_per_level, std::uint64_t seed) {
  if (n_per_level < 1) throw std::invalid_argument("goldstein_sample: n_per_level >= 1");
  constexpr int kMaxAttempts = 1000000;
  const int C = 9;
  MixedDataset d;
  d.X.resize(static_cast<Eigen::Index>(n_per_level) * C, 2);
  d.Z.resize(static_cast<Eigen::Index>(n_per_level) * C, 1);
  d.y.resize(static_cast<Eigen::Index>(n_per_level) * C);
  d.level_counts = {C};
  Rng rng(seed);
  Eigen::Index row = 0;
  for (int z = 1; z <= C; ++z) {
    int accepted = 0, attempts = 0;
    while (accepted < n_per_level) {
      if (++attempts > kMaxAttempts)
        throw std::runtime_error("goldstein_sample: rejection stalled for level " +
                                 std::to_string(z));
      const double x1 = rng.uniform(0.0, 100.0);
      const double x2 = rng.uniform(0.0, 100.0);
      if (goldstein_constraint(x1, x2, z) > 0.0) continue;
      d.X(row, 0) = x1;
      d.X(row, 1) = x2;
      d.Z(row, 0) = z;
      d.y[row] = eval_goldstein(x1, x2, z);
      ++row;
      ++accepted;
    }
  }
  return d;
}

namespace {

MixedDataset build_from_design(const ProblemInfo& base, Problem base_problem,
                               const MatrixXd& unit_design, int per_tuple, int n_tuples) {
  MixedDataset d;
  const int dim = base.cont_dims;
  const Eigen::Index N = unit_design.rows();
  d.X.resize(N, dim);
  d.Z.resize(N, static_cast<int>(base.level_counts.size()));
  d.y.resize(N);
  d.level_counts = base.level_counts;
  for (int tup = 0; tup < n_tuples; ++tup) {
    const std::vector<int> z = tuple_from_index(base.level_counts, tup);
    for (int p = 0; p < per_tuple; ++p) {
      const Eigen::Index row = static_cast<Eigen::Index>(tup) * per_tuple + p;
      VectorXd x(dim);
      for (int k = 0; k < dim; ++k) {
        const auto [lo, hi] = base.box[static_cast<std::size_t>(k)];
        x[k] = lo + (hi - lo) * unit_design(row, k);
      }
      d.X.row(row) = x;
      for (std::size_t j = 0; j < z.size(); ++j) d.Z(row, static_cast<int>(j)) = z[j];
      d.y[row] = eval_function(base_problem, x, z);
    }
  }
  return d;
}

MixedDataset goldstein_testset(std::uint64_t seed, int test_size) {
  const int per_level = test_size / 9;
  return goldstein_sample(per_level, seed);
}

}  // namespace

std::pair<MixedDataset, MixedDataset> generate_replicate(const DatasetSpec& spec) {
  spec.validate();
  const ProblemInfo& info = problem_info(spec.problem);
  const ProblemInfo& base = problem_info(info.base);
  const bool merged = info.merged || spec.merged;
  const std::uint64_t test_seed = base_seed(info.base) + kTestSeedOffset;

  MixedDataset train, test;
  if (info.base == Problem::Goldstein) {
    train = goldstein_sample(spec.samples_per_level, spec.seed);
    test = goldstein_testset(test_seed, info.test_size);
  } else {
    int n_tuples = 1;
    for (int c : base.level_counts) n_tuples *= c;
    const MatrixXd train_design = slhd(spec.samples_per_level, n_tuples, base.cont_dims, spec.seed);
    train = build_from_design(base, info.base, train_design, spec.samples_per_level, n_tuples);

    const int per_tuple = info.test_size / n_tuples;
    const int remainder = info.test_size - per_tuple * n_tuples;
    const MatrixXd test_design = slhd(per_tuple, n_tuples, base.cont_dims, test_seed);
    test = build_from_design(base, info.base, test_design, per_tuple, n_tuples);
    if (remainder > 0) {
      // Table sizes are not always divisible by the number of level tuples;
      // the leftover points go to the first tuples, uniformly in the box.
      Rng extra(mix_seed(test_seed, 0xE17A5ULL));
      const Eigen::Index n0 = test.rows();
      test.X.conservativeResize(n0 + remainder, Eigen::NoChange);
      test.Z.conservativeResize(n0 + remainder, Eigen::NoChange);
      test.y.conservativeResize(n0 + remainder);
      for (int rix = 0; rix < remainder; ++rix) {
        const std::vector<int> z = tuple_from_index(base.level_counts, rix);
        VectorXd x(base.cont_dims);
        for (int k = 0; k < base.cont_dims; ++k) {
          const auto [lo, hi] = base.box[static_cast<std::size_t>(k)];
          x[k] = extra.uniform(lo, hi);
        }
        test.X.row(n0 + rix) = x;
        for (std::size_t j = 0; j < z.size(); ++j) test.Z(n0 + rix, static_cast<int>(j)) = z[j];
        test.y[n0 + rix] = eval_function(info.base, x, z);
      }
    }
  }
  if (merged && train.cat_dims() > 1) {
    train = merge_categoricals(train);
    test = merge_categoricals(test);
  }
  return {std::move(train), std::move(test)};
}

Scaler fit_scaler(const MixedDataset& train) {
  if (train.rows() == 0) throw std::invalid_argument("standardize: empty training set");
  Scaler s;
  const Eigen::Index N = train.rows();
  s.x_mean.resize(train.cont_dims());
  s.x_std.resize(train.cont_dims());
  for (int k = 0; k < train.cont_dims(); ++k) {
    const double mean = train.X.col(k).mean();
    const double var = (train.X.col(k).array() - mean).square().sum() / static_cast<double>(N);
    if (var <= 0.0)
      throw std::invalid_argument("standardize: constant continuous column " + std::to_string(k + 1));
    s.x_mean[k] = mean;
    s.x_std[k] = std::sqrt(var);
  }
  s.y_mean = train.y.mean();
  const double yvar = (train.y.array() - s.y_mean).square().sum() / static_cast<double>(N);
  if (yvar <= 0.0) throw std::invalid_argument("standardize: constant outputs");
  s.y_std = std::sqrt(yvar);
  return s;
}

MixedDataset apply_scaler(const MixedDataset& d, const Scaler& s) {
  MixedDataset out = d;
  for (int k = 0; k < d.cont_dims(); ++k)
    out.X.col(k) = ((d.X.col(k).array() - s.x_mean[k]) / s.x_std[k]).matrix();
  out.y = ((d.y.array() - s.y_mean) / s.y_std).matrix();
  return out;
}

StandardizedPair standardize(const MixedDataset& train, const MixedDataset& test) {
  StandardizedPair out;
  out.scaler = fit_scaler(train);
  out.train = apply_scaler(train, out.scaler);
  out.test = apply_scaler(test, out.scaler);
  return out;
}

MixedDataset merge_categoricals(const MixedDataset& d) {
  if (d.cat_dims() < 2)
    throw std::invalid_argument("merge_categoricals: need at least two categorical variables");
  MixedDataset out;
  out.X = d.X;
  out.y = d.y;
  int total = 1;
  for (int c : d.level_counts) total *= c;
  out.level_counts = {total};
  out.Z.resize(d.rows(), 1);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    std::vector<int> z(static_cast<std::size_t>(d.cat_dims()));
    for (int j = 0; j < d.cat_dims(); ++j) z[static_cast<std::size_t>(j)] = d.Z(i, j);
    out.Z(i, 0) = tuple_index(d.level_counts, z) + 1;
  }
  return out;
}

MixedDataset unmerge_categoricals(const MixedDataset& d, const std::vector<int>& level_counts) {
  if (d.cat_dims() != 1)
    throw std::invalid_argument("unmerge_categoricals: expects a single categorical variable");
  int total = 1;
  for (int c : level_counts) total *= c;
  if (total != d.level_counts[0])
    throw std::invalid_argument("unmerge_categoricals: level counts do not factor the variable");
  MixedDataset out;
  out.X = d.X;
  out.y = d.y;
  out.level_counts = level_counts;
  out.Z.resize(d.rows(), static_cast<int>(level_counts.size()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const std::vector<int> z = tuple_from_index(level_counts, d.Z(i, 0) - 1);
    for (std::size_t j = 0; j < z.size(); ++j) out.Z(i, static_cast<int>(j)) = z[j];
  }
  return out;
}

void write_csv(const MixedDataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int k = 0; k < d.cont_dims(); ++k) out << 'x' << (k + 1) << ',';
  for (int j = 0; j < d.cat_dims(); ++j) out << 'z' << (j + 1) << ',';
  out << "y\n";
  char buf[32];
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (int k = 0; k < d.cont_dims(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.X(i, k));
      out << buf << ',';
    }
    for (int j = 0; j < d.cat_dims(); ++j) out << d.Z(i, j) << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", d.y[i]);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MixedDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  int n_cont = 0, n_cat = 0;
  for (const auto& h : header) {
    if (!h.empty() && h[0] == 'x') ++n_cont;
    else if (!h.empty() && h[0] == 'z') ++n_cat;
    else if (h != "y") throw std::runtime_error("unexpected CSV column: " + h);
  }
  if (header.empty() || header.back() != "y")
    throw std::runtime_error("dataset CSV must end with a y column");

  std::vector<double> xs, ys;
  std::vector<int> zs;
  Eigen::Index n_rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    int col = 0;
    while (std::getline(ss, tok, ',')) {
      if (col < n_cont) xs.push_back(std::stod(tok));
      else if (col < n_cont + n_cat) zs.push_back(std::stoi(tok));
      else ys.push_back(std::stod(tok));
      ++col;
    }
    if (col != n_cont + n_cat + 1)
      throw std::runtime_error("ragged CSV row in " + path);
    ++n_rows;
  }
  MixedDataset d;
  d.X.resize(n_rows, n_cont);
  d.Z.resize(n_rows, n_cat);
  d.y.resize(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (int k = 0; k < n_cont; ++k) d.X(i, k) = xs[static_cast<std::size_t>(i) * n_cont + k];
    for (int j = 0; j < n_cat; ++j) d.Z(i, j) = zs[static_cast<std::size_t>(i) * n_cat + j];
    d.y[i] = ys[static_cast<std::size_t>(i)];
  }
  d.level_counts.assign(static_cast<std::size_t>(n_cat), 2);
  for (int j = 0; j < n_cat; ++j)
    d.level_counts[static_cast<std::size_t>(j)] = std::max(2, d.Z.col(j).maxCoeff());
  d.validate();
  return d;
}

}  // namespace catgp::datasets
