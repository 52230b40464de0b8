#include "gp.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "datasets.hpp"

namespace catgp::gp {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kVarianceFloor = 1e-12;
const double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

json dataset_to_json(const MixedDataset& d) {
  json j;
  j["x"] = std::vector<std::vector<double>>();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(d.cont_dims()));
    for (int k = 0; k < d.cont_dims(); ++k) row[static_cast<std::size_t>(k)] = d.X(i, k);
    j["x"].push_back(row);
  }
  j["z"] = std::vector<std::vector<int>>();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    std::vector<int> row(static_cast<std::size_t>(d.cat_dims()));
    for (int k = 0; k < d.cat_dims(); ++k) row[static_cast<std::size_t>(k)] = d.Z(i, k);
    j["z"].push_back(row);
  }
  j["y"] = std::vector<double>(d.y.data(), d.y.data() + d.y.size());
  j["level_counts"] = d.level_counts;
  return j;
}

MixedDataset dataset_from_json(const json& j) {
  MixedDataset d;
  const auto& xs = j.at("x");
  const auto& zs = j.at("z");
  const auto& ys = j.at("y");
  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  const int n_cont = xs.empty() ? 0 : static_cast<int>(xs[0].size());
  const int n_cat = zs.empty() ? 0 : static_cast<int>(zs[0].size());
  d.X.resize(n, n_cont);
  d.Z.resize(n, n_cat);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < n_cont; ++k) d.X(i, k) = xs[i][static_cast<std::size_t>(k)].get<double>();
    for (int k = 0; k < n_cat; ++k) d.Z(i, k) = zs[i][static_cast<std::size_t>(k)].get<int>();
    d.y[i] = ys[i].get<double>();
  }
  d.level_counts = j.at("level_counts").get<std::vector<int>>();
  return d;
}

}  // namespace

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

std::string GpConfig::to_json() const {
  json j;
  j["cat_kernels"] = json::array();
  for (const auto& spec : cat_kernels) j["cat_kernels"].push_back(json::parse(spec.to_json()));
  return j.dump();
}

GpConfig GpConfig::parse_json(const std::string& text) {
  GpConfig config;
  const json j = json::parse(text);
  for (const auto& item : j.at("cat_kernels"))
    config.cat_kernels.push_back(kernels::KernelSpec::parse_json(item.dump()));
  return config;
}

ParamLayout make_layout(const GpConfig& config, int cont_dims) {
  ParamLayout layout;
  layout.n_cont = cont_dims;
  int offset = cont_dims;
  for (const auto& spec : config.cat_kernels) {
    const int count = kernels::param_count(spec);
    layout.cat.emplace_back(offset, count);
    offset += count;
  }
  layout.nugget_index = offset;
  layout.total = offset + 1;
  return layout;
}

NllObjective::NllObjective(const MixedDataset& train_std, const GpConfig& config)
    : train_(train_std), config_(config) {
  train_std.validate();
  if (config.cat_kernels.size() > static_cast<std::size_t>(train_std.cat_dims()))
    throw std::invalid_argument("gp: more categorical kernels than categorical variables");
  for (std::size_t v = 0; v < config.cat_kernels.size(); ++v)
    if (config.cat_kernels[v].levels != train_std.level_counts[v])
      throw std::invalid_argument("gp: kernel level count does not match the data");
  layout_ = make_layout(config, train_std.cont_dims());

  const Eigen::Index N = train_std.rows();
  sqdist_.reserve(static_cast<std::size_t>(train_std.cont_dims()));
  for (int k = 0; k < train_std.cont_dims(); ++k) {
    const VectorXd col = train_std.X.col(k);
    MatrixXd d2 = col.replicate(1, N) - col.transpose().replicate(N, 1);
    sqdist_.push_back(d2.cwiseProduct(d2));
  }
  pair_idx_.resize(config.cat_kernels.size());
  for (std::size_t v = 0; v < config.cat_kernels.size(); ++v) {
    const int C = config.cat_kernels[v].levels;
    auto& idx = pair_idx_[v];
    idx.resize(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
    // Column-major like the Eigen scratch arrays below.
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i < N; ++i)
        idx[static_cast<std::size_t>(j * N + i)] =
            (train_std.Z(j, static_cast<int>(v)) - 1) * C + (train_std.Z(i, static_cast<int>(v)) - 1);
  }
  expo_.resize(N, N);
  corr_.resize(N, N);
}

double NllObjective::assemble(const VectorXd& params) const {
  if (params.size() != layout_.total)
    throw std::invalid_argument("gp: parameter vector has wrong length");
  expo_.setZero();
  for (int k = 0; k < layout_.n_cont; ++k) {
    const double ls = params[k];
    expo_ += sqdist_[static_cast<std::size_t>(k)].array() * (0.5 / (ls * ls));
  }
  corr_ = (-expo_).exp();
  for (std::size_t v = 0; v < config_.cat_kernels.size(); ++v) {
    const auto [offset, count] = layout_.cat[v];
    const MatrixXd T = kernels::level_matrix(config_.cat_kernels[v], params.segment(offset, count));
    const double* td = T.data();  // symmetric, so storage order is irrelevant
    double* rd = corr_.data();
    const auto& idx = pair_idx_[v];
    for (std::size_t i = 0; i < idx.size(); ++i) rd[i] *= td[idx[i]];
  }
  return std::pow(10.0, params[layout_.nugget_index]);
}

NllObjective::Parts NllObjective::evaluate(const VectorXd& params) const {
  const Eigen::Index N = train_.rows();
  const double nugget = assemble(params);
  Parts parts;

  // Extreme angles can make the correlation numerically singular; escalate
  // the diagonal before declaring the point infeasible.
  Eigen::LLT<MatrixXd> llt;
  double used_nugget = nugget;
  MatrixXd A = corr_.matrix();
  A.diagonal().array() += nugget;
  llt.compute(A);
  for (std::size_t j = 0; llt.info() != Eigen::Success && j < std::size(kJitterLadder); ++j) {
    used_nugget = nugget + kJitterLadder[j];
    A = corr_.matrix();
    A.diagonal().array() += used_nugget;
    llt.compute(A);
  }
  if (llt.info() != Eigen::Success) {
    parts.ok = false;
    parts.nll = kInf;
    return parts;
  }

  MatrixXd rhs(N, 2);
  rhs.col(0) = train_.y;
  rhs.col(1).setOnes();
  const MatrixXd sol = llt.solve(rhs);
  const double mean = sol.col(0).sum() / sol.col(1).sum();
  const VectorXd alpha = sol.col(0) - mean * sol.col(1);
  const VectorXd resid = (train_.y.array() - mean).matrix();
  const double variance = std::max(resid.dot(alpha) / static_cast<double>(N), kVarianceFloor);

  double log_det = 0.0;
  const MatrixXd& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < N; ++i) log_det += std::log(L(i, i));
  log_det *= 2.0;

  parts.ok = true;
  parts.mean = mean;
  parts.variance = variance;
  parts.nugget = used_nugget;
  parts.nll = 0.5 * static_cast<double>(N) * std::log(kTwoPi * variance) + 0.5 * log_det +
              0.5 * static_cast<double>(N);
  parts.chol_lower = MatrixXd(L.triangularView<Eigen::Lower>());
  parts.alpha = alpha;
  return parts;
}

double NllObjective::operator()(const VectorXd& params) const {
  const Eigen::Index N = train_.rows();
  const double nugget = assemble(params);

  Eigen::LLT<MatrixXd> llt;
  MatrixXd A = corr_.matrix();
  A.diagonal().array() += nugget;
  llt.compute(A);
  for (std::size_t j = 0; llt.info() != Eigen::Success && j < std::size(kJitterLadder); ++j) {
    A = corr_.matrix();
    A.diagonal().array() += nugget + kJitterLadder[j];
    llt.compute(A);
  }
  if (llt.info() != Eigen::Success) return kInf;

  MatrixXd rhs(N, 2);
  rhs.col(0) = train_.y;
  rhs.col(1).setOnes();
  const MatrixXd sol = llt.solve(rhs);
  const double mean = sol.col(0).sum() / sol.col(1).sum();
  const VectorXd resid = (train_.y.array() - mean).matrix();
  const double variance =
      std::max(resid.dot(VectorXd(sol.col(0) - mean * sol.col(1))) / static_cast<double>(N),
               kVarianceFloor);

  double log_det = 0.0;
  const MatrixXd& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < N; ++i) log_det += std::log(L(i, i));

  return 0.5 * static_cast<double>(N) * std::log(kTwoPi * variance) + log_det +
         0.5 * static_cast<double>(N);
}

MatrixXd gram(const MixedDataset& train_std, const GpConfig& config, const VectorXd& params) {
  NllObjective objective(train_std, config);
  const ParamLayout& layout = objective.layout();
  if (params.size() != layout.total)
    throw std::invalid_argument("gram: parameter vector has wrong length");
  const Eigen::Index N = train_std.rows();
  std::vector<MatrixXd> mats;
  for (std::size_t v = 0; v < config.cat_kernels.size(); ++v) {
    const auto [offset, count] = layout.cat[v];
    mats.push_back(kernels::level_matrix(config.cat_kernels[v], params.segment(offset, count)));
  }
  const VectorXd lengthscales = params.head(layout.n_cont);
  MatrixXd K(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      K(i, j) = kernels::mixed_kernel(train_std.X.row(i).transpose(),
                                      train_std.X.row(j).transpose(), lengthscales, mats,
                                      train_std.Z.row(i).transpose(),
                                      train_std.Z.row(j).transpose());
  return K;
}

double neg_log_marginal_likelihood(const MixedDataset& train_std, const GpConfig& config,
                                   const VectorXd& params) {
  return NllObjective(train_std, config)(params);
}

optimize::Bounds fit_bounds(const MixedDataset& train_std, const GpConfig& config) {
  const ParamLayout layout = make_layout(config, train_std.cont_dims());
  optimize::Bounds b;
  b.lower.resize(layout.total);
  b.upper.resize(layout.total);
  const Eigen::Index N = train_std.rows();
  for (int k = 0; k < layout.n_cont; ++k) {
    double dmax = 0.0, dmin = kInf;
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i + 1; j < N; ++j) {
        const double d = std::abs(train_std.X(i, k) - train_std.X(j, k));
        dmax = std::max(dmax, d);
        if (d > 0.0) dmin = std::min(dmin, d);
      }
    if (!(dmax > 0.0) || !std::isfinite(dmin))
      throw std::invalid_argument("fit_bounds: continuous column " + std::to_string(k + 1) +
                                  " has no spread");
    b.lower[k] = 0.5 * dmin;
    b.upper[k] = 2.0 * dmax;
  }
  for (std::size_t v = 0; v < config.cat_kernels.size(); ++v) {
    const kernels::Bounds kb = kernels::param_bounds(config.cat_kernels[v]);
    const auto [offset, count] = layout.cat[v];
    b.lower.segment(offset, count) = kb.lower;
    b.upper.segment(offset, count) = kb.upper;
  }
  b.lower[layout.nugget_index] = kLogNuggetLo;
  b.upper[layout.nugget_index] = kLogNuggetHi;
  return b;
}

TrainedGp fit(const MixedDataset& train, const GpConfig& config, const FitOptions& options,
              std::uint64_t seed) {
  const double cpu0 = thread_cpu_seconds();
  const auto wall0 = std::chrono::steady_clock::now();

  TrainedGp model;
  model.config_ = config;
  model.train_raw_ = train;
  model.scaler_ = datasets::fit_scaler(train);
  model.train_std_ = datasets::apply_scaler(train, model.scaler_);

  NllObjective objective(model.train_std_, config);
  model.layout_ = objective.layout();
  const optimize::Bounds bounds = fit_bounds(model.train_std_, config);

  const optimize::OptSettings resolved =
      optimize::OptSettings::resolve(options.mode, model.layout_.total, options.max_fun_evals,
                                     options.max_iters, options.tolerance, options.n_restarts);
  const auto fn = [&objective](const VectorXd& p) { return objective(p); };
  const optimize::MultistartResult ms =
      optimize::multistart(fn, bounds.lower, bounds.upper, resolved, seed);

  model.params_ = ms.best.x_best;
  model.info_.best_nll = ms.best.f_best;
  model.info_.best_restart = ms.best_index;
  model.info_.n_restarts = resolved.n_restarts;
  model.info_.n_failed_restarts = ms.n_failed;
  model.info_.n_evals = ms.total_evals;
  model.info_.mode = resolved.mode;
  model.finalize(objective);

  model.info_.cpu_seconds = thread_cpu_seconds() - cpu0;
  model.info_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return model;
}

TrainedGp TrainedGp::from_params(const MixedDataset& train, const GpConfig& config,
                                 const VectorXd& params) {
  TrainedGp model;
  model.config_ = config;
  model.train_raw_ = train;
  model.scaler_ = datasets::fit_scaler(train);
  model.train_std_ = datasets::apply_scaler(train, model.scaler_);
  NllObjective objective(model.train_std_, config);
  model.layout_ = objective.layout();
  if (params.size() != model.layout_.total)
    throw std::invalid_argument("from_params: parameter vector has wrong length");
  model.params_ = params;
  model.finalize(objective);
  model.info_.best_nll = objective(params);
  return model;
}

void TrainedGp::finalize(const NllObjective& objective) {
  const NllObjective::Parts parts = objective.evaluate(params_);
  if (!parts.ok) throw std::runtime_error("gp: Gram factorization failed at the optimum");
  mean_ = parts.mean;
  variance_ = parts.variance;
  nugget_ = parts.nugget;
  chol_lower_ = parts.chol_lower;
  alpha_ = parts.alpha;
  level_mats_.clear();
  for (std::size_t v = 0; v < config_.cat_kernels.size(); ++v) {
    const auto [offset, count] = layout_.cat[v];
    level_mats_.push_back(
        kernels::level_matrix(config_.cat_kernels[v], params_.segment(offset, count)));
  }
}

PosteriorPrediction TrainedGp::posterior(const MixedDataset& test, bool want_cov) const {
  if (test.cont_dims() != train_std_.cont_dims() || test.cat_dims() != train_std_.cat_dims())
    throw std::invalid_argument("posterior: test dimensions do not match the model");
  for (std::size_t v = 0; v < config_.cat_kernels.size(); ++v)
    for (Eigen::Index i = 0; i < test.rows(); ++i)
      if (test.Z(i, static_cast<int>(v)) < 1 ||
          test.Z(i, static_cast<int>(v)) > config_.cat_kernels[v].levels)
        throw std::invalid_argument("posterior: test level out of range");

  const Eigen::Index N = train_std_.rows();
  const Eigen::Index M = test.rows();
  const VectorXd lengthscales = params_.head(layout_.n_cont);

  // Cross-correlations K_* (M x N) in standardized space.
  MatrixXd Kstar(M, N);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      double e = 0.0;
      for (int k = 0; k < layout_.n_cont; ++k) {
        const double d = test.X(i, k) - train_std_.X(j, k);
        e += d * d * (0.5 / (lengthscales[k] * lengthscales[k]));
      }
      double val = std::exp(-e);
      for (std::size_t v = 0; v < level_mats_.size(); ++v)
        val *= level_mats_[v](test.Z(i, static_cast<int>(v)) - 1,
                              train_std_.Z(j, static_cast<int>(v)) - 1);
      Kstar(i, j) = val;
    }
  }

  PosteriorPrediction out;
  out.mean = (mean_ + (Kstar * alpha_).array()).matrix();

  // Prior marginal correlation at a test point: 1 times the categorical
  // diagonals (non-unit for heteroscedastic families).
  VectorXd prior_diag = VectorXd::Ones(M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (std::size_t v = 0; v < level_mats_.size(); ++v)
      prior_diag[i] *= level_mats_[v](test.Z(i, static_cast<int>(v)) - 1,
                                      test.Z(i, static_cast<int>(v)) - 1);

  const MatrixXd W = chol_lower_.triangularView<Eigen::Lower>().solve(Kstar.transpose());
  if (want_cov) {
    MatrixXd Kss(M, M);
    for (Eigen::Index i = 0; i < M; ++i)
      for (Eigen::Index j = 0; j < M; ++j) {
        double e = 0.0;
        for (int k = 0; k < layout_.n_cont; ++k) {
          const double d = test.X(i, k) - test.X(j, k);
          e += d * d * (0.5 / (lengthscales[k] * lengthscales[k]));
        }
        double val = std::exp(-e);
        for (std::size_t v = 0; v < level_mats_.size(); ++v)
          val *= level_mats_[v](test.Z(i, static_cast<int>(v)) - 1,
                                test.Z(j, static_cast<int>(v)) - 1);
        Kss(i, j) = val;
      }
    out.covariance = variance_ * (Kss - W.transpose() * W);
    out.variance = out.covariance.diagonal().cwiseMax(0.0);
  } else {
    const VectorXd reduction = W.colwise().squaredNorm().transpose();
    out.variance = (variance_ * (prior_diag - reduction).array()).max(0.0).matrix();
  }
  return out;
}

PosteriorPrediction TrainedGp::predict(const MixedDataset& test, bool want_cov) const {
  MixedDataset scaled = test;
  for (int k = 0; k < test.cont_dims(); ++k)
    scaled.X.col(k) = ((test.X.col(k).array() - scaler_.x_mean[k]) / scaler_.x_std[k]).matrix();
  PosteriorPrediction p = posterior(scaled, want_cov);
  p.mean = (p.mean.array() * scaler_.y_std + scaler_.y_mean).matrix();
  p.variance *= scaler_.y_std * scaler_.y_std;
  if (p.covariance.size() > 0) p.covariance *= scaler_.y_std * scaler_.y_std;
  return p;
}

VectorXd TrainedGp::predict_mean(const MixedDataset& test) const {
  return predict(test, false).mean;
}

double TrainedGp::rrmse_on(const MixedDataset& test) const {
  const VectorXd pred = predict_mean(test);
  const double ybar = test.y.mean();
  const double denom = (test.y.array() - ybar).square().sum();
  if (denom <= 0.0) throw std::invalid_argument("rrmse: constant test outputs");
  return std::sqrt((test.y - pred).squaredNorm() / denom);
}

void TrainedGp::save(const std::string& path) const {
  json j;
  j["format"] = "catgp-model-v1";
  j["config"] = json::parse(config_.to_json());
  j["params"] = std::vector<double>(params_.data(), params_.data() + params_.size());
  j["scaler"] = {{"x_mean", std::vector<double>(scaler_.x_mean.data(),
                                                scaler_.x_mean.data() + scaler_.x_mean.size())},
                 {"x_std", std::vector<double>(scaler_.x_std.data(),
                                               scaler_.x_std.data() + scaler_.x_std.size())},
                 {"y_mean", scaler_.y_mean},
                 {"y_std", scaler_.y_std}};
  j["train"] = dataset_to_json(train_raw_);
  j["info"] = {{"cpu_seconds", info_.cpu_seconds},
               {"wall_seconds", info_.wall_seconds},
               {"best_nll", info_.best_nll},
               {"best_restart", info_.best_restart},
               {"n_restarts", info_.n_restarts},
               {"n_failed_restarts", info_.n_failed_restarts},
               {"n_evals", info_.n_evals},
               {"mode", optimize::mode_name(info_.mode)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrainedGp TrainedGp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "catgp-model-v1")
    throw std::runtime_error("not a catgp model file: " + path);

  TrainedGp model;
  model.config_ = GpConfig::parse_json(j.at("config").dump());
  model.train_raw_ = dataset_from_json(j.at("train"));
  const auto& js = j.at("scaler");
  const auto xm = js.at("x_mean").get<std::vector<double>>();
  const auto xs = js.at("x_std").get<std::vector<double>>();
  model.scaler_.x_mean = Eigen::Map<const VectorXd>(xm.data(), static_cast<Eigen::Index>(xm.size()));
  model.scaler_.x_std = Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  model.scaler_.y_mean = js.at("y_mean").get<double>();
  model.scaler_.y_std = js.at("y_std").get<double>();
  model.train_std_ = datasets::apply_scaler(model.train_raw_, model.scaler_);

  const auto pv = j.at("params").get<std::vector<double>>();
  model.params_ = Eigen::Map<const VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size()));

  NllObjective objective(model.train_std_, model.config_);
  model.layout_ = objective.layout();
  if (model.params_.size() != model.layout_.total)
    throw std::runtime_error("model file: parameter vector has wrong length");
  model.finalize(objective);

  const auto& ji = j.at("info");
  model.info_.cpu_seconds = ji.value("cpu_seconds", 0.0);
  model.info_.wall_seconds = ji.value("wall_seconds", 0.0);
  model.info_.best_nll = ji.value("best_nll", 0.0);
  model.info_.best_restart = ji.value("best_restart", -1);
  model.info_.n_restarts = ji.value("n_restarts", 0);
  model.info_.n_failed_restarts = ji.value("n_failed_restarts", 0);
  model.info_.n_evals = ji.value("n_evals", 0LL);
  model.info_.mode = optimize::mode_from_name(ji.value("mode", "long"));
  return model;
}

}  // namespace catgp::gp
