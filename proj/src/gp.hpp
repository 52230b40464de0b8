#ifndef CATGP_GP_HPP
#define CATGP_GP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "optimize.hpp"
#include "types.hpp"

namespace catgp::gp {

// Kernel configuration of a mixed-input GP: an ARD RBF over the continuous
// coordinates times one categorical kernel per variable. An empty
// cat_kernels list drops the categorical inputs entirely.
struct GpConfig {
  std::vector<kernels::KernelSpec> cat_kernels;

  std::string to_json() const;
  static GpConfig parse_json(const std::string& text);
};

// Slices of the joint parameter vector
// [lengthscales | categorical blocks... | log10 relative nugget].
struct ParamLayout {
  int n_cont = 0;
  std::vector<std::pair<int, int>> cat;  // (offset, count) per variable
  int nugget_index = 0;
  int total = 0;
};

ParamLayout make_layout(const GpConfig& config, int cont_dims);

// log10 of the relative nugget (eta^2 / sigma^2); the covariance of the
// observations is sigma^2 (R + nugget I) with sigma^2 profiled out.
inline constexpr double kLogNuggetLo = -8.0;
inline constexpr double kLogNuggetHi = -4.0;

// Correlation Gram matrix of a standardized training set at the given
// parameters (no nugget).
MatrixXd gram(const MixedDataset& train_std, const GpConfig& config, const VectorXd& params);

// Cached evaluator of the profiled negative log marginal likelihood. One
// instance serves one optimizer run; evaluations are sequential.
class NllObjective {
 public:
  NllObjective(const MixedDataset& train_std, const GpConfig& config);

  double operator()(const VectorXd& params) const;

  struct Parts {
    bool ok = false;
    double nll = 0.0;
    double mean = 0.0;      // profiled constant mean
    double variance = 0.0;  // profiled sigma^2 (floored at 1e-12)
    double nugget = 0.0;    // relative nugget actually used (incl. jitter)
    MatrixXd chol_lower;
    VectorXd alpha;  // (R + nugget I)^-1 (y - mean 1)
  };
  Parts evaluate(const VectorXd& params) const;

  const ParamLayout& layout() const { return layout_; }

 private:
  // Fills corr_ with the correlation Gram at the given parameters and
  // returns the relative nugget.
  double assemble(const VectorXd& params) const;

  const MixedDataset& train_;
  GpConfig config_;
  ParamLayout layout_;
  std::vector<MatrixXd> sqdist_;           // per continuous coordinate
  std::vector<std::vector<int>> pair_idx_; // per variable, flattened level pairs
  mutable Eigen::ArrayXXd expo_, corr_;    // scratch
};

double neg_log_marginal_likelihood(const MixedDataset& train_std, const GpConfig& config,
                                   const VectorXd& params);

// Box bounds for the joint parameter vector. Lengthscale bounds come from
// the standardized data: per coordinate, upper = 2 * max pairwise distance,
// lower = 0.5 * min nonzero pairwise distance.
optimize::Bounds fit_bounds(const MixedDataset& train_std, const GpConfig& config);
namespace detail {
using optimize::Bounds;
}

struct FitInfo {
  double cpu_seconds = 0.0;   // thread CPU time of the fit call
  double wall_seconds = 0.0;
  double best_nll = 0.0;
  int best_restart = -1;
  int n_restarts = 0;
  int n_failed_restarts = 0;
  long long n_evals = 0;
  optimize::Mode mode = optimize::Mode::Long;
};

// Fit-time optimizer knobs; cap/tolerance values <= 0 fall back to the
// mode's published formula, evaluated at the model's parameter count.
struct FitOptions {
  optimize::Mode mode = optimize::Mode::Long;
  int n_restarts = 96;
  int max_fun_evals = 0;
  int max_iters = 0;
  double tolerance = 0.0;
};

struct PosteriorPrediction {
  VectorXd mean;
  MatrixXd covariance;  // empty unless requested
  VectorXd variance;    // marginal variances (clamped at 0)
};

// Immutable fitted model; safe to share across threads for prediction.
class TrainedGp {
 public:
  VectorXd predict_mean(const MixedDataset& test) const;  // natural units
  PosteriorPrediction posterior(const MixedDataset& test, bool want_cov) const;  // standardized
  PosteriorPrediction predict(const MixedDataset& test, bool want_cov) const;    // natural units
  double rrmse_on(const MixedDataset& test) const;

  const GpConfig& config() const { return config_; }
  const VectorXd& params() const { return params_; }
  const Scaler& scaler() const { return scaler_; }
  const FitInfo& info() const { return info_; }
  const ParamLayout& layout() const { return layout_; }
  double mean_value() const { return mean_; }
  double variance_value() const { return variance_; }
  double nugget() const { return nugget_; }
  int param_dim() const { return layout_.total; }

  void save(const std::string& path) const;
  static TrainedGp load(const std::string& path);

  // Builds a model at fixed parameters, skipping the optimization. Used for
  // predicting at externally chosen parameter values.
  static TrainedGp from_params(const MixedDataset& train, const GpConfig& config,
                               const VectorXd& params);

  friend TrainedGp fit(const MixedDataset&, const GpConfig&, const FitOptions&, std::uint64_t);

 private:
  void finalize(const NllObjective& objective);

  GpConfig config_;
  ParamLayout layout_;
  Scaler scaler_;
  MixedDataset train_std_;  // standardized copy of the training data
  MixedDataset train_raw_;
  VectorXd params_;
  double mean_ = 0.0, variance_ = 1.0, nugget_ = 1e-8;
  MatrixXd chol_lower_;
  VectorXd alpha_;
  std::vector<MatrixXd> level_mats_;
  FitInfo info_;
};

// Multi-start maximum-likelihood training on a natural-units training set;
// standardization is fitted internally and stored with the model.
TrainedGp fit(const MixedDataset& train, const GpConfig& config, const FitOptions& options,
              std::uint64_t seed);

double thread_cpu_seconds();

}  // namespace catgp::gp

#endif
