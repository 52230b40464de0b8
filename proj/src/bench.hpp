#ifndef CATGP_BENCH_HPP
#define CATGP_BENCH_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "gp.hpp"
#include "kernels.hpp"
#include "optimize.hpp"
#include "types.hpp"

namespace catgp::bench {

// One benchmark result row. rrmse is +inf for failed fits and for
// (method, dataset) pairs the method is not applicable to.
struct ExperimentRecord {
  std::string method;
  std::string dataset;
  int train_size = 0;
  int replicate = 0;
  double rrmse = 0.0;
  double fit_seconds = 0.0;  // thread CPU time of the fit, group inference excluded
  int n_params = 0;
  std::string opt_mode = "long";
  std::string status = "ok";  // ok | failed:<why> | inapplicable
};

double rrmse(const VectorXd& y_true, const VectorXd& y_pred);

// ceil(tau*n)-th smallest value of the multiset; +inf entries participate.
double dataset_quantile(std::vector<double> scores, double tau);

// Profiles are evaluated on this grid; AUC is the trapezoid rule over it.
std::vector<double> tau_grid();

struct PerformanceProfile {
  std::string method;
  std::vector<double> p;  // one value per grid point
  double auc = 0.0;
  int wilcoxon_group = 0;  // methods not statistically separated share a group
};

enum class Metric { Rrmse, FitSeconds };

// Appendix-style profiles: a dataset is a (name, train size) pair, an
// experiment is a replicate; scores of +inf drop out of both index sets.
// Methods come back sorted by AUC descending.
std::vector<PerformanceProfile> performance_profiles(const std::vector<ExperimentRecord>& records,
                                                     Metric metric = Metric::Rrmse);

struct WilcoxonResult {
  double p_value = 1.0;
  double statistic = 0.0;  // signed-rank sum of positive differences
  int n_nonzero = 0;
  bool all_ties = false;
};

// One-sided signed-rank test of "a < b" on paired scores. Exact null
// distribution (average ranks) for up to 25 nonzero differences, normal
// approximation with continuity and tie corrections beyond.
WilcoxonResult wilcoxon_one_sided(const std::vector<double>& a, const std::vector<double>& b);

struct ParetoPoint {
  std::string method;
  double auc_time = 0.0;
  double auc_rrmse = 0.0;
  bool on_front = false;
};

// Per-method (time AUC, RRMSE AUC) with standard nondominated flags; both
// coordinates are maximized.
std::vector<ParetoPoint> pareto_points(const std::vector<ExperimentRecord>& records);

// ---- suite configuration ---------------------------------------------------

struct SuiteConfig {
  int replicates = 50;
  std::string records_name = "records.csv";
  int jobs = 1;
  optimize::Mode mode = optimize::Mode::Long;
  int n_restarts = 96;
  int max_fun_evals = 0;  // 0 = per-mode formula
  int max_iters = 0;
  double tolerance = 0.0;
  std::vector<std::string> dataset_names;
  std::vector<int> sizes;  // samples per level (tuple)
  std::vector<std::string> methods;
  std::optional<std::uint64_t> base_seed_override;  // CATGP_SEED

  void validate() const;
};

SuiteConfig default_suite_config();
SuiteConfig parse_config_file(const std::string& path);

// All method identifiers accepted by the harness.
std::vector<std::string> known_methods();

struct MethodSpec {
  std::string name;
  bool no_cat = false;
  bool nested = false;
  kernels::Family family = kernels::Family::CS;
  int rank = 0;
  kernels::BlockKind between = kernels::BlockKind::CS;
  kernels::BlockKind within = kernels::BlockKind::CS;
  enum class Groups { True, MSD, LV } groups = Groups::True;
};

MethodSpec parse_method(const std::string& name);
bool method_applicable(const MethodSpec& method, const datasets::ProblemInfo& info);

// Kernel configuration of a method on a dataset; nested methods need one
// partition per categorical variable.
gp::GpConfig build_config(const MethodSpec& method, const std::vector<int>& level_counts,
                          const std::vector<GroupPartition>& partitions = {});

// ---- records I/O ------------------------------------------------------------

inline constexpr const char* kRecordsHeader =
    "method,dataset,train_size,replicate,rrmse,fit_seconds,n_params,opt_mode,status";

std::vector<ExperimentRecord> read_records(const std::string& path);
void write_records(const std::string& path, const std::vector<ExperimentRecord>& records);
std::string record_to_csv(const ExperimentRecord& r);

// ---- running ----------------------------------------------------------------

struct SingleFitResult {
  ExperimentRecord record;
  std::vector<GroupPartition> partitions;  // populated for nested methods
};

// One (method, dataset, size, replicate) cell, end to end.
SingleFitResult run_single(const SuiteConfig& config, const MethodSpec& method,
                           datasets::Problem problem, int samples_per_level, int replicate);

// Runs the whole grid, appending to <out_dir>/<records_name> incrementally;
// existing rows are skipped so interrupted suites resume. Emits profile and
// Pareto aggregates afterwards. Returns all records (old and new).
std::vector<ExperimentRecord> run_suite(const SuiteConfig& config, const std::string& out_dir,
                                        const std::function<void(const ExperimentRecord&)>&
                                            on_record = {});

// profiles.csv/svg, auc.csv, pareto.csv/svg under out_dir.
void emit_aggregates(const std::vector<ExperimentRecord>& records, const std::string& out_dir);

std::uint64_t method_seed(std::uint64_t replicate_seed, const std::string& method);

}  // namespace catgp::bench

#endif
