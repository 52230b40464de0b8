#ifndef CATGP_OPTIMIZE_HPP
#define CATGP_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "types.hpp"

namespace catgp::optimize {

enum class Mode { Short, Long };
enum class Termination { Tolerance, MaxIters, MaxEvals, Failure };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);
std::string termination_name(Termination t);

// The two published control-parameter settings:
//   short: default-style caps, 15000 objective evaluations, ftol 1e-9;
//   long:  3000 iterations, 3000*(n_params+1+20) evaluations, ftol 1e-10,
//          20 line-search steps.
struct OptSettings {
  Mode mode = Mode::Long;
  int max_fun_evals = 15000;
  int max_iters = 15000;
  double tolerance = 1e-9;
  int line_search_steps = 20;
  int n_restarts = 96;
  double pg_tolerance = 1e-5;  // secondary stop on the projected gradient
  int history = 10;            // limited-memory pairs

  static OptSettings short_mode();
  static OptSettings long_mode(int n_params);
  // Builds settings for a mode with optional cap/tolerance overrides
  // (values <= 0 mean "use the mode's default").
  static OptSettings resolve(Mode mode, int n_params, int max_fun_evals_override = 0,
                             int max_iters_override = 0, double tolerance_override = 0.0,
                             int n_restarts = 96);
};

struct OptResult {
  VectorXd x_best;
  double f_best = 0.0;
  long long n_evals = 0;
  int n_iters = 0;
  bool converged = false;
  Termination termination = Termination::Failure;
};

using Objective = std::function<double(const VectorXd&)>;

// Forward finite differences with step sqrt(eps)*max(|x_i|,1); switches to a
// backward difference when the probe would leave the box. Throws
// std::runtime_error when a probe is non-finite.
VectorXd finite_diff_grad(const Objective& f, const VectorXd& x, const VectorXd& lower,
                          const VectorXd& upper);

// Limited-memory BFGS with gradient projection onto the box and an Armijo
// backtracking line search. Every objective call (finite-difference probes
// included) counts toward max_fun_evals.
OptResult bounded_quasi_newton(const Objective& f, const VectorXd& x0, const VectorXd& lower,
                               const VectorXd& upper, const OptSettings& settings);

// Plain Latin hypercube on [0,1]^dim, one point per bin and coordinate.
MatrixXd latin_hypercube(int n, int dim, std::uint64_t seed);

// In-place maximin improvement of a unit-cube design: random column swaps
// between points (which preserve the Latin property), kept only when the
// minimum pairwise distance strictly increases. Fixed budget of 200 tries.
void maximin_improve(MatrixXd& unit_points, std::uint64_t seed);

// Latin hypercube in the box whose minimum pairwise distance (unit-cube
// scale) is improved by a fixed budget of point exchanges.
MatrixXd maximin_lhs(int n, int dim, const VectorXd& lower, const VectorXd& upper,
                     std::uint64_t seed);

struct MultistartResult {
  OptResult best;
  int n_failed = 0;
  int best_index = -1;
  long long total_evals = 0;
};

// Runs bounded_quasi_newton from n_restarts maximin-LHS points; failed
// restarts (non-finite objective) are skipped and counted. Ties on the
// objective break toward the lowest restart index. Throws when every
// restart fails.
MultistartResult multistart(const Objective& f, const VectorXd& lower, const VectorXd& upper,
                            const OptSettings& settings, std::uint64_t seed);

}  // namespace catgp::optimize

#endif
