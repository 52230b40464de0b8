#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "rng.hpp"

namespace catgp::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kFdStep = std::sqrt(std::numeric_limits<double>::epsilon());
constexpr double kArmijoC1 = 1e-4;

struct EvalBudgetExhausted {};
struct InfiniteProbe {};

class CountedObjective {
 public:
  CountedObjective(const Objective& f, int max_evals) : f_(f), max_evals_(max_evals) {}

  double operator()(const VectorXd& x) {
    if (n_evals_ >= max_evals_) throw EvalBudgetExhausted{};
    ++n_evals_;
    return f_(x);
  }

  long long count() const { return n_evals_; }

 private:
  const Objective& f_;
  long long max_evals_;
  long long n_evals_ = 0;
};

// Forward difference, backward at the upper bound. Probes outside the box
// are never taken; non-finite probes abort the restart.
VectorXd fd_gradient(CountedObjective& f, const VectorXd& x, double fx, const VectorXd& lower,
                     const VectorXd& upper) {
  const Eigen::Index n = x.size();
  VectorXd g(n);
  VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = kFdStep * std::max(std::abs(x[i]), 1.0);
    const bool backward = x[i] + h > upper[i];
    const double step = backward ? -h : h;
    probe[i] = x[i] + step;
    const double fp = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp)) throw InfiniteProbe{};
    g[i] = (fp - fx) / step;
  }
  return g;
}

VectorXd clamp_to_box(const VectorXd& x, const VectorXd& lower, const VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient with components pointing out of the box zeroed at active bounds.
VectorXd projected_gradient(const VectorXd& x, const VectorXd& g, const VectorXd& lower,
                            const VectorXd& upper) {
  VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= lower[i] && g[i] > 0.0) pg[i] = 0.0;
    if (x[i] >= upper[i] && g[i] < 0.0) pg[i] = 0.0;
  }
  return pg;
}

}  // namespace

std::string mode_name(Mode m) { return m == Mode::Short ? "short" : "long"; }

Mode mode_from_name(const std::string& name) {
  if (name == "short") return Mode::Short;
  if (name == "long") return Mode::Long;
  throw std::invalid_argument("unknown optimizer mode: " + name);
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIters: return "max_iters";
    case Termination::MaxEvals: return "max_evals";
    case Termination::Failure: return "failure";
  }
  return "?";
}

OptSettings OptSettings::short_mode() {
  OptSettings s;
  s.mode = Mode::Short;
  s.max_fun_evals = 15000;
  s.max_iters = 15000;
  s.tolerance = 1e-9;
  s.line_search_steps = 20;
  return s;
}

OptSettings OptSettings::long_mode(int n_params) {
  OptSettings s;
  s.mode = Mode::Long;
  s.max_iters = 3000;
  s.line_search_steps = 20;
  s.max_fun_evals = 3000 * (n_params + 1 + s.line_search_steps);
  s.tolerance = 1e-10;
  return s;
}

OptSettings OptSettings::resolve(Mode mode, int n_params, int max_fun_evals_override,
                                 int max_iters_override, double tolerance_override,
                                 int n_restarts) {
  OptSettings s = (mode == Mode::Short) ? short_mode() : long_mode(n_params);
  if (max_fun_evals_override > 0) s.max_fun_evals = max_fun_evals_override;
  if (max_iters_override > 0) s.max_iters = max_iters_override;
  if (tolerance_override > 0.0) s.tolerance = tolerance_override;
  s.n_restarts = n_restarts;
  return s;
}

VectorXd finite_diff_grad(const Objective& f, const VectorXd& x, const VectorXd& lower,
                          const VectorXd& upper) {
  CountedObjective counted(f, std::numeric_limits<int>::max());
  const double fx = counted(x);
  if (!std::isfinite(fx)) throw std::runtime_error("finite_diff_grad: objective not finite at x");
  try {
    return fd_gradient(counted, x, fx, lower, upper);
  } catch (const InfiniteProbe&) {
    throw std::runtime_error("finite_diff_grad: non-finite objective at a probe point");
  }
}

OptResult bounded_quasi_newton(const Objective& f, const VectorXd& x0, const VectorXd& lower,
                               const VectorXd& upper, const OptSettings& settings) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("bounded_quasi_newton: bound dimension mismatch");
  if (((x0 - lower).array() < -1e-12).any() || ((upper - x0).array() < -1e-12).any())
    throw std::invalid_argument("bounded_quasi_newton: start point outside the box");

  CountedObjective obj(f, settings.max_fun_evals);
  OptResult result;
  result.x_best = clamp_to_box(x0, lower, upper);
  result.f_best = kInf;
  result.termination = Termination::Failure;

  VectorXd x = result.x_best;
  double fx;
  try {
    fx = obj(x);
  } catch (const EvalBudgetExhausted&) {
    result.n_evals = obj.count();
    result.termination = Termination::MaxEvals;
    return result;
  }
  result.n_evals = obj.count();
  if (!std::isfinite(fx)) {
    result.termination = Termination::Failure;
    return result;
  }
  result.f_best = fx;
  result.x_best = x;

  std::deque<std::pair<VectorXd, VectorXd>> history;  // (s, y)
  VectorXd g;
  auto finish = [&](Termination t, bool converged) {
    result.n_evals = obj.count();
    result.termination = t;
    result.converged = converged;
    return result;
  };

  try {
    g = fd_gradient(obj, x, fx, lower, upper);
  } catch (const EvalBudgetExhausted&) {
    return finish(Termination::MaxEvals, false);
  } catch (const InfiniteProbe&) {
    return finish(Termination::Failure, false);
  }

  try {
    for (int iter = 0; iter < settings.max_iters; ++iter) {
      const VectorXd pg = projected_gradient(x, g, lower, upper);
      if (pg.lpNorm<Eigen::Infinity>() <= settings.pg_tolerance) {
        result.n_iters = iter;
        return finish(Termination::Tolerance, true);
      }

      // Two-loop recursion on the projected gradient.
      VectorXd d = -pg;
      if (!history.empty()) {
        std::vector<double> alpha(history.size());
        for (std::size_t k = history.size(); k-- > 0;) {
          const auto& [s, yv] = history[k];
          const double rho = 1.0 / s.dot(yv);
          alpha[k] = rho * s.dot(d);
          d -= alpha[k] * yv;
        }
        const auto& [s_last, y_last] = history.back();
        d *= s_last.dot(y_last) / y_last.squaredNorm();
        for (std::size_t k = 0; k < history.size(); ++k) {
          const auto& [s, yv] = history[k];
          const double rho = 1.0 / s.dot(yv);
          const double beta = rho * yv.dot(d);
          d += (alpha[k] - beta) * s;
        }
        if (d.dot(g) >= 0.0) {  // not a descent direction; restart memory
          history.clear();
          d = -pg;
        }
      }

      // Backtracking Armijo with projection onto the box.
      auto line_search = [&](const VectorXd& dir, VectorXd& x_out, double& f_out) {
        double step = (history.empty() && result.n_iters == 0)
                          ? std::min(1.0, 1.0 / std::max(1.0, pg.lpNorm<Eigen::Infinity>()))
                          : 1.0;
        for (int t = 0; t < settings.line_search_steps; ++t, step *= 0.5) {
          const VectorXd cand = clamp_to_box(x + step * dir, lower, upper);
          const VectorXd delta = cand - x;
          if (delta.isZero(0.0)) continue;
          const double directional = g.dot(delta);
          if (directional >= 0.0) continue;
          const double fc = obj(cand);
          if (std::isfinite(fc) && fc <= fx + kArmijoC1 * directional) {
            x_out = cand;
            f_out = fc;
            return true;
          }
        }
        return false;
      };

      VectorXd x_new;
      double f_new = 0.0;
      bool accepted = line_search(d, x_new, f_new);
      if (!accepted && !history.empty()) {
        history.clear();
        accepted = line_search(-pg, x_new, f_new);
      }
      if (!accepted) {
        // No descent within the line-search budget: the objective no longer
        // decreases at this resolution, which the relative-decrease rule
        // treats as converged.
        result.n_iters = iter;
        return finish(Termination::Tolerance, true);
      }

      result.n_iters = iter + 1;
      const double decrease = fx - f_new;
      const double rel = decrease / std::max({std::abs(fx), std::abs(f_new), 1.0});

      VectorXd g_new;
      try {
        g_new = fd_gradient(obj, x_new, f_new, lower, upper);
      } catch (const EvalBudgetExhausted&) {
        x = x_new;
        fx = f_new;
        result.x_best = x;
        result.f_best = fx;
        return finish(Termination::MaxEvals, false);
      }

      const VectorXd s = x_new - x;
      const VectorXd yv = g_new - g;
      const double sy = s.dot(yv);
      if (sy > 1e-10 * s.norm() * yv.norm()) {
        history.emplace_back(s, yv);
        if (static_cast<int>(history.size()) > settings.history) history.pop_front();
      }

      x = x_new;
      fx = f_new;
      g = g_new;
      result.x_best = x;
      result.f_best = fx;

      if (rel <= settings.tolerance) return finish(Termination::Tolerance, true);
    }
  } catch (const EvalBudgetExhausted&) {
    return finish(Termination::MaxEvals, false);
  } catch (const InfiniteProbe&) {
    return finish(Termination::Failure, false);
  }
  return finish(Termination::MaxIters, false);
}

MatrixXd latin_hypercube(int n, int dim, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw std::invalid_argument("latin_hypercube: n and dim must be >= 1");
  Rng rng(seed);
  MatrixXd unit(n, dim);
  for (int k = 0; k < dim; ++k) {
    const std::vector<int> perm = rng.permutation(n);
    for (int i = 0; i < n; ++i)
      unit(i, k) = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
  }
  return unit;
}

void maximin_improve(MatrixXd& unit, std::uint64_t seed) {
  const int n = static_cast<int>(unit.rows());
  const int dim = static_cast<int>(unit.cols());
  if (n < 2) return;
  Rng rng(seed);
  auto min_pair = [&](int& pi, int& pj) {
    double best = kInf;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d2 = (unit.row(i) - unit.row(j)).squaredNorm();
        if (d2 < best) {
          best = d2;
          pi = i;
          pj = j;
        }
      }
    return best;
  };
  // Column swaps keep every marginal a permutation, so the Latin property
  // is preserved; only strictly improving swaps are kept.
  constexpr int kExchangeBudget = 200;
  int pi = 0, pj = 1;
  double current = min_pair(pi, pj);
  for (int it = 0; it < kExchangeBudget; ++it) {
    const int mover = rng.uniform() < 0.5 ? pi : pj;
    int partner = rng.index(n - 1);
    if (partner >= mover) ++partner;
    const int col = rng.index(dim);
    std::swap(unit(mover, col), unit(partner, col));
    int qi = 0, qj = 1;
    const double candidate = min_pair(qi, qj);
    if (candidate > current) {
      current = candidate;
      pi = qi;
      pj = qj;
    } else {
      std::swap(unit(mover, col), unit(partner, col));
    }
  }
}

MatrixXd maximin_lhs(int n, int dim, const VectorXd& lower, const VectorXd& upper,
                     std::uint64_t seed) {
  if (n < 1 || dim < 1) throw std::invalid_argument("maximin_lhs: n and dim must be >= 1");
  if (lower.size() != dim || upper.size() != dim)
    throw std::invalid_argument("maximin_lhs: bound dimension mismatch");
  if (((upper - lower).array() <= 0.0).any())
    throw std::invalid_argument("maximin_lhs: degenerate box");

  MatrixXd unit = latin_hypercube(n, dim, seed);
  maximin_improve(unit, mix_seed(seed, 0x6D61784DULL));

  MatrixXd points(n, dim);
  for (int k = 0; k < dim; ++k)
    points.col(k) = (lower[k] + (upper[k] - lower[k]) * unit.col(k).array()).matrix();
  return points;
}

MultistartResult multistart(const Objective& f, const VectorXd& lower, const VectorXd& upper,
                            const OptSettings& settings, std::uint64_t seed) {
  const int dim = static_cast<int>(lower.size());
  const MatrixXd starts = maximin_lhs(settings.n_restarts, dim, lower, upper, seed);
  MultistartResult out;
  out.best.f_best = kInf;
  for (int r = 0; r < settings.n_restarts; ++r) {
    OptResult res = bounded_quasi_newton(f, starts.row(r).transpose(), lower, upper, settings);
    out.total_evals += res.n_evals;
    if (!std::isfinite(res.f_best)) {
      ++out.n_failed;
      continue;
    }
    if (res.f_best < out.best.f_best) {
      out.best = res;
      out.best_index = r;
    }
  }
  if (out.best_index < 0) throw std::runtime_error("multistart: all restarts failed");
  out.best.n_evals = out.total_evals;
  return out;
}

}  // namespace catgp::optimize
