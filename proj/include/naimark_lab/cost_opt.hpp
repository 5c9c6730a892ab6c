#pragma once

// Upper estimates of the minimal entanglement cost E_min(M).
//
// The completion freedom V ∈ U(de − d) is parameterized as V = V₀·exp(S)
// with S skew-Hermitian built from (de − d)² real numbers. Independent
// local searches (Nelder-Mead, or finite-difference gradient descent for
// large parameter counts) run from deterministic starting points and the
// smallest value wins. Results are upper bounds on E_min, never certified
// minima.

#include "naimark_lab/naimark.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>

namespace naimark_lab {

enum class LocalMethod { automatic, nelder_mead, finite_diff_gradient_descent };

inline const char* to_string(LocalMethod m) {
  switch (m) {
    case LocalMethod::automatic: return "automatic";
    case LocalMethod::nelder_mead: return "nelder_mead";
    case LocalMethod::finite_diff_gradient_descent: return "finite_diff_gradient_descent";
  }
  return "?";
}

struct OptimizerConfig {
  int restarts = 20;
  int max_iters = 2000;
  double objective_tol = 1e-8;
  double step_tol = 1e-10;
  std::uint64_t seed = 0;
  LocalMethod method = LocalMethod::automatic;
  // Adds one start at the ζ-construction extension (see prop5_extension)
  // when the ancilla is large enough to hold it.
  bool warm_start = true;
  // 0 = hardware concurrency.
  unsigned threads = 0;

  void check() const {
    if (restarts < 1 || max_iters < 1 || !(objective_tol > 0.0) || !(step_tol > 0.0)) {
      throw ValidationError("OptimizerConfig: counts and tolerances must be positive");
    }
  }
};

/// Parameters above which the automatic method switches to gradient descent.
inline constexpr int kNelderMeadMaxParams = 36;

// ----------------------------------------------------------------------------
// Parameterization

/// S from n² reals: n imaginary diagonal entries, then (re, im) of each
/// strictly upper entry in row-major order; the lower triangle is −conj.
inline ComplexMatrix skew_from_params(std::span<const double> params, int n) {
  if (params.size() != static_cast<size_t>(n) * static_cast<size_t>(n)) {
    throw DimensionError("skew_from_params: expected n^2 parameters");
  }
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  size_t k = 0;
  for (int i = 0; i < n; ++i) s(i, i) = Complex(0.0, params[k++]);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex z(params[k], params[k + 1]);
      k += 2;
      s(i, j) = z;
      s(j, i) = -std::conj(z);
    }
  }
  return s;
}

/// Cost of the extension with completion C·V₀·exp(S(params)), weights q_μ.
/// Only the m cost-bearing rows are formed.
class CompletionObjective {
 public:
  CompletionObjective(const Povm& p, int e)
      : frame_(p, e), weights_(canonical_distribution(p)) {
    const int n = frame_.completion_dim();
    base_ = ComplexMatrix::Identity(n, n);
    top_completion_ = frame_.completion().topRows(p.size());
  }

  const ExtensionFrame& frame() const { return frame_; }
  int completion_dim() const { return frame_.completion_dim(); }
  size_t param_count() const {
    const auto n = static_cast<size_t>(completion_dim());
    return n * n;
  }

  void set_base(ComplexMatrix v0) {
    base_ = std::move(v0);
    top_completion_ = frame_.completion().topRows(frame_.povm().size()) * base_;
  }
  const ComplexMatrix& base() const { return base_; }

  ComplexMatrix unitary(std::span<const double> params) const {
    return base_ * unitary_from_skew(skew_from_params(params, completion_dim()));
  }

  double operator()(std::span<const double> params) const {
    const Povm& p = frame_.povm();
    const int d = p.dim();
    const int e = frame_.e();
    const int n = completion_dim();
    ComplexMatrix tail;
    if (n > 0) {
      tail = top_completion_ * unitary_from_skew(skew_from_params(params, n));
    }
    double total = 0.0;
    ComplexVector row(static_cast<Eigen::Index>(d) * e);
    for (int nu = 0; nu < p.size(); ++nu) {
      const double q = weights_[static_cast<size_t>(nu)];
      if (q <= 0.0) continue;
      row.head(d) = p.rows().row(nu).transpose();
      if (n > 0) row.tail(n) = tail.row(nu).transpose();
      total += q * entanglement_entropy(row, d, e);
    }
    return total;
  }

  NaimarkExtension extension(std::span<const double> params) const {
    if (completion_dim() == 0) return frame_.default_extension();
    return frame_.with_completion(unitary(params));
  }

 private:
  ExtensionFrame frame_;
  OutcomeDistribution weights_;
  ComplexMatrix base_;
  ComplexMatrix top_completion_;
};

/// Extension cost at V = exp(S(params)) on the default completion.
inline double objective(const Povm& p, int e, std::span<const double> params) {
  const CompletionObjective f(p, e);
  if (params.size() != f.param_count()) {
    throw DimensionError("objective: expected " + std::to_string(f.param_count()) +
                         " parameters, got " + std::to_string(params.size()));
  }
  return f(params);
}

// ----------------------------------------------------------------------------
// Local searches

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct LocalResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead with dimension-adaptive coefficients. On convergence the
/// simplex is rebuilt around the best vertex and the search continues while
/// the rebuild still improves the value by more than ftol.
inline LocalResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0, double initial_step,
                               int max_iters, double ftol, double xtol) {
  const size_t n = x0.size();
  LocalResult result;
  if (n == 0) {
    result.value = f(x0);
    result.x = std::move(x0);
    result.converged = true;
    return result;
  }
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / dn;
  const double rho = 0.75 - 1.0 / (2.0 * dn);
  const double sigma = 1.0 - 1.0 / dn;

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  auto build = [&](const std::vector<double>& centre, double step) {
    simplex.assign(n + 1, centre);
    for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    for (size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
  };

  std::vector<size_t> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> v2(n + 1);
    for (size_t i = 0; i <= n; ++i) {
      s2[i] = std::move(simplex[order[i]]);
      v2[i] = values[order[i]];
    }
    simplex.swap(s2);
    values.swap(v2);
  };

  build(x0, initial_step);
  double step = initial_step;
  double last_converged = std::numeric_limits<double>::infinity();
  std::vector<double> centroid(n), trial(n), trial2(n);
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    sort_simplex();
    double diameter = 0.0;
    for (size_t i = 1; i <= n; ++i) {
      for (size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[0][k]));
      }
    }
    if (values[n] - values[0] <= ftol || diameter <= xtol) {
      if (last_converged - values[0] <= ftol) {
        result.converged = true;
        break;
      }
      last_converged = values[0];
      step = std::max(0.1 * step, 1e-3);
      build(simplex[0], step);
      continue;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= dn;

    for (size_t k = 0; k < n; ++k) trial[k] = centroid[k] + alpha * (centroid[k] - simplex[n][k]);
    const double fr = f(trial);
    if (fr < values[0]) {
      for (size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + gamma * (trial[k] - centroid[k]);
      const double fe = f(trial2);
      if (fe < fr) {
        simplex[n] = trial2;
        values[n] = fe;
      } else {
        simplex[n] = trial;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = trial;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    for (size_t k = 0; k < n; ++k) {
      trial2[k] = outside ? centroid[k] + rho * (trial[k] - centroid[k])
                          : centroid[k] + rho * (simplex[n][k] - centroid[k]);
    }
    const double fc = f(trial2);
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = trial2;
      values[n] = fc;
      continue;
    }
    for (size_t i = 1; i <= n; ++i) {
      for (size_t k = 0; k < n; ++k) {
        simplex[i][k] = simplex[0][k] + sigma * (simplex[i][k] - simplex[0][k]);
      }
      values[i] = f(simplex[i]);
    }
  }
  sort_simplex();
  result.x = simplex[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

/// Quasi-Newton descent on central-difference gradients (h = 1e-5): BFGS
/// inverse-Hessian updates, Armijo backtracking, reset to steepest descent
/// whenever the update stops producing a descent direction.
inline LocalResult gradient_descent(const ObjectiveFn& f, std::vector<double> x0, int max_iters,
                                    double ftol, double xtol) {
  constexpr double h = 1e-5;
  const auto n = static_cast<Eigen::Index>(x0.size());
  LocalResult result;
  result.x = std::move(x0);
  result.value = f(result.x);
  if (n == 0) {
    result.converged = true;
    return result;
  }
  std::vector<double> probe(result.x);
  auto gradient = [&](const Eigen::VectorXd& at) {
    Eigen::VectorXd g(n);
    for (Eigen::Index k = 0; k < n; ++k) probe[static_cast<size_t>(k)] = at(k);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<size_t>(k);
      probe[i] = at(k) + h;
      const double up = f(probe);
      probe[i] = at(k) - h;
      const double down = f(probe);
      probe[i] = at(k);
      g(k) = (up - down) / (2.0 * h);
    }
    return g;
  };

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(result.x.data(), n);
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> trial(static_cast<size_t>(n));
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    if (g.norm() <= ftol) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_hessian * g;
    if (dir.dot(g) >= 0.0) {
      inv_hessian.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    double fnew = result.value;
    bool accepted = false;
    Eigen::VectorXd xnew;
    while (step * dir.norm() > xtol) {
      xnew = x + step * dir;
      for (Eigen::Index k = 0; k < n; ++k) trial[static_cast<size_t>(k)] = xnew(k);
      fnew = f(trial);
      if (fnew <= result.value + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const Eigen::VectorXd gnew = gradient(xnew);
    const Eigen::VectorXd s = xnew - x;
    const Eigen::VectorXd y = gnew - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      // (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ, expanded
      inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                     rho * (hy * s.transpose() + s * hy.transpose());
    }
    const double gain = result.value - fnew;
    x = xnew;
    g = gnew;
    result.value = fnew;
    if (gain <= 1e-2 * ftol && iter > 5) {
      result.converged = true;
      break;
    }
  }
  result.x.assign(x.data(), x.data() + n);
  result.iterations = iter;
  return result;
}

// ----------------------------------------------------------------------------
// ζ search for the warm start

/// ζ from 2d reals (normalized; the zero vector maps to |0⟩).
inline ComplexVector zeta_from_params(std::span<const double> x, int d) {
  ComplexVector z(d);
  for (int j = 0; j < d; ++j) z(j) = Complex(x[2 * j], x[2 * j + 1]);
  const double n = z.norm();
  if (n == 0.0) {
    z.setZero();
    z(0) = 1.0;
    return z;
  }
  return z / n;
}

/// Locally minimizes prop5_cost over ζ starting from the best of the
/// element directions k̂_μ and `samples` Haar-random states.
inline ComplexVector optimize_zeta(const Povm& p, int samples, std::uint64_t seed) {
  const int d = p.dim();
  std::vector<ComplexVector> candidates;
  for (int mu = 0; mu < p.size(); ++mu) {
    if (p.norm2(mu) >= kZeroNorm2) candidates.push_back(p.direction(mu));
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) candidates.push_back(random_unitary(d, rng).col(0));
  ComplexVector best = candidates.front();
  double best_value = prop5_cost(p, best);
  for (const auto& z : candidates) {
    const double v = prop5_cost(p, z);
    if (v < best_value) {
      best_value = v;
      best = z;
    }
  }
  std::vector<double> x0(2 * static_cast<size_t>(d));
  for (int j = 0; j < d; ++j) {
    x0[2 * j] = best(j).real();
    x0[2 * j + 1] = best(j).imag();
  }
  const ObjectiveFn f = [&](std::span<const double> x) { return prop5_cost(p, zeta_from_params(x, d)); };
  const LocalResult r = nelder_mead(f, x0, 0.1, 400, 1e-12, 1e-12);
  return r.value < best_value ? zeta_from_params(r.x, d) : best;
}

// ----------------------------------------------------------------------------
// Multi-restart driver

struct CostReport {
  int e_used = 0;
  double best_cost = 0.0;
  NaimarkExtension best_extension{1, 1, 0, ComplexMatrix::Identity(1, 1)};
  ExtensionCostBreakdown breakdown;
  int restarts_run = 0;
  bool converged = false;
  int best_restart = 0;
  std::vector<double> history;  // final value per restart
  LocalMethod method = LocalMethod::automatic;
};

namespace detail {

struct RestartOutcome {
  LocalResult local;
  ComplexMatrix base;
};

inline LocalMethod resolve_method(LocalMethod requested, size_t params) {
  if (requested != LocalMethod::automatic) return requested;
  return params <= static_cast<size_t>(kNelderMeadMaxParams) ? LocalMethod::nelder_mead
                                                             : LocalMethod::finite_diff_gradient_descent;
}

}  // namespace detail

/// Multi-restart minimization at a fixed ancilla dimension.
///
/// Restart 0 starts at params = 0 (the default completion). If warm_start is
/// set and the ζ construction fits in the ancilla, restart 1 starts at that
/// extension. Remaining restarts start at N(0, 0.5²) parameters drawn from a
/// generator seeded with seed + restart index. Ties go to the lowest index,
/// so the result does not depend on the thread count.
inline CostReport minimize(const Povm& p, int e, const OptimizerConfig& cfg) {
  cfg.check();
  detail::require_valid_povm(p, "minimize");
  detail::require_capacity(p, e, "minimize");

  const CompletionObjective identity_objective(p, e);
  const size_t nparams = identity_objective.param_count();
  const LocalMethod method = detail::resolve_method(cfg.method, nparams);

  std::optional<ComplexMatrix> warm_base;
  if (cfg.warm_start && cfg.restarts >= 2 && nparams > 0 && e >= prop5_min_ancilla(p)) {
    const ComplexVector zeta = optimize_zeta(p, 16, cfg.seed);
    const Prop5Result warm = prop5_extension(p, zeta, e);
    warm_base = identity_objective.frame().completion_of(warm.extension);
  }

  auto run_one = [&](int index) {
    CompletionObjective f = identity_objective;
    std::vector<double> x0(nparams, 0.0);
    if (index == 1 && warm_base) {
      f.set_base(*warm_base);
    } else if (index > 0) {
      std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(index));
      std::normal_distribution<double> normal(0.0, 0.5);
      for (double& x : x0) x = normal(rng);
    }
    const ObjectiveFn fn = [&f](std::span<const double> x) { return f(x); };
    detail::RestartOutcome out;
    if (method == LocalMethod::nelder_mead) {
      out.local = nelder_mead(fn, x0, 0.5, cfg.max_iters, cfg.objective_tol, cfg.step_tol);
      // The simplex stalls in the flat valleys around product extensions.
      LocalResult polished = gradient_descent(fn, out.local.x, std::min(200, cfg.max_iters),
                                              cfg.objective_tol, cfg.step_tol);
      if (polished.value < out.local.value) {
        polished.converged = polished.converged || out.local.converged;
        out.local = std::move(polished);
      }
    } else {
      out.local = gradient_descent(fn, x0, cfg.max_iters, cfg.objective_tol, cfg.step_tol);
    }
    out.base = f.base();
    return out;
  };

  std::vector<detail::RestartOutcome> outcomes(static_cast<size_t>(cfg.restarts));
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.restarts));
  if (threads <= 1) {
    for (int i = 0; i < cfg.restarts; ++i) outcomes[static_cast<size_t>(i)] = run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (int i = next++; i < cfg.restarts; i = next++) {
          try {
            outcomes[static_cast<size_t>(i)] = run_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  CostReport report;
  report.e_used = e;
  report.restarts_run = cfg.restarts;
  report.method = method;
  for (int i = 0; i < cfg.restarts; ++i) {
    const double v = outcomes[static_cast<size_t>(i)].local.value;
    report.history.push_back(v);
    if (v < report.history[static_cast<size_t>(report.best_restart)]) report.best_restart = i;
  }
  const auto& best = outcomes[static_cast<size_t>(report.best_restart)];
  CompletionObjective f = identity_objective;
  f.set_base(best.base);
  report.best_extension = f.extension(best.local.x);
  report.breakdown = extension_cost(report.best_extension, canonical_distribution(p));
  report.best_cost = report.breakdown.total;
  report.converged = best.local.converged;
  return report;
}

/// Sweeps e ∈ [e_min, e_max] (0 selects the defaults ⌈m/d⌉ and m + 1) and
/// keeps the smallest best_cost; ties keep the smaller e.
inline CostReport minimize_over_e(const Povm& p, int e_min, int e_max, const OptimizerConfig& cfg) {
  const int d = p.dim();
  const int m = p.size();
  const int floor_e = std::max(1, (m + d - 1) / d);
  if (e_min == 0) e_min = floor_e;
  if (e_max == 0) e_max = std::max(e_min, m + 1);
  if (e_min < floor_e || e_max < e_min || e_max > m * d) {
    throw ValidationError("minimize_over_e: need ceil(m/d) <= e_min <= e_max <= m*d");
  }
  std::optional<CostReport> best;
  for (int e = e_min; e <= e_max; ++e) {
    CostReport r = minimize(p, e, cfg);
    if (!best || r.best_cost < best->best_cost) best = std::move(r);
  }
  return *best;
}

/// F(M) = E / log₂ d.
inline double normalized_cost(const CostReport& report, int d) {
  if (d < 2) throw DimensionError("normalized_cost: d must be at least 2");
  return report.best_cost / std::log2(static_cast<double>(d));
}

}  // namespace naimark_lab
