#pragma once

// Closed-form machinery for the trine measurement. Any extension of the
// trine reduces to the outcome states ρ_μ = (2/3)|β̂_μ⟩⟨β̂_μ| + (p/3)|0⟩⟨0|
// + ((1−p)/6)·I for a direction |0⟩ and mixing p ∈ [0, 1]; with p = 1 and
// |0⟩ in the trine's Bloch plane at angle θ the average entropy is
//   E(θ) = (1/3) Σ_{k=−1,0,1} f(cos(θ + 2kπ/3)),
//   f(z) = H(1/2 + √(4z+5)/6).

#include "naimark_lab/povm.hpp"

#include <functional>
#include <numbers>

namespace naimark_lab {

/// f(z) = H(1/2 + √(4z + 5)/6), defined for −1.25 ≤ z ≤ 1.
inline double f_curve(double z) {
  if (!(z >= -1.25 && z <= 1.0 + 1e-12)) throw std::domain_error("f_curve: z outside [-1.25, 1]");
  return binary_entropy(0.5 + std::sqrt(std::max(4.0 * z + 5.0, 0.0)) / 6.0);
}

inline double trine_E_theta(double theta) {
  double total = 0.0;
  for (int k = -1; k <= 1; ++k) {
    total += f_curve(std::cos(theta + 2.0 * k * std::numbers::pi / 3.0));
  }
  return total / 3.0;
}

/// (2/3)·H((1 − 1/√3)/2) ≈ 0.4960050 ebits.
inline double trine_cost_exact() {
  return 2.0 / 3.0 * binary_entropy(0.5 * (1.0 - 1.0 / std::sqrt(3.0)));
}

struct TrineCurve {
  std::vector<double> thetas;
  std::vector<double> values;
};

/// E(θ) at grid + 1 equally spaced points of [lo, hi].
inline TrineCurve trine_curve(int grid, double lo = 0.0, double hi = std::numbers::pi / 3.0) {
  if (grid < 1) throw ValidationError("trine_curve: grid must be positive");
  TrineCurve c;
  c.thetas.reserve(static_cast<size_t>(grid) + 1);
  for (int i = 0; i <= grid; ++i) {
    const double theta = lo + (hi - lo) * i / grid;
    c.thetas.push_back(theta);
    c.values.push_back(trine_E_theta(theta));
  }
  return c;
}

struct DerivativeScan {
  bool nondecreasing = false;  // E′ ≥ −tol everywhere
  bool nonincreasing = false;  // E′ ≤ tol everywhere
  bool monotone = false;
  double min_at = 0.0;         // grid argmin of E
  double min_value = 0.0;
  double min_derivative = 0.0;
  double max_derivative = 0.0;
};

/// Central-difference E′ on grid + 1 points of [0, π/3]. Derivatives count
/// as zero within 1e-9.
inline DerivativeScan derivative_sign_scan(int grid_points) {
  if (grid_points < 100) throw ValidationError("derivative_sign_scan: need at least 100 points");
  constexpr double h = 1e-5;
  constexpr double tol = 1e-9;
  const TrineCurve curve = trine_curve(grid_points);
  DerivativeScan scan;
  scan.min_derivative = std::numeric_limits<double>::infinity();
  scan.max_derivative = -std::numeric_limits<double>::infinity();
  scan.min_value = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < curve.thetas.size(); ++i) {
    const double theta = curve.thetas[i];
    const double deriv = (trine_E_theta(theta + h) - trine_E_theta(theta - h)) / (2.0 * h);
    scan.min_derivative = std::min(scan.min_derivative, deriv);
    scan.max_derivative = std::max(scan.max_derivative, deriv);
    if (curve.values[i] < scan.min_value) {
      scan.min_value = curve.values[i];
      scan.min_at = theta;
    }
  }
  scan.nondecreasing = scan.min_derivative >= -tol;
  scan.nonincreasing = scan.max_derivative <= tol;
  scan.monotone = scan.nondecreasing || scan.nonincreasing;
  return scan;
}

struct ConcavityReport {
  bool is_concave = false;
  double worst_violation = 0.0;        // largest second difference over both grids
  double worst_sqrt_form = 0.0;        // x ↦ H[(1 − √x)/2] on [0, 1]
  double worst_f = 0.0;                // f on [−1, 1]
  double worst_chord_violation = 0.0;  // max of mean-of-ends − value-at-midpoint
};

namespace detail {

inline double max_second_difference(const std::function<double(double)>& g, double lo, double hi,
                                    int samples) {
  const double step = (hi - lo) / (samples - 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < samples; ++i) {
    const double x = lo + step * i;
    worst = std::max(worst, g(x + step) - 2.0 * g(x) + g(x - step));
  }
  return worst;
}

}  // namespace detail

inline double sqrt_form_entropy(double x) {
  return binary_entropy(0.5 * (1.0 - std::sqrt(std::clamp(x, 0.0, 1.0))));
}

/// Second differences of x ↦ H[(1 − √x)/2] on [0, 1] and of f on [−1, 1],
/// each on `samples` points, must stay ≤ 1e-10. Also checks `samples`
/// random chords of the first function (fixed seed).
inline ConcavityReport concavity_check(int samples) {
  if (samples < 100) throw ValidationError("concavity_check: need at least 100 samples");
  ConcavityReport r;
  r.worst_sqrt_form = detail::max_second_difference(sqrt_form_entropy, 0.0, 1.0, samples);
  r.worst_f = detail::max_second_difference(f_curve, -1.0, 1.0, samples);
  r.worst_violation = std::max(r.worst_sqrt_form, r.worst_f);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  r.worst_chord_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double a = unit(rng);
    const double b = unit(rng);
    const double gap = 0.5 * (sqrt_form_entropy(a) + sqrt_form_entropy(b)) - sqrt_form_entropy(0.5 * (a + b));
    r.worst_chord_violation = std::max(r.worst_chord_violation, gap);
  }
  r.is_concave = r.worst_violation <= 1e-10 && r.worst_chord_violation <= 1e-12;
  return r;
}

/// Normalized trine directions |β̂_μ⟩, μ = 1, 2, 3.
inline ComplexVector trine_direction(int mu) {
  const double angle = mu * std::numbers::pi / 3.0;
  ComplexVector b(2);
  b << -std::sin(angle), std::cos(angle);
  return b;
}

/// cos(polar/2)|0⟩ + e^{i·azimuth} sin(polar/2)|1⟩. The trine directions
/// are real, so their Bloch plane is azimuth ∈ {0, π}.
inline ComplexVector bloch_state(double polar, double azimuth) {
  ComplexVector v(2);
  v << std::cos(0.5 * polar), std::polar(1.0, azimuth) * std::sin(0.5 * polar);
  return v;
}

/// ρ_μ = (2/3)|β̂_μ⟩⟨β̂_μ| + (p/3)|z⟩⟨z| + ((1 − p)/6)·I.
inline ComplexMatrix trine_outcome_state(int mu, double p, const ComplexVector& z) {
  const ComplexVector b = trine_direction(mu);
  return (2.0 / 3.0) * b * b.adjoint() + (p / 3.0) * z * z.adjoint() +
         ((1.0 - p) / 6.0) * ComplexMatrix::Identity(2, 2);
}

/// Eigenvalues 1/2 ± √(4p_z + 5)/6 of ρ_μ at p = 1, descending, where
/// p_z = 2|⟨z|β̂_μ⟩|² − 1.
inline std::pair<double, double> trine_outcome_eigenvalues(double p_z) {
  const double r = std::sqrt(std::max(4.0 * p_z + 5.0, 0.0)) / 6.0;
  return {0.5 + r, 0.5 - r};
}

/// (1/3) Σ_μ S(ρ_μ) for mixing p and direction |z⟩.
inline double trine_average_entropy(double p, const ComplexVector& z) {
  double total = 0.0;
  for (int mu = 1; mu <= 3; ++mu) {
    total += von_neumann_entropy(DensityMatrix(trine_outcome_state(mu, p, z)));
  }
  return total / 3.0;
}

struct MixingScan {
  double min_value = 0.0;  // over all scanned (p, polar, azimuth)
  double min_p = 0.0;
  double p1_min_value = 0.0;  // over the p = 1 slice
};

/// Coarse scan over p ∈ [0, 1] and directions |z⟩ on the Bloch sphere.
/// Checks empirically that restricting to p = 1 loses nothing.
inline MixingScan trine_mixing_scan(int p_steps, int angle_steps) {
  if (p_steps < 1 || angle_steps < 1) throw ValidationError("trine_mixing_scan: steps must be positive");
  MixingScan scan;
  scan.min_value = std::numeric_limits<double>::infinity();
  scan.p1_min_value = std::numeric_limits<double>::infinity();
  for (int ip = 0; ip <= p_steps; ++ip) {
    const double p = static_cast<double>(ip) / p_steps;
    for (int ia = 0; ia <= angle_steps; ++ia) {
      const double polar = std::numbers::pi * ia / angle_steps;
      for (int ib = 0; ib < 2 * angle_steps; ++ib) {
        const double azimuth = std::numbers::pi * ib / angle_steps;
        const double v = trine_average_entropy(p, bloch_state(polar, azimuth));
        if (v < scan.min_value) {
          scan.min_value = v;
          scan.min_p = p;
        }
        if (ip == p_steps) scan.p1_min_value = std::min(scan.p1_min_value, v);
      }
    }
  }
  return scan;
}

}  // namespace naimark_lab
