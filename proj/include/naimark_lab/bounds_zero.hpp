#pragma once

// Closed-form upper bounds on E_min, zero-cost certificates and the
// per-copy bound for n-fold tensor powers.

#include "naimark_lab/naimark.hpp"

#include <functional>

namespace naimark_lab {

/// 1 − 1/m.
inline double bound_element_count(const Povm& p) {
  return 1.0 - 1.0 / static_cast<double>(p.size());
}

/// H[(1 − 1/√d)/2], valid for every POVM in dimension d.
inline double bound_dimension(double d) {
  if (!(d >= 2.0)) throw DimensionError("bound_dimension: d must be at least 2");
  return binary_entropy(0.5 * (1.0 - 1.0 / std::sqrt(d)));
}

/// Cost of the ζ construction for a given normalized ζ.
inline double bound_prop5(const Povm& p, const ComplexVector& zeta) {
  return prop5_cost(p, zeta);
}

struct BoundResult {
  double value = 0.0;
  std::string witness;  // "1-1/m", "H[(1-1/sqrt d)/2]", "zeta=k_<μ>" or "zeta=random#<i>"
  double element_count = 0.0;
  double dimension = 0.0;
  double best_zeta = 0.0;
  std::string best_zeta_witness;
};

/// Minimum of 1 − 1/m, the dimension bound, and the ζ-construction cost at
/// every k̂_μ and `zeta_samples` Haar-random ζ. Ties keep the earlier
/// candidate in that order. Labels are 1-based.
inline BoundResult best_bound(const Povm& p, int zeta_samples, std::uint64_t seed) {
  BoundResult out;
  out.element_count = bound_element_count(p);
  out.dimension = p.dim() >= 2 ? bound_dimension(p.dim()) : 0.0;

  out.best_zeta = std::numeric_limits<double>::infinity();
  for (int mu = 0; mu < p.size(); ++mu) {
    if (p.norm2(mu) < kZeroNorm2) continue;
    const double v = bound_prop5(p, p.direction(mu));
    if (v < out.best_zeta) {
      out.best_zeta = v;
      out.best_zeta_witness = "zeta=k_" + std::to_string(mu + 1);
    }
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < zeta_samples; ++s) {
    const ComplexVector zeta = random_unitary(p.dim(), rng).col(0);
    const double v = bound_prop5(p, zeta);
    if (v < out.best_zeta) {
      out.best_zeta = v;
      out.best_zeta_witness = "zeta=random#" + std::to_string(s + 1);
    }
  }

  out.value = out.element_count;
  out.witness = "1-1/m";
  if (p.dim() >= 2 && out.dimension < out.value) {
    out.value = out.dimension;
    out.witness = "H[(1-1/sqrt d)/2]";
  }
  if (out.best_zeta < out.value) {
    out.value = out.best_zeta;
    out.witness = out.best_zeta_witness;
  }
  return out;
}

enum class ZeroCostDecision { zero, nonzero, inconclusive };

inline const char* to_string(ZeroCostDecision d) {
  switch (d) {
    case ZeroCostDecision::zero: return "ZERO";
    case ZeroCostDecision::nonzero: return "NONZERO";
    case ZeroCostDecision::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct ZeroCostCertificate {
  ZeroCostDecision decision = ZeroCostDecision::inconclusive;
  // λ_min(|k_μ⟩⟨k_μ| + Σ_{ν ⟂ μ} |k_ν⟩⟨k_ν| − ⟨k_μ|k_μ⟩ I), per element
  std::vector<double> per_element_margins;
  // 0-based index pairs into `examined` (d = 2 path only)
  std::optional<std::vector<std::pair<int, int>>> pairing;
  // The POVM the margins and pairing refer to (after merging for d = 2).
  Povm examined;
  std::string note;
};

namespace detail {

inline bool orthogonal(const Povm& p, int mu, int nu, double tol) {
  const double scale = std::sqrt(p.norm2(mu) * p.norm2(nu));
  return std::abs(p.rows().row(mu).dot(p.rows().row(nu))) <= tol * scale;
}

inline std::vector<double> zero_cost_margins(const Povm& p, double tol) {
  const int d = p.dim();
  std::vector<double> margins;
  margins.reserve(static_cast<size_t>(p.size()));
  for (int mu = 0; mu < p.size(); ++mu) {
    const ComplexVector k = p.element(mu);
    ComplexMatrix lhs = k * k.adjoint();
    for (int nu = 0; nu < p.size(); ++nu) {
      if (nu == mu || p.norm2(nu) < kZeroNorm2) continue;
      if (orthogonal(p, mu, nu, tol)) {
        const ComplexVector l = p.element(nu);
        lhs += l * l.adjoint();
      }
    }
    lhs -= p.norm2(mu) * ComplexMatrix::Identity(d, d);
    margins.push_back(hermitian_eigensystem(0.5 * (lhs + lhs.adjoint())).values.minCoeff());
  }
  return margins;
}

}  // namespace detail

/// Necessary zero-cost condition, element by element. Never concludes
/// "zero": a margin below −tol proves nonzero cost, otherwise inconclusive.
/// Zero-norm elements are dropped first.
inline ZeroCostCertificate zero_cost_necessary(const Povm& p, double tol = 1e-9) {
  ZeroCostCertificate cert;
  cert.examined = drop_zero_elements(p);
  cert.per_element_margins = detail::zero_cost_margins(cert.examined, tol);
  const bool violated = std::any_of(cert.per_element_margins.begin(), cert.per_element_margins.end(),
                                    [&](double m) { return m < -tol; });
  cert.decision = violated ? ZeroCostDecision::nonzero : ZeroCostDecision::inconclusive;
  cert.note = violated ? "operator inequality violated"
                       : "necessary condition holds; not sufficient in general";
  return cert;
}

/// Complete decision for qubits: merge parallel elements, then look for a
/// perfect matching of each element with an orthogonal element of equal
/// norm². A matching means the POVM is a post-processed mixture of von
/// Neumann measurements (zero cost); no matching means nonzero cost.
inline ZeroCostCertificate zero_cost_decide_d2(const Povm& p, double tol = 1e-9) {
  if (p.dim() != 2) throw DimensionError("zero_cost_decide_d2: requires d = 2");
  ZeroCostCertificate cert;
  cert.examined = merge_parallel(p, tol);
  const Povm& merged = cert.examined;
  cert.per_element_margins = detail::zero_cost_margins(merged, tol);

  const int m = merged.size();
  std::vector<std::vector<int>> partners(static_cast<size_t>(m));
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = 0; nu < m; ++nu) {
      if (nu != mu && detail::orthogonal(merged, mu, nu, tol) &&
          std::abs(merged.norm2(mu) - merged.norm2(nu)) <= tol) {
        partners[static_cast<size_t>(mu)].push_back(nu);
      }
    }
  }

  // Exhaustive matching: pair the lowest unmatched element with each
  // admissible partner in index order, backtracking on failure.
  std::vector<int> match(static_cast<size_t>(m), -1);
  std::function<bool()> solve = [&]() -> bool {
    int first = -1;
    for (int mu = 0; mu < m; ++mu) {
      if (match[static_cast<size_t>(mu)] < 0) {
        first = mu;
        break;
      }
    }
    if (first < 0) return true;
    for (int nu : partners[static_cast<size_t>(first)]) {
      if (match[static_cast<size_t>(nu)] >= 0) continue;
      match[static_cast<size_t>(first)] = nu;
      match[static_cast<size_t>(nu)] = first;
      if (solve()) return true;
      match[static_cast<size_t>(first)] = -1;
      match[static_cast<size_t>(nu)] = -1;
    }
    return false;
  };

  if (m % 2 == 0 && solve()) {
    std::vector<std::pair<int, int>> pairs;
    for (int mu = 0; mu < m; ++mu) {
      if (mu < match[static_cast<size_t>(mu)]) pairs.emplace_back(mu, match[static_cast<size_t>(mu)]);
    }
    cert.pairing = std::move(pairs);
    cert.decision = ZeroCostDecision::zero;
    cert.note = "mixture of von Neumann measurements after merging parallel elements";
  } else {
    cert.decision = ZeroCostDecision::nonzero;
    cert.note = "no pairing into equal-norm orthogonal partners";
  }
  return cert;
}

/// (n, H[(1 − 1/√(dⁿ))/2] / n) for n = 1..n_max: the dimension bound of the
/// n-fold tensor power, per copy.
inline std::vector<std::pair<int, double>> asymptotic_bound_curve(const Povm& p, int n_max) {
  if (n_max < 1) throw ValidationError("asymptotic_bound_curve: n_max must be positive");
  if (p.dim() < 2) throw DimensionError("asymptotic_bound_curve: d must be at least 2");
  std::vector<std::pair<int, double>> curve;
  for (int n = 1; n <= n_max; ++n) {
    const double dn = std::pow(static_cast<double>(p.dim()), n);
    curve.emplace_back(n, bound_dimension(dn) / n);
  }
  return curve;
}

}  // namespace naimark_lab
