#pragma once

// Rank-1 POVMs {|k_μ⟩⟨k_μ|}: data model, completeness check, outcome
// statistics and the constructions that map POVMs to POVMs.

#include "naimark_lab/matrix_core.hpp"

#include <cstdint>
#include <numbers>
#include <random>

namespace naimark_lab {

/// Norm² below which an element counts as zero.
inline constexpr double kZeroNorm2 = 1e-14;

/// Elements |k_μ⟩ in dimension d. Stored as the m×d matrix whose rows are
/// the element components. Validity (orthonormal columns) is checked by
/// validate(), not by construction.
class Povm {
 public:
  Povm() = default;

  Povm(int d, const std::vector<ComplexVector>& elements) : rows_(elements.size(), d) {
    if (d < 1) throw DimensionError("Povm: dimension must be positive");
    for (size_t mu = 0; mu < elements.size(); ++mu) {
      if (elements[mu].size() != d) {
        throw DimensionError("Povm: element " + std::to_string(mu) + " has length " +
                             std::to_string(elements[mu].size()) + ", expected " +
                             std::to_string(d));
      }
      rows_.row(static_cast<Eigen::Index>(mu)) = elements[mu].transpose();
    }
  }

  /// From the m×d row matrix M.
  explicit Povm(ComplexMatrix rows) : rows_(std::move(rows)) {
    if (rows_.cols() < 1) throw DimensionError("Povm: dimension must be positive");
  }

  int dim() const { return static_cast<int>(rows_.cols()); }
  int size() const { return static_cast<int>(rows_.rows()); }
  const ComplexMatrix& rows() const { return rows_; }

  ComplexVector element(int mu) const { return rows_.row(mu).transpose(); }
  double norm2(int mu) const { return rows_.row(mu).squaredNorm(); }

  /// k̂_μ; the zero vector for zero-norm elements.
  ComplexVector direction(int mu) const {
    const double n = rows_.row(mu).norm();
    if (n * n < kZeroNorm2) return ComplexVector::Zero(dim());
    return element(mu) / n;
  }

  /// Σ_μ |k_μ⟩⟨k_μ|.
  ComplexMatrix operator_sum() const { return rows_.transpose() * rows_.conjugate(); }

 private:
  ComplexMatrix rows_;
};

struct PovmValidation {
  bool ok = false;
  double max_residual = 0.0;
  int zero_norm_elements = 0;  // carried zero canonical weight; ignored
};

/// ok iff ‖M†M − I_d‖_max ≤ tol.
inline PovmValidation validate(const Povm& p, double tol) {
  PovmValidation report;
  if (p.size() == 0) {
    report.max_residual = 1.0;
    return report;
  }
  for (int mu = 0; mu < p.size(); ++mu) {
    if (p.norm2(mu) < kZeroNorm2) ++report.zero_norm_elements;
  }
  report.max_residual = orthonormality_residual(p.rows());
  report.ok = p.size() >= p.dim() && report.max_residual <= tol;
  return report;
}

/// Removes elements with norm² below kZeroNorm2, preserving order.
inline Povm drop_zero_elements(const Povm& p) {
  std::vector<ComplexVector> kept;
  for (int mu = 0; mu < p.size(); ++mu) {
    if (p.norm2(mu) >= kZeroNorm2) kept.push_back(p.element(mu));
  }
  return Povm(p.dim(), kept);
}

/// Probabilities over POVM outcomes.
struct OutcomeDistribution {
  std::vector<double> probs;

  OutcomeDistribution() = default;
  explicit OutcomeDistribution(std::vector<double> p, double tol = 1e-10) : probs(std::move(p)) {
    double total = 0.0;
    for (double x : probs) {
      if (!(x >= -tol)) throw ValidationError("OutcomeDistribution: negative probability");
      total += x;
    }
    if (!(std::abs(total - 1.0) <= tol)) {
      throw ValidationError("OutcomeDistribution: probabilities do not sum to 1");
    }
  }

  size_t size() const { return probs.size(); }
  double operator[](size_t i) const { return probs[i]; }
};

/// Pure-state source {|ψ_i⟩; p_i}.
class Ensemble {
 public:
  Ensemble(int d, std::vector<ComplexVector> states, std::vector<double> probs)
      : d_(d), states_(std::move(states)), probs_(std::move(probs)) {
    if (states_.size() != probs_.size() || states_.empty()) {
      throw DimensionError("Ensemble: need one probability per state");
    }
    double total = 0.0;
    for (size_t i = 0; i < states_.size(); ++i) {
      if (states_[i].size() != d_) throw DimensionError("Ensemble: state dimension mismatch");
      if (!(std::abs(states_[i].squaredNorm() - 1.0) <= 1e-10)) {
        throw ValidationError("Ensemble: state not normalized");
      }
      if (!(probs_[i] >= 0.0)) throw ValidationError("Ensemble: negative probability");
      total += probs_[i];
    }
    if (!(std::abs(total - 1.0) <= 1e-12)) {
      throw ValidationError("Ensemble: probabilities do not sum to 1");
    }
  }

  int dim() const { return d_; }
  size_t size() const { return states_.size(); }
  const ComplexVector& state(size_t i) const { return states_[i]; }
  double prob(size_t i) const { return probs_[i]; }

  /// Σ p_i |ψ_i⟩⟨ψ_i|.
  ComplexMatrix average_state() const {
    ComplexMatrix rho = ComplexMatrix::Zero(d_, d_);
    for (size_t i = 0; i < size(); ++i) rho += probs_[i] * states_[i] * states_[i].adjoint();
    return rho;
  }

 private:
  int d_;
  std::vector<ComplexVector> states_;
  std::vector<double> probs_;
};

/// q_μ = ⟨k_μ|k_μ⟩ / d.
inline OutcomeDistribution canonical_distribution(const Povm& p) {
  std::vector<double> q(static_cast<size_t>(p.size()));
  for (int mu = 0; mu < p.size(); ++mu) q[static_cast<size_t>(mu)] = p.norm2(mu) / p.dim();
  return OutcomeDistribution(std::move(q));
}

namespace detail {

/// joint(i, μ) = p_i |⟨ψ_i|k_μ⟩|².
inline Eigen::MatrixXd joint_table(const Povm& p, const Ensemble& source) {
  if (p.dim() != source.dim()) throw DimensionError("POVM and ensemble dimensions differ");
  Eigen::MatrixXd joint(static_cast<Eigen::Index>(source.size()), p.size());
  for (size_t i = 0; i < source.size(); ++i) {
    for (int mu = 0; mu < p.size(); ++mu) {
      const Complex amp = source.state(i).dot(p.element(mu));
      joint(static_cast<Eigen::Index>(i), mu) = source.prob(i) * std::norm(amp);
    }
  }
  return joint;
}

}  // namespace detail

/// p(ν) = Σ_i p_i |⟨ψ_i|k_ν⟩|².
inline OutcomeDistribution posterior_distribution(const Povm& p, const Ensemble& source) {
  const Eigen::MatrixXd joint = detail::joint_table(p, source);
  const Eigen::VectorXd marginal = joint.colwise().sum().transpose();
  return OutcomeDistribution(std::vector<double>(marginal.data(), marginal.data() + marginal.size()),
                             1e-8);
}

/// I(M:E) in bits.
inline double mutual_information(const Povm& p, const Ensemble& source) {
  const Eigen::MatrixXd joint = detail::joint_table(p, source);
  const Eigen::VectorXd outcome = joint.colwise().sum().transpose();
  double info = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    const double pi = source.prob(static_cast<size_t>(i));
    for (Eigen::Index mu = 0; mu < joint.cols(); ++mu) {
      const double pj = joint(i, mu);
      if (pj <= 0.0) continue;
      info += pj * std::log2(pj / (pi * outcome(mu)));
    }
  }
  return std::max(info, 0.0);
}

/// The trine: |β_μ⟩ = √(2/3)(−sin(μπ/3)|0⟩ + cos(μπ/3)|1⟩), μ = 1, 2, 3.
inline Povm trine() {
  std::vector<ComplexVector> elements;
  const double scale = std::sqrt(2.0 / 3.0);
  for (int mu = 1; mu <= 3; ++mu) {
    const double angle = mu * std::numbers::pi / 3.0;
    ComplexVector k(2);
    k << -scale * std::sin(angle), scale * std::cos(angle);
    elements.push_back(k);
  }
  return Povm(2, elements);
}

/// Trine source states |α_μ⟩ = cos(μπ/3)|0⟩ + sin(μπ/3)|1⟩, each orthogonal
/// to the matching trine element, with equal priors.
inline Ensemble trine_source() {
  std::vector<ComplexVector> states;
  for (int mu = 1; mu <= 3; ++mu) {
    const double angle = mu * std::numbers::pi / 3.0;
    ComplexVector a(2);
    a << std::cos(angle), std::sin(angle);
    states.push_back(a);
  }
  return Ensemble(2, states, {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0});
}

/// Computational-basis von Neumann measurement in dimension d.
inline Povm computational_basis(int d) {
  return Povm(ComplexMatrix::Identity(d, d));
}

/// Complex Gaussian n×k matrix with unit-variance real and imaginary parts.
inline ComplexMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im);
    }
  }
  return g;
}

/// Orthonormalizes columns by modified Gram-Schmidt (twice). The implied R
/// factor has positive diagonal, which makes the map Haar-covariant.
inline ComplexMatrix orthonormalize_columns(ComplexMatrix a) {
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < c; ++p) a.col(c) -= a.col(p).dot(a.col(c)) * a.col(p);
    }
    const double n = a.col(c).norm();
    if (n == 0.0) throw ValidationError("orthonormalize_columns: rank deficient");
    a.col(c) /= n;
  }
  return a;
}

/// Haar-random m×d isometry, read as an m-element POVM in dimension d.
inline Povm random_haar(int d, int m, std::uint64_t seed) {
  if (d < 1 || m < d) throw DimensionError("random_haar: need m >= d >= 1");
  std::mt19937_64 rng(seed);
  return Povm(orthonormalize_columns(gaussian_matrix(m, d, rng)));
}

/// Haar-random d×d unitary.
inline ComplexMatrix random_unitary(int d, std::mt19937_64& rng) {
  return orthonormalize_columns(gaussian_matrix(d, d, rng));
}

/// p0·P0 ∪ (1−p0)·P1, elements concatenated in argument order.
inline Povm convex_combine(const Povm& p0, const Povm& p1, double weight0) {
  if (p0.dim() != p1.dim()) throw DimensionError("convex_combine: dimensions differ");
  if (!(weight0 >= 0.0 && weight0 <= 1.0)) {
    throw ValidationError("convex_combine: weight outside [0, 1]");
  }
  ComplexMatrix rows(p0.size() + p1.size(), p0.dim());
  rows.topRows(p0.size()) = std::sqrt(weight0) * p0.rows();
  rows.bottomRows(p1.size()) = std::sqrt(1.0 - weight0) * p1.rows();
  return Povm(std::move(rows));
}

/// Replaces each |k_μ⟩ by the elements √(p^μ_l)|k_μ⟩, l = 1..K(μ).
inline Povm post_process(const Povm& p, const std::vector<std::vector<double>>& splits) {
  if (splits.size() != static_cast<size_t>(p.size())) {
    throw DimensionError("post_process: need one split per element");
  }
  std::vector<ComplexVector> out;
  for (int mu = 0; mu < p.size(); ++mu) {
    const auto& split = splits[static_cast<size_t>(mu)];
    if (split.empty()) throw ValidationError("post_process: empty split");
    double total = 0.0;
    for (double x : split) {
      if (!(x >= 0.0)) throw ValidationError("post_process: negative probability");
      total += x;
    }
    if (!(std::abs(total - 1.0) <= 1e-12)) {
      throw ValidationError("post_process: split does not sum to 1");
    }
    for (double x : split) out.push_back(std::sqrt(x) * p.element(mu));
  }
  return Povm(p.dim(), out);
}

/// Merges every class of parallel elements (|⟨k̂_μ|k̂_ν⟩| ≥ 1 − tol) into its
/// lowest-index member, which keeps its direction and phase and takes the
/// summed norm². Zero-norm elements are dropped.
inline Povm merge_parallel(const Povm& p, double tol) {
  const int m = p.size();
  std::vector<bool> used(static_cast<size_t>(m), false);
  std::vector<ComplexVector> out;
  for (int mu = 0; mu < m; ++mu) {
    if (used[static_cast<size_t>(mu)] || p.norm2(mu) < kZeroNorm2) continue;
    const ComplexVector dir = p.direction(mu);
    double total = p.norm2(mu);
    for (int nu = mu + 1; nu < m; ++nu) {
      if (used[static_cast<size_t>(nu)] || p.norm2(nu) < kZeroNorm2) continue;
      if (std::abs(dir.dot(p.direction(nu))) >= 1.0 - tol) {
        total += p.norm2(nu);
        used[static_cast<size_t>(nu)] = true;
      }
    }
    out.push_back(std::sqrt(total) * dir);
  }
  return Povm(p.dim(), out);
}

/// Elements k_μ ⊗ l_ν in lexicographic (μ, ν) order, dimension d_P·d_Q.
inline Povm tensor(const Povm& p, const Povm& q) {
  std::vector<ComplexVector> out;
  out.reserve(static_cast<size_t>(p.size() * q.size()));
  for (int mu = 0; mu < p.size(); ++mu) {
    const ComplexVector k = p.element(mu);
    for (int nu = 0; nu < q.size(); ++nu) {
      const ComplexVector l = q.element(nu);
      ComplexVector kl(k.size() * l.size());
      for (Eigen::Index i = 0; i < k.size(); ++i) kl.segment(i * l.size(), l.size()) = k(i) * l;
      out.push_back(kl);
    }
  }
  return Povm(p.dim() * q.dim(), out);
}

/// Spectral refinement of a general POVM {A_μ} into rank-1 elements
/// √λ|v⟩, eigenvalues below 1e-12 dropped.
inline Povm refine_to_rank1(const std::vector<ComplexMatrix>& elements) {
  if (elements.empty()) throw DimensionError("refine_to_rank1: no elements");
  const auto d = elements.front().rows();
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (const auto& a : elements) {
    if (a.rows() != d || a.cols() != d) throw DimensionError("refine_to_rank1: shape mismatch");
    total += a;
  }
  if (!(max_abs(ComplexMatrix(total - ComplexMatrix::Identity(d, d))) <= 1e-9)) {
    throw ValidationError("refine_to_rank1: elements do not sum to identity");
  }
  std::vector<ComplexVector> out;
  for (const auto& a : elements) {
    const Eigensystem es = hermitian_eigensystem(a);
    if (es.values.size() > 0 && es.values.minCoeff() < -1e-10) {
      throw ValidationError("refine_to_rank1: element not positive semidefinite");
    }
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
      if (es.values(i) < 1e-12) continue;
      out.push_back(std::sqrt(es.values(i)) * es.vectors.col(i));
    }
  }
  return Povm(static_cast<int>(d), out);
}

/// Phase-insensitive element-wise comparison.
inline bool same_up_to_phases(const Povm& a, const Povm& b, double tol) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (int mu = 0; mu < a.size(); ++mu) {
    const Complex overlap = b.element(mu).dot(a.element(mu));
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
    if ((a.element(mu) - phase * b.element(mu)).norm() > tol) return false;
  }
  return true;
}

}  // namespace naimark_lab
