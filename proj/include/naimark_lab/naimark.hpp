#pragma once

// Naimark extensions of rank-1 POVMs in the tensor-product form
// H_d ⊗ H_e with fixed ancilla state |a_0⟩ (ancilla basis vector 0).
//
// An extension is a de×de unitary whose row ν holds |w_ν⟩ in the
// ancilla-major layout [v⁰_ν | v¹_ν | ... | v^{e−1}_ν]. For ν < m the block
// v⁰_ν equals |k_ν⟩; for ν ≥ m it vanishes. Every extension arises by
// completing the columns [M; 0] to a unitary, and the completion freedom is
// exactly U(de − d) acting on any one fixed completion.

#include "naimark_lab/povm.hpp"

#include <optional>

namespace naimark_lab {

/// d·e too small to hold m orthonormal extension states.
class CapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPovmInputTol = 1e-8;

class NaimarkExtension {
 public:
  NaimarkExtension(int d, int e, int m, ComplexMatrix basis)
      : d_(d), e_(e), m_(m), basis_(std::move(basis)) {
    const Eigen::Index de = static_cast<Eigen::Index>(d) * e;
    if (basis_.rows() != de || basis_.cols() != de) {
      throw DimensionError("NaimarkExtension: basis must be de x de");
    }
    if (m < 0 || m > de) throw DimensionError("NaimarkExtension: outcome count out of range");
  }

  int d() const { return d_; }
  int e() const { return e_; }
  int m() const { return m_; }
  int ancilla_state_index() const { return 0; }
  const ComplexMatrix& basis() const { return basis_; }

  /// |w_ν⟩ as a column vector.
  ComplexVector state(int nu) const { return basis_.row(nu).transpose(); }
  /// |v^i_ν⟩, the system vector paired with ancilla basis state i.
  ComplexVector block(int nu, int i) const {
    return basis_.row(nu).segment(static_cast<Eigen::Index>(i) * d_, d_).transpose();
  }

 private:
  int d_;
  int e_;
  int m_;
  ComplexMatrix basis_;
};

namespace detail {

inline void require_valid_povm(const Povm& p, const char* where) {
  const PovmValidation v = validate(p, kPovmInputTol);
  if (!v.ok) {
    throw ValidationError(std::string(where) + ": POVM fails completeness (residual " +
                          std::to_string(v.max_residual) + ")");
  }
}

inline void require_capacity(const Povm& p, int e, const char* where) {
  if (e < 1 || static_cast<long>(p.dim()) * e < p.size()) {
    throw CapacityError(std::string(where) + ": d*e = " + std::to_string(p.dim() * e) +
                        " is smaller than m = " + std::to_string(p.size()));
  }
}

/// [M; 0] as de×d.
inline ComplexMatrix padded_rows(const Povm& p, int e) {
  ComplexMatrix padded = ComplexMatrix::Zero(static_cast<Eigen::Index>(p.dim()) * e, p.dim());
  padded.topRows(p.size()) = p.rows();
  return padded;
}

}  // namespace detail

/// A fixed default completion L₀ = [M C; 0 ·] of one POVM and ancilla size,
/// from which every other extension is obtained by C ↦ C·V.
class ExtensionFrame {
 public:
  ExtensionFrame(const Povm& p, int e) : povm_(p), e_(e) {
    detail::require_valid_povm(p, "ExtensionFrame");
    detail::require_capacity(p, e, "ExtensionFrame");
    default_ = gram_schmidt_complete(detail::padded_rows(p, e), kPovmInputTol);
  }

  const Povm& povm() const { return povm_; }
  int e() const { return e_; }
  int completion_dim() const { return povm_.dim() * e_ - povm_.dim(); }
  const ComplexMatrix& default_unitary() const { return default_; }
  auto completion() const { return default_.rightCols(completion_dim()); }

  NaimarkExtension default_extension() const {
    return NaimarkExtension(povm_.dim(), e_, povm_.size(), default_);
  }

  /// Extension whose completion columns are C·V.
  NaimarkExtension with_completion(const ComplexMatrix& v) const {
    const int n = completion_dim();
    if (v.rows() != n || v.cols() != n) {
      throw DimensionError("with_completion: V must be (de-d) x (de-d)");
    }
    ComplexMatrix basis(default_.rows(), default_.cols());
    basis.leftCols(povm_.dim()) = default_.leftCols(povm_.dim());
    basis.rightCols(n) = completion() * v;
    return NaimarkExtension(povm_.dim(), e_, povm_.size(), std::move(basis));
  }

  /// The V for which with_completion(V) reproduces a given extension of the
  /// same POVM (V = C† C').
  ComplexMatrix completion_of(const NaimarkExtension& n) const {
    return completion().adjoint() * n.basis().rightCols(completion_dim());
  }

 private:
  Povm povm_;
  int e_;
  ComplexMatrix default_;
};

/// Extension read off the default completion of [M; 0].
inline NaimarkExtension construct_default(const Povm& p, int e) {
  return ExtensionFrame(p, e).default_extension();
}

/// Extension with the default completion columns rotated by a unitary V.
inline NaimarkExtension construct_completion(const Povm& p, int e, const ComplexMatrix& v) {
  if (!(orthonormality_residual(v) <= 1e-10)) {
    throw ValidationError("construct_completion: V is not unitary");
  }
  return ExtensionFrame(p, e).with_completion(v);
}

struct ExtensionValidation {
  bool ok = false;
  double unitarity_residual = 0.0;
  double form_residual = 0.0;
};

inline ExtensionValidation validate_extension(const NaimarkExtension& n, const Povm& p, double tol) {
  ExtensionValidation report;
  const ComplexMatrix& b = n.basis();
  report.unitarity_residual =
      max_abs(ComplexMatrix(b * b.adjoint() - ComplexMatrix::Identity(b.rows(), b.rows())));
  if (p.dim() != n.d() || p.size() != n.m()) {
    report.form_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  double form = 0.0;
  for (int nu = 0; nu < b.rows(); ++nu) {
    const ComplexVector v0 = n.block(nu, 0);
    double dist = 0.0;
    if (nu < n.m()) {
      // min over φ of ‖v − e^{iφ} k‖
      const ComplexVector k = p.element(nu);
      const Complex overlap = k.dot(v0);
      const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
      dist = (v0 - phase * k).norm();
    } else {
      dist = v0.norm();
    }
    form = std::max(form, dist);
  }
  report.form_residual = form;
  report.ok = report.unitarity_residual <= tol && report.form_residual <= tol;
  return report;
}

struct ExtensionCostBreakdown {
  std::vector<double> per_outcome_entanglement;  // E_ν, ebits
  OutcomeDistribution weights;
  double total = 0.0;
};

/// E_ν = S(tr_e |w_ν⟩⟨w_ν|) for ν < m; total = Σ_ν q_ν E_ν.
inline ExtensionCostBreakdown extension_cost(const NaimarkExtension& n,
                                             const OutcomeDistribution& weights) {
  if (weights.size() != static_cast<size_t>(n.m())) {
    throw DimensionError("extension_cost: weight count differs from outcome count");
  }
  ExtensionCostBreakdown out;
  out.weights = weights;
  out.per_outcome_entanglement.reserve(weights.size());
  for (int nu = 0; nu < n.m(); ++nu) {
    ComplexVector w = n.state(nu);
    w.normalize();
    const Side smaller = n.e() < n.d() ? Side::ancilla : Side::system;
    const double s = von_neumann_entropy(partial_trace(w, n.d(), n.e(), smaller));
    out.per_outcome_entanglement.push_back(s);
    out.total += weights[static_cast<size_t>(nu)] * s;
  }
  return out;
}

/// For each ancilla index i the slice {v^i_ν}_ν, zero-norm members dropped.
inline std::vector<Povm> marginal_povms(const NaimarkExtension& n) {
  std::vector<Povm> out;
  const int de = n.d() * n.e();
  for (int i = 0; i < n.e(); ++i) {
    std::vector<ComplexVector> elements;
    for (int nu = 0; nu < de; ++nu) {
      ComplexVector v = n.block(nu, i);
      if (v.squaredNorm() >= kZeroNorm2) elements.push_back(std::move(v));
    }
    out.emplace_back(n.d(), elements);
  }
  return out;
}

/// Applies (I_d ⊗ U) to every extension state.
inline ComplexMatrix rotate_ancilla(const ComplexMatrix& rows, int d, int e, const ComplexMatrix& u) {
  if (u.rows() != e || u.cols() != e) throw DimensionError("rotate_ancilla: U must be e x e");
  ComplexMatrix out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const ComplexVector row = rows.row(r).transpose();
    const Eigen::Map<const ComplexMatrix> psi(row.data(), d, e);
    const ComplexMatrix rotated = psi * u.transpose();
    out.row(r) = Eigen::Map<const ComplexVector>(rotated.data(), rotated.size()).transpose();
  }
  return out;
}

/// Brings an externally given basis, written with an arbitrary normalized
/// ancilla start state a0, into the internal frame where |a_0⟩ is ancilla
/// basis vector 0.
inline NaimarkExtension extension_from_external(const ComplexMatrix& rows, int d, int e, int m,
                                                const ComplexVector& a0) {
  if (a0.size() != e) throw DimensionError("extension_from_external: a0 must have length e");
  if (!(std::abs(a0.squaredNorm() - 1.0) <= 1e-10)) {
    throw ValidationError("extension_from_external: a0 not normalized");
  }
  const ComplexMatrix q = gram_schmidt_complete(ComplexMatrix(a0), 1e-10);
  return NaimarkExtension(d, e, m, rotate_ancilla(rows, d, e, q.adjoint()));
}

/// Entanglement cost of the one-parameter-per-element construction
/// |w_μ⟩ = |k_μ⟩|a_0⟩ + |ζ⟩|ξ_μ⟩:
///   Σ_μ (r_μ²/d) H(½ − ½√(α_μ² + (1 − α_μ²)|⟨ζ|k̂_μ⟩|²)),  α_μ = 1 − 2r_μ².
inline double prop5_cost(const Povm& p, const ComplexVector& zeta) {
  if (zeta.size() != p.dim()) throw DimensionError("prop5_cost: zeta dimension mismatch");
  if (!(std::abs(zeta.squaredNorm() - 1.0) <= 1e-10)) {
    throw ValidationError("prop5_cost: zeta not normalized");
  }
  double total = 0.0;
  for (int mu = 0; mu < p.size(); ++mu) {
    const double r2 = p.norm2(mu);
    if (r2 < kZeroNorm2) continue;
    const double alpha = 1.0 - 2.0 * r2;
    const double overlap2 = std::norm(zeta.dot(p.direction(mu)));
    const double root = std::sqrt(std::clamp(alpha * alpha + (1.0 - alpha * alpha) * overlap2, 0.0, 1.0));
    total += r2 / p.dim() * binary_entropy(0.5 - 0.5 * root);
  }
  return total;
}

/// Ξ with Ξ Ξ† = I_m − M M†: columns √λ·u over eigen-branches λ ≥ 1e-12.
inline ComplexMatrix prop5_xi(const Povm& p) {
  const int m = p.size();
  const ComplexMatrix g =
      ComplexMatrix::Identity(m, m) - p.rows() * p.rows().adjoint();
  const Eigensystem es = hermitian_eigensystem(0.5 * (g + g.adjoint()));
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) >= 1e-12) kept.push_back(i);
  }
  ComplexMatrix xi(m, static_cast<Eigen::Index>(kept.size()));
  for (size_t c = 0; c < kept.size(); ++c) {
    xi.col(static_cast<Eigen::Index>(c)) = std::sqrt(es.values(kept[c])) * es.vectors.col(kept[c]);
  }
  return xi;
}

/// Smallest ancilla dimension that holds the ζ construction (1 + rank of I − MM†).
inline int prop5_min_ancilla(const Povm& p) {
  return 1 + static_cast<int>(prop5_xi(p).cols());
}

struct Prop5Result {
  NaimarkExtension extension;
  double predicted_cost;
};

/// Extension |w_ν⟩ = |k_ν⟩|a_0⟩ + |ζ⟩|ξ_ν⟩ (ν < m), completed to a full basis.
/// e defaults to m + 1; any e ≥ prop5_min_ancilla(P) works.
inline Prop5Result prop5_extension(const Povm& p, const ComplexVector& zeta, int e = 0) {
  detail::require_valid_povm(p, "prop5_extension");
  if (zeta.size() != p.dim()) throw DimensionError("prop5_extension: zeta dimension mismatch");
  if (!(std::abs(zeta.squaredNorm() - 1.0) <= 1e-10)) {
    throw ValidationError("prop5_extension: zeta not normalized");
  }
  const int d = p.dim();
  const int m = p.size();
  if (e == 0) e = m + 1;
  const ComplexMatrix xi = prop5_xi(p);
  if (e < 1 + xi.cols()) {
    throw CapacityError("prop5_extension: ancilla dimension " + std::to_string(e) +
                        " below required " + std::to_string(1 + xi.cols()));
  }
  const Eigen::Index de = static_cast<Eigen::Index>(d) * e;
  ComplexMatrix rows = ComplexMatrix::Zero(m, de);
  rows.leftCols(d) = p.rows();
  for (Eigen::Index c = 0; c < xi.cols(); ++c) {
    for (int nu = 0; nu < m; ++nu) {
      rows.row(nu).segment((c + 1) * d, d) = xi(nu, c) * zeta.transpose();
    }
  }
  // Columns are the conjugated extension states so that completing the
  // columns completes the rows.
  const ComplexMatrix full = gram_schmidt_complete(rows.adjoint(), 1e-8).adjoint();
  return {NaimarkExtension(d, e, m, full), prop5_cost(p, zeta)};
}

struct CompressedStates {
  int ancilla_dim = 0;                // dimension of the used ancilla support
  std::vector<ComplexVector> states;  // first m extension states, compressed
};

/// Restricts the ancilla to the span used by the first m extension states
/// (at most m·d dimensions). Entanglements are unchanged since the map is a
/// local isometry on the ancilla.
inline CompressedStates compress_ancilla_support(const NaimarkExtension& n) {
  const int d = n.d();
  const int e = n.e();
  ComplexMatrix support(e, static_cast<Eigen::Index>(n.m()) * d);
  for (int nu = 0; nu < n.m(); ++nu) {
    const ComplexVector w = n.state(nu);
    const Eigen::Map<const ComplexMatrix> psi(w.data(), d, e);
    support.middleCols(static_cast<Eigen::Index>(nu) * d, d) = psi.transpose();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(support, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
  }
  const ComplexMatrix q = svd.matrixU().leftCols(rank);
  CompressedStates out;
  out.ancilla_dim = rank;
  for (int nu = 0; nu < n.m(); ++nu) {
    const ComplexVector w = n.state(nu);
    const Eigen::Map<const ComplexMatrix> psi(w.data(), d, e);
    const ComplexMatrix compressed = psi * q.conjugate();
    out.states.emplace_back(Eigen::Map<const ComplexVector>(compressed.data(), compressed.size()));
  }
  return out;
}

}  // namespace naimark_lab
