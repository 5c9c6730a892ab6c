#pragma once

// Dense complex linear algebra used throughout the library: orthonormal
// completion, Hermitian eigensystems, the exponential of skew-Hermitian
// matrices, partial traces of bipartite pure states and entropies (bits).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace naimark_lab {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Input violates a numerical precondition (not orthonormal, not Hermitian, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sizes of the arguments do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest absolute entry; 0 for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

/// ‖A†A − I‖_max, the column-orthonormality residual of A.
inline double orthonormality_residual(const ComplexMatrix& a) {
  const auto k = a.cols();
  return max_abs(ComplexMatrix(a.adjoint() * a - ComplexMatrix::Identity(k, k)));
}

inline double hermiticity_residual(const ComplexMatrix& h) {
  return max_abs(ComplexMatrix(h - h.adjoint()));
}

/// Completes n×k orthonormal columns to an n×n unitary.
///
/// Candidates are the standard basis vectors e_0, e_1, ... in index order.
/// Each is orthogonalized against every accepted column by modified
/// Gram-Schmidt, twice, and skipped when its residual norm falls below 1e-8.
/// The first k output columns are bit-identical to the input.
inline ComplexMatrix gram_schmidt_complete(const ComplexMatrix& cols, double tol) {
  const auto n = cols.rows();
  const auto k = cols.cols();
  if (k > n) {
    throw DimensionError("gram_schmidt_complete: more columns than rows");
  }
  const double residual = orthonormality_residual(cols);
  if (!(residual <= tol)) {
    throw ValidationError("gram_schmidt_complete: input columns not orthonormal (residual " +
                          std::to_string(residual) + ")");
  }

  constexpr double kSkipNorm = 1e-8;
  ComplexMatrix out(n, n);
  out.leftCols(k) = cols;
  Eigen::Index filled = k;
  for (Eigen::Index j = 0; j < n && filled < n; ++j) {
    ComplexVector v = ComplexVector::Zero(n);
    v(j) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < filled; ++c) {
        const Complex proj = out.col(c).dot(v);  // conjugates out.col(c)
        v -= proj * out.col(c);
      }
      if (pass == 0 && v.norm() < kSkipNorm) break;
    }
    const double norm = v.norm();
    if (norm < kSkipNorm) continue;
    out.col(filled++) = v / norm;
  }
  if (filled != n) {
    throw ValidationError("gram_schmidt_complete: completion failed");
  }
  return out;
}

/// exp(S) for skew-Hermitian S, by scaling and squaring a degree-18 Taylor
/// polynomial. Accurate to ~1e-13 in the unitarity residual for the
/// dimensions used here.
inline ComplexMatrix unitary_from_skew(const ComplexMatrix& s) {
  if (s.rows() != s.cols()) throw DimensionError("unitary_from_skew: matrix not square");
  const auto n = s.rows();
  if (n == 0) return ComplexMatrix(0, 0);
  const double skew = max_abs(ComplexMatrix(s + s.adjoint()));
  if (!(skew <= 1e-12)) {
    throw ValidationError("unitary_from_skew: input not skew-Hermitian");
  }

  const double norm1 = s.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const ComplexMatrix a = s / std::ldexp(1.0, squarings);

  constexpr int kOrder = 18;
  ComplexMatrix result = ComplexMatrix::Identity(n, n);
  // Horner: I + A(I + A/2(I + A/3(...)))
  for (int k = kOrder; k >= 1; --k) {
    result = ComplexMatrix::Identity(n, n) + (a * result) / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

struct Eigensystem {
  RealVector values;     // descending
  ComplexMatrix vectors; // column i pairs with values(i)
};

namespace detail {

/// Multiplies each column by a phase so its largest-magnitude entry is real
/// positive. The first entry within 1e-12 of the maximum wins.
inline void canonicalize_column_phases(ComplexMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    double best = -1.0;
    Eigen::Index arg = 0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a > best + 1e-12) {
        best = a;
        arg = r;
      }
    }
    if (best > 0.0) v.col(c) *= std::conj(v(arg, c)) / best;
  }
}

}  // namespace detail

/// Eigendecomposition H = V diag(λ) V† of a Hermitian matrix, eigenvalues
/// descending. Columns are phase-canonicalized; eigenvalues equal within
/// 1e-12 are ordered by the real part of their first differing component,
/// larger first.
inline Eigensystem hermitian_eigensystem(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("hermitian_eigensystem: matrix not square");
  if (!(hermiticity_residual(h) <= 1e-10)) {
    throw ValidationError("hermitian_eigensystem: input not Hermitian");
  }
  const auto n = h.rows();
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  ComplexMatrix vecs = solver.eigenvectors();
  detail::canonicalize_column_phases(vecs);
  const RealVector& vals = solver.eigenvalues();

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(vals(a) - vals(b)) > 1e-12) return vals(a) > vals(b);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double diff = vecs(r, a).real() - vecs(r, b).real();
      if (std::abs(diff) > 1e-12) return diff > 0.0;
    }
    return false;
  });

  Eigensystem out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = vals(order[static_cast<size_t>(i)]);
    out.vectors.col(i) = vecs.col(order[static_cast<size_t>(i)]);
  }
  return out;
}

/// Square, Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m, double tol = 1e-9) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw DimensionError("DensityMatrix: matrix must be square and non-empty");
    }
    if (!matrix_.allFinite()) throw ValidationError("DensityMatrix: non-finite entries");
    if (!(hermiticity_residual(matrix_) <= tol)) {
      throw ValidationError("DensityMatrix: not Hermitian");
    }
    if (!(std::abs(matrix_.trace() - Complex(1.0)) <= tol)) {
      throw ValidationError("DensityMatrix: trace differs from 1");
    }
    if (matrix_.rows() > 0) {
      const ComplexMatrix sym = 0.5 * (matrix_ + matrix_.adjoint());
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
      if (solver.eigenvalues().minCoeff() < -tol) {
        throw ValidationError("DensityMatrix: negative eigenvalue");
      }
    }
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
};

enum class Side { system, ancilla };

/// Reduced state of a pure bipartite state on H_d ⊗ H_e.
///
/// Component layout is ancilla-major: entry i·d + j is the amplitude of
/// |e_j⟩|a_i⟩, so the first d entries are the system vector paired with
/// ancilla state |a_0⟩. Extension rows use the same layout.
inline DensityMatrix partial_trace(const ComplexVector& state, int d, int e, Side keep) {
  if (d < 1 || e < 1 || state.size() != static_cast<Eigen::Index>(d) * e) {
    throw DimensionError("partial_trace: state length must equal d*e");
  }
  if (!(std::abs(state.squaredNorm() - 1.0) <= 1e-10)) {
    throw ValidationError("partial_trace: state not normalized");
  }
  // Column-major d×e view: psi(j, i) = state(i*d + j).
  const Eigen::Map<const ComplexMatrix> psi(state.data(), d, e);
  if (keep == Side::system) return DensityMatrix(psi * psi.adjoint());
  return DensityMatrix(ComplexMatrix(psi.adjoint() * psi).transpose());
}

/// Shannon entropy (bits) of a spectrum, each value clamped to [0, 1].
template <typename Range>
double spectrum_entropy(const Range& eigenvalues) {
  double s = 0.0;
  for (double lambda : eigenvalues) {
    lambda = std::clamp(lambda, 0.0, 1.0);
    if (lambda > 0.0) s -= lambda * std::log2(lambda);
  }
  return s;
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const ComplexMatrix& m = rho.matrix();
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  const RealVector& vals = solver.eigenvalues();
  return spectrum_entropy(std::vector<double>(vals.data(), vals.data() + vals.size()));
}

/// H(x) = −x log₂x − (1−x) log₂(1−x).
inline double binary_entropy(double x) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) {
    throw std::domain_error("binary_entropy: argument outside [0, 1]");
  }
  x = std::clamp(x, 0.0, 1.0);
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

/// Entanglement entropy (bits) of an unnormalized-tolerant pure state in the
/// ancilla-major layout, computed on the smaller reduced side. The state is
/// renormalized first; a zero vector has entropy 0. Used in optimizer loops
/// where building a validated DensityMatrix per call would dominate.
inline double entanglement_entropy(const ComplexVector& state, int d, int e) {
  const double norm2 = state.squaredNorm();
  if (norm2 <= 0.0) return 0.0;
  const Eigen::Map<const ComplexMatrix> psi(state.data(), d, e);
  ComplexMatrix rho = (d <= e) ? ComplexMatrix(psi * psi.adjoint())
                               : ComplexMatrix(psi.adjoint() * psi);
  rho /= norm2;
  if (rho.rows() == 1) return 0.0;
  if (rho.rows() == 2) {
    const double a = rho(0, 0).real();
    const double b = rho(1, 1).real();
    const double disc = std::sqrt(0.25 * (a - b) * (a - b) + std::norm(rho(0, 1)));
    const double mid = 0.5 * (a + b);
    const double vals[2] = {mid + disc, mid - disc};
    return spectrum_entropy(vals);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
  const RealVector& vals = solver.eigenvalues();
  return spectrum_entropy(std::vector<double>(vals.data(), vals.data() + vals.size()));
}

}  // namespace naimark_lab
