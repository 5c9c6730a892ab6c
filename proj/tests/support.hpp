#pragma once

#include "naimark_lab/povm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

namespace naimark_lab::testing {

inline double h2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

inline ComplexVector ket(std::initializer_list<Complex> xs) {
  ComplexVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const Complex& x : xs) v(i++) = x;
  return v;
}

inline ComplexVector random_state(int n, std::mt19937_64& rng) {
  ComplexVector v = gaussian_matrix(n, 1, rng).col(0);
  return v / v.norm();
}

// |s⟩|a⟩ in the ancilla-major layout.
inline ComplexVector product_state(const ComplexVector& s, const ComplexVector& a) {
  ComplexVector out(s.size() * a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * s.size(), s.size()) = a(i) * s;
  return out;
}

inline ComplexMatrix random_skew(int n, std::mt19937_64& rng, double scale = 1.0) {
  const ComplexMatrix g = gaussian_matrix(n, n, rng);
  return scale * 0.5 * (g - g.adjoint());
}

// 50/50-style mixture of the computational basis and a random basis, d = 2.
inline Povm random_vn_mixture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const Povm a(random_unitary(2, rng));
  const Povm b(random_unitary(2, rng));
  return convex_combine(a, b, unit(rng));
}

}  // namespace naimark_lab::testing
