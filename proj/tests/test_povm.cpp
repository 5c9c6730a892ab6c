#include "support.hpp"

using namespace naimark_lab;
using naimark_lab::testing::ket;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

Povm kpom() {
  return Povm(2, {ket({kS, 0.0}), ket({0.0, kS}), ket({0.5, 0.5}), ket({0.5, -0.5})});
}

Povm n_d3() {
  return Povm(3, {ket({1.0, 0.0, 0.0}), ket({0.0, kS, 0.0}), ket({0.0, 0.0, kS}), ket({0.0, 0.5, 0.5}),
                  ket({0.0, 0.5, -0.5})});
}

Povm scaled(const Povm& p, double s) { return Povm(ComplexMatrix(s * p.rows())); }

// Both completeness formulations, computed independently.
double operator_residual(const Povm& p) {
  ComplexMatrix sum = ComplexMatrix::Zero(p.dim(), p.dim());
  for (int mu = 0; mu < p.size(); ++mu) sum += p.element(mu) * p.element(mu).adjoint();
  return max_abs(ComplexMatrix(sum - ComplexMatrix::Identity(p.dim(), p.dim())));
}

}  // namespace

TEST(Validate, Trine) {
  const PovmValidation v = validate(trine(), 1e-12);
  EXPECT_TRUE(v.ok);
  EXPECT_LE(v.max_residual, 1e-12);
}

TEST(Validate, ComputationalBasis) {
  for (int d = 1; d <= 6; ++d) EXPECT_TRUE(validate(computational_basis(d), 1e-15).ok);
}

TEST(Validate, ScaledTrineFails) {
  const PovmValidation v = validate(scaled(trine(), 0.9), 1e-8);
  EXPECT_FALSE(v.ok);
  EXPECT_NEAR(v.max_residual, 0.19, 1e-12);
}

TEST(Validate, RaggedInputIsStructuralError) {
  EXPECT_THROW(Povm(2, {ket({1.0, 0.0}), ket({1.0})}), DimensionError);
}

TEST(Validate, TooFewElements) {
  const Povm p(2, {ket({1.0, 0.0})});
  EXPECT_FALSE(validate(p, 1e-8).ok);
}

TEST(Validate, ZeroNormElementsFlagged) {
  const Povm p = convex_combine(computational_basis(2), computational_basis(2), 1.0);
  const PovmValidation v = validate(p, 1e-12);
  EXPECT_TRUE(v.ok);
  EXPECT_EQ(v.zero_norm_elements, 2);
  EXPECT_EQ(drop_zero_elements(p).size(), 2);
}

TEST(Validate, BothFormulationsAgree) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = std::uniform_int_distribution<int>(1, 4)(rng);
    const int m = std::uniform_int_distribution<int>(d, 7)(rng);
    Povm p = random_haar(d, m, rng());
    if (trial % 2 == 1) p = scaled(p, std::uniform_real_distribution<double>(0.8, 1.2)(rng));
    const double tol = 1e-8;
    EXPECT_EQ(validate(p, tol).ok, operator_residual(p) <= tol);
    EXPECT_NEAR(validate(p, tol).max_residual, operator_residual(p), 1e-12);
  }
}

TEST(CanonicalDistribution, Examples) {
  for (double q : canonical_distribution(trine()).probs) EXPECT_NEAR(q, 1.0 / 3.0, 1e-15);
  for (double q : canonical_distribution(computational_basis(5)).probs) EXPECT_NEAR(q, 0.2, 1e-15);
  for (double q : canonical_distribution(kpom()).probs) EXPECT_NEAR(q, 0.25, 1e-15);
}

TEST(CanonicalDistribution, SumsToOne) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto q = canonical_distribution(random_haar(3, 7, seed)).probs;
    EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(PosteriorDistribution, TrineSource) {
  const auto p = posterior_distribution(trine(), trine_source()).probs;
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3.0, 1e-12);
}

TEST(PosteriorDistribution, DeterministicOutcome) {
  const Ensemble e(2, {ket({1.0, 0.0})}, {1.0});
  const auto p = posterior_distribution(computational_basis(2), e).probs;
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
}

TEST(PosteriorDistribution, MaximallyMixedSourceGivesCanonical) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = std::uniform_int_distribution<int>(2, 4)(rng);
    const Povm p = random_haar(d, d + 3, rng());
    // A random orthonormal basis with uniform weights averages to I/d.
    const ComplexMatrix u = random_unitary(d, rng);
    std::vector<ComplexVector> states;
    for (int i = 0; i < d; ++i) states.push_back(u.col(i));
    const Ensemble source(d, states, std::vector<double>(static_cast<size_t>(d), 1.0 / d));
    ASSERT_LE(max_abs(ComplexMatrix(source.average_state() - ComplexMatrix::Identity(d, d) / d)), 1e-10);
    const auto post = posterior_distribution(p, source).probs;
    const auto canon = canonical_distribution(p).probs;
    for (size_t mu = 0; mu < post.size(); ++mu) EXPECT_NEAR(post[mu], canon[mu], 1e-12);
  }
}

TEST(MutualInformation, TrineOnTrineSourceBruteForce) {
  // p(μ|i) = 0 for i = μ and 1/2 otherwise; p_i = 1/3.
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int mu = 0; mu < 3; ++mu) {
      const double cond = i == mu ? 0.0 : 0.5;
      const double joint = cond / 3.0;
      if (joint > 0.0) oracle += joint * std::log2(joint / ((1.0 / 3.0) * (1.0 / 3.0)));
    }
  }
  EXPECT_NEAR(oracle, std::log2(3.0) - 1.0, 1e-15);
  EXPECT_NEAR(mutual_information(trine(), trine_source()), oracle, 1e-12);
}

TEST(MutualInformation, PerfectDistinguishability) {
  const Ensemble e(2, {ket({1.0, 0.0}), ket({0.0, 1.0})}, {0.5, 0.5});
  EXPECT_NEAR(mutual_information(computational_basis(2), e), 1.0, 1e-15);
}

TEST(MutualInformation, SingleStateSource) {
  const Ensemble e(2, {ket({0.6, 0.8})}, {1.0});
  EXPECT_NEAR(mutual_information(trine(), e), 0.0, 1e-15);
}

TEST(MutualInformation, BoundedBySourceEntropy) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 3;
    const int n = 4;
    std::vector<ComplexVector> states;
    std::vector<double> probs;
    for (int i = 0; i < n; ++i) {
      states.push_back(naimark_lab::testing::random_state(d, rng));
      probs.push_back(std::uniform_real_distribution<double>(0.1, 1.0)(rng));
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    double source_entropy = 0.0;
    for (double& p : probs) {
      p /= total;
      source_entropy -= p * std::log2(p);
    }
    probs.back() = 1.0 - std::accumulate(probs.begin(), probs.end() - 1, 0.0);
    const double info = mutual_information(random_haar(d, 5, rng()), Ensemble(d, states, probs));
    EXPECT_GE(info, 0.0);
    EXPECT_LE(info, source_entropy + 1e-12);
  }
}

TEST(Trine, OverlapsAndOrthogonality) {
  const Povm t = trine();
  EXPECT_TRUE(validate(t, 1e-12).ok);
  for (int mu = 0; mu < 3; ++mu) {
    EXPECT_NEAR(t.norm2(mu), 2.0 / 3.0, 1e-15);
    for (int nu = mu + 1; nu < 3; ++nu) EXPECT_NEAR(std::abs(t.element(mu).dot(t.element(nu))), 1.0 / 3.0, 1e-15);
    const double angle = (mu + 1) * std::numbers::pi / 3.0;
    const ComplexVector alpha = ket({std::cos(angle), std::sin(angle)});
    EXPECT_NEAR(std::abs(alpha.dot(t.element(mu))), 0.0, 1e-15);
  }
}

TEST(RandomHaar, ValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Povm p = random_haar(3, 6, seed);
    EXPECT_TRUE(validate(p, 1e-10).ok);
    EXPECT_EQ(p.rows(), random_haar(3, 6, seed).rows());
  }
  const Povm vn = random_haar(2, 2, 9);
  EXPECT_LE(orthonormality_residual(ComplexMatrix(vn.rows().transpose())), 1e-12);
  EXPECT_THROW(random_haar(3, 2, 0), std::invalid_argument);
}

TEST(ConvexCombine, HalfHalfGivesKpom) {
  const Povm plus_minus(2, {ket({kS, kS}), ket({kS, -kS})});
  const Povm mix = convex_combine(computational_basis(2), plus_minus, 0.5);
  EXPECT_TRUE(same_up_to_phases(mix, kpom(), 1e-15));
}

TEST(ConvexCombine, EndpointAndValidity) {
  const Povm p = convex_combine(trine(), computational_basis(2), 1.0);
  EXPECT_EQ(p.size(), 5);
  EXPECT_TRUE(validate(p, 1e-12).ok);
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    EXPECT_TRUE(validate(convex_combine(random_haar(3, 4, rng()), random_haar(3, 5, rng()), w), 1e-10).ok);
  }
  EXPECT_THROW(convex_combine(trine(), computational_basis(3), 0.5), DimensionError);
  EXPECT_THROW(convex_combine(trine(), trine(), 1.5), ValidationError);
}

TEST(PostProcess, Examples) {
  const Povm t = trine();
  EXPECT_EQ(post_process(t, {{1.0}, {1.0}, {1.0}}).rows(), t.rows());
  const Povm split = post_process(computational_basis(2), {{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_EQ(split.size(), 4);
  EXPECT_TRUE(validate(split, 1e-15).ok);
  EXPECT_THROW(post_process(t, {{0.5, 0.4}, {1.0}, {1.0}}), ValidationError);
  EXPECT_THROW(post_process(t, {{1.0}}), DimensionError);
}

TEST(PostProcess, RandomSplitsStayValid) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    const Povm p = random_haar(2, 3, rng());
    std::vector<std::vector<double>> splits;
    for (int mu = 0; mu < p.size(); ++mu) {
      const double a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      splits.push_back({a, 1.0 - a});
    }
    EXPECT_TRUE(validate(post_process(p, splits), 1e-10).ok);
  }
}

TEST(MergeParallel, KpomUnchanged) {
  EXPECT_TRUE(same_up_to_phases(merge_parallel(kpom(), 1e-9), kpom(), 1e-15));
}

TEST(MergeParallel, SplitElementMergesBack) {
  const Povm n = n_d3();
  const Povm n_prime(3, {ket({kS, 0.0, 0.0}), n.element(1), n.element(2), ket({kS, 0.0, 0.0}), n.element(3),
                         n.element(4)});
  EXPECT_TRUE(validate(n_prime, 1e-12).ok);
  const Povm merged = merge_parallel(n_prime, 1e-9);
  EXPECT_TRUE(same_up_to_phases(merged, n, 1e-12));
  EXPECT_TRUE(same_up_to_phases(merge_parallel(merged, 1e-9), merged, 1e-15));
}

TEST(MergeParallel, PreservesValidity) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const Povm p = post_process(random_haar(2, 3, rng()), {{0.3, 0.7}, {1.0}, {0.5, 0.25, 0.25}});
    const Povm merged = merge_parallel(p, 1e-9);
    EXPECT_EQ(merged.size(), 3);
    EXPECT_TRUE(validate(merged, 1e-10).ok);
  }
}

TEST(Tensor, TrineSquared) {
  const Povm t2 = tensor(trine(), trine());
  EXPECT_EQ(t2.dim(), 4);
  EXPECT_EQ(t2.size(), 9);
  EXPECT_TRUE(validate(t2, 1e-12).ok);
}

TEST(Tensor, TrivialFactorAndCanonicalProduct) {
  const Povm one = computational_basis(1);
  EXPECT_EQ(tensor(trine(), one).rows(), trine().rows());
  const Povm a = random_haar(2, 3, 1);
  const Povm b = random_haar(3, 4, 2);
  const auto qa = canonical_distribution(a).probs;
  const auto qb = canonical_distribution(b).probs;
  const auto qab = canonical_distribution(tensor(a, b)).probs;
  for (size_t mu = 0; mu < qa.size(); ++mu)
    for (size_t nu = 0; nu < qb.size(); ++nu) EXPECT_NEAR(qab[mu * qb.size() + nu], qa[mu] * qb[nu], 1e-14);
}

TEST(RefineToRank1, Projectors) {
  std::vector<ComplexMatrix> proj;
  const Povm vn = random_haar(3, 3, 4);
  for (int mu = 0; mu < 3; ++mu) proj.push_back(vn.element(mu) * vn.element(mu).adjoint());
  EXPECT_TRUE(same_up_to_phases(refine_to_rank1(proj), vn, 1e-10));
}

TEST(RefineToRank1, DiagonalBlocks) {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  ComplexMatrix b = ComplexMatrix::Zero(3, 3);
  b(2, 2) = 1.0;
  const Povm p = refine_to_rank1({a, b});
  EXPECT_EQ(p.size(), 3);
  EXPECT_TRUE(validate(p, 1e-12).ok);
}

TEST(RefineToRank1, RandomResolution) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix g = gaussian_matrix(3, 3, rng);
    const ComplexMatrix h = g * g.adjoint();
    // A = H(H + I)^{-1}, B = (H + I)^{-1}.
    const Eigensystem es = hermitian_eigensystem(h);
    Eigen::VectorXd a_vals(3);
    Eigen::VectorXd b_vals(3);
    for (int i = 0; i < 3; ++i) {
      a_vals(i) = es.values(i) / (es.values(i) + 1.0);
      b_vals(i) = 1.0 - a_vals(i);
    }
    const ComplexMatrix a = es.vectors * a_vals.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    const ComplexMatrix b = es.vectors * b_vals.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    const Povm p = refine_to_rank1({a, b});
    EXPECT_TRUE(validate(p, 1e-10).ok);
  }
  EXPECT_THROW(refine_to_rank1({ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)}), ValidationError);
}
