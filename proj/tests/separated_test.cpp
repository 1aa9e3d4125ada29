#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lsr/separated.hpp"
#include "support.hpp"

using lsr::DenseMatrix;
using lsr::KronTerm;
using lsr::SeparatedMatrix;
using lsr::Shape;
using lsr::Vector;

namespace {

KronTerm term(double lambda, std::vector<DenseMatrix> factors) {
  KronTerm t;
  t.lambda = lambda;
  t.factors = std::move(factors);
  return t;
}

SeparatedMatrix random_separated(std::mt19937_64& gen, std::size_t s, Shape left, Shape right) {
  SeparatedMatrix out(Shape{left.rows * right.rows, left.cols * right.cols});
  std::normal_distribution<double> lam(0.0, 2.0);
  for (std::size_t k = 0; k < s; ++k) {
    out.push_back(term(lam(gen), {oracle::random_matrix(left.rows, left.cols, gen),
                                  oracle::random_matrix(right.rows, right.cols, gen)}));
  }
  return out;
}

DenseMatrix oracle_materialize(const SeparatedMatrix& s) {
  DenseMatrix out(s.shape());
  for (const auto& t : s.terms()) {
    DenseMatrix prod = t.factors.front();
    for (std::size_t i = 1; i < t.factors.size(); ++i) prod = oracle::naive_kron(prod, t.factors[i]);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += t.lambda * prod(i, j);
  }
  return out;
}

DenseMatrix planted_sum(std::mt19937_64& gen, std::size_t s, Shape left, Shape right) {
  DenseMatrix m(left.rows * right.rows, left.cols * right.cols);
  for (std::size_t k = 0; k < s; ++k) {
    const auto p = oracle::random_matrix(left.rows, left.cols, gen);
    const auto q = oracle::random_matrix(right.rows, right.cols, gen);
    m = m + oracle::naive_kron(p, q);
  }
  return m;
}

}  // namespace

TEST(SeparatedMatrix, RejectsNonConformingTerms) {
  SeparatedMatrix s(Shape{4, 4});
  EXPECT_THROW(s.push_back(term(1, {lsr::identity(2), lsr::identity(3)})), lsr::ArgumentError);
  s.push_back(term(1, {lsr::identity(2), lsr::identity(2)}));
  EXPECT_THROW(s.push_back(term(1, {lsr::identity(4)})), lsr::ArgumentError);
  EXPECT_THROW(s.push_back(term(1, {})), lsr::ArgumentError);
}

TEST(Materialize, IdentityTerm) {
  SeparatedMatrix s(Shape{4, 4}, {term(1, {lsr::identity(2), lsr::identity(2)})});
  EXPECT_EQ(lsr::materialize(s), lsr::identity(4));
}

TEST(Materialize, EmptyIsZero) {
  EXPECT_EQ(lsr::materialize(SeparatedMatrix(Shape{3, 5})), DenseMatrix(3, 5));
}

TEST(Materialize, TwoTermsMatchPerTermOracle) {
  std::mt19937_64 gen(31);
  const auto s = random_separated(gen, 2, {2, 3}, {3, 2});
  EXPECT_LE(oracle::rel_err(lsr::materialize(s), oracle_materialize(s)), 1e-14);
}

TEST(Materialize, ThreeFactorTerms) {
  std::mt19937_64 gen(32);
  SeparatedMatrix s(Shape{8, 12});
  for (int k = 0; k < 3; ++k)
    s.push_back(term(0.5 + k, {oracle::random_matrix(2, 3, gen), oracle::random_matrix(2, 2, gen),
                               oracle::random_matrix(2, 2, gen)}));
  EXPECT_LE(oracle::rel_err(lsr::materialize(s), oracle_materialize(s)), 1e-14);
  const auto x = oracle::random_vector(12, gen);
  EXPECT_LE(oracle::rel_err(lsr::apply(s, x), oracle::naive_matvec(oracle_materialize(s), x)),
            1e-12);
}

TEST(Apply, IdentityTerm) {
  SeparatedMatrix s(Shape{6, 6}, {term(1, {lsr::identity(2), lsr::identity(3)})});
  const Vector x{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(lsr::apply(s, x), x);
}

TEST(Apply, ZeroLambdasGiveZero) {
  std::mt19937_64 gen(33);
  auto s = random_separated(gen, 3, {2, 2}, {2, 2});
  SeparatedMatrix z(s.shape());
  for (auto t : s.terms()) {
    t.lambda = 0.0;
    z.push_back(t);
  }
  EXPECT_EQ(lsr::apply(z, oracle::random_vector(4, gen)), Vector(4, 0.0));
}

TEST(Apply, LengthMismatch) {
  SeparatedMatrix s(Shape{4, 4}, {term(1, {lsr::identity(2), lsr::identity(2)})});
  EXPECT_THROW(lsr::apply(s, Vector(3)), lsr::ArgumentError);
}

class ApplyProperty : public ::testing::TestWithParam<int> {};

TEST_P(ApplyProperty, MatchesMaterializedMultiply) {
  std::mt19937_64 gen(700 + GetParam());
  auto d = [&] { return oracle::random_dim(gen, 1, 16); };
  const Shape left{d(), d()}, right{d(), d()};
  const auto s = random_separated(gen, oracle::random_dim(gen, 1, 8), left, right);
  const auto x = oracle::random_vector(s.shape().cols, gen);
  EXPECT_LE(oracle::rel_err(lsr::apply(s, x), oracle::naive_matvec(oracle_materialize(s), x)),
            1e-10);
}

INSTANTIATE_TEST_SUITE_P(Random, ApplyProperty, ::testing::Range(0, 20));

TEST(ConditionNumber, SingleUnitTermIsOne) {
  std::mt19937_64 gen(34);
  auto p = oracle::random_matrix(3, 2, gen);
  auto q = oracle::random_matrix(2, 4, gen);
  p = (1.0 / oracle::frob(p)) * p;
  q = (1.0 / oracle::frob(q)) * q;
  for (double lambda : {1e-3, 1.0, 7.5}) {
    SeparatedMatrix s(Shape{6, 8}, {term(lambda, {p, q})});
    EXPECT_NEAR(lsr::condition_number(s), 1.0, 1e-12);
  }
}

TEST(ConditionNumber, CancellationIsDivisionByZero) {
  std::mt19937_64 gen(35);
  const auto p = oracle::random_matrix(2, 2, gen);
  const auto q = oracle::random_matrix(2, 2, gen);
  SeparatedMatrix s(Shape{4, 4}, {term(3.0, {p, q}), term(-3.0, {p, q})});
  try {
    (void)lsr::condition_number(s);
    FAIL() << "expected NumericalError";
  } catch (const lsr::NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
  }
}

TEST(ConditionNumber, DirectFormulaOnRandomTwoTerm) {
  std::mt19937_64 gen(36);
  const auto s = lsr::normalize_terms(random_separated(gen, 2, {3, 3}, {2, 2}));
  double ssq = 0.0;
  for (const auto& t : s.terms()) ssq += t.lambda * t.lambda;
  const double want = std::sqrt(ssq) / oracle::frob(oracle_materialize(s));
  EXPECT_NEAR(lsr::condition_number(s), want, 1e-12 * want);
  EXPECT_GE(lsr::condition_number(s), 1.0 - 1e-12);
}

TEST(ConditionNumber, GrowsWithCancellation) {
  // Two nearly opposite terms: γ blows up.
  const DenseMatrix a{{1, 0}, {0, 0}};
  const DenseMatrix b{{0, 0}, {0, 1}};
  SeparatedMatrix s(Shape{4, 4}, {term(1.0, {a, a}), term(-(1.0 - 1e-6), {a, a}), term(1e-6, {b, b})});
  EXPECT_GT(lsr::condition_number(s), 1e5);
}

TEST(CheckPrecision, DocumentedBoundaries) {
  SeparatedMatrix s(Shape{4, 4}, {term(1.0, {0.5 * lsr::identity(2), 0.5 * lsr::identity(2)})});
  // unit-norm factors: ‖0.5·I₂‖_F = √0.5; rescale to exactly one.
  s = lsr::normalize_terms(s);
  const double mu = 0x1.0p-11;
  EXPECT_NEAR(mu, 4.88e-4, 5e-7);
  EXPECT_TRUE(lsr::check_precision(s, {mu, 1.0}));
  EXPECT_FALSE(lsr::check_precision(s, {mu, 1e-6}));
  const double exact = lsr::condition_number(s) * mu * lsr::frobenius_norm(lsr::materialize(s));
  EXPECT_TRUE(lsr::check_precision(s, {mu, exact}));
  EXPECT_FALSE(lsr::check_precision(s, {mu, std::nextafter(exact, 0.0)}));
}

TEST(CheckPrecision, RejectsNonPositiveBudget) {
  SeparatedMatrix s(Shape{1, 1}, {term(1.0, {DenseMatrix{{1}}})});
  EXPECT_THROW(lsr::check_precision(s, {0.0, 1.0}), lsr::ArgumentError);
  EXPECT_THROW(lsr::check_precision(s, {1e-3, -1.0}), lsr::ArgumentError);
}

TEST(NormalizeTerms, WorkedExample) {
  SeparatedMatrix s(Shape{4, 4}, {term(1.0, {2.0 * lsr::identity(2), 3.0 * lsr::identity(2)})});
  const auto n = lsr::normalize_terms(s);
  ASSERT_EQ(n.separation_rank(), 1u);
  // ‖2I₂‖·‖3I₂‖ = 2√2 · 3√2 = 12.
  EXPECT_NEAR(n.terms()[0].lambda, 12.0, 1e-12);
  const DenseMatrix unit = (1.0 / std::sqrt(2.0)) * lsr::identity(2);
  EXPECT_LE(oracle::rel_err(n.terms()[0].factors[0], unit), 1e-15);
  EXPECT_LE(oracle::rel_err(n.terms()[0].factors[1], unit), 1e-15);
  EXPECT_LE(oracle::rel_err(lsr::materialize(n), oracle_materialize(s)), 1e-12);
}

TEST(NormalizeTerms, NegativeLambdaFlipsFirstFactor) {
  const DenseMatrix a{{1, 0}, {0, 0}};
  const DenseMatrix b{{0, 1}, {0, 0}};
  SeparatedMatrix s(Shape{4, 4}, {term(-5.0, {a, b})});
  const auto n = lsr::normalize_terms(s);
  EXPECT_EQ(n.terms()[0].lambda, 5.0);
  EXPECT_EQ(n.terms()[0].factors[0], -1.0 * a);
  EXPECT_EQ(n.terms()[0].factors[1], b);
}

TEST(NormalizeTerms, IdempotentAndSorted) {
  std::mt19937_64 gen(37);
  const auto once = lsr::normalize_terms(random_separated(gen, 5, {2, 3}, {3, 2}));
  for (std::size_t k = 1; k < once.terms().size(); ++k)
    EXPECT_GE(once.terms()[k - 1].lambda, once.terms()[k].lambda);
  for (const auto& t : once.terms()) {
    EXPECT_GT(t.lambda, 0.0);
    for (const auto& f : t.factors) EXPECT_NEAR(oracle::frob(f), 1.0, 1e-12);
  }
  const auto twice = lsr::normalize_terms(once);
  for (std::size_t k = 0; k < once.terms().size(); ++k) {
    EXPECT_NEAR(twice.terms()[k].lambda, once.terms()[k].lambda, 1e-15 * once.terms()[k].lambda);
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_LE(oracle::rel_err(twice.terms()[k].factors[i], once.terms()[k].factors[i]), 1e-15);
  }
}

TEST(NormalizeTerms, PreservesMaterialization) {
  std::mt19937_64 gen(38);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_separated(gen, 4, {3, 2}, {2, 3});
    EXPECT_LE(oracle::rel_err(lsr::materialize(lsr::normalize_terms(s)), oracle_materialize(s)),
              1e-12);
  }
}

TEST(NormalizeTerms, EqualLambdasKeepOriginalOrder) {
  const DenseMatrix a{{1, 0}, {0, 0}};
  const DenseMatrix b{{0, 0}, {0, 1}};
  SeparatedMatrix s(Shape{4, 4}, {term(2.0, {a, a}), term(2.0, {b, b}), term(3.0, {a, b})});
  const auto n = lsr::normalize_terms(s);
  EXPECT_EQ(n.terms()[0].factors[1], b);
  EXPECT_EQ(n.terms()[1].factors[0], a);
  EXPECT_EQ(n.terms()[1].factors[1], a);
  EXPECT_EQ(n.terms()[2].factors[0], b);
}

TEST(NormalizeTerms, ZeroFactorNamesTheTerm) {
  SeparatedMatrix s(Shape{4, 4}, {term(1.0, {lsr::identity(2), lsr::identity(2)}),
                                  term(1.0, {lsr::identity(2), DenseMatrix(2, 2)})});
  try {
    (void)lsr::normalize_terms(s);
    FAIL() << "expected DegenerateTermError";
  } catch (const lsr::DegenerateTermError& e) {
    EXPECT_EQ(e.term_index(), 1u);
  }
}

TEST(Rearrange, KroneckerProductBecomesOuterProduct) {
  std::mt19937_64 gen(39);
  const auto p = oracle::random_matrix(2, 2, gen);
  const auto q = oracle::random_matrix(3, 2, gen);
  const auto r = lsr::rearrange(oracle::naive_kron(p, q), {2, 2}, {3, 2});
  const auto vp = lsr::vec(p);
  const auto vq = lsr::vec(q);
  ASSERT_EQ(r.shape(), (Shape{4, 6}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(r(i, j), vp[i] * vq[j]);
  const auto sv = oracle::eigen_singular_values(r);
  EXPECT_LE(sv[1], 1e-12 * sv[0]);
}

TEST(Rearrange, MatchesReferenceIndexing) {
  std::mt19937_64 gen(40);
  const auto m = oracle::random_matrix(6, 12, gen);
  EXPECT_EQ(lsr::rearrange(m, {2, 3}, {3, 4}), oracle::naive_rearrange(m, {2, 3}, {3, 4}));
}

TEST(Rearrange, ZeroAndPermutation) {
  EXPECT_EQ(lsr::rearrange(DenseMatrix(4, 6), {2, 3}, {2, 2}), DenseMatrix(6, 4));
  std::mt19937_64 gen(41);
  const auto m = oracle::random_matrix(6, 6, gen);
  const auto r = lsr::rearrange(m, {3, 2}, {2, 3});
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> b(r.data().begin(), r.data().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Rearrange, NonConformingShapes) {
  EXPECT_THROW(lsr::rearrange(DenseMatrix(4, 4), {3, 2}, {2, 2}), lsr::ArgumentError);
}

class RearrangeRankOne : public ::testing::TestWithParam<int> {};

TEST_P(RearrangeRankOne, ForAnyConformingFactors) {
  std::mt19937_64 gen(900 + GetParam());
  auto d = [&] { return oracle::random_dim(gen, 1, 5); };
  const Shape left{d(), d()}, right{d(), d()};
  const auto p = oracle::random_matrix(left.rows, left.cols, gen);
  const auto q = oracle::random_matrix(right.rows, right.cols, gen);
  const auto sv = oracle::eigen_singular_values(lsr::rearrange(oracle::naive_kron(p, q), left, right));
  for (std::size_t i = 1; i < sv.size(); ++i) EXPECT_LE(sv[i], 1e-12 * sv[0]);
}

INSTANTIATE_TEST_SUITE_P(Random, RearrangeRankOne, ::testing::Range(0, 15));

TEST(NearestKronSum, SingleTermExactRecovery) {
  std::mt19937_64 gen(42);
  const auto m = planted_sum(gen, 1, {3, 2}, {4, 3});
  const auto s = lsr::nearest_kron_sum(m, {3, 2}, {4, 3}, 1);
  EXPECT_LE(oracle::rel_err(lsr::materialize(s), m), 1e-12);
  EXPECT_NEAR(lsr::condition_number(s), 1.0, 1e-12);
}

TEST(NearestKronSum, ThreeTermPlantAndSvdTail) {
  std::mt19937_64 gen(43);
  const Shape left{4, 3}, right{3, 4};
  const auto m = planted_sum(gen, 3, left, right);
  const auto r = oracle::naive_rearrange(m, left, right);
  const auto sv = oracle::eigen_singular_values(r);

  EXPECT_LE(oracle::rel_err(lsr::materialize(lsr::nearest_kron_sum(m, left, right, 3)), m), 1e-8);
  const double err2 = oracle::frob(m - lsr::materialize(lsr::nearest_kron_sum(m, left, right, 2)));
  EXPECT_NEAR(err2, sv[2], 1e-10 * sv[2]);
}

TEST(NearestKronSum, OutputIsNormalizedWithRequestedShapes) {
  std::mt19937_64 gen(44);
  const auto m = oracle::random_matrix(12, 12, gen);
  const auto s = lsr::nearest_kron_sum(m, {3, 4}, {4, 3}, 5);
  ASSERT_EQ(s.separation_rank(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& t = s.terms()[k];
    EXPECT_EQ(t.factors[0].shape(), (Shape{3, 4}));
    EXPECT_EQ(t.factors[1].shape(), (Shape{4, 3}));
    EXPECT_NEAR(oracle::frob(t.factors[0]), 1.0, 1e-12);
    EXPECT_NEAR(oracle::frob(t.factors[1]), 1.0, 1e-12);
    if (k > 0) {
      EXPECT_LE(t.lambda, s.terms()[k - 1].lambda);
    }
  }
}

TEST(NearestKronSum, FullRankReproducesInput) {
  std::mt19937_64 gen(45);
  const auto m = oracle::random_matrix(6, 4, gen);
  const auto s = lsr::nearest_kron_sum(m, {3, 2}, {2, 2}, 4);
  EXPECT_LE(oracle::rel_err(lsr::materialize(s), m), 1e-10);
}

TEST(NearestKronSum, ErrorMatchesTailAndIsMonotone) {
  std::mt19937_64 gen(46);
  const Shape left{4, 6}, right{6, 4};
  const auto m = oracle::random_matrix(24, 24, gen);
  const auto r = oracle::naive_rearrange(m, left, right);
  double prev = INFINITY;
  for (std::size_t s = 1; s <= 24; ++s) {
    const double err = oracle::frob(m - lsr::materialize(lsr::nearest_kron_sum(m, left, right, s)));
    const double tail = oracle::svd_tail(r, s);
    EXPECT_NEAR(err, tail, 1e-10 * oracle::frob(m)) << "s=" << s;
    EXPECT_LE(err, prev + 1e-12 * oracle::frob(m));
    prev = err;
  }
}

TEST(NearestKronSum, BeatsRandomCompetitors) {
  // Optimality spot check: no random s-term representation does better.
  std::mt19937_64 gen(47);
  const Shape left{3, 3}, right{3, 3};
  const auto m = oracle::random_matrix(9, 9, gen);
  const double best = oracle::frob(m - lsr::materialize(lsr::nearest_kron_sum(m, left, right, 2)));
  for (int t = 0; t < 50; ++t) {
    const auto other = random_separated(gen, 2, left, right);
    EXPECT_LE(best, oracle::frob(m - oracle_materialize(other)));
  }
}

TEST(NearestKronSum, RankTooLarge) {
  EXPECT_THROW(lsr::nearest_kron_sum(DenseMatrix(4, 4), {2, 2}, {2, 2}, 5), lsr::ArgumentError);
  EXPECT_THROW(lsr::nearest_kron_sum(DenseMatrix(4, 4), {2, 2}, {2, 2}, 0), lsr::ArgumentError);
}

TEST(FromRankDecomposition, PlantedSeparableTerm) {
  std::mt19937_64 gen(48);
  const auto a = oracle::random_vector(2, gen), b = oracle::random_vector(3, gen);
  const auto c = oracle::random_vector(4, gen), d = oracle::random_vector(2, gen);
  Vector u, v;
  for (double x : a)
    for (double y : b) u.push_back(x * y);
  for (double x : c)
    for (double y : d) v.push_back(x * y);
  const std::vector<Vector> us{u}, vs{v};
  const std::vector<std::size_t> rows{2, 3}, cols{4, 2};
  const auto split = lsr::from_rank_decomposition(us, vs, rows, cols);
  ASSERT_EQ(split.repr.separation_rank(), 1u);
  DenseMatrix want(6, 8);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 8; ++j) want(i, j) = u[i] * v[j];
  EXPECT_LE(oracle::rel_err(lsr::materialize(split.repr), want), 1e-12);
  EXPECT_LE(split.truncation[0].u_residual, 1e-12 * oracle::norm(u));
  EXPECT_LE(split.truncation[0].v_residual, 1e-12 * oracle::norm(v));
}

TEST(FromRankDecomposition, BasisVectorSplitsIntoBasisVectors) {
  const std::vector<std::size_t> dims{2, 2};
  const auto pieces = lsr::kron_split_vector(Vector{1, 0, 0, 0}, dims);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_EQ(pieces[0], (Vector{1, 0}));
  EXPECT_EQ(pieces[1], (Vector{1, 0}));
}

TEST(FromRankDecomposition, NonSeparableReportsSecondSingularValue) {
  const std::vector<Vector> us{Vector{1, 0, 0, 1}}, vs{Vector{1, 0, 0, 0}};
  const std::vector<std::size_t> dims{2, 2};
  const auto split = lsr::from_rank_decomposition(us, vs, dims, dims);
  EXPECT_NEAR(split.truncation[0].u_residual, 1.0, 1e-12);
  EXPECT_NEAR(split.truncation[0].v_residual, 0.0, 1e-15);
}

TEST(FromRankDecomposition, SeveralTermsThreeFactors) {
  std::mt19937_64 gen(49);
  const std::vector<std::size_t> rows{2, 3, 2}, cols{2, 2, 3};
  std::vector<Vector> us, vs;
  DenseMatrix want(12, 12);
  for (int k = 0; k < 3; ++k) {
    Vector u{1}, v{1};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto pu = oracle::random_vector(rows[i], gen);
      const auto pv = oracle::random_vector(cols[i], gen);
      Vector nu, nv;
      for (double x : u)
        for (double y : pu) nu.push_back(x * y);
      for (double x : v)
        for (double y : pv) nv.push_back(x * y);
      u = nu;
      v = nv;
    }
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) want(i, j) += u[i] * v[j];
    us.push_back(u);
    vs.push_back(v);
  }
  const auto split = lsr::from_rank_decomposition(us, vs, rows, cols);
  ASSERT_EQ(split.repr.separation_rank(), 3u);
  ASSERT_EQ(split.repr.factor_count(), 3u);
  EXPECT_LE(oracle::rel_err(lsr::materialize(split.repr), want), 1e-10);
  for (std::size_t k = 1; k < 3; ++k)
    EXPECT_GE(split.repr.terms()[k - 1].lambda, split.repr.terms()[k].lambda);
}

TEST(FromRankDecomposition, ArgumentErrors) {
  const std::vector<Vector> one{Vector(4, 1.0)};
  const std::vector<Vector> none;
  const std::vector<std::size_t> d22{2, 2}, d2{2}, d23{2, 3};
  EXPECT_THROW(lsr::from_rank_decomposition(one, none, d22, d22), lsr::ArgumentError);
  EXPECT_THROW(lsr::from_rank_decomposition(one, one, d2, d2), lsr::ArgumentError);
  EXPECT_THROW(lsr::from_rank_decomposition(one, one, d23, d22), lsr::ArgumentError);
}
