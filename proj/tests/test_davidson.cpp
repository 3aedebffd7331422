#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sbd/apply.hpp"
#include "sbd/davidson.hpp"
#include "sbd/errors.hpp"
#include "sbd/oracle.hpp"
#include "support.hpp"

using namespace sbd;

namespace {

// Diagonal ramp plus a random symmetric coupling, the usual CI-like shape.
DenseMatrix ramp_matrix(std::size_t n, double coupling, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 0.05 * static_cast<double>(i) + 0.5 * u(rng);
    for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i) = coupling * u(rng);
  }
  return m;
}

LinearOperator dense_op(const DenseMatrix& m) {
  return [&m](std::span<const double> x, std::span<double> y) {
    const auto r = m.multiply(x);
    std::copy(r.begin(), r.end(), y.begin());
  };
}

std::vector<double> diag_of(const DenseMatrix& m) {
  std::vector<double> d(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) d[i] = m(i, i);
  return d;
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void expect_internal_invariants(const DavidsonResult& res) {
  const auto& h = res.stats.history;
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_LE(h[i].orthogonality_error, 1e-10) << "iteration " << h[i].iteration;
    if (i + 1 < h.size() && !h[i].restarted) {
      const double a = h[i].ritz_values[0], b = h[i + 1].ritz_values[0];
      EXPECT_LE(b, a + 1e-12 * std::max(1.0, std::abs(a))) << "iteration " << h[i + 1].iteration;
    }
  }
  for (const auto& r : res.stats.restarts)
    EXPECT_NEAR(r.theta_after, r.theta_before, 1e-12 * std::max(1.0, std::abs(r.theta_before)));
}

}  // namespace

TEST(Precondition, Arithmetic) {
  const std::vector<double> r{1, 1, 1}, d{5, 1, 3};
  const auto t = precondition(r, d, 3.0, 1e-6);
  EXPECT_DOUBLE_EQ(t[0], 0.5);
  EXPECT_DOUBLE_EQ(t[1], -0.5);
  EXPECT_DOUBLE_EQ(t[2], 1e6);
  EXPECT_TRUE(std::isfinite(t[2]));
}

TEST(Precondition, SizeMismatch) {
  const std::vector<double> r{1, 1}, d{1};
  EXPECT_THROW(precondition(r, d, 0.0, 1e-6), ContractError);
}

TEST(Orthogonalize, OrthogonalInputOnlyNormalized) {
  std::vector<std::vector<double>> v{{1, 0, 0}};
  const std::vector<double> t{0, 3, 4};
  auto out = orthogonalize(t, v, true);
  ASSERT_TRUE(out);
  EXPECT_DOUBLE_EQ((*out)[1], 0.6);
  EXPECT_DOUBLE_EQ((*out)[2], 0.8);
}

TEST(Orthogonalize, DependentAndZeroRejected) {
  std::vector<std::vector<double>> v{{0, 1, 0}};
  EXPECT_FALSE(orthogonalize(std::vector<double>{0, 1, 0}, v, true));
  EXPECT_FALSE(orthogonalize(std::vector<double>{0, 0, 0}, v, false));
}

TEST(Orthogonalize, TenRandomVectorsGiveIdentityGram) {
  std::vector<std::vector<double>> v;
  for (std::uint64_t k = 0; k < 10; ++k) {
    auto out = orthogonalize(sbd::testing::random_vector(50, k), v, true);
    ASSERT_TRUE(out);
    v.push_back(*out);
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      double g = 0;
      for (std::size_t k = 0; k < 50; ++k) g += v[i][k] * v[j][k];
      EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(ProjectedEigensolve, Diagonal) {
  DenseMatrix t(2);
  t(0, 0) = 2;
  t(1, 1) = 1;
  const auto e = projected_eigensolve(t);
  EXPECT_EQ(e.values[0], 1.0);
  EXPECT_EQ(e.values[1], 2.0);
}

TEST(ProjectedEigensolve, TwoByTwo) {
  DenseMatrix t(2, 1.0);
  t(0, 0) = t(1, 1) = 2;
  const auto e = projected_eigensolve(t);
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], 3.0, 1e-15);
  const double s = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), s, 1e-15);
  EXPECT_NEAR(e.vectors(0, 0), -e.vectors(1, 0), 1e-15);
  EXPECT_NEAR(e.vectors(0, 1), e.vectors(1, 1), 1e-15);
}

TEST(ProjectedEigensolve, TraceAndReconstruction) {
  const DenseMatrix t = ramp_matrix(30, 0.7, 5);
  const auto e = projected_eigensolve(t);
  double trace = 0, sum = 0;
  for (std::size_t i = 0; i < 30; ++i) trace += t(i, i);
  for (double v : e.values) sum += v;
  EXPECT_NEAR(sum, trace, 1e-10);
  DenseMatrix rec(30);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j)
      for (std::size_t k = 0; k < 30; ++k) rec(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
  double err = 0;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) err += (rec(i, j) - t(i, j)) * (rec(i, j) - t(i, j));
  EXPECT_LE(std::sqrt(err), 1e-10 * t.frobenius_norm());
  for (std::size_t k = 1; k < 30; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
}

TEST(ProjectedEigensolve, NonFiniteRejected) {
  DenseMatrix t(2);
  t(0, 1) = t(1, 0) = std::nan("");
  EXPECT_THROW(projected_eigensolve(t), ContractError);
}

TEST(Davidson, OneByOne) {
  DenseMatrix m(1);
  m(0, 0) = -2.5;
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, {});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_EQ(res.energies[0], -2.5);
}

TEST(Davidson, HubbardDimer) {
  const IntegralTable t = hubbard_dimer(1.0, 4.0);
  const SelectedBasis b = sbd::testing::hubbard_basis();
  ProductHamiltonian h(b, t, {});
  const auto res = davidson_solve([&](auto x, auto y) { h.apply(x, y); }, h.diagonal(), {}, {});
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.energies[0], 2.0 - std::sqrt(8.0), 1e-8);
}

TEST(Davidson, RandomFiveHundredMatchesOracle) {
  const DenseMatrix m = ramp_matrix(500, 0.02, 17);
  const double exact = dense_eigensolve(m).values[0];
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, {});
  ASSERT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 100);
  EXPECT_NEAR(res.energies[0], exact, 1e-8);
  expect_internal_invariants(res);
}

TEST(Davidson, RitzVectorAndResidualRecomputed) {
  const DenseMatrix m = ramp_matrix(120, 0.05, 3);
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, {});
  ASSERT_TRUE(res.converged);
  const auto& u = res.eigenvectors[0];
  EXPECT_NEAR(norm(u), 1.0, 1e-12);
  auto hu = m.multiply(u);
  for (std::size_t i = 0; i < hu.size(); ++i) hu[i] -= res.energies[0] * u[i];
  EXPECT_NEAR(norm(hu), res.residual_norms[0], 1e-10);
}

TEST(Davidson, ThickRestartKeepsProgress) {
  const DenseMatrix m = ramp_matrix(200, 0.08, 21);
  DavidsonOptions o;
  o.max_subspace = 6;
  o.restart_keep = 3;
  o.max_iters = 500;
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, o);
  ASSERT_TRUE(res.converged);
  EXPECT_FALSE(res.stats.restarts.empty());
  for (const auto& it : res.stats.history) EXPECT_LE(it.subspace_size, 6);
  EXPECT_NEAR(res.energies[0], dense_eigensolve(m).values[0], 1e-8);
  expect_internal_invariants(res);
}

TEST(Davidson, SeveralRootsMatchOracle) {
  const IntegralTable t = random_integrals(5, 4);
  const auto b = SelectedBasis::full_product(5, 2, 2);
  ProductHamiltonian h(b, t, {});
  DavidsonOptions o;
  o.n_roots = 3;
  const auto res = davidson_solve([&](auto x, auto y) { h.apply(x, y); }, h.diagonal(), {}, o);
  ASSERT_TRUE(res.converged);
  const auto exact = dense_eigensolve(assemble_dense(h.basis(), t)).values;
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(res.energies[k], exact[k], 1e-8);
  for (double r : res.residual_norms) EXPECT_LE(r, o.tol_residual);
}

TEST(Davidson, InitialVectorIsUsed) {
  const DenseMatrix m = ramp_matrix(60, 0.05, 8);
  const auto exact = dense_eigensolve(m);
  std::vector<double> x0(60);
  for (std::size_t i = 0; i < 60; ++i) x0[i] = exact.vectors(i, 0);
  const auto res = davidson_solve(dense_op(m), diag_of(m), x0, {});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
}

TEST(Davidson, IterationLimitGivesBestEffort) {
  const DenseMatrix m = ramp_matrix(300, 0.1, 2);
  DavidsonOptions o;
  o.max_iters = 3;
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, o);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_EQ(res.energies.size(), 1u);
  EXPECT_GT(res.residual_norms[0], o.tol_residual);
}

TEST(Davidson, BreakdownWhenSpaceIsExhausted) {
  const DenseMatrix m = ramp_matrix(5, 0.3, 6);
  DavidsonOptions o;
  o.tol_residual = 1e-300;
  const auto res = davidson_solve(dense_op(m), diag_of(m), {}, o);
  EXPECT_FALSE(res.converged);
  EXPECT_GE(res.stats.breakdowns, 1);
  EXPECT_NEAR(res.energies[0], dense_eigensolve(m).values[0], 1e-12);
}

TEST(Davidson, ContractErrors) {
  DenseMatrix m(2);
  DavidsonOptions o;
  o.n_roots = 3;
  o.restart_keep = 4;
  EXPECT_THROW(davidson_solve(dense_op(m), diag_of(m), {}, o), ContractError);
  DavidsonOptions bad;
  bad.n_roots = 5;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = {};
  bad.precond_delta = 0;
  EXPECT_THROW(bad.validate(), ContractError);
  const std::vector<double> zero(2, 0.0);
  EXPECT_THROW(davidson_solve(dense_op(m), diag_of(m), zero, {}), ContractError);
}
