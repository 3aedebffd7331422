#include "sbd/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbd/errors.hpp"

namespace sbd {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw ContractError("DenseMatrix::multiply: dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += a_[i * n_ + j] * x[j];
    y[i] = acc;
  }
  return y;
}

double DenseMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

namespace {

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigensolve(DenseMatrix a) {
  const std::size_t n = a.size();
  for (double v : a.data())
    if (!std::isfinite(v)) throw ContractError("jacobi_eigensolve: non-finite matrix entry");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = s;
    }

  DenseMatrix v = DenseMatrix::identity(n);
  const double target = 1e-14 * a.frobenius_norm();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

}  // namespace sbd
