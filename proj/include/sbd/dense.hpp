#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sbd {

/// Square dense matrix, row-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return a_; }

  std::vector<double> multiply(std::span<const double> x) const;
  double frobenius_norm() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct SymmetricEigen {
  std::vector<double> values;  ///< ascending
  DenseMatrix vectors;         ///< column j is the eigenvector of values[j]
};

/// Full spectral decomposition of a symmetric matrix by cyclic Jacobi
/// rotations. The input is symmetrized first; sweeps continue until the
/// off-diagonal Frobenius norm drops below 1e-14 * ||A||_F.
/// Throws ContractError on non-finite entries.
SymmetricEigen jacobi_eigensolve(DenseMatrix a);

}  // namespace sbd
