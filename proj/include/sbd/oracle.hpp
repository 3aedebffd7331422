#pragma once

#include <cstdint>

#include "sbd/basis.hpp"
#include "sbd/dense.hpp"
#include "sbd/integrals.hpp"

namespace sbd {

inline constexpr std::uint64_t kOracleCap = 4096;

/// M[i][j] = hij(det_i, det_j) for every pair of the basis, in basis order.
/// Throws ContractError when N exceeds `cap`.
DenseMatrix assemble_dense(const SelectedBasis& basis, const IntegralTable& table,
                           std::uint64_t cap = kOracleCap);

/// Same matrix built by applying the second-quantized Hamiltonian
///   H = e_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q
/// over spin orbitals to each ket. Slow; intended for norb <= 8.
DenseMatrix assemble_dense_fock(const SelectedBasis& basis, const IntegralTable& table,
                                std::uint64_t cap = kOracleCap);

/// Full spectrum, ascending. Throws ContractError on non-finite entries.
SymmetricEigen dense_eigensolve(const DenseMatrix& m);

}  // namespace sbd
