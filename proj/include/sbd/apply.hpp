#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbd/basis.hpp"
#include "sbd/exec.hpp"
#include "sbd/integrals.hpp"

namespace sbd {

/// Rectangle of (alpha index, beta index) pairs, half-open on both axes.
struct IndexWindow {
  std::uint32_t alpha_begin = 0, alpha_end = 0;
  std::uint32_t beta_begin = 0, beta_end = 0;

  std::uint32_t alpha_size() const noexcept { return alpha_end - alpha_begin; }
  std::uint32_t beta_size() const noexcept { return beta_end - beta_begin; }
  std::uint64_t area() const noexcept {
    return static_cast<std::uint64_t>(alpha_size()) * beta_size();
  }
  friend bool operator==(const IndexWindow&, const IndexWindow&) = default;
};

IndexWindow full_window(const SelectedBasis& basis);

/// Composed determinants for a bra window and a ket window, so the task loops
/// never build a determinant per work item. A side is rebuilt only when its
/// requested window differs from the cached one.
class DetCache {
 public:
  DetCache() = default;

  /// Makes the cache cover `bra` and `ket`. Returns true if anything was rebuilt.
  bool ensure(const SelectedBasis& basis, const IndexWindow& bra, const IndexWindow& ket);

  const IndexWindow& bra_window() const noexcept { return bra_window_; }
  const IndexWindow& ket_window() const noexcept { return ket_window_; }

  // Global (ia, ib) indices; must lie inside the respective window.
  const Determinant& bra(std::uint32_t ia, std::uint32_t ib) const noexcept {
    return bra_[static_cast<std::size_t>(ia - bra_window_.alpha_begin) * bra_window_.beta_size() +
                (ib - bra_window_.beta_begin)];
  }
  const Determinant& ket(std::uint32_t ja, std::uint32_t jb) const noexcept {
    return ket_[static_cast<std::size_t>(ja - ket_window_.alpha_begin) * ket_window_.beta_size() +
                (jb - ket_window_.beta_begin)];
  }

  std::span<const Determinant> bra_dets() const noexcept { return bra_; }
  std::span<const Determinant> ket_dets() const noexcept { return ket_; }

  /// Determinant records held (bra area + ket area).
  std::size_t records() const noexcept { return bra_.size() + ket_.size(); }
  std::size_t bytes() const noexcept { return records() * sizeof(Determinant); }
  /// Number of ensure() calls that rebuilt at least one side.
  std::size_t rebuild_count() const noexcept { return rebuilds_; }

 private:
  static void fill(const SelectedBasis& basis, const IndexWindow& w, std::vector<Determinant>& out);

  bool valid_ = false;
  IndexWindow bra_window_, ket_window_;
  std::vector<Determinant> bra_, ket_;
  std::size_t rebuilds_ = 0;
};

/// Throws RangeError when a window exceeds the basis string lists.
DetCache build_det_cache(const SelectedBasis& basis, const IndexWindow& bra,
                         const IndexWindow& ket);

struct SpinTables {
  ExcitationTable alpha;
  ExcitationTable beta;
};

SpinTables build_spin_tables(const SelectedBasis& basis);

/// d_i = <D_i|H|D_i> for every configuration of the cache's bra window.
std::vector<double> compute_diagonal(const SelectedBasis& basis, const IntegralTable& table,
                                     const DetCache& cache);

/// y_bra += H[bra rows, ket columns] * x_ket for a product basis.
///
/// The bra and ket windows come from `cache` and must span all beta strings.
/// x_ket and y_bra are laid out row-major over their windows. Contributions:
/// diagonal and task 1 (beta singles/doubles, alpha fixed) for rows whose alpha
/// index lies in both windows; task 2 (alpha singles/doubles, beta fixed) and
/// task 0 (alpha single x beta single) for alpha moves landing in the ket window.
/// `diag_bra`, when non-empty, supplies the bra-window diagonal.
void accumulate_block(const SelectedBasis& basis, const IntegralTable& table,
                      const SpinTables& tables, const DetCache& cache,
                      std::span<const double> diag_bra, std::span<const double> x_ket,
                      std::span<double> y_bra, const ExecConfig& exec);

/// y = H x over a product basis. Ensures the cache covers the full basis
/// (no rebuild when it already does). Throws ContractError on size mismatch.
std::vector<double> apply_H(std::span<const double> x, const SelectedBasis& basis,
                            const IntegralTable& table, const SpinTables& tables, DetCache& cache,
                            const ExecConfig& exec, std::span<const double> diag = {});

/// y = H x over an explicit determinant list; neighbours are generated from
/// each packed bitstring and probed in the basis lookup.
std::vector<double> apply_H_full(std::span<const double> x, const SelectedBasis& basis,
                                 const IntegralTable& table, const ExecConfig& exec,
                                 std::span<const double> diag = {});

/// Diagonal of an explicit-mode basis.
std::vector<double> compute_diagonal_full(const SelectedBasis& basis, const IntegralTable& table);

/// Owns the per-basis state of repeated product-mode applications.
class ProductHamiltonian {
 public:
  ProductHamiltonian(const SelectedBasis& basis, const IntegralTable& table, ExecConfig exec);
  // Basis and integrals are held by reference.
  ProductHamiltonian(SelectedBasis&&, const IntegralTable&, ExecConfig) = delete;
  ProductHamiltonian(const SelectedBasis&, IntegralTable&&, ExecConfig) = delete;

  void apply(std::span<const double> x, std::span<double> y);

  const SelectedBasis& basis() const noexcept { return *basis_; }
  const IntegralTable& table() const noexcept { return *table_; }
  const SpinTables& tables() const noexcept { return tables_; }
  const DetCache& cache() const noexcept { return cache_; }
  const std::vector<double>& diagonal() const noexcept { return diag_; }
  const ExecConfig& exec() const noexcept { return exec_; }
  void set_exec(const ExecConfig& exec) noexcept { exec_ = exec; }

 private:
  const SelectedBasis* basis_;
  const IntegralTable* table_;
  ExecConfig exec_;
  SpinTables tables_;
  DetCache cache_;
  std::vector<double> diag_;
};

}  // namespace sbd
