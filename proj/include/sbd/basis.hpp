#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbd/bitstring.hpp"

namespace sbd {

struct SingleExcitation {
  SpinString target;
  int hole;
  int particle;
  int phase;
};

struct DoubleExcitation {
  SpinString target;
  int hole1, hole2;          // hole1 < hole2
  int particle1, particle2;  // particle1 < particle2
  int phase;
};

/// Calls f(target_bits, p, r, phase) for every single excitation of `occ`
/// within `norb` orbitals, holes outer and particles inner, both ascending.
/// Allocation-free; the vector-returning wrappers below are built on it.
template <typename F>
void for_each_single(std::uint64_t occ, int norb, F&& f) {
  const std::uint64_t vir = ~occ & low_mask(norb);
  for (std::uint64_t o = occ; o; o &= o - 1) {
    const int p = std::countr_zero(o);
    const std::uint64_t hole = occ & ~(std::uint64_t{1} << p);
    for (std::uint64_t v = vir; v; v &= v - 1) {
      const int r = std::countr_zero(v);
      f(hole | (std::uint64_t{1} << r), p, r, move_phase(occ, p, r));
    }
  }
}

/// Calls f(target_bits, p, q, r, s, phase) for hole pairs {p<q} and particle
/// pairs {r<s}. The phase is that of p->r applied first, then q->s applied to
/// the intermediate string.
template <typename F>
void for_each_double(std::uint64_t occ, int norb, F&& f) {
  const std::uint64_t vir = ~occ & low_mask(norb);
  for (std::uint64_t o1 = occ; o1; o1 &= o1 - 1) {
    const int p = std::countr_zero(o1);
    for (std::uint64_t o2 = o1 & (o1 - 1); o2; o2 &= o2 - 1) {
      const int q = std::countr_zero(o2);
      for (std::uint64_t v1 = vir; v1; v1 &= v1 - 1) {
        const int r = std::countr_zero(v1);
        const std::uint64_t mid = (occ & ~(std::uint64_t{1} << p)) | (std::uint64_t{1} << r);
        const int phase1 = move_phase(occ, p, r);
        for (std::uint64_t v2 = v1 & (v1 - 1); v2; v2 &= v2 - 1) {
          const int s = std::countr_zero(v2);
          f((mid & ~(std::uint64_t{1} << q)) | (std::uint64_t{1} << s), p, q, r, s,
            phase1 * move_phase(mid, q, s));
        }
      }
    }
  }
}

std::vector<SingleExcitation> enumerate_singles(SpinString s, int norb);

std::vector<DoubleExcitation> enumerate_doubles(SpinString s, int norb);

enum class BasisMode { Product, Explicit };

/// The selected configuration space.
///
/// Product mode holds sorted unique alpha and beta string lists; configuration
/// (ia, ib) has global index ia * |B| + ib. Explicit mode holds a sorted unique
/// determinant list with a hash lookup.
class SelectedBasis {
 public:
  SelectedBasis() = default;

  static SelectedBasis product(int norb, int n_alpha, int n_beta, std::vector<SpinString> alpha,
                               std::vector<SpinString> beta);
  static SelectedBasis explicit_dets(int norb, int n_alpha, int n_beta,
                                     std::vector<Determinant> dets);
  /// Every string with the given electron counts, as a product basis.
  static SelectedBasis full_product(int norb, int n_alpha, int n_beta);

  BasisMode mode() const noexcept { return mode_; }
  int norb() const noexcept { return norb_; }
  int n_alpha_elec() const noexcept { return n_alpha_; }
  int n_beta_elec() const noexcept { return n_beta_; }

  const std::vector<SpinString>& alpha_strings() const noexcept { return alpha_; }
  const std::vector<SpinString>& beta_strings() const noexcept { return beta_; }
  const std::vector<Determinant>& dets() const noexcept { return dets_; }

  std::uint64_t dimension() const noexcept;

  /// Configuration at global index i (either mode).
  Determinant det(std::uint64_t i) const;
  std::optional<std::uint64_t> index_of(const Determinant& d) const;

  std::optional<std::uint32_t> alpha_index(SpinString s) const;
  std::optional<std::uint32_t> beta_index(SpinString s) const;

  /// The same configurations in Explicit mode, in the same global order.
  SelectedBasis to_explicit() const;

 private:
  void validate_string(SpinString s, int nelec) const;

  BasisMode mode_ = BasisMode::Product;
  int norb_ = 0;
  int n_alpha_ = 0;
  int n_beta_ = 0;
  std::vector<SpinString> alpha_;
  std::vector<SpinString> beta_;
  std::vector<Determinant> dets_;
  std::unordered_map<Determinant, std::uint64_t> det_index_;
};

struct IngestReport {
  std::size_t lines = 0;       ///< configuration lines read (comments/blank skipped)
  std::size_t accepted = 0;    ///< unique configurations passing the filter
  std::size_t dropped = 0;     ///< wrong per-spin electron count
  std::size_t duplicates = 0;  ///< repeats of an already accepted configuration
};

struct IngestResult {
  SelectedBasis basis;
  IngestReport report;
};

/// Read '0'/'1' configuration lines of length 2*norb: the first norb characters
/// are the alpha half (leftmost = orbital 0), the rest the beta half. Blank
/// lines and '#' comments are skipped. Throws ParseError on malformed lines.
IngestResult ingest_samples(std::istream& in, int norb, int n_alpha, int n_beta, BasisMode mode);
IngestResult read_samples(const std::string& path, int norb, int n_alpha, int n_beta,
                          BasisMode mode);

/// Inverse of the sample line format.
std::string format_sample(const Determinant& d, int norb);

struct SingleEntry {
  std::uint32_t source;
  std::uint32_t target;
  std::uint8_t hole;
  std::uint8_t particle;
  std::int8_t phase;
};

struct DoubleEntry {
  std::uint32_t source;
  std::uint32_t target;
  std::uint8_t hole1, hole2;
  std::uint8_t particle1, particle2;
  std::int8_t phase;
};

/// In-set single and double excitations per source string, stored flat and
/// grouped by source (CSR offsets), so both per-source traversal and a single
/// collapsed index space over all entries are available.
struct ExcitationTable {
  std::vector<std::size_t> single_offsets;  // size n+1
  std::vector<SingleEntry> singles;
  std::vector<std::size_t> double_offsets;  // size n+1
  std::vector<DoubleEntry> doubles;

  std::size_t n_sources() const noexcept {
    return single_offsets.empty() ? 0 : single_offsets.size() - 1;
  }
  std::span<const SingleEntry> singles_of(std::size_t i) const noexcept {
    return {singles.data() + single_offsets[i], single_offsets[i + 1] - single_offsets[i]};
  }
  std::span<const DoubleEntry> doubles_of(std::size_t i) const noexcept {
    return {doubles.data() + double_offsets[i], double_offsets[i + 1] - double_offsets[i]};
  }
};

/// Excitation table over a sorted, duplicate-free string list.
ExcitationTable build_excitation_table(std::span<const SpinString> strings, int norb);

}  // namespace sbd
