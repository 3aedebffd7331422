#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sbd {

/// One- and two-electron integrals over `norb` spatial orbitals.
///
/// Two-electron integrals are in chemist notation (pq|rs) and are stored once
/// per 8-fold symmetry class: the flat array is indexed by the triangular
/// composite of the triangular pair indices (pq) and (rs). Any permutation of
/// the indices therefore resolves to the same slot, and unset entries read as 0.
class IntegralTable {
 public:
  IntegralTable() = default;
  explicit IntegralTable(std::size_t norb);

  std::size_t norb() const noexcept { return norb_; }

  double e_core() const noexcept { return e_core_; }
  void set_e_core(double v) noexcept { e_core_ = v; }

  // Checked accessors; throw RangeError on index >= norb.
  double get_h(std::size_t p, std::size_t q) const;
  double get_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const;
  void set_h(std::size_t p, std::size_t q, double v);
  void set_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v);

  // Unchecked hot-path accessors.
  double h(std::size_t p, std::size_t q) const noexcept {
    assert(p < norb_ && q < norb_);
    return h_[p * norb_ + q];
  }
  double eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const noexcept {
    assert(p < norb_ && q < norb_ && r < norb_ && s < norb_);
    return eri_[composite(pair_[p * norb_ + q], pair_[r * norb_ + s])];
  }

  /// Number of stored two-electron slots (one per symmetry class).
  std::size_t eri_storage_size() const noexcept { return eri_.size(); }

  friend bool operator==(const IntegralTable& a, const IntegralTable& b) {
    return a.norb_ == b.norb_ && a.e_core_ == b.e_core_ && a.h_ == b.h_ && a.eri_ == b.eri_;
  }

 private:
  static std::size_t composite(std::size_t a, std::size_t b) noexcept {
    return a >= b ? a * (a + 1) / 2 + b : b * (b + 1) / 2 + a;
  }
  void check(std::size_t p) const;

  std::size_t norb_ = 0;
  double e_core_ = 0.0;
  std::vector<double> h_;             // dense norb*norb, kept symmetric
  std::vector<std::size_t> pair_;     // (p,q) -> triangular pair index
  std::vector<double> eri_;
};

/// Header metadata and bookkeeping from an FCIDUMP parse.
struct FcidumpData {
  IntegralTable table;
  int nelec = 0;
  int ms2 = 0;
  std::size_t conflicting_duplicates = 0;  ///< entries overwritten with a different value
};

/// Parse FCIDUMP text. Throws ParseError (with line number) or RangeError.
FcidumpData parse_fcidump(std::istream& in);
FcidumpData read_fcidump(const std::string& path);

/// Write FCIDUMP text that parses back to an identical table.
void write_fcidump(std::ostream& out, const IntegralTable& table, int nelec, int ms2);

/// Seeded synthetic instance: h symmetric uniform(-1,1), eri 8-fold symmetric
/// uniform(0,1) scaled by 0.1, e_core = 0.
IntegralTable random_integrals(std::size_t norb, std::uint64_t seed);

/// Two-site Hubbard model with hopping t and on-site repulsion u.
IntegralTable hubbard_dimer(double t, double u);

}  // namespace sbd
