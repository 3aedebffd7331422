#include "sbd/matelem.hpp"

#include <bit>
#include <cassert>
#include <cstdint>

namespace sbd {

namespace {

double same_spin_pairs(std::uint64_t occ, const IntegralTable& t) {
  double e = 0.0;
  for (std::uint64_t a = occ; a; a &= a - 1) {
    const int p = std::countr_zero(a);
    for (std::uint64_t b = a & (a - 1); b; b &= b - 1) {
      const int q = std::countr_zero(b);
      e += t.eri(p, p, q, q) - t.eri(p, q, q, p);
    }
  }
  return e;
}

}  // namespace

double h_diag(const Determinant& det, const IntegralTable& t) {
  const std::uint64_t a = det.alpha.bits;
  const std::uint64_t b = det.beta.bits;
  double one = 0.0;
  for (std::uint64_t m = a; m; m &= m - 1) {
    const int p = std::countr_zero(m);
    one += t.h(p, p);
  }
  for (std::uint64_t m = b; m; m &= m - 1) {
    const int p = std::countr_zero(m);
    one += t.h(p, p);
  }
  double coulomb_ab = 0.0;
  for (std::uint64_t m = a; m; m &= m - 1) {
    const int p = std::countr_zero(m);
    for (std::uint64_t n = b; n; n &= n - 1) {
      const int q = std::countr_zero(n);
      coulomb_ab += t.eri(p, p, q, q);
    }
  }
  return t.e_core() + one + same_spin_pairs(a, t) + same_spin_pairs(b, t) + coulomb_ab;
}

double h_single(const Determinant& bra, int p, int r, Spin spin, int phase,
                const IntegralTable& t) {
  const std::uint64_t same = spin == Spin::Alpha ? bra.alpha.bits : bra.beta.bits;
  const std::uint64_t other = spin == Spin::Alpha ? bra.beta.bits : bra.alpha.bits;
  // Occupations common to bra and ket, so <bra|H|ket> and <ket|H|bra> run the
  // identical arithmetic.
  const std::uint64_t common = same & ~(std::uint64_t{1} << p);
  double v = t.h(p, r);
  for (std::uint64_t m = common; m; m &= m - 1) {
    const int q = std::countr_zero(m);
    v += t.eri(p, r, q, q) - t.eri(p, q, q, r);
  }
  for (std::uint64_t m = other; m; m &= m - 1) {
    const int q = std::countr_zero(m);
    v += t.eri(p, r, q, q);
  }
  return phase * v;
}

double hij(const Determinant& bra, const Determinant& ket, const IntegralTable& t) {
  if (bra.alpha.popcount() != ket.alpha.popcount() || bra.beta.popcount() != ket.beta.popcount()) {
    assert(!"hij: electron counts differ");
    return 0.0;
  }
  const std::uint64_t da = bra.alpha.bits ^ ket.alpha.bits;
  const std::uint64_t db = bra.beta.bits ^ ket.beta.bits;
  const int na = std::popcount(da) / 2;
  const int nb = std::popcount(db) / 2;

  switch (na + nb) {
    case 0:
      return h_diag(bra, t);
    case 1: {
      const Spin spin = na ? Spin::Alpha : Spin::Beta;
      const std::uint64_t diff = na ? da : db;
      const std::uint64_t occ = na ? bra.alpha.bits : bra.beta.bits;
      const int p = std::countr_zero(occ & diff);
      const int r = std::countr_zero(~occ & diff);
      return h_single(bra, p, r, spin, move_phase(occ, p, r), t);
    }
    case 2: {
      if (na == 1) {
        const int p = std::countr_zero(bra.alpha.bits & da);
        const int r = std::countr_zero(ket.alpha.bits & da);
        const int q = std::countr_zero(bra.beta.bits & db);
        const int s = std::countr_zero(ket.beta.bits & db);
        return h_double_opposite_spin(p, r, q, s, move_phase(bra.alpha.bits, p, r),
                                      move_phase(bra.beta.bits, q, s), t);
      }
      const std::uint64_t diff = na ? da : db;
      const std::uint64_t occ = na ? bra.alpha.bits : bra.beta.bits;
      std::uint64_t holes = occ & diff;
      std::uint64_t parts = ~occ & diff;
      const int p = std::countr_zero(holes);
      const int q = std::countr_zero(holes & (holes - 1));
      const int r = std::countr_zero(parts);
      const int s = std::countr_zero(parts & (parts - 1));
      const std::uint64_t mid = (occ & ~(std::uint64_t{1} << p)) | (std::uint64_t{1} << r);
      const int phase = move_phase(occ, p, r) * move_phase(mid, q, s);
      return h_double_same_spin(p, q, r, s, phase, t);
    }
    default:
      return 0.0;
  }
}

}  // namespace sbd
