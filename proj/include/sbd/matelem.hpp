#pragma once

#include "sbd/bitstring.hpp"
#include "sbd/integrals.hpp"

namespace sbd {

enum class Spin { Alpha, Beta };

/// <D|H|D>, including the constant core energy.
double h_diag(const Determinant& det, const IntegralTable& t);

/// <bra|H|ket> where ket is bra with the same-spin move p -> r (p occupied in
/// bra, r empty in bra). `phase` is the sign of that move.
double h_single(const Determinant& bra, int p, int r, Spin spin, int phase,
                const IntegralTable& t);

/// Same-spin double: holes p, q -> particles r, s with p->r and q->s pairing.
inline double h_double_same_spin(int p, int q, int r, int s, int phase, const IntegralTable& t) {
  return phase * (t.eri(p, r, q, s) - t.eri(p, s, q, r));
}

/// Opposite-spin double: alpha move p -> r, beta move q -> s.
inline double h_double_opposite_spin(int p, int r, int q, int s, int phase_alpha, int phase_beta,
                                     const IntegralTable& t) {
  return phase_alpha * phase_beta * t.eri(p, r, q, s);
}

/// General matrix element by excitation-degree dispatch. Returns 0 for degree
/// >= 3 and for mismatched electron counts (asserts in debug builds).
double hij(const Determinant& bra, const Determinant& ket, const IntegralTable& t);

}  // namespace sbd
