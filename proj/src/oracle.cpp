#include "sbd/oracle.hpp"

#include <bit>
#include <optional>
#include <string>
#include <unordered_map>

#include "sbd/errors.hpp"
#include "sbd/matelem.hpp"

namespace sbd {

namespace {

void check_cap(const SelectedBasis& basis, std::uint64_t cap) {
  if (basis.dimension() > cap)
    throw ContractError("oracle: N = " + std::to_string(basis.dimension()) +
                        " exceeds the dense cap of " + std::to_string(cap) +
                        "; use fewer orbitals, electrons or samples");
}

using Occ = unsigned __int128;

struct Term {
  Occ state;
  double sign;
};

// Jordan-Wigner ordering over spin orbitals 0..2*norb-1.
int parity_below(Occ s, int k) {
  const Occ below = (static_cast<Occ>(1) << k) - 1;
  const Occ m = s & below;
  const auto lo = static_cast<std::uint64_t>(m);
  const auto hi = static_cast<std::uint64_t>(m >> 64);
  return (std::popcount(lo) + std::popcount(hi)) & 1;
}

bool has(Occ s, int k) { return ((s >> k) & 1) != 0; }

std::optional<Term> annihilate(Term t, int k) {
  if (!has(t.state, k)) return std::nullopt;
  const double sg = parity_below(t.state, k) ? -t.sign : t.sign;
  return Term{t.state & ~(static_cast<Occ>(1) << k), sg};
}

std::optional<Term> create(Term t, int k) {
  if (has(t.state, k)) return std::nullopt;
  const double sg = parity_below(t.state, k) ? -t.sign : t.sign;
  return Term{t.state | (static_cast<Occ>(1) << k), sg};
}

struct OccHash {
  std::size_t operator()(Occ s) const noexcept {
    return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(s) ^
                                      (static_cast<std::uint64_t>(s >> 64) * 0x9e3779b97f4a7c15ULL));
  }
};

}  // namespace

DenseMatrix assemble_dense(const SelectedBasis& basis, const IntegralTable& table,
                           std::uint64_t cap) {
  check_cap(basis, cap);
  const auto n = static_cast<std::size_t>(basis.dimension());
  std::vector<Determinant> dets(n);
  for (std::size_t i = 0; i < n; ++i) dets[i] = basis.det(i);
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = hij(dets[i], dets[j], table);
  return m;
}

DenseMatrix assemble_dense_fock(const SelectedBasis& basis, const IntegralTable& table,
                                std::uint64_t cap) {
  check_cap(basis, cap);
  const int norb = basis.norb();
  const int nso = 2 * norb;
  const auto n = static_cast<std::size_t>(basis.dimension());
  std::unordered_map<Occ, std::size_t, OccHash> index;
  std::vector<Occ> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i] = basis.det(i).packed(norb);
    index.emplace(states[i], i);
  }
  auto spatial = [norb](int k) { return k % norb; };
  auto spin = [norb](int k) { return k / norb; };

  DenseMatrix m(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::unordered_map<Occ, double, OccHash> out;
    out[states[j]] += table.e_core();
    const Term ket{states[j], 1.0};
    for (int q = 0; q < nso; ++q) {
      auto t1 = annihilate(ket, q);
      if (!t1) continue;
      for (int p = 0; p < nso; ++p) {
        if (spin(p) != spin(q)) continue;
        if (auto t2 = create(*t1, p))
          out[t2->state] += table.h(spatial(p), spatial(q)) * t2->sign;
      }
    }
    // a+_p a+_r a_s a_q: annihilate q first, then s, create r, then p.
    for (int q = 0; q < nso; ++q) {
      auto tq = annihilate(ket, q);
      if (!tq) continue;
      for (int s = 0; s < nso; ++s) {
        auto ts = annihilate(*tq, s);
        if (!ts) continue;
        for (int r = 0; r < nso; ++r) {
          if (spin(r) != spin(s)) continue;
          auto tr = create(*ts, r);
          if (!tr) continue;
          for (int p = 0; p < nso; ++p) {
            if (spin(p) != spin(q)) continue;
            auto tp = create(*tr, p);
            if (!tp) continue;
            out[tp->state] += 0.5 * tp->sign *
                              table.eri(spatial(p), spatial(q), spatial(r), spatial(s));
          }
        }
      }
    }
    for (const auto& [state, v] : out) {
      auto it = index.find(state);
      if (it != index.end()) m(it->second, j) += v;
    }
  }
  return m;
}

SymmetricEigen dense_eigensolve(const DenseMatrix& m) { return jacobi_eigensolve(m); }

}  // namespace sbd
