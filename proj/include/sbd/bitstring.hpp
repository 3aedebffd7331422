#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace sbd {

/// Occupation mask of the spatial orbitals of one spin sector (a "half-bitstring").
/// Bit p set <=> orbital p occupied. Supports norb <= 64.
struct SpinString {
  std::uint64_t bits = 0;

  constexpr int popcount() const noexcept { return std::popcount(bits); }
  constexpr bool occupied(int p) const noexcept { return (bits >> p) & 1u; }

  friend constexpr auto operator<=>(SpinString, SpinString) = default;
};

/// Mask of the low `n` bits; valid for 0 <= n <= 64.
constexpr std::uint64_t low_mask(int n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

/// Fermionic sign of moving one electron between orbitals `from` and `to` in
/// `s`: (-1)^(number of occupied orbitals strictly between the two positions).
constexpr int move_phase(std::uint64_t s, int from, int to) noexcept {
  const int lo = from < to ? from : to;
  const int hi = from < to ? to : from;
  const std::uint64_t between = low_mask(hi) & ~low_mask(lo + 1);
  return (std::popcount(s & between) & 1) ? -1 : 1;
}

/// Slater determinant as an (alpha, beta) pair. The packed full-bitstring view
/// places alpha orbitals 0..norb-1 in the low block and beta in the high block,
/// so same-spin parities never see bits of the other spin.
struct Determinant {
  SpinString alpha;
  SpinString beta;

  constexpr int n_electrons() const noexcept { return alpha.popcount() + beta.popcount(); }

  /// Packed 2*norb-bit string (alpha low, beta high).
  constexpr unsigned __int128 packed(int norb) const noexcept {
    return static_cast<unsigned __int128>(alpha.bits) |
           (static_cast<unsigned __int128>(beta.bits) << norb);
  }

  friend constexpr auto operator<=>(const Determinant&, const Determinant&) = default;
};

/// Number of spin-orbital occupations that differ, halved.
constexpr int excitation_degree(const Determinant& a, const Determinant& b) noexcept {
  return (std::popcount(a.alpha.bits ^ b.alpha.bits) + std::popcount(a.beta.bits ^ b.beta.bits)) /
         2;
}

}  // namespace sbd

template <>
struct std::hash<sbd::SpinString> {
  std::size_t operator()(sbd::SpinString s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits);
  }
};

template <>
struct std::hash<sbd::Determinant> {
  std::size_t operator()(const sbd::Determinant& d) const noexcept {
    // splitmix-style mixing of the two words
    std::uint64_t x = d.alpha.bits * 0x9E3779B97F4A7C15ull ^ (d.beta.bits + 0x632BE59BD9B4E019ull);
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};
