#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sbd/basis.hpp"
#include "sbd/integrals.hpp"

namespace sbd::testing {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

inline double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double inf_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// All strings with `ne` of `norb` bits set, ascending.
inline std::vector<SpinString> all_strings(int norb, int ne) {
  std::vector<SpinString> out;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << norb); ++s)
    if (std::popcount(s) == ne) out.push_back({s});
  return out;
}

/// A random subset (each string kept with probability `keep`, never empty).
inline std::vector<SpinString> random_subset(int norb, int ne, double keep, std::mt19937_64& rng) {
  auto all = all_strings(norb, ne);
  std::bernoulli_distribution pick(keep);
  std::vector<SpinString> out;
  for (auto s : all)
    if (pick(rng)) out.push_back(s);
  if (out.empty()) out.push_back(all[rng() % all.size()]);
  return out;
}

/// Product basis over the two-site Hubbard model with one electron per spin.
inline SelectedBasis hubbard_basis() { return SelectedBasis::full_product(2, 1, 1); }

}  // namespace sbd::testing
