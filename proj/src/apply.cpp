#include "sbd/apply.hpp"

#include <algorithm>
#include <string>

#include "sbd/errors.hpp"
#include "sbd/matelem.hpp"

namespace sbd {

IndexWindow full_window(const SelectedBasis& basis) {
  return {0, static_cast<std::uint32_t>(basis.alpha_strings().size()), 0,
          static_cast<std::uint32_t>(basis.beta_strings().size())};
}

namespace {

void check_window(const SelectedBasis& basis, const IndexWindow& w) {
  if (w.alpha_begin > w.alpha_end || w.beta_begin > w.beta_end ||
      w.alpha_end > basis.alpha_strings().size() || w.beta_end > basis.beta_strings().size())
    throw RangeError("determinant cache window [" + std::to_string(w.alpha_begin) + "," +
                     std::to_string(w.alpha_end) + ")x[" + std::to_string(w.beta_begin) + "," +
                     std::to_string(w.beta_end) + ") exceeds the basis");
}

}  // namespace

void DetCache::fill(const SelectedBasis& basis, const IndexWindow& w,
                    std::vector<Determinant>& out) {
  const auto& a = basis.alpha_strings();
  const auto& b = basis.beta_strings();
  out.resize(w.area());
  std::size_t k = 0;
  for (std::uint32_t ia = w.alpha_begin; ia < w.alpha_end; ++ia)
    for (std::uint32_t ib = w.beta_begin; ib < w.beta_end; ++ib) out[k++] = {a[ia], b[ib]};
}

bool DetCache::ensure(const SelectedBasis& basis, const IndexWindow& bra, const IndexWindow& ket) {
  if (basis.mode() != BasisMode::Product)
    throw ContractError("determinant cache requires a product basis");
  check_window(basis, bra);
  check_window(basis, ket);
  bool rebuilt = false;
  if (!valid_ || bra != bra_window_) {
    fill(basis, bra, bra_);
    bra_window_ = bra;
    rebuilt = true;
  }
  if (!valid_ || ket != ket_window_) {
    fill(basis, ket, ket_);
    ket_window_ = ket;
    rebuilt = true;
  }
  valid_ = true;
  if (rebuilt) ++rebuilds_;
  return rebuilt;
}

DetCache build_det_cache(const SelectedBasis& basis, const IndexWindow& bra,
                         const IndexWindow& ket) {
  DetCache cache;
  cache.ensure(basis, bra, ket);
  return cache;
}

SpinTables build_spin_tables(const SelectedBasis& basis) {
  if (basis.mode() != BasisMode::Product)
    throw ContractError("spin excitation tables require a product basis");
  return {build_excitation_table(basis.alpha_strings(), basis.norb()),
          build_excitation_table(basis.beta_strings(), basis.norb())};
}

std::vector<double> compute_diagonal(const SelectedBasis& basis, const IntegralTable& table,
                                     const DetCache& cache) {
  (void)basis;
  const auto dets = cache.bra_dets();
  std::vector<double> d(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) d[i] = h_diag(dets[i], table);
  return d;
}

// ----------------------------------------------------------------------------

namespace {

struct Link {
  std::uint32_t source;
  std::uint32_t target;
};

template <bool Atomic>
inline void add_to(double& y, double v) noexcept {
  if constexpr (Atomic)
    atomic_add(y, v);
  else
    y += v;
}

template <bool Atomic>
void collapsed_tasks(const SelectedBasis& basis, const IntegralTable& table,
                     const SpinTables& tables, const DetCache& cache,
                     std::span<const double> diag_bra, std::span<const double> x,
                     std::span<double> y, int threads) {
  const IndexWindow& bw = cache.bra_window();
  const IndexWindow& kw = cache.ket_window();
  const std::uint32_t nb = static_cast<std::uint32_t>(basis.beta_strings().size());
  const std::uint32_t a0 = bw.alpha_begin, a1 = bw.alpha_end;
  const std::uint32_t c0 = kw.alpha_begin, c1 = kw.alpha_end;
  const std::uint32_t o0 = std::max(a0, c0), o1 = std::min(a1, c1);
  auto row = [&](std::uint32_t ia, std::uint32_t ib) {
    return static_cast<std::size_t>(ia - a0) * nb + ib;
  };
  auto col = [&](std::uint32_t ja, std::uint32_t jb) {
    return static_cast<std::size_t>(ja - c0) * nb + jb;
  };
  auto elem = [&](std::uint32_t ia, std::uint32_t ib, std::uint32_t ja, std::uint32_t jb) {
    return hij(cache.bra(ia, ib), cache.ket(ja, jb), table);
  };

  // Alpha moves from bra rows into the ket block.
  std::vector<Link> alpha_singles, alpha_moves;
  for (std::uint32_t ia = a0; ia < a1; ++ia) {
    for (const auto& e : tables.alpha.singles_of(ia))
      if (e.target >= c0 && e.target < c1) alpha_singles.push_back({e.source, e.target});
    for (const auto& e : tables.alpha.doubles_of(ia))
      if (e.target >= c0 && e.target < c1) alpha_moves.push_back({e.source, e.target});
  }
  alpha_moves.insert(alpha_moves.end(), alpha_singles.begin(), alpha_singles.end());
  const auto& beta_singles = tables.beta.singles;
  std::vector<Link> beta_moves;
  beta_moves.reserve(tables.beta.singles.size() + tables.beta.doubles.size());
  for (const auto& e : tables.beta.singles) beta_moves.push_back({e.source, e.target});
  for (const auto& e : tables.beta.doubles) beta_moves.push_back({e.source, e.target});

  // Diagonal: one writer per row.
  if (o0 < o1) {
    const std::int64_t n = static_cast<std::int64_t>(o1 - o0) * nb;
    parallel_for(n, threads, [&](std::int64_t k) {
      const std::uint32_t ia = o0 + static_cast<std::uint32_t>(k / nb);
      const std::uint32_t ib = static_cast<std::uint32_t>(k % nb);
      const std::size_t r = row(ia, ib);
      const double d = diag_bra.empty() ? h_diag(cache.bra(ia, ib), table) : diag_bra[r];
      y[r] += d * x[col(ia, ib)];
    });
  }

  // Task 0: (alpha single) x (beta single), one item per entry pair.
  if (!alpha_singles.empty() && !beta_singles.empty()) {
    const std::int64_t sb = static_cast<std::int64_t>(beta_singles.size());
    const std::int64_t n = static_cast<std::int64_t>(alpha_singles.size()) * sb;
    parallel_for(n, threads, [&](std::int64_t k) {
      const Link& la = alpha_singles[static_cast<std::size_t>(k / sb)];
      const SingleEntry& lb = beta_singles[static_cast<std::size_t>(k % sb)];
      const double v = elem(la.source, lb.source, la.target, lb.target);
      add_to<Atomic>(y[row(la.source, lb.source)], v * x[col(la.target, lb.target)]);
    });
  }

  // Task 1: beta singles and doubles with alpha fixed.
  if (o0 < o1 && !beta_moves.empty()) {
    const std::int64_t eb = static_cast<std::int64_t>(beta_moves.size());
    const std::int64_t n = static_cast<std::int64_t>(o1 - o0) * eb;
    parallel_for(n, threads, [&](std::int64_t k) {
      const std::uint32_t ia = o0 + static_cast<std::uint32_t>(k / eb);
      const Link& lb = beta_moves[static_cast<std::size_t>(k % eb)];
      const double v = elem(ia, lb.source, ia, lb.target);
      add_to<Atomic>(y[row(ia, lb.source)], v * x[col(ia, lb.target)]);
    });
  }

  // Task 2: alpha singles and doubles with beta fixed.
  if (!alpha_moves.empty()) {
    const std::int64_t n = static_cast<std::int64_t>(alpha_moves.size()) * nb;
    parallel_for(n, threads, [&](std::int64_t k) {
      const Link& la = alpha_moves[static_cast<std::size_t>(k / nb)];
      const std::uint32_t ib = static_cast<std::uint32_t>(k % nb);
      const double v = elem(la.source, ib, la.target, ib);
      add_to<Atomic>(y[row(la.source, ib)], v * x[col(la.target, ib)]);
    });
  }
}

void row_owned_tasks(const SelectedBasis& basis, const IntegralTable& table,
                     const SpinTables& tables, const DetCache& cache,
                     std::span<const double> diag_bra, std::span<const double> x,
                     std::span<double> y, int threads) {
  const IndexWindow& bw = cache.bra_window();
  const IndexWindow& kw = cache.ket_window();
  const std::uint32_t nb = static_cast<std::uint32_t>(basis.beta_strings().size());
  const std::uint32_t a0 = bw.alpha_begin;
  const std::uint32_t c0 = kw.alpha_begin, c1 = kw.alpha_end;
  auto col = [&](std::uint32_t ja, std::uint32_t jb) {
    return static_cast<std::size_t>(ja - c0) * nb + jb;
  };
  auto in_ket = [&](std::uint32_t ja) { return ja >= c0 && ja < c1; };

  parallel_for(static_cast<std::int64_t>(bw.area()), threads, [&](std::int64_t r) {
    const std::uint32_t ia = a0 + static_cast<std::uint32_t>(r / nb);
    const std::uint32_t ib = static_cast<std::uint32_t>(r % nb);
    const Determinant& bra = cache.bra(ia, ib);
    const bool same_block = in_ket(ia);
    double acc = 0.0;
    if (same_block) {
      const double d = diag_bra.empty() ? h_diag(bra, table) : diag_bra[r];
      acc += d * x[col(ia, ib)];
    }
    for (const auto& ea : tables.alpha.singles_of(ia)) {
      if (!in_ket(ea.target)) continue;
      for (const auto& eb : tables.beta.singles_of(ib))
        acc += hij(bra, cache.ket(ea.target, eb.target), table) * x[col(ea.target, eb.target)];
    }
    if (same_block) {
      for (const auto& eb : tables.beta.singles_of(ib))
        acc += hij(bra, cache.ket(ia, eb.target), table) * x[col(ia, eb.target)];
      for (const auto& eb : tables.beta.doubles_of(ib))
        acc += hij(bra, cache.ket(ia, eb.target), table) * x[col(ia, eb.target)];
    }
    for (const auto& ea : tables.alpha.singles_of(ia))
      if (in_ket(ea.target))
        acc += hij(bra, cache.ket(ea.target, ib), table) * x[col(ea.target, ib)];
    for (const auto& ea : tables.alpha.doubles_of(ia))
      if (in_ket(ea.target))
        acc += hij(bra, cache.ket(ea.target, ib), table) * x[col(ea.target, ib)];
    y[static_cast<std::size_t>(r)] += acc;
  });
}

}  // namespace

void accumulate_block(const SelectedBasis& basis, const IntegralTable& table,
                      const SpinTables& tables, const DetCache& cache,
                      std::span<const double> diag_bra, std::span<const double> x_ket,
                      std::span<double> y_bra, const ExecConfig& exec) {
  const IndexWindow& bw = cache.bra_window();
  const IndexWindow& kw = cache.ket_window();
  const auto nb = static_cast<std::uint32_t>(basis.beta_strings().size());
  if (bw.beta_begin != 0 || bw.beta_end != nb || kw.beta_begin != 0 || kw.beta_end != nb)
    throw ContractError("accumulate_block requires windows spanning all beta strings");
  if (x_ket.size() != kw.area() || y_bra.size() != bw.area())
    throw ContractError("accumulate_block: vector sizes do not match the cache windows");
  if (!diag_bra.empty() && diag_bra.size() != bw.area())
    throw ContractError("accumulate_block: diagonal size does not match the bra window");
  if (tables.alpha.n_sources() != basis.alpha_strings().size() ||
      tables.beta.n_sources() != basis.beta_strings().size())
    throw ContractError("accumulate_block: excitation tables do not match the basis");

  if (exec.policy == ExecPolicy::Deterministic)
    row_owned_tasks(basis, table, tables, cache, diag_bra, x_ket, y_bra, exec.threads);
  else if (exec.threads > 1)
    collapsed_tasks<true>(basis, table, tables, cache, diag_bra, x_ket, y_bra, exec.threads);
  else
    collapsed_tasks<false>(basis, table, tables, cache, diag_bra, x_ket, y_bra, 1);
}

std::vector<double> apply_H(std::span<const double> x, const SelectedBasis& basis,
                            const IntegralTable& table, const SpinTables& tables, DetCache& cache,
                            const ExecConfig& exec, std::span<const double> diag) {
  if (basis.mode() != BasisMode::Product) throw ContractError("apply_H requires a product basis");
  if (x.size() != basis.dimension())
    throw ContractError("apply_H: |x| = " + std::to_string(x.size()) + " but N = " +
                        std::to_string(basis.dimension()));
  const IndexWindow w = full_window(basis);
  cache.ensure(basis, w, w);
  std::vector<double> y(x.size(), 0.0);
  accumulate_block(basis, table, tables, cache, diag, x, y, exec);
  return y;
}

// ----------------------------------------------------------------------------

std::vector<double> compute_diagonal_full(const SelectedBasis& basis, const IntegralTable& table) {
  std::vector<double> d(basis.dimension());
  for (std::uint64_t i = 0; i < d.size(); ++i) d[i] = h_diag(basis.det(i), table);
  return d;
}

std::vector<double> apply_H_full(std::span<const double> x, const SelectedBasis& basis,
                                 const IntegralTable& table, const ExecConfig& exec,
                                 std::span<const double> diag) {
  if (basis.mode() != BasisMode::Explicit)
    throw ContractError("apply_H_full requires an explicit basis");
  if (x.size() != basis.dimension())
    throw ContractError("apply_H_full: |x| = " + std::to_string(x.size()) + " but N = " +
                        std::to_string(basis.dimension()));
  if (!diag.empty() && diag.size() != x.size())
    throw ContractError("apply_H_full: diagonal size mismatch");
  const int norb = basis.norb();
  const auto& dets = basis.dets();
  std::vector<double> y(x.size(), 0.0);

  parallel_for(static_cast<std::int64_t>(dets.size()), exec.threads, [&](std::int64_t i) {
    const Determinant& d = dets[static_cast<std::size_t>(i)];
    double acc = (diag.empty() ? h_diag(d, table) : diag[i]) * x[i];
    auto probe = [&](std::uint64_t a, std::uint64_t b) {
      return basis.index_of(Determinant{SpinString{a}, SpinString{b}});
    };
    for_each_single(d.alpha.bits, norb, [&](std::uint64_t t, int p, int r, int ph) {
      if (auto j = probe(t, d.beta.bits)) acc += h_single(d, p, r, Spin::Alpha, ph, table) * x[*j];
    });
    for_each_single(d.beta.bits, norb, [&](std::uint64_t t, int p, int r, int ph) {
      if (auto j = probe(d.alpha.bits, t)) acc += h_single(d, p, r, Spin::Beta, ph, table) * x[*j];
    });
    for_each_double(d.alpha.bits, norb, [&](std::uint64_t t, int p, int q, int r, int s, int ph) {
      if (auto j = probe(t, d.beta.bits)) acc += h_double_same_spin(p, q, r, s, ph, table) * x[*j];
    });
    for_each_double(d.beta.bits, norb, [&](std::uint64_t t, int p, int q, int r, int s, int ph) {
      if (auto j = probe(d.alpha.bits, t)) acc += h_double_same_spin(p, q, r, s, ph, table) * x[*j];
    });
    for_each_single(d.alpha.bits, norb, [&](std::uint64_t ta, int p, int r, int pha) {
      for_each_single(d.beta.bits, norb, [&](std::uint64_t tb, int q, int s, int phb) {
        if (auto j = probe(ta, tb))
          acc += h_double_opposite_spin(p, r, q, s, pha, phb, table) * x[*j];
      });
    });
    y[static_cast<std::size_t>(i)] = acc;
  });
  return y;
}

// ----------------------------------------------------------------------------

ProductHamiltonian::ProductHamiltonian(const SelectedBasis& basis, const IntegralTable& table,
                                       ExecConfig exec)
    : basis_(&basis), table_(&table), exec_(exec), tables_(build_spin_tables(basis)) {
  const IndexWindow w = full_window(basis);
  cache_.ensure(basis, w, w);
  diag_ = compute_diagonal(basis, table, cache_);
}

void ProductHamiltonian::apply(std::span<const double> x, std::span<double> y) {
  if (x.size() != basis_->dimension() || y.size() != basis_->dimension())
    throw ContractError("ProductHamiltonian::apply: dimension mismatch");
  const IndexWindow w = full_window(*basis_);
  cache_.ensure(*basis_, w, w);
  std::fill(y.begin(), y.end(), 0.0);
  accumulate_block(*basis_, *table_, tables_, cache_, diag_, x, y, exec_);
}

}  // namespace sbd
