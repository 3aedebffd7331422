#include "sbd/basis.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "sbd/errors.hpp"

namespace sbd {

std::vector<SingleExcitation> enumerate_singles(SpinString s, int norb) {
  std::vector<SingleExcitation> out;
  for_each_single(s.bits, norb, [&](std::uint64_t target, int p, int r, int phase) {
    out.push_back({SpinString{target}, p, r, phase});
  });
  return out;
}

std::vector<DoubleExcitation> enumerate_doubles(SpinString s, int norb) {
  std::vector<DoubleExcitation> out;
  for_each_double(s.bits, norb,
                  [&](std::uint64_t target, int p, int q, int r, int t, int phase) {
                    out.push_back({SpinString{target}, p, q, r, t, phase});
                  });
  return out;
}

// ----------------------------------------------------------------------------

void SelectedBasis::validate_string(SpinString s, int nelec) const {
  if (s.bits & ~low_mask(norb_))
    throw ContractError("spin string has bits above norb=" + std::to_string(norb_));
  if (s.popcount() != nelec)
    throw ContractError("spin string popcount " + std::to_string(s.popcount()) +
                        " != electron count " + std::to_string(nelec));
}

namespace {

void check_counts(int norb, int n_alpha, int n_beta) {
  if (norb < 0 || norb > 64) throw ContractError("norb must lie in [0, 64]");
  if (n_alpha < 0 || n_alpha > norb || n_beta < 0 || n_beta > norb)
    throw ContractError("electron counts must lie in [0, norb]");
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

SelectedBasis SelectedBasis::product(int norb, int n_alpha, int n_beta,
                                     std::vector<SpinString> alpha, std::vector<SpinString> beta) {
  check_counts(norb, n_alpha, n_beta);
  SelectedBasis b;
  b.mode_ = BasisMode::Product;
  b.norb_ = norb;
  b.n_alpha_ = n_alpha;
  b.n_beta_ = n_beta;
  for (auto s : alpha) b.validate_string(s, n_alpha);
  for (auto s : beta) b.validate_string(s, n_beta);
  sort_unique(alpha);
  sort_unique(beta);
  if (alpha.size() > UINT32_MAX || beta.size() > UINT32_MAX)
    throw ContractError("too many strings for 32-bit string indices");
  b.alpha_ = std::move(alpha);
  b.beta_ = std::move(beta);
  return b;
}

SelectedBasis SelectedBasis::explicit_dets(int norb, int n_alpha, int n_beta,
                                           std::vector<Determinant> dets) {
  check_counts(norb, n_alpha, n_beta);
  SelectedBasis b;
  b.mode_ = BasisMode::Explicit;
  b.norb_ = norb;
  b.n_alpha_ = n_alpha;
  b.n_beta_ = n_beta;
  for (const auto& d : dets) {
    b.validate_string(d.alpha, n_alpha);
    b.validate_string(d.beta, n_beta);
  }
  sort_unique(dets);
  b.dets_ = std::move(dets);
  b.det_index_.reserve(b.dets_.size());
  for (std::uint64_t i = 0; i < b.dets_.size(); ++i) b.det_index_.emplace(b.dets_[i], i);
  return b;
}

SelectedBasis SelectedBasis::full_product(int norb, int n_alpha, int n_beta) {
  check_counts(norb, n_alpha, n_beta);
  if (norb > 30) throw ContractError("full_product enumeration limited to norb <= 30");
  std::vector<SpinString> a, b;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << norb); ++m) {
    if (std::popcount(m) == n_alpha) a.push_back({m});
    if (std::popcount(m) == n_beta) b.push_back({m});
  }
  return product(norb, n_alpha, n_beta, std::move(a), std::move(b));
}

std::uint64_t SelectedBasis::dimension() const noexcept {
  return mode_ == BasisMode::Product
             ? static_cast<std::uint64_t>(alpha_.size()) * beta_.size()
             : dets_.size();
}

Determinant SelectedBasis::det(std::uint64_t i) const {
  if (i >= dimension()) throw RangeError("configuration index out of range");
  if (mode_ == BasisMode::Explicit) return dets_[i];
  return {alpha_[i / beta_.size()], beta_[i % beta_.size()]};
}

std::optional<std::uint32_t> SelectedBasis::alpha_index(SpinString s) const {
  auto it = std::lower_bound(alpha_.begin(), alpha_.end(), s);
  if (it == alpha_.end() || *it != s) return std::nullopt;
  return static_cast<std::uint32_t>(it - alpha_.begin());
}

std::optional<std::uint32_t> SelectedBasis::beta_index(SpinString s) const {
  auto it = std::lower_bound(beta_.begin(), beta_.end(), s);
  if (it == beta_.end() || *it != s) return std::nullopt;
  return static_cast<std::uint32_t>(it - beta_.begin());
}

std::optional<std::uint64_t> SelectedBasis::index_of(const Determinant& d) const {
  if (mode_ == BasisMode::Explicit) {
    auto it = det_index_.find(d);
    if (it == det_index_.end()) return std::nullopt;
    return it->second;
  }
  auto ia = alpha_index(d.alpha);
  auto ib = beta_index(d.beta);
  if (!ia || !ib) return std::nullopt;
  return static_cast<std::uint64_t>(*ia) * beta_.size() + *ib;
}

SelectedBasis SelectedBasis::to_explicit() const {
  if (mode_ == BasisMode::Explicit) return *this;
  std::vector<Determinant> dets;
  dets.reserve(dimension());
  for (auto a : alpha_)
    for (auto b : beta_) dets.push_back({a, b});
  // (alpha, beta) lexicographic order coincides with ia * |B| + ib.
  return explicit_dets(norb_, n_alpha_, n_beta_, std::move(dets));
}

// ----------------------------------------------------------------------------

namespace {

SpinString parse_half(const std::string& line, std::size_t offset, int norb, std::size_t lineno) {
  std::uint64_t bits = 0;
  for (int p = 0; p < norb; ++p) {
    const char c = line[offset + p];
    if (c == '1')
      bits |= std::uint64_t{1} << p;
    else if (c != '0')
      throw ParseError(std::string("invalid character '") + c + "' in configuration", lineno);
  }
  return {bits};
}

}  // namespace

IngestResult ingest_samples(std::istream& in, int norb, int n_alpha, int n_beta, BasisMode mode) {
  check_counts(norb, n_alpha, n_beta);
  IngestResult result;
  auto& rep = result.report;
  std::unordered_set<Determinant> seen;
  std::vector<Determinant> accepted;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t width = 2 * static_cast<std::size_t>(norb);

  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string cfg = line.substr(first, last - first + 1);
    ++rep.lines;
    if (cfg.size() != width)
      throw ParseError("configuration length " + std::to_string(cfg.size()) + " != 2*norb = " +
                           std::to_string(width),
                       lineno);
    const Determinant d{parse_half(cfg, 0, norb, lineno), parse_half(cfg, norb, norb, lineno)};
    if (d.alpha.popcount() != n_alpha || d.beta.popcount() != n_beta) {
      ++rep.dropped;
      continue;
    }
    if (!seen.insert(d).second) {
      ++rep.duplicates;
      continue;
    }
    accepted.push_back(d);
  }
  rep.accepted = accepted.size();

  if (mode == BasisMode::Explicit) {
    result.basis = SelectedBasis::explicit_dets(norb, n_alpha, n_beta, std::move(accepted));
  } else {
    std::vector<SpinString> a, b;
    a.reserve(accepted.size());
    b.reserve(accepted.size());
    for (const auto& d : accepted) {
      a.push_back(d.alpha);
      b.push_back(d.beta);
    }
    result.basis = SelectedBasis::product(norb, n_alpha, n_beta, std::move(a), std::move(b));
  }
  return result;
}

IngestResult read_samples(const std::string& path, int norb, int n_alpha, int n_beta,
                          BasisMode mode) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open samples file '" + path + "'", 0);
  try {
    return ingest_samples(in, norb, n_alpha, n_beta, mode);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::string format_sample(const Determinant& d, int norb) {
  std::string s(2 * static_cast<std::size_t>(norb), '0');
  for (int p = 0; p < norb; ++p) {
    if (d.alpha.occupied(p)) s[p] = '1';
    if (d.beta.occupied(p)) s[norb + p] = '1';
  }
  return s;
}

// ----------------------------------------------------------------------------

ExcitationTable build_excitation_table(std::span<const SpinString> strings, int norb) {
  if (!std::is_sorted(strings.begin(), strings.end()) ||
      std::adjacent_find(strings.begin(), strings.end()) != strings.end())
    throw ContractError("excitation table requires sorted, duplicate-free strings");
  auto find = [&](SpinString s) -> std::optional<std::uint32_t> {
    auto it = std::lower_bound(strings.begin(), strings.end(), s);
    if (it == strings.end() || *it != s) return std::nullopt;
    return static_cast<std::uint32_t>(it - strings.begin());
  };

  ExcitationTable t;
  const std::size_t n = strings.size();
  t.single_offsets.reserve(n + 1);
  t.double_offsets.reserve(n + 1);
  t.single_offsets.push_back(0);
  t.double_offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<std::uint32_t>(i);
    for (const auto& e : enumerate_singles(strings[i], norb))
      if (auto j = find(e.target))
        t.singles.push_back({src, *j, static_cast<std::uint8_t>(e.hole),
                             static_cast<std::uint8_t>(e.particle),
                             static_cast<std::int8_t>(e.phase)});
    for (const auto& e : enumerate_doubles(strings[i], norb))
      if (auto j = find(e.target))
        t.doubles.push_back({src, *j, static_cast<std::uint8_t>(e.hole1),
                             static_cast<std::uint8_t>(e.hole2),
                             static_cast<std::uint8_t>(e.particle1),
                             static_cast<std::uint8_t>(e.particle2),
                             static_cast<std::int8_t>(e.phase)});
    t.single_offsets.push_back(t.singles.size());
    t.double_offsets.push_back(t.doubles.size());
  }
  return t;
}

}  // namespace sbd
