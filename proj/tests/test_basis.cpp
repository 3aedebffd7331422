#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "sbd/basis.hpp"
#include "sbd/errors.hpp"
#include "support.hpp"

using namespace sbd;
using sbd::testing::all_strings;

namespace {

// Sign of an operator string applied to a one-spin occupation, evaluated
// directly with creation/annihilation anticommutation (ops right to left).
struct Op {
  bool create;
  int orb;
};

std::optional<std::pair<std::uint64_t, int>> apply_ops(std::uint64_t s, std::initializer_list<Op> ops) {
  int sign = 1;
  std::vector<Op> seq(ops);
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    const bool occ = (s >> it->orb) & 1;
    if (it->create == occ) return std::nullopt;
    if (std::popcount(s & ((std::uint64_t{1} << it->orb) - 1)) & 1) sign = -sign;
    s ^= std::uint64_t{1} << it->orb;
  }
  return std::make_pair(s, sign);
}

IngestResult ingest(const std::string& text, int norb, int na, int nb,
                    BasisMode mode = BasisMode::Product) {
  std::istringstream in(text);
  return ingest_samples(in, norb, na, nb, mode);
}

}  // namespace

TEST(Singles, HandEnumeratedPhases) {
  auto ex = enumerate_singles({0b0011}, 3);
  ASSERT_EQ(ex.size(), 2u);
  bool saw12 = false, saw02 = false;
  for (const auto& e : ex) {
    if (e.hole == 1 && e.particle == 2) {
      EXPECT_EQ(e.target.bits, 0b0101u);
      EXPECT_EQ(e.phase, +1);
      saw12 = true;
    }
    if (e.hole == 0 && e.particle == 2) {
      EXPECT_EQ(e.target.bits, 0b0110u);
      EXPECT_EQ(e.phase, -1);
      saw02 = true;
    }
  }
  EXPECT_TRUE(saw12 && saw02);
}

TEST(Singles, EmptyStringHasNone) { EXPECT_TRUE(enumerate_singles({0}, 5).empty()); }

TEST(Singles, CountIsOccupiedTimesVirtual) {
  for (int norb = 1; norb <= 8; ++norb)
    for (int ne = 0; ne <= norb; ++ne)
      for (auto s : all_strings(norb, ne))
        ASSERT_EQ(enumerate_singles(s, norb).size(), static_cast<std::size_t>(ne * (norb - ne)));
}

TEST(Singles, PhaseMatchesOperatorAlgebra) {
  for (int norb = 1; norb <= 6; ++norb)
    for (int ne = 0; ne <= norb; ++ne)
      for (auto s : all_strings(norb, ne))
        for (const auto& e : enumerate_singles(s, norb)) {
          auto r = apply_ops(s.bits, {{true, e.particle}, {false, e.hole}});
          ASSERT_TRUE(r);
          ASSERT_EQ(r->first, e.target.bits);
          ASSERT_EQ(r->second, e.phase);
        }
}

TEST(Doubles, SequentialSinglesConvention) {
  // p->r on 0b0011 crosses orbital 1 (-1); q->s on 0b0110 crosses orbital 2 (-1).
  auto ex = enumerate_doubles({0b0011}, 4);
  ASSERT_EQ(ex.size(), 1u);
  const auto& e = ex.front();
  EXPECT_EQ(e.target.bits, 0b1100u);
  EXPECT_EQ(e.hole1, 0);
  EXPECT_EQ(e.hole2, 1);
  EXPECT_EQ(e.particle1, 2);
  EXPECT_EQ(e.particle2, 3);
  EXPECT_EQ(move_phase(0b0011, 0, 2), -1);
  EXPECT_EQ(move_phase(0b0110, 1, 3), -1);
  EXPECT_EQ(e.phase, +1);
}

TEST(Doubles, PhaseMatchesOperatorAlgebra) {
  for (int norb = 2; norb <= 6; ++norb)
    for (int ne = 0; ne <= norb; ++ne)
      for (auto s : all_strings(norb, ne))
        for (const auto& e : enumerate_doubles(s, norb)) {
          auto r = apply_ops(s.bits, {{true, e.particle2}, {false, e.hole2},
                                      {true, e.particle1}, {false, e.hole1}});
          ASSERT_TRUE(r);
          ASSERT_EQ(r->first, e.target.bits);
          ASSERT_EQ(r->second, e.phase);
        }
}

TEST(Doubles, DegenerateCases) {
  EXPECT_TRUE(enumerate_doubles({0b1}, 4).empty());
  EXPECT_TRUE(enumerate_doubles({0b1110}, 4).empty());
  const int norb = 6, ne = 3;
  EXPECT_EQ(enumerate_doubles({0b000111}, norb).size(), 3u * 3u);
  (void)ne;
}

TEST(Singles, TwoStepsReachDistanceFour) {
  for (int norb = 2; norb <= 6; ++norb)
    for (int ne = 1; ne < norb; ++ne)
      for (auto s : all_strings(norb, ne)) {
        std::set<std::uint64_t> reached{s.bits};
        for (const auto& a : enumerate_singles(s, norb)) {
          reached.insert(a.target.bits);
          for (const auto& b : enumerate_singles(a.target, norb)) reached.insert(b.target.bits);
        }
        std::set<std::uint64_t> expect;
        for (auto t : all_strings(norb, ne))
          if (std::popcount(t.bits ^ s.bits) <= 4) expect.insert(t.bits);
        ASSERT_EQ(reached, expect);
      }
}

TEST(Basis, ProductIndexing) {
  auto b = SelectedBasis::product(4, 2, 1, {{0b1010}, {0b0011}, {0b0011}}, {{0b0100}, {0b0001}});
  EXPECT_EQ(b.alpha_strings().size(), 2u);
  EXPECT_EQ(b.beta_strings().size(), 2u);
  EXPECT_EQ(b.dimension(), 4u);
  EXPECT_EQ(b.alpha_strings()[0].bits, 0b0011u);
  for (std::uint64_t i = 0; i < b.dimension(); ++i) {
    const Determinant d = b.det(i);
    EXPECT_EQ(b.index_of(d), i);
    EXPECT_EQ(i, *b.alpha_index(d.alpha) * b.beta_strings().size() + *b.beta_index(d.beta));
  }
  EXPECT_FALSE(b.index_of({{0b1100}, {0b0001}}));
}

TEST(Basis, RejectsWrongPopcountAndHighBits) {
  EXPECT_THROW(SelectedBasis::product(4, 2, 1, {{0b0111}}, {{0b1}}), ContractError);
  EXPECT_THROW(SelectedBasis::product(3, 2, 1, {{0b1001}}, {{0b1}}), ContractError);
}

TEST(Basis, ExplicitLookupIsBijection) {
  std::vector<Determinant> dets{{{0b011}, {0b001}}, {{0b101}, {0b010}}, {{0b011}, {0b001}}};
  auto b = SelectedBasis::explicit_dets(3, 2, 1, dets);
  ASSERT_EQ(b.dimension(), 2u);
  for (std::uint64_t i = 0; i < b.dimension(); ++i) EXPECT_EQ(b.index_of(b.det(i)), i);
}

TEST(Basis, ToExplicitKeepsOrder) {
  auto p = SelectedBasis::full_product(4, 2, 2);
  auto e = p.to_explicit();
  ASSERT_EQ(e.dimension(), p.dimension());
  for (std::uint64_t i = 0; i < p.dimension(); ++i) EXPECT_EQ(e.det(i), p.det(i));
}

TEST(Ingest, FilterDedupAndCounts) {
  auto r = ingest("# comment\n\n1010\n1010\n1100\n0101\n", 2, 1, 1);
  EXPECT_EQ(r.report.lines, 4u);
  EXPECT_EQ(r.report.dropped, 1u);
  EXPECT_EQ(r.report.duplicates, 1u);
  EXPECT_EQ(r.report.accepted, 2u);
  EXPECT_EQ(r.basis.alpha_strings().size(), 2u);
  EXPECT_EQ(r.basis.beta_strings().size(), 2u);
  EXPECT_EQ(r.basis.dimension(), 4u);
}

TEST(Ingest, LeftmostCharacterIsOrbitalZero) {
  auto r = ingest("100010\n", 3, 1, 1);
  ASSERT_EQ(r.basis.dimension(), 1u);
  EXPECT_EQ(r.basis.det(0).alpha.bits, 0b001u);
  EXPECT_EQ(r.basis.det(0).beta.bits, 0b010u);
  EXPECT_EQ(format_sample(r.basis.det(0), 3), "100010");
}

TEST(Ingest, RepeatedSampleIsIdempotent) {
  auto once = ingest("1001\n", 2, 1, 1);
  auto twice = ingest("1001\n1001\n", 2, 1, 1);
  EXPECT_EQ(once.basis.alpha_strings(), twice.basis.alpha_strings());
  EXPECT_EQ(once.basis.beta_strings(), twice.basis.beta_strings());
  EXPECT_EQ(twice.report.duplicates, 1u);
}

TEST(Ingest, ExplicitModeKeepsSampledDeterminantsOnly) {
  auto r = ingest("1001\n0110\n", 2, 1, 1, BasisMode::Explicit);
  EXPECT_EQ(r.basis.mode(), BasisMode::Explicit);
  EXPECT_EQ(r.basis.dimension(), 2u);
}

TEST(Ingest, WrongLengthReportsLine) {
  try {
    ingest("1001\n\n10011\n", 2, 1, 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ingest, BadCharacterReportsLine) {
  try {
    ingest("10x1\n", 2, 1, 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Ingest, SixThousandDistinctHalvesMultiply) {
  const int norb = 18;
  auto strings = all_strings(norb, 9);
  std::mt19937_64 rng(2024);
  std::shuffle(strings.begin(), strings.end(), rng);
  std::string text;
  for (int i = 0; i < 6000; ++i)
    text += format_sample({strings[static_cast<std::size_t>(i)], strings[static_cast<std::size_t>(6000 + i)]}, norb) + "\n";
  auto r = ingest(text, norb, 9, 9);
  EXPECT_EQ(r.basis.alpha_strings().size(), 6000u);
  EXPECT_EQ(r.basis.beta_strings().size(), 6000u);
  EXPECT_EQ(r.basis.dimension(), 36000000u);
}

TEST(ExcitationTable, HandExample) {
  std::vector<SpinString> set{{0b0011}, {0b0101}, {0b0110}};
  auto t = build_excitation_table(set, 3);
  ASSERT_EQ(t.n_sources(), 3u);
  auto s0 = t.singles_of(0);
  ASSERT_EQ(s0.size(), 2u);
  for (const auto& e : s0) {
    if (e.target == 1) {
      EXPECT_EQ(e.hole, 1);
      EXPECT_EQ(e.particle, 2);
      EXPECT_EQ(e.phase, 1);
    } else {
      EXPECT_EQ(e.target, 2u);
      EXPECT_EQ(e.hole, 0);
      EXPECT_EQ(e.particle, 2);
      EXPECT_EQ(e.phase, -1);
    }
  }
}

TEST(ExcitationTable, SingletonHasNoEntries) {
  std::vector<SpinString> set{{0b0101}};
  auto t = build_excitation_table(set, 4);
  EXPECT_TRUE(t.singles.empty());
  EXPECT_TRUE(t.doubles.empty());
}

TEST(ExcitationTable, CompleteSetKeepsEverything) {
  for (int norb = 2; norb <= 6; ++norb)
    for (int ne = 0; ne <= norb; ++ne) {
      auto set = all_strings(norb, ne);
      auto t = build_excitation_table(set, norb);
      for (std::size_t i = 0; i < set.size(); ++i) {
        ASSERT_EQ(t.singles_of(i).size(), enumerate_singles(set[i], norb).size());
        ASSERT_EQ(t.doubles_of(i).size(), enumerate_doubles(set[i], norb).size());
      }
    }
}

TEST(ExcitationTable, InvolutionAndPopcount) {
  std::mt19937_64 rng(9);
  for (int norb = 2; norb <= 6; ++norb)
    for (int ne = 1; ne < norb; ++ne)
      for (double keep : {1.0, 0.5}) {
        auto set = keep == 1.0 ? all_strings(norb, ne) : sbd::testing::random_subset(norb, ne, keep, rng);
        auto t = build_excitation_table(set, norb);
        for (const auto& e : t.singles) {
          ASSERT_EQ(set[e.target].popcount(), set[e.source].popcount());
          auto back = t.singles_of(e.target);
          auto it = std::find_if(back.begin(), back.end(), [&](const SingleEntry& b) {
            return b.target == e.source && b.hole == e.particle && b.particle == e.hole;
          });
          ASSERT_NE(it, back.end());
          ASSERT_EQ(it->phase, e.phase);
        }
        for (const auto& e : t.doubles) {
          ASSERT_EQ(set[e.target].popcount(), set[e.source].popcount());
          ASSERT_TRUE(e.phase == 1 || e.phase == -1);
        }
      }
}

TEST(ExcitationTable, UnsortedInputRejected) {
  std::vector<SpinString> set{{0b0110}, {0b0011}};
  EXPECT_THROW(build_excitation_table(set, 3), ContractError);
}
