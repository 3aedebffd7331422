#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbd/basis.hpp"
#include "sbd/exec.hpp"
#include "sbd/integrals.hpp"

namespace sbd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitMismatch = 2;  ///< verify: energies disagree
inline constexpr int kSchemaVersion = 1;

struct InstanceSpec {
  std::string fcidump;
  std::string samples;
  std::vector<long long> gen_random;  ///< NORB, NA, NB, SEED
  long long sample_count = 0;         ///< random samples drawn for --gen-random
  BasisMode mode = BasisMode::Product;
};

struct Instance {
  IntegralTable table{1};
  SelectedBasis basis;
  IngestReport ingest;
  bool sampled = false;  ///< basis came from sample lines (else full product space)
  std::string source;
};

/// Builds integrals and basis from files or the seeded generator.
/// Throws on unreadable or malformed input and on an empty basis.
Instance load_instance(const InstanceSpec& spec);

/// `count` random configurations with the given electron counts, one sample
/// line each, drawn from a generator seeded with `seed`.
std::string random_sample_lines(int norb, int n_alpha, int n_beta, long long count,
                                std::uint64_t seed);

struct SolveSpec {
  int n_roots = 1;
  double tol = 1e-8;
  int max_iters = 200;
  int max_subspace = 32;
  double delta = 1e-6;
  int workers = 1;
  bool overlap = true;
  bool deterministic = false;
  double transfer_delay_ms = 0.0;
};

/// Runs the eigensolver and returns the report document.
nlohmann::json solve_report(const Instance& inst, const SolveSpec& spec);

/// Problems found in a report document; empty when it conforms.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Human-readable rendering of any report document.
std::string render_text(const nlohmann::json& report);

/// Entry point shared by the executable and the tests; `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbd::cli
