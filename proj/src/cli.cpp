#include "sbd/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "sbd/apply.hpp"
#include "sbd/davidson.hpp"
#include "sbd/distsim.hpp"
#include "sbd/errors.hpp"
#include "sbd/oracle.hpp"

namespace sbd::cli {

using nlohmann::json;

namespace {

const char* mode_name(BasisMode m) { return m == BasisMode::Product ? "product" : "explicit"; }

std::size_t distinct_halves(const SelectedBasis& b, bool alpha) {
  if (b.mode() == BasisMode::Product) return alpha ? b.alpha_strings().size() : b.beta_strings().size();
  std::vector<std::uint64_t> s;
  s.reserve(b.dets().size());
  for (const auto& d : b.dets()) s.push_back(alpha ? d.alpha.bits : d.beta.bits);
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

json instance_json(const Instance& inst) {
  const auto& b = inst.basis;
  return {{"source", inst.source},
          {"norb", b.norb()},
          {"n_alpha", b.n_alpha_elec()},
          {"n_beta", b.n_beta_elec()},
          {"mode", mode_name(b.mode())},
          {"basis",
           {{"alpha_strings", distinct_halves(b, true)},
            {"beta_strings", distinct_halves(b, false)},
            {"dimension", b.dimension()}}},
          {"samples",
           {{"sampled", inst.sampled},
            {"lines", inst.ingest.lines},
            {"accepted", inst.ingest.accepted},
            {"dropped", inst.ingest.dropped},
            {"duplicates", inst.ingest.duplicates}}}};
}

// The matrix-free operator plus its diagonal, owning whatever state it needs.
struct Operator {
  std::vector<double> diag;
  LinearOperator apply;
  std::shared_ptr<void> keep_alive;
};

Operator make_operator(const Instance& inst, const SolveSpec& spec) {
  const auto policy = spec.deterministic ? ExecPolicy::Deterministic : ExecPolicy::Parallel;
  Operator op;
  if (inst.basis.mode() == BasisMode::Explicit) {
    const ExecConfig exec{policy, spec.workers};
    op.diag = compute_diagonal_full(inst.basis, inst.table);
    const auto* basis = &inst.basis;
    const auto* table = &inst.table;
    auto diag = std::make_shared<std::vector<double>>(op.diag);
    op.keep_alive = diag;
    op.apply = [basis, table, exec, diag](std::span<const double> x, std::span<double> y) {
      const auto r = apply_H_full(x, *basis, *table, exec, *diag);
      std::copy(r.begin(), r.end(), y.begin());
    };
    return op;
  }
  if (spec.workers <= 1) {
    auto h = std::make_shared<ProductHamiltonian>(inst.basis, inst.table, ExecConfig{policy, 1});
    op.diag = h->diagonal();
    op.keep_alive = h;
    op.apply = [h](std::span<const double> x, std::span<double> y) { h->apply(x, y); };
    return op;
  }
  struct Dist {
    SpinTables tables;
    std::unique_ptr<DistributedHamiltonian> h;
  };
  auto d = std::make_shared<Dist>();
  d->tables = build_spin_tables(inst.basis);
  DistOptions opts;
  opts.overlap = spec.overlap;
  opts.policy = policy;
  opts.transfer_delay = std::chrono::duration<double>(spec.transfer_delay_ms * 1e-3);
  d->h = std::make_unique<DistributedHamiltonian>(
      inst.basis, inst.table, d->tables,
      make_partition(static_cast<std::uint32_t>(inst.basis.alpha_strings().size()), spec.workers),
      opts);
  op.diag = d->h->diagonal();
  op.keep_alive = d;
  op.apply = [d](std::span<const double> x, std::span<double> y) { d->h->apply(x, y); };
  return op;
}

DavidsonOptions davidson_options(const SolveSpec& spec) {
  DavidsonOptions o;
  o.n_roots = spec.n_roots;
  o.tol_residual = spec.tol;
  o.max_iters = spec.max_iters;
  o.max_subspace = spec.max_subspace;
  o.restart_keep = std::max(o.restart_keep, spec.n_roots);
  o.precond_delta = spec.delta;
  return o;
}

json solver_json(const SolveSpec& spec) {
  return {{"n_roots", spec.n_roots},       {"tol", spec.tol},
          {"max_iters", spec.max_iters},   {"max_subspace", spec.max_subspace},
          {"delta", spec.delta},           {"workers", spec.workers},
          {"overlap", spec.overlap},       {"deterministic", spec.deterministic},
          {"transfer_delay_ms", spec.transfer_delay_ms}};
}

}  // namespace

std::string random_sample_lines(int norb, int n_alpha, int n_beta, long long count,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> orbs(static_cast<std::size_t>(norb));
  auto draw = [&](int ne) {
    std::iota(orbs.begin(), orbs.end(), 0);
    std::shuffle(orbs.begin(), orbs.end(), rng);
    std::uint64_t bits = 0;
    for (int k = 0; k < ne; ++k) bits |= std::uint64_t{1} << orbs[static_cast<std::size_t>(k)];
    return SpinString{bits};
  };
  std::string out;
  for (long long i = 0; i < count; ++i) {
    const SpinString a = draw(n_alpha);
    const SpinString b = draw(n_beta);
    out += format_sample(Determinant{a, b}, norb);
    out += '\n';
  }
  return out;
}

Instance load_instance(const InstanceSpec& spec) {
  const bool have_gen = !spec.gen_random.empty();
  if (have_gen == !spec.fcidump.empty())
    throw std::invalid_argument("give exactly one of --fcidump or --gen-random");
  Instance inst;
  int norb = 0, na = 0, nb = 0;
  std::uint64_t seed = 0;
  if (have_gen) {
    if (spec.gen_random.size() != 4)
      throw std::invalid_argument("--gen-random expects NORB,NA,NB,SEED");
    norb = static_cast<int>(spec.gen_random[0]);
    na = static_cast<int>(spec.gen_random[1]);
    nb = static_cast<int>(spec.gen_random[2]);
    seed = static_cast<std::uint64_t>(spec.gen_random[3]);
    if (norb < 1 || norb > 64 || na < 0 || nb < 0 || na > norb || nb > norb)
      throw std::invalid_argument("--gen-random: need 1 <= NORB <= 64 and 0 <= NA, NB <= NORB");
    inst.table = random_integrals(static_cast<std::size_t>(norb), seed);
    inst.source = "random(norb=" + std::to_string(norb) + ",na=" + std::to_string(na) +
                  ",nb=" + std::to_string(nb) + ",seed=" + std::to_string(seed) + ")";
  } else {
    FcidumpData data = read_fcidump(spec.fcidump);
    if ((data.nelec + data.ms2) % 2 != 0 || data.nelec < std::abs(data.ms2))
      throw std::invalid_argument(spec.fcidump + ": NELEC and MS2 are inconsistent");
    norb = static_cast<int>(data.table.norb());
    na = (data.nelec + data.ms2) / 2;
    nb = (data.nelec - data.ms2) / 2;
    if (na > norb || nb > norb)
      throw std::invalid_argument(spec.fcidump + ": more electrons per spin than orbitals");
    inst.table = std::move(data.table);
    inst.source = spec.fcidump;
  }

  if (!spec.samples.empty()) {
    IngestResult r = read_samples(spec.samples, norb, na, nb, spec.mode);
    inst.basis = std::move(r.basis);
    inst.ingest = r.report;
    inst.sampled = true;
  } else if (have_gen && spec.sample_count > 0) {
    std::istringstream lines(random_sample_lines(norb, na, nb, spec.sample_count, seed ^ 0xa5a5a5a5ULL));
    IngestResult r = ingest_samples(lines, norb, na, nb, spec.mode);
    inst.basis = std::move(r.basis);
    inst.ingest = r.report;
    inst.sampled = true;
  } else {
    if (norb > 30) throw std::invalid_argument("full configuration space needs NORB <= 30; supply samples");
    inst.basis = SelectedBasis::full_product(norb, na, nb);
    if (spec.mode == BasisMode::Explicit) inst.basis = inst.basis.to_explicit();
  }
  if (inst.basis.dimension() == 0)
    throw std::invalid_argument("empty basis: no configuration passed the electron-count filter" +
                                (spec.samples.empty() ? std::string{} : " in " + spec.samples));
  return inst;
}

json solve_report(const Instance& inst, const SolveSpec& spec) {
  Operator op = make_operator(inst, spec);
  const DavidsonResult res = davidson_solve(op.apply, op.diag, {}, davidson_options(spec));
  const auto& t = res.stats.apply_seconds;
  double tmin = 0, tmax = 0, tmean = 0;
  if (!t.empty()) {
    tmin = *std::min_element(t.begin(), t.end());
    tmax = *std::max_element(t.begin(), t.end());
    tmean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  }
  return {{"schema_version", kSchemaVersion},
          {"command", "solve"},
          {"instance", instance_json(inst)},
          {"solver", solver_json(spec)},
          {"energies", res.energies},
          {"residual_norms", res.residual_norms},
          {"iterations", res.iterations},
          {"converged", res.converged},
          {"restarts", res.stats.restarts.size()},
          {"breakdowns", res.stats.breakdowns},
          {"apply_time",
           {{"calls", t.size()}, {"min_s", tmin}, {"mean_s", tmean}, {"max_s", tmax}}}};
}

// ----------------------------------------------------------------------------

namespace {

using Check = std::vector<std::string>;

void need(const json& j, const std::string& path, const std::string& key, json::value_t type,
          Check& problems) {
  if (!j.is_object() || !j.contains(key)) {
    problems.push_back(path + key + ": missing");
    return;
  }
  const json& v = j.at(key);
  const bool ok = type == json::value_t::number_float
                      ? v.is_number()
                      : (type == json::value_t::number_unsigned ? v.is_number_integer() && v.get<long long>() >= 0
                                                                : v.type() == type);
  if (!ok) problems.push_back(path + key + ": wrong type");
}

void check_instance(const json& j, Check& p) {
  using T = json::value_t;
  need(j, "", "instance", T::object, p);
  if (!j.contains("instance") || !j["instance"].is_object()) return;
  const json& in = j["instance"];
  need(in, "instance.", "source", T::string, p);
  for (const char* k : {"norb", "n_alpha", "n_beta"}) need(in, "instance.", k, T::number_unsigned, p);
  need(in, "instance.", "mode", T::string, p);
  need(in, "instance.", "basis", T::object, p);
  need(in, "instance.", "samples", T::object, p);
  if (in.contains("basis") && in["basis"].is_object())
    for (const char* k : {"alpha_strings", "beta_strings", "dimension"})
      need(in["basis"], "instance.basis.", k, T::number_unsigned, p);
  if (in.contains("samples") && in["samples"].is_object()) {
    need(in["samples"], "instance.samples.", "sampled", T::boolean, p);
    for (const char* k : {"lines", "accepted", "dropped", "duplicates"})
      need(in["samples"], "instance.samples.", k, T::number_unsigned, p);
  }
}

void check_number_array(const json& j, const std::string& key, Check& p) {
  need(j, "", key, json::value_t::array, p);
  if (j.contains(key) && j[key].is_array())
    for (const auto& v : j[key])
      if (!v.is_number()) p.push_back(key + ": non-numeric entry");
}

}  // namespace

std::vector<std::string> validate_report(const json& j) {
  using T = json::value_t;
  Check p;
  if (!j.is_object()) return {"report is not an object"};
  need(j, "", "schema_version", T::number_unsigned, p);
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
    p.push_back("schema_version: unsupported");
  need(j, "", "command", T::string, p);
  if (!p.empty()) return p;
  const std::string cmd = j["command"];
  check_instance(j, p);
  if (cmd == "solve" || cmd == "verify") {
    need(j, "", "solver", T::object, p);
    check_number_array(j, "energies", p);
    check_number_array(j, "residual_norms", p);
    need(j, "", "iterations", T::number_unsigned, p);
    need(j, "", "converged", T::boolean, p);
    need(j, "", "restarts", T::number_unsigned, p);
    need(j, "", "breakdowns", T::number_unsigned, p);
    need(j, "", "apply_time", T::object, p);
    if (j.contains("apply_time") && j["apply_time"].is_object()) {
      need(j["apply_time"], "apply_time.", "calls", T::number_unsigned, p);
      for (const char* k : {"min_s", "mean_s", "max_s"})
        need(j["apply_time"], "apply_time.", k, T::number_float, p);
    }
  }
  if (cmd == "verify") {
    need(j, "", "verify", T::object, p);
    if (j.contains("verify") && j["verify"].is_object()) {
      for (const char* k : {"davidson_energy", "oracle_energy", "difference", "tolerance"})
        need(j["verify"], "verify.", k, T::number_float, p);
      need(j["verify"], "verify.", "pass", T::boolean, p);
    }
  } else if (cmd == "bench") {
    need(j, "", "repeats", T::number_unsigned, p);
    need(j, "", "overlap", T::boolean, p);
    need(j, "", "rows", T::array, p);
    if (j.contains("rows") && j["rows"].is_array()) {
      if (j["rows"].empty()) p.push_back("rows: empty");
      for (const auto& r : j["rows"]) {
        need(r, "rows[].", "workers", T::number_unsigned, p);
        for (const char* k : {"mean_s", "min_s", "max_s", "efficiency"})
          need(r, "rows[].", k, T::number_float, p);
      }
    }
  } else if (cmd != "solve") {
    p.push_back("command: unknown value '" + cmd + "'");
  }
  return p;
}

std::string render_text(const json& j) {
  std::ostringstream os;
  os << std::setprecision(12);
  const json& in = j["instance"];
  os << "instance   " << in["source"].get<std::string>() << "  norb=" << in["norb"]
     << " na=" << in["n_alpha"] << " nb=" << in["n_beta"] << '\n';
  os << "basis      " << in["mode"].get<std::string>() << "  |A|=" << in["basis"]["alpha_strings"]
     << " |B|=" << in["basis"]["beta_strings"] << " N=" << in["basis"]["dimension"] << '\n';
  if (in["samples"]["sampled"].get<bool>())
    os << "samples    lines=" << in["samples"]["lines"] << " accepted=" << in["samples"]["accepted"]
       << " dropped=" << in["samples"]["dropped"] << " duplicates=" << in["samples"]["duplicates"]
       << '\n';
  const std::string cmd = j["command"];
  if (cmd == "solve" || cmd == "verify") {
    for (std::size_t r = 0; r < j["energies"].size(); ++r)
      os << "root " << r << "     E=" << j["energies"][r].get<double>()
         << "  residual=" << std::setprecision(3) << j["residual_norms"][r].get<double>()
         << std::setprecision(12) << '\n';
    os << "iterations " << j["iterations"] << "  converged=" << (j["converged"].get<bool>() ? "yes" : "no")
       << "  restarts=" << j["restarts"] << "  breakdowns=" << j["breakdowns"] << '\n';
    const json& at = j["apply_time"];
    os << std::setprecision(4) << "applyH     calls=" << at["calls"] << " min=" << at["min_s"].get<double>()
       << "s mean=" << at["mean_s"].get<double>() << "s max=" << at["max_s"].get<double>() << "s\n"
       << std::setprecision(12);
  }
  if (cmd == "verify") {
    const json& v = j["verify"];
    os << "davidson   " << v["davidson_energy"].get<double>() << '\n'
       << "oracle     " << v["oracle_energy"].get<double>() << '\n'
       << "difference " << std::setprecision(3) << v["difference"].get<double>()
       << "  tolerance=" << v["tolerance"].get<double>() << "  " << (v["pass"].get<bool>() ? "PASS" : "FAIL")
       << '\n';
  }
  if (cmd == "bench") {
    os << "overlap=" << (j["overlap"].get<bool>() ? "on" : "off") << "  repeats=" << j["repeats"] << '\n';
    os << std::left << std::setw(9) << "workers" << std::setw(14) << "mean_s" << std::setw(14)
       << "min_s" << std::setw(14) << "max_s" << "efficiency\n";
    os << std::setprecision(6);
    for (const auto& r : j["rows"])
      os << std::setw(9) << r["workers"].get<int>() << std::setw(14) << r["mean_s"].get<double>()
         << std::setw(14) << r["min_s"].get<double>() << std::setw(14) << r["max_s"].get<double>()
         << std::setprecision(3) << r["efficiency"].get<double>() << std::setprecision(6) << '\n';
  }
  return os.str();
}

// ----------------------------------------------------------------------------

namespace {

json bench_report(const Instance& inst, std::vector<int> workers, int repeats, bool overlap,
                  bool deterministic, double delay_ms) {
  if (inst.basis.mode() != BasisMode::Product)
    throw std::invalid_argument("bench requires --mode product");
  if (repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
  std::sort(workers.begin(), workers.end());
  workers.erase(std::unique(workers.begin(), workers.end()), workers.end());
  if (workers.empty() || workers.front() != 1) workers.insert(workers.begin(), 1);

  const SpinTables tables = build_spin_tables(inst.basis);
  const auto n = static_cast<std::size_t>(inst.basis.dimension());
  std::vector<double> x(n), y(n);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : x) v = u(rng);

  DistOptions opts;
  opts.overlap = overlap;
  opts.policy = deterministic ? ExecPolicy::Deterministic : ExecPolicy::Parallel;
  opts.transfer_delay = std::chrono::duration<double>(delay_ms * 1e-3);
  json rows = json::array();
  double t1 = 0.0;
  for (int p : workers) {
    DistributedHamiltonian h(
        inst.basis, inst.table, tables,
        make_partition(static_cast<std::uint32_t>(inst.basis.alpha_strings().size()), p), opts);
    h.apply(x, y);  // warm-up
    std::vector<double> ts;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      h.apply(x, y);
      ts.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const double mean = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
    if (p == 1) t1 = mean;
    rows.push_back({{"workers", p},
                    {"mean_s", mean},
                    {"min_s", *std::min_element(ts.begin(), ts.end())},
                    {"max_s", *std::max_element(ts.begin(), ts.end())},
                    {"efficiency", t1 / (static_cast<double>(p) * mean)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"command", "bench"},
          {"instance", instance_json(inst)},
          {"repeats", repeats},
          {"overlap", overlap},
          {"rows", rows}};
}

void add_instance_options(CLI::App& app, InstanceSpec& spec, std::string& mode) {
  app.add_option("--fcidump", spec.fcidump, "FCIDUMP integral file");
  app.add_option("--samples", spec.samples, "sampled configurations, one 0/1 line each");
  app.add_option("--gen-random", spec.gen_random, "synthetic instance NORB,NA,NB,SEED")
      ->delimiter(',')
      ->expected(4);
  app.add_option("--sample-count", spec.sample_count,
                 "with --gen-random: draw this many random samples instead of the full space");
  app.add_option("--mode", mode, "basis mode")->check(CLI::IsMember({"product", "explicit"}));
}

void add_solver_options(CLI::App& app, SolveSpec& s, std::string& overlap) {
  app.add_option("--nroots", s.n_roots, "number of lowest roots")->check(CLI::PositiveNumber);
  app.add_option("--tol", s.tol, "residual norm tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", s.max_iters, "iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--max-subspace", s.max_subspace, "subspace size before restart")
      ->check(CLI::Range(2, 100000));
  app.add_option("--delta", s.delta, "preconditioner denominator floor")->check(CLI::PositiveNumber);
  app.add_option("--workers", s.workers, "ring workers (product) or threads (explicit)")
      ->check(CLI::PositiveNumber);
  app.add_option("--overlap", overlap, "overlap block exchange with compute")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_flag("--deterministic", s.deterministic, "bitwise reproducible accumulation order");
  app.add_option("--transfer-delay-ms", s.transfer_delay_ms, "injected per-step transfer latency")
      ->check(CLI::NonNegativeNumber);
}

void emit(const json& report, bool as_json, const std::string& out_path, std::ostream& out) {
  const std::string text = as_json ? report.dump(2) + "\n" : render_text(report);
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selected-basis Hamiltonian diagonalization", "sbdiag"};
  app.require_subcommand(1);

  InstanceSpec inst_spec;
  SolveSpec solve_spec;
  std::string mode = "product", overlap = "on", out_path;
  bool as_json = false;
  double energy_tol = 1e-8;
  std::vector<int> bench_workers{1, 2, 4};
  int repeats = 3;
  std::string gen_fcidump, gen_samples;

  auto* solve = app.add_subcommand("solve", "lowest eigenpairs of the selected-basis Hamiltonian");
  auto* verify = app.add_subcommand("verify", "compare the iterative solution with dense diagonalization");
  auto* bench = app.add_subcommand("bench", "time Hamiltonian applications per worker count");
  auto* gen = app.add_subcommand("gen", "write a synthetic instance to files");

  for (auto* sc : {solve, verify}) {
    add_instance_options(*sc, inst_spec, mode);
    add_solver_options(*sc, solve_spec, overlap);
    sc->add_option("--out", out_path, "write the report here instead of stdout");
    sc->add_flag("--json", as_json, "JSON report");
  }
  verify->add_option("--energy-tol", energy_tol, "allowed |E_davidson - E_dense|")
      ->check(CLI::PositiveNumber);

  add_instance_options(*bench, inst_spec, mode);
  bench->add_option("--workers", bench_workers, "worker counts, e.g. 1,2,4,8")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--repeats", repeats, "timed applications per worker count")
      ->check(CLI::PositiveNumber);
  bench->add_option("--overlap", overlap, "overlap block exchange with compute")
      ->check(CLI::IsMember({"on", "off"}));
  bench->add_flag("--deterministic", solve_spec.deterministic, "row-owned accumulation");
  bench->add_option("--transfer-delay-ms", solve_spec.transfer_delay_ms, "injected latency")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out_path, "write the report here instead of stdout");
  bench->add_flag("--json", as_json, "JSON report");

  gen->add_option("--gen-random", inst_spec.gen_random, "NORB,NA,NB,SEED")
      ->delimiter(',')
      ->expected(4)
      ->required();
  gen->add_option("--sample-count", inst_spec.sample_count, "random samples to write")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--fcidump-out", gen_fcidump, "integral file to write")->required();
  gen->add_option("--samples-out", gen_samples, "sample file to write");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    inst_spec.mode = mode == "explicit" ? BasisMode::Explicit : BasisMode::Product;
    solve_spec.overlap = overlap == "on";

    if (gen->parsed()) {
      if (inst_spec.gen_random.size() != 4) throw std::invalid_argument("--gen-random expects NORB,NA,NB,SEED");
      const auto norb = static_cast<int>(inst_spec.gen_random[0]);
      const auto na = static_cast<int>(inst_spec.gen_random[1]);
      const auto nb = static_cast<int>(inst_spec.gen_random[2]);
      const auto seed = static_cast<std::uint64_t>(inst_spec.gen_random[3]);
      if (norb < 1 || norb > 64 || na < 0 || nb < 0 || na > norb || nb > norb)
        throw std::invalid_argument("--gen-random: need 1 <= NORB <= 64 and 0 <= NA, NB <= NORB");
      std::ofstream f(gen_fcidump);
      if (!f) throw std::runtime_error("cannot write " + gen_fcidump);
      write_fcidump(f, random_integrals(static_cast<std::size_t>(norb), seed), na + nb, na - nb);
      if (!gen_samples.empty()) {
        std::ofstream s(gen_samples);
        if (!s) throw std::runtime_error("cannot write " + gen_samples);
        s << random_sample_lines(norb, na, nb, inst_spec.sample_count, seed ^ 0xa5a5a5a5ULL);
      }
      return kExitOk;
    }

    const Instance inst = load_instance(inst_spec);

    if (bench->parsed()) {
      emit(bench_report(inst, bench_workers, repeats, solve_spec.overlap, solve_spec.deterministic,
                        solve_spec.transfer_delay_ms),
           as_json, out_path, out);
      return kExitOk;
    }

    if (verify->parsed() && inst.basis.dimension() > kOracleCap) {
      err << "error: N = " << inst.basis.dimension() << " exceeds the dense verification cap of "
          << kOracleCap << "; use fewer orbitals or electrons, or pass --samples with fewer lines\n";
      return kExitInputError;
    }

    json report = solve_report(inst, solve_spec);
    if (verify->parsed()) {
      const SymmetricEigen eig = dense_eigensolve(assemble_dense(inst.basis, inst.table));
      const double e_dav = report["energies"][0];
      const double diff = std::abs(e_dav - eig.values[0]);
      const bool pass = diff <= energy_tol;
      report["command"] = "verify";
      report["verify"] = {{"davidson_energy", e_dav},
                          {"oracle_energy", eig.values[0]},
                          {"difference", diff},
                          {"tolerance", energy_tol},
                          {"pass", pass}};
      emit(report, as_json, out_path, out);
      return pass ? kExitOk : kExitMismatch;
    }
    emit(report, as_json, out_path, out);
    return report["converged"].get<bool>() ? kExitOk : kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace sbd::cli
