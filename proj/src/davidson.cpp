#include "sbd/davidson.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sbd/errors.hpp"

namespace sbd {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Columns of `vs` combined with the first `m` columns of `coef`.
std::vector<std::vector<double>> rotate(const std::vector<std::vector<double>>& vs,
                                        const DenseMatrix& coef, std::size_t m) {
  const std::size_t n = vs.front().size();
  std::vector<std::vector<double>> out(m, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < vs.size(); ++i) axpy(coef(i, j), vs[i], out[j]);
  return out;
}

}  // namespace

void DavidsonOptions::validate() const {
  if (n_roots < 1) throw ContractError("n_roots must be >= 1");
  if (restart_keep < n_roots) throw ContractError("restart_keep must be >= n_roots");
  if (max_subspace < restart_keep) throw ContractError("max_subspace must be >= restart_keep");
  if (max_subspace < 2) throw ContractError("max_subspace must be >= 2");
  if (!(tol_residual > 0)) throw ContractError("tol_residual must be > 0");
  if (!(precond_delta > 0)) throw ContractError("precond_delta must be > 0");
  if (max_iters < 1) throw ContractError("max_iters must be >= 1");
}

std::optional<std::vector<double>> orthogonalize(std::span<const double> t,
                                                 const std::vector<std::vector<double>>& basis,
                                                 bool reorth) {
  const double t_norm = norm2(t);
  if (t_norm == 0.0 || !std::isfinite(t_norm)) return std::nullopt;
  std::vector<double> w(t.begin(), t.end());
  const int passes = reorth ? 2 : 1;
  for (int pass = 0; pass < passes; ++pass)
    for (const auto& v : basis) axpy(-dot(v, w), v, w);
  const double w_norm = norm2(w);
  if (w_norm < 1e-12 * t_norm) return std::nullopt;
  for (double& x : w) x /= w_norm;
  return w;
}

std::vector<double> precondition(std::span<const double> r, std::span<const double> diag,
                                 double theta, double delta) {
  if (r.size() != diag.size()) throw ContractError("precondition: size mismatch");
  std::vector<double> t(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = diag[i] - theta;
    const double sign = d >= 0.0 ? 1.0 : -1.0;
    t[i] = r[i] / (sign * std::max(std::abs(d), delta));
  }
  return t;
}

// ----------------------------------------------------------------------------

namespace {

class DavidsonSolver {
 public:
  DavidsonSolver(const LinearOperator& apply, std::span<const double> diag,
                 const DavidsonOptions& opts)
      : apply_(apply), diag_(diag), opts_(opts), n_(diag.size()), rng_(opts.seed) {}

  DavidsonResult run(std::span<const double> x0);

 private:
  void seed_space(std::span<const double> x0);
  bool push_vector(std::span<const double> t);
  void apply_pending();
  void restart(const SymmetricEigen& eig, int iteration);
  double orthogonality_error() const;

  const LinearOperator& apply_;
  std::span<const double> diag_;
  const DavidsonOptions& opts_;
  std::size_t n_;
  std::mt19937_64 rng_;

  std::vector<std::vector<double>> v_;  // orthonormal search space
  std::vector<std::vector<double>> w_;  // w_j = H v_j
  DenseMatrix gram_;                    // V^T V, maintained incrementally
  DavidsonStats stats_;
};

bool DavidsonSolver::push_vector(std::span<const double> t) {
  auto v = orthogonalize(t, v_, opts_.reorthogonalize);
  if (!v) return false;
  const std::size_t k = v_.size();
  DenseMatrix g(k + 1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) g(i, j) = gram_(i, j);
  for (std::size_t i = 0; i < k; ++i) g(i, k) = g(k, i) = dot(v_[i], *v);
  g(k, k) = dot(*v, *v);
  gram_ = std::move(g);
  v_.push_back(std::move(*v));
  return true;
}

void DavidsonSolver::seed_space(std::span<const double> x0) {
  if (!x0.empty()) {
    if (x0.size() != n_) throw ContractError("davidson: |x0| != N");
    if (!push_vector(x0)) throw ContractError("davidson: initial vector is zero");
  }
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return diag_[a] < diag_[b]; });
  std::vector<double> e(n_, 0.0);
  for (std::size_t idx : order) {
    if (v_.size() >= static_cast<std::size_t>(opts_.n_roots)) break;
    e[idx] = 1.0;
    push_vector(e);
    e[idx] = 0.0;
  }
}

void DavidsonSolver::apply_pending() {
  while (w_.size() < v_.size()) {
    std::vector<double> w(n_);
    const auto t0 = std::chrono::steady_clock::now();
    apply_(v_[w_.size()], w);
    const auto t1 = std::chrono::steady_clock::now();
    stats_.apply_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    w_.push_back(std::move(w));
  }
}

double DavidsonSolver::orthogonality_error() const {
  double s = 0.0;
  for (std::size_t i = 0; i < gram_.size(); ++i)
    for (std::size_t j = 0; j < gram_.size(); ++j) {
      const double d = gram_(i, j) - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  return std::sqrt(s);
}

void DavidsonSolver::restart(const SymmetricEigen& eig, int iteration) {
  const std::size_t keep =
      std::min<std::size_t>(static_cast<std::size_t>(opts_.restart_keep), v_.size() - 1);
  RestartEvent ev{iteration, eig.values[0], 0.0};
  v_ = rotate(v_, eig.vectors, keep);
  w_ = rotate(w_, eig.vectors, keep);
  gram_ = DenseMatrix(keep);
  for (std::size_t i = 0; i < keep; ++i)
    for (std::size_t j = 0; j < keep; ++j) gram_(i, j) = dot(v_[i], v_[j]);
  DenseMatrix t(keep);
  for (std::size_t i = 0; i < keep; ++i)
    for (std::size_t j = 0; j < keep; ++j) t(i, j) = dot(v_[i], w_[j]);
  ev.theta_after = projected_eigensolve(t).values[0];
  stats_.restarts.push_back(ev);
}

DavidsonResult DavidsonSolver::run(std::span<const double> x0) {
  seed_space(x0);
  DavidsonResult result;
  const auto roots = static_cast<std::size_t>(opts_.n_roots);
  double prev_theta = 0.0;
  std::vector<std::vector<double>> ritz(roots), resid(roots);

  for (int iter = 1; iter <= opts_.max_iters; ++iter) {
    apply_pending();
    const std::size_t k = v_.size();
    DenseMatrix t(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j)
        t(i, j) = t(j, i) = 0.5 * (dot(v_[i], w_[j]) + dot(v_[j], w_[i]));
    const SymmetricEigen eig = projected_eigensolve(t);

    const std::size_t m = std::min(roots, k);
    DavidsonIteration it;
    it.iteration = iter;
    it.subspace_size = static_cast<int>(k);
    it.orthogonality_error = orthogonality_error();
    for (std::size_t r = 0; r < m; ++r) {
      ritz[r].assign(n_, 0.0);
      resid[r].assign(n_, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        axpy(eig.vectors(j, r), v_[j], ritz[r]);
        axpy(eig.vectors(j, r), w_[j], resid[r]);
      }
      axpy(-eig.values[r], ritz[r], resid[r]);
      it.ritz_values.push_back(eig.values[r]);
      it.residual_norms.push_back(norm2(resid[r]));
    }
    it.theta_change = iter == 1 ? 0.0 : std::abs(eig.values[0] - prev_theta);
    prev_theta = eig.values[0];

    result.iterations = iter;
    result.energies = it.ritz_values;
    result.residual_norms = it.residual_norms;
    result.eigenvectors.assign(ritz.begin(), ritz.begin() + static_cast<std::ptrdiff_t>(m));

    std::size_t target = m;
    for (std::size_t r = 0; r < m; ++r)
      if (!(it.residual_norms[r] <= opts_.tol_residual)) {
        target = r;
        break;
      }
    if (m == roots && target == m) {
      result.converged = true;
      stats_.history.push_back(std::move(it));
      break;
    }
    if (target == m) target = 0;  // fewer Ritz pairs than roots: keep expanding

    std::vector<double> correction = precondition(resid[target], diag_, eig.values[target],
                                                  opts_.precond_delta);
    if (k >= static_cast<std::size_t>(opts_.max_subspace)) {
      restart(eig, iter);
      it.restarted = true;
    }
    stats_.history.push_back(std::move(it));
    if (iter == opts_.max_iters) break;

    if (!push_vector(correction)) {
      ++stats_.breakdowns;
      bool expanded = false;
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int attempt = 0; attempt < 4 && !expanded; ++attempt) {
        std::vector<double> rnd(n_);
        for (double& x : rnd) x = u(rng_);
        expanded = push_vector(rnd);
      }
      if (!expanded) break;  // the search space already spans the whole space
    }
  }

  for (auto& u : result.eigenvectors) {
    const double nrm = norm2(u);
    if (nrm > 0)
      for (double& x : u) x /= nrm;
  }
  result.stats = std::move(stats_);
  return result;
}

}  // namespace

DavidsonResult davidson_solve(const LinearOperator& apply, std::span<const double> diag,
                              std::span<const double> x0, const DavidsonOptions& opts) {
  opts.validate();
  const std::size_t n = diag.size();
  if (n == 0) throw ContractError("davidson: empty problem");
  if (n < static_cast<std::size_t>(opts.n_roots))
    throw ContractError("davidson: N = " + std::to_string(n) + " < n_roots = " +
                        std::to_string(opts.n_roots));
  DavidsonSolver solver(apply, diag, opts);
  return solver.run(x0);
}

}  // namespace sbd
