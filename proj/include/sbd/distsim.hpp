#pragma once

#include <atomic>
#include <barrier>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "sbd/apply.hpp"
#include "sbd/basis.hpp"
#include "sbd/exec.hpp"
#include "sbd/integrals.hpp"

namespace sbd {

/// Contiguous alpha-index blocks, one per worker, in ring order w -> w+1.
struct Partition {
  struct Block {
    std::uint32_t begin = 0, end = 0;
    std::uint32_t size() const noexcept { return end - begin; }
  };

  int workers = 0;
  std::vector<Block> blocks;

  int next(int w) const noexcept { return (w + 1) % workers; }
  int prev(int w) const noexcept { return (w + workers - 1) % workers; }
  /// Block held by worker w at ring step s.
  int block_at_step(int w, int s) const noexcept { return ((w - s) % workers + workers) % workers; }
};

/// Splits [0, n_alpha) into P blocks whose sizes differ by at most one.
/// Throws ContractError when P < 1 or P > n_alpha.
Partition make_partition(std::uint32_t n_alpha, int workers);

/// A rotating vector buffer. `state` flags who touches it during a step.
struct RingBuffer {
  enum State : int { Idle = 0, ComputeReading = 1, Receiving = 2 };
  std::vector<double> data;
  int block = -1;
  std::atomic<int> state{Idle};
};

/// One block in flight. Payload ownership travels with the message; the
/// receiver may read it until the next step barrier.
struct RingMessage {
  std::shared_ptr<const RingBuffer> payload;
  int block = -1;
  std::chrono::steady_clock::time_point sent_at;
  std::chrono::steady_clock::time_point available_at;
};

/// Bounded single-producer single-consumer channel (send-async, wait-receive).
class RingChannel {
 public:
  explicit RingChannel(std::size_t capacity = 1) : capacity_(capacity) {}

  void send(RingMessage msg);
  /// Blocks until a message is queued and its available_at has passed.
  RingMessage receive();

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<RingMessage> queue_;
};

struct DistOptions {
  bool overlap = true;
  std::chrono::duration<double> transfer_delay{0.0};  ///< injected per-message latency
  ExecPolicy policy = ExecPolicy::Parallel;
  int threads_per_worker = 1;
};

struct StepStats {
  int step = 0;
  int block = -1;              ///< ket block processed
  bool cache_rebuilt = false;
  bool transferred = false;    ///< false on the last step
  double compute_seconds = 0.0;
  double transfer_seconds = 0.0;  ///< send to receive completion
  double exposed_seconds = 0.0;   ///< transfer time not hidden behind compute
  double step_seconds = 0.0;      ///< compute + exposed, barrier excluded
};

struct WorkerRun {
  std::vector<StepStats> steps;
  std::vector<int> visit_sequence;
  std::size_t cache_rebuilds = 0;    ///< during this apply
  std::size_t buffer_conflicts = 0;  ///< compute/receive overlap on one buffer
};

struct DistRun {
  int workers = 0;
  bool overlap = true;
  double transfer_delay_seconds = 0.0;
  std::vector<WorkerRun> per_worker;
  double wall_seconds = 0.0;
};

struct StepOverlap {
  int worker = 0;
  int step = 0;
  double compute_seconds = 0.0;
  double transfer_seconds = 0.0;
  double exposed_seconds = 0.0;
  double overlap_ratio = 1.0;  ///< 1 - exposed / step total; 1 without transfer
};

struct OverlapReport {
  std::vector<StepOverlap> steps;
  double max_exposed_seconds = 0.0;
  double mean_overlap_ratio = 1.0;
};

OverlapReport overlap_stats(const DistRun& run);

/// Repeated ring applications over one product basis with persistent per-worker
/// caches and diagonals.
class DistributedHamiltonian {
 public:
  DistributedHamiltonian(const SelectedBasis& basis, const IntegralTable& table,
                         const SpinTables& tables, Partition partition, DistOptions opts);
  DistributedHamiltonian(SelectedBasis&&, const IntegralTable&, const SpinTables&, Partition,
                         DistOptions) = delete;
  ~DistributedHamiltonian();
  DistributedHamiltonian(const DistributedHamiltonian&) = delete;
  DistributedHamiltonian& operator=(const DistributedHamiltonian&) = delete;

  void apply(std::span<const double> x, std::span<double> y);
  std::vector<double> apply(std::span<const double> x);

  const Partition& partition() const noexcept { return partition_; }
  const DistOptions& options() const noexcept { return opts_; }
  void set_options(const DistOptions& opts) noexcept { opts_ = opts; }
  const DistRun& last_run() const noexcept { return last_run_; }
  /// Full diagonal gathered from the workers.
  std::vector<double> diagonal() const;
  const DetCache& worker_cache(int w) const;

 private:
  struct Worker;
  void run_worker(int w, std::span<const double> x, std::span<double> y, std::barrier<>& sync);

  const SelectedBasis* basis_;
  const IntegralTable* table_;
  const SpinTables* tables_;
  Partition partition_;
  DistOptions opts_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::unique_ptr<RingChannel>> inbox_;  ///< inbox_[w] feeds worker w
  DistRun last_run_;
};

/// One-shot ring application; `run`, when given, receives the timing record.
std::vector<double> distributed_apply_H(std::span<const double> x, const SelectedBasis& basis,
                                        const IntegralTable& table, const SpinTables& tables,
                                        const Partition& partition, const DistOptions& opts,
                                        DistRun* run = nullptr);

}  // namespace sbd
